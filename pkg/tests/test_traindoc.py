import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argforge.aspects import AspectSpan
from argforge.traindoc import (Argument, ControlCode, TrainingDocument, apply_bounds, chunk_document,
                               group_arguments, parse_control_code, read_arguments, render_control_code,
                               stem_key, write_documents)


def arg(text, aspects, stance="CON", conf=0.9, topic="nuclear energy"):
    return Argument(text, topic, stance, conf, tuple(AspectSpan(0, len(a.split()), a) for a in aspects))


@pytest.mark.parametrize("code", [
    "nuclear energy CON leak .",
    "marijuana legalization PRO safer :",
    "cloning CON unrespectable .",
])
def test_control_code_round_trip(code):
    c = ControlCode.parse(code)
    assert render_control_code(c) == code
    assert c.render() == code


def test_control_code_canonical_case():
    c = ControlCode("Nuclear  Energy", "con", "Leak")
    assert c.render() == "nuclear energy CON leak ."
    with pytest.raises(ValueError):
        ControlCode("x", "maybe", "y")
    with pytest.raises(ValueError):
        ControlCode("x", "PRO", "y", "!")


def test_parse_control_code_variants():
    assert parse_control_code("school uniforms PRO right to choose ;") == ("school uniforms", "PRO", "right to choose", ";")
    with pytest.raises(ValueError):
        parse_control_code("no stance here")


def test_stem_key():
    assert stem_key("Costs") == stem_key("cost") == "cost"
    assert stem_key("radioactive  waste") == "radioact wast"


def test_group_arguments_orders_by_confidence():
    args = [arg("a", ["cost"], conf=0.5), arg("b", ["costs"], conf=0.9), arg("c", ["cost"], conf=0.5),
            arg("d", ["waste", "cost"], conf=0.7)]
    groups = group_arguments(args)
    assert [a.text for a in groups[("nuclear energy", "CON", "cost")]] == ["b", "d", "a", "c"]
    assert [a.text for a in groups[("nuclear energy", "CON", "wast")]] == ["d"]


def test_representative_aspect():
    args = [arg("a", ["costs"]), arg("b", ["cost"]), arg("c", ["costs"])]
    doc = TrainingDocument(("nuclear energy", "CON", "cost"), args)
    assert doc.aspect == "costs"
    assert doc.control_code().render() == "nuclear energy CON costs ."


def simulate_admission(sizes, lo, hi, cap):
    """Independent oracle: the admitted sizes for one (topic, stance)."""
    kept = sorted((min(s, hi) for s in sizes if s >= lo), reverse=True)
    total, admitted = 0, []
    for s in kept:
        if total + s <= cap:
            total += s
            admitted.append(s)
    return sorted(admitted)


def groups_of(sizes):
    groups = {}
    for g, n in enumerate(sizes):
        key = ("t", "CON", f"k{g:02d}")
        groups[key] = [arg(f"g{g} a{i}", [f"k{g:02d}"], topic="t") for i in range(n)]
    return groups


def test_bounds_hand_example():
    docs = apply_bounds(groups_of([60, 50, 40, 20, 10]), 15, 100, 100)
    assert sorted(len(d.arguments) for d in docs) == [40, 60]


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=1, max_size=8), st.integers(1, 20),
       st.integers(0, 40), st.integers(0, 100))
def test_bounds_match_oracle(sizes, lo, extra_hi, extra_cap):
    hi = lo + extra_hi
    cap = hi + extra_cap
    docs = apply_bounds(groups_of(sizes), lo, hi, cap)
    assert sorted(len(d.arguments) for d in docs) == simulate_admission(sizes, lo, hi, cap)
    assert all(lo <= len(d.arguments) <= hi for d in docs)
    assert sum(len(d.arguments) for d in docs) <= cap


def test_cap_unique_counts_texts():
    shared = [arg(f"s{i}", ["cost", "waste"]) for i in range(20)]
    groups = group_arguments(shared)
    assert len(apply_bounds(groups, 15, 20, 30)) == 1
    assert len(apply_bounds(groups, 15, 20, 30, cap_unique=True)) == 2


def test_bounds_validation():
    with pytest.raises(ValueError):
        apply_bounds({}, 20, 10, 100)


def test_chunk_and_write(tmp_path):
    args = [arg(f"Nuclear waste number {i} is bad .", ["waste"]) for i in range(5)]
    doc = TrainingDocument(("nuclear energy", "CON", "wast"), args)
    chunks = chunk_document(doc, seq_len=8)
    assert all(code == "nuclear energy CON waste ." for code, _ in chunks)
    assert sum(len(w) for _, w in chunks) == 5 * 7
    assert all(len(w) <= 8 for _, w in chunks)
    with pytest.raises(ValueError):
        chunk_document(doc, seq_len=4)
    counts = write_documents([doc], tmp_path, seq_len=8)
    assert counts == {"documents": 1, "training_records": len(chunks)}
    first = json.loads((tmp_path / "training.jsonl").read_text().splitlines()[0])
    assert first["control_code"] == "nuclear energy CON waste ."


def test_argument_json_round_trip(tmp_path):
    a = arg("Costs rise.", ["Costs"])
    p = tmp_path / "a.jsonl"
    p.write_text(json.dumps(a.to_json()) + "\n")
    assert read_arguments(p) == [a]
