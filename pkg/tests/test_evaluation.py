import itertools

import pytest

from argforge.aspects import AspectSpan
from argforge.clients import BaselineClient
from argforge.evaluation import (ReferenceSet, aspect_frequency, aspect_presence, build_reference_sets,
                                 correctness_from_labels, count_chunks, lcs_length, meteor_lite,
                                 presence_rate, quality_report, reference_grouped_eval, rouge_l,
                                 stance_correctness_report)
from argforge.traindoc import Argument, ControlCode


def brute_lcs(a, b):
    """Longest common subsequence by trying subsequences of the shorter side."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for k in range(len(short), 0, -1):
        for idx in itertools.combinations(range(len(short)), k):
            sub = [short[i] for i in idx]
            it = iter(long_)
            if all(any(x == y for y in it) for x in sub):
                return k
    return 0


def test_lcs_small_cases():
    assert lcs_length("abcbdab", "bdcaba") == 4
    for a, b in [("", "abc"), ("abc", "abc"), ("aab", "aba")]:
        assert lcs_length(a, b) == brute_lcs(a, b)


def test_rouge_l_values():
    p, r, f = rouge_l("a b c d".split(), "a c e".split())
    assert (p, r) == (0.5, 2 / 3)
    assert f == pytest.approx((1 + 1.44) * p * r / (r + 1.44 * p))
    assert rouge_l(["x"], ["y"]) == (0.0, 0.0, 0.0)


def test_meteor_pinned_values():
    assert meteor_lite("a b c".split(), "a b c".split()) == pytest.approx(0.98148, abs=1e-5)
    assert meteor_lite("costs rise".split(), "cost rises".split()) == pytest.approx(0.9375, abs=1e-9)
    assert meteor_lite(["x"], ["y"]) == 0.0


def test_meteor_fragmentation_penalty():
    contiguous = meteor_lite("a b c d".split(), "a b c d".split())
    scrambled = meteor_lite("d c b a".split(), "a b c d".split())
    assert scrambled < contiguous
    assert count_chunks({0: 3, 1: 2, 2: 1, 3: 0}) == 4


def test_aspect_presence_stems_and_synonyms():
    assert aspect_presence("Costs keep rising.", "cost")
    assert aspect_presence("The radioactivity lasts.", "radioactive")
    assert not aspect_presence("Prices keep rising.", "cost")
    assert aspect_presence("Prices keep rising.", "cost", ["prices"])
    assert not aspect_presence("human and dignity", "human dignity")


def test_presence_rate():
    gen = [("nuclear energy CON waste .", "the waste piles up"), ("nuclear energy CON cost .", "it is bad")]
    assert presence_rate(gen) == 0.5
    assert presence_rate([]) == 0.0
    assert presence_rate([(ControlCode("t", "PRO", "cost"), "prices")], {"cost": ["prices"]}) == 1.0


def test_reference_grouped_eval():
    tagger = BaselineClient()
    refs = build_reference_sets([
        {"topic": "nuclear energy", "stance": "CON", "text": "Nuclear waste stays radioactive."},
        {"topic": "nuclear energy", "stance": "CON", "text": "The costs are too high."},
        {"topic": "nuclear energy", "stance": "PRO", "text": "Waste can be stored safely."},
    ], tagger)
    assert [(r.topic, r.stance, len(r)) for r in refs] == [("nuclear energy", "CON", 3), ("nuclear energy", "PRO", 2)]
    gen = [Argument("Nuclear waste stays radioactive.", "nuclear energy", "CON", 1.0, (AspectSpan(1, 1, "waste"),)),
           Argument("Something else.", "nuclear energy", "CON", 1.0, (AspectSpan(0, 1, "safety"),))]
    rep = reference_grouped_eval(gen, refs)
    assert rep.n == 1 and rep["excluded"] == 1.0
    assert rep["rouge_l"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        reference_grouped_eval(gen, [ReferenceSet("x", "PRO", {})])


def test_correctness_from_labels():
    rep = correctness_from_labels(["pro", "pro", "con", "con"], ["pro", "none", "con", "pro"])
    assert rep["f1_pro"] == pytest.approx(0.5)
    assert rep["f1_con"] == pytest.approx(2 / 3)
    assert rep["none_pct"] == 25.0


def test_stance_correctness_with_baseline():
    b = BaselineClient()
    gen = [(ControlCode("nuclear energy", "CON", "waste"), "Nuclear energy is bad because of dangerous waste."),
           ("nuclear energy PRO cost .", "Nuclear energy is cheap and safe, a clear benefit."),
           ("nuclear energy PRO cost .", "The weather was nice.")]
    rep = stance_correctness_report(gen, b, b)
    assert rep.n == 3
    assert rep["none_pct"] == pytest.approx(100 / 3)


def test_quality_report_exemplars():
    b = BaselineClient()
    rep = quality_report([("t", "short"), ("t", "a much longer text with many content words inside")], b, k=1)
    top = rep.extras["exemplars"]["t"]["top"][0]
    assert top[1].startswith("a much longer")
    assert rep["min"] <= rep["mean"] <= rep["max"]


def test_aspect_frequency_labels_by_surface():
    def a(surfaces):
        return Argument("x", "nuclear energy", "CON", 1.0, tuple(AspectSpan(0, 1, s) for s in surfaces))
    args = [a(["costs"]), a(["cost"]), a(["costs"]), a(["waste"]), a(["risk"])]
    top = aspect_frequency(args, k=2)["nuclear energy"]
    assert top == [("costs", 3), ("risk", 1)]
