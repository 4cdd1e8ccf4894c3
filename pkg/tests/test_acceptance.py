"""Acceptance criteria 1-12, one test each.

Each test records a PASS/FAIL line; ``conftest.py`` prints them at the end
of the run. Running this file directly prints the same lines without pytest:

    python3 tests/test_acceptance.py
"""

import itertools
import json
import os
import random
import shutil
import sys
import time
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from argforge.aspects import (AspectSpan, bio_decode, bio_encode, heuristic_score,
                              load_aspect_dataset, recall_at_k, token_f1_macro)
from argforge.clients import BaselineClient, GenerationRequest
from argforge.counter import CounterRequest, build_counter_codes, generate_counters
from argforge.evaluation import aspect_frequency, presence_rate, rouge_l
from argforge.pipeline import default_config, fixture_config_path, run_pipeline, validate_config
from argforge.traindoc import Argument, ControlCode, render_control_code, stem_key

RESULTS: list[str] = []

DATASET_ENV = "ARGFORGE_ASPECT_DATASET"
DATASET_DEFAULT = Path(__file__).resolve().parents[1] / "data" / "aspect_dataset.jsonl"


@contextmanager
def criterion(number, title):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as e:
        msg = str(e).splitlines()[0] if str(e) else type(e).__name__
        RESULTS.append(f"criterion {number:>2} FAIL  {title}: {msg[:160]}")
        raise
    RESULTS.append(f"criterion {number:>2} PASS  {title} ({time.perf_counter() - t0:.2f}s)")


# -- oracles -----------------------------------------------------------------

def lcs_oracle(a, b):
    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))
    return go(0, 0)


def covered_count(cand, gold):
    return sum(1 for i in range(cand.start, cand.start + cand.length)
               if any(g.start <= i < g.start + g.length for g in gold))


def bio_oracle_f1(pred, gold):
    f1s = []
    for cls in "BIO":
        tp = sum(p == cls and g == cls for p, g in zip(pred, gold))
        pp = sum(p == cls for p in pred)
        gg = sum(g == cls for g in gold)
        prec = Fraction(tp, pp) if pp else Fraction(0)
        rec = Fraction(tp, gg) if gg else Fraction(0)
        f1s.append(2 * prec * rec / (prec + rec) if prec + rec else Fraction(0))
    return sum(f1s) / 3


def random_spans(rng, n):
    spans, i = [], 0
    while i < n:
        if rng.random() < 0.35:
            k = rng.randint(1, min(4, n - i))
            spans.append(AspectSpan(i, k, ""))
            i += k + rng.randint(0, 3)
        else:
            i += 1
    return spans


def fixture_raw():
    raw = json.loads(fixture_config_path().read_text())
    base = fixture_config_path().parent
    raw["paths"]["corpus"] = [str(base / p) for p in raw["paths"]["corpus"]]
    return raw


# -- criteria ----------------------------------------------------------------

def test_c01_rouge_l_oracle():
    with criterion(1, "ROUGE-L equals brute-force LCS oracle on 1000 pairs"):
        rng = random.Random(1)
        vocab = "abcde"
        t0 = time.perf_counter()
        mismatches = 0
        for _ in range(1000):
            a = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]
            b = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]
            lcs = lcs_oracle(tuple(a), tuple(b))
            if lcs == 0:
                expected = 0.0
            else:
                p, r = lcs / len(a), lcs / len(b)
                expected = (1 + 1.2 ** 2) * p * r / (r + 1.2 ** 2 * p)
            mismatches += rouge_l(a, b)[2] != expected
        elapsed = time.perf_counter() - t0
        assert mismatches == 0, f"{mismatches} mismatches"
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_c02_heuristic_score_exact():
    with criterion(2, "heuristic_score equals m/N on 500 random triples"):
        rng = random.Random(2)
        for _ in range(500):
            n = rng.randint(1, 30)
            gold = random_spans(rng, n)
            start = rng.randrange(n)
            cand = AspectSpan(start, rng.randint(1, min(4, n - start)), "")
            assert heuristic_score(cand, gold) == float(Fraction(covered_count(cand, gold), cand.length))


def test_c03_bio_round_trip():
    with criterion(3, "bio_decode(bio_encode(s)) == s on 1000 random span sets"):
        rng = random.Random(3)
        for _ in range(1000):
            n = rng.randint(1, 30)
            spans = random_spans(rng, n)
            assert bio_decode(bio_encode(n, spans)) == spans


def test_c04_token_f1_oracle():
    with criterion(4, "token_f1_macro matches confusion-matrix oracle; hand example 0.2745"):
        for gold in itertools.product("BIO", repeat=4):
            for pred in itertools.product("BIO", repeat=4):
                got = token_f1_macro([list(pred)], [list(gold)])["f1_macro"]
                assert abs(got - float(bio_oracle_f1(pred, gold))) < 1e-12
        rng = random.Random(4)
        for _ in range(200):
            seqs = [rng.randint(5, 30) for _ in range(rng.randint(1, 4))]
            gold = [bio_encode(n, random_spans(rng, n)) for n in seqs]
            pred = [[rng.choice("BIO") for _ in range(n)] for n in seqs]
            got = token_f1_macro(pred, gold)["f1_macro"]
            flat_p = [t for s in pred for t in s]
            flat_g = [t for s in gold for t in s]
            assert abs(got - float(bio_oracle_f1(flat_p, flat_g))) < 1e-12
        hand_gold = ["B", "I", "O", "O", "O", "B", "O", "O", "O", "O"]
        hand = token_f1_macro([["O"] * 10], [hand_gold])["f1_macro"]
        assert abs(hand - 0.2745) <= 1e-4, hand


def test_c05_recall_at_k_properties():
    with criterion(5, "recall@k monotone in k; full-length recall equals containment oracle"):
        rng = random.Random(5)
        vocab = [f"w{i}" for i in range(15)]
        samples = []
        for _ in range(200):
            ranked = rng.sample(vocab, rng.randint(1, 12))
            gold = rng.sample(vocab, rng.randint(1, 4))
            samples.append((ranked, gold))
        for ranked, gold in samples:
            prev = -1.0
            for k in range(1, len(ranked) + 1):
                r = recall_at_k([(ranked, gold)], k)
                assert r >= prev
                prev = r
            oracle = sum(g in ranked for g in gold) / len(gold)
            assert recall_at_k([(ranked, gold)], len(ranked)) == oracle
        prev = -1.0
        for k in range(1, 13):
            r = recall_at_k(samples, k)
            assert r >= prev
            prev = r


def test_c06_control_codes():
    with criterion(6, "control codes render byte-exactly"):
        cases = [
            (("nuclear energy", "CON", "leak", "."), "nuclear energy CON leak ."),
            (("marijuana legalization", "PRO", "safer", ":"), "marijuana legalization PRO safer :"),
            (("cloning", "CON", "unrespectable", "."), "cloning CON unrespectable ."),
        ]
        for args, expected in cases:
            assert render_control_code(ControlCode(*args)).encode() == expected.encode()


def test_c07_bounds(tmp_path):
    with criterion(7, "fixture documents within bounds; cap 100 admits {60, 40}"):
        m = run_pipeline(validate_config(fixture_raw()), tmp_path / "default")
        assert m["documents"]
        for d in m["documents"]:
            assert 15 <= d["n_args"] <= 1500
        totals = {}
        for d in m["documents"]:
            totals[(d["topic"], d["stance"])] = totals.get((d["topic"], d["stance"]), 0) + d["n_args"]
        assert all(v <= 100_000 for v in totals.values())

        raw = fixture_raw()
        raw["topics"] = [{"name": "nuclear energy"}]
        raw["bounds"] = {"min": 15, "max": 100, "cap": 100}
        m = run_pipeline(validate_config(raw), tmp_path / "cap100")
        sizes = sorted(d["n_args"] for d in m["documents"] if d["stance"] == "CON")
        assert sizes == [40, 60], sizes


def _dataset_path():
    return Path(os.environ.get(DATASET_ENV, DATASET_DEFAULT))


def test_c08_published_dataset():
    with criterion(8, "published aspect dataset: 0 offset failures, top-5 overlap >= 4"):
        path = _dataset_path()
        if not path.exists():
            raise FileNotFoundError(f"dataset not found at {path}; set {DATASET_ENV}")
        t0 = time.perf_counter()
        ds = load_aspect_dataset(path, strict=False)
        assert ds.failures == [], f"{len(ds.failures)} offset failures, first: {ds.failures[0]}"
        args = [Argument(r.sentence, r.topic, r.stance, 1.0, tuple(r.spans))
                for r in ds.records if r.topic == "nuclear energy" and r.stance in ("PRO", "CON")]
        top = aspect_frequency(args, k=5).get("nuclear energy", [])
        expected = {stem_key(a) for a in ("cost", "accident", "waste", "risk", "dangerous")}
        overlap = len({stem_key(label) for label, _ in top} & expected)
        assert overlap >= 4, f"top-5 {top} overlaps in {overlap}"
        assert time.perf_counter() - t0 < 30


def test_c09_query_tables():
    with criterion(9, "shipped query and synonym tables validate with zero errors"):
        raw = default_config()
        cfg = validate_config(raw)
        assert len(cfg.topics) == len(raw["topics"]) == 8
        for t in cfg.topics:
            t.query_asts()
            assert t.synonyms


def test_c10_determinism(tmp_path):
    with criterion(10, "byte-identical manifest across runs and shard permutation"):
        t0 = time.perf_counter()
        raw = fixture_raw()
        run_pipeline(validate_config(raw), tmp_path / "r1")
        run_pipeline(validate_config(raw), tmp_path / "r2")
        # copy shards under names that reverse their listing and sort order
        shard_dir = tmp_path / "shards"
        shard_dir.mkdir()
        originals = sorted(raw["paths"]["corpus"])
        for p in originals:
            shutil.copy(p, shard_dir / Path(p).name)
        raw["paths"]["corpus"] = [str(shard_dir / Path(p).name) for p in reversed(originals)]
        run_pipeline(validate_config(raw), tmp_path / "r3")
        m1, m2, m3 = ((tmp_path / r / "manifest.json").read_bytes() for r in ("r1", "r2", "r3"))
        assert m1 == m2, "two runs differ"
        assert m1 == m3, "shard permutation changes the manifest"
        assert time.perf_counter() - t0 < 60


NUCLEAR = "Nuclear energy produces waste that stays radioactive for thousands of years and pollutes the environment."
UNIFORMS = "School uniforms are expensive and affect the pupil's individuality."


def test_c11_counter_contract():
    with criterion(11, "counter codes for both scenarios; presence rate 1.0"):
        b = BaselineClient()
        cases = [
            (CounterRequest("nuclear energy", NUCLEAR, "CON"),
             ["nuclear energy PRO waste .", "nuclear energy PRO radioactive .", "nuclear energy PRO environment ."]),
            (CounterRequest("school uniforms", UNIFORMS, "CON"),
             ["school uniforms PRO expensive .", "school uniforms PRO individuality ."]),
        ]
        for req, expected in cases:
            codes = build_counter_codes(req, b)
            assert [c.render() for c in codes] == expected
            batch = generate_counters(codes, b)
            assert not batch.errors
            assert all(r.aspect_present for r in batch.results)
            assert presence_rate([(r.code, r.text) for r in batch.results]) == 1.0


def test_c12_presence_contrast(tmp_path):
    with criterion(12, "presence 1.0 with aspects, < 0.2 when the aspect is ignored"):
        m = run_pipeline(validate_config(fixture_raw()), tmp_path / "run")
        codes = [ControlCode(d["topic"], s, d["aspect"]) for d in m["documents"] for s in ("PRO", "CON")]
        assert codes

        def rate(gen):
            pairs = [(c, gen.generate_text(GenerationRequest(c.render(), 64, seed)))
                     for c in codes for seed in range(4)]
            return presence_rate(pairs)

        with_aspect = rate(BaselineClient())
        ablated = rate(BaselineClient(use_aspect=False))
        assert with_aspect == 1.0, with_aspect
        assert ablated < 0.2, ablated


if __name__ == "__main__":
    import tempfile

    tests = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith("test_c")]
    failed = 0
    for name, fn in tests:
        try:
            if "tmp_path" in fn.__code__.co_varnames[:fn.__code__.co_argcount]:
                with tempfile.TemporaryDirectory() as d:
                    fn(Path(d))
            else:
                fn()
        except BaseException:
            failed += 1
    print("\n".join(RESULTS))
    sys.exit(1 if failed else 0)
