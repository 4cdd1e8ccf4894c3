"""Aspect candidates, the n-gram coverage heuristic, BIO tagging and metrics."""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .report import EvalReport
from .text import has_punct, tokenize_with_offsets
from .text import stopwords as default_stopwords

MAX_ASPECT_TOKENS = 4
BIO_CLASSES = ("B", "I", "O")


class BioError(ValueError):
    pass


class UndefinedMetricError(ValueError):
    pass


class DatasetError(ValueError):
    def __init__(self, failures: list[str]):
        shown = "; ".join(failures[:5])
        more = f" (+{len(failures) - 5} more)" if len(failures) > 5 else ""
        super().__init__(f"{len(failures)} invalid records: {shown}{more}")
        self.failures = failures


@dataclass(frozen=True)
class AspectSpan:
    start: int
    length: int
    surface: str = ""

    def __post_init__(self):
        if self.start < 0:
            raise ValueError(f"span start {self.start} < 0")
        if not 1 <= self.length <= MAX_ASPECT_TOKENS:
            raise ValueError(f"span length {self.length} not in 1..{MAX_ASPECT_TOKENS}")

    @property
    def end(self) -> int:
        return self.start + self.length

    def overlaps(self, other: "AspectSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class AspectCandidate:
    span: AspectSpan
    score: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"candidate score {self.score} outside [0, 1]")


def extract_candidates(tokens: Sequence[str]) -> list[AspectCandidate]:
    """Every contiguous 1- to 4-gram, ordered by (start, length)."""
    if not tokens:
        raise ValueError("tokens must be non-empty")
    n = len(tokens)
    return [
        AspectCandidate(AspectSpan(i, k, " ".join(tokens[i:i + k])))
        for i in range(n)
        for k in range(1, MAX_ASPECT_TOKENS + 1)
        if i + k <= n
    ]


def heuristic_score(candidate: AspectSpan, gold: Iterable[AspectSpan]) -> float:
    """Share of the candidate's tokens that lie inside some gold aspect."""
    covered = set()
    for g in gold:
        covered.update(range(g.start, g.end))
    inside = sum(1 for i in range(candidate.start, candidate.end) if i in covered)
    return inside / candidate.length


def score_candidates(cands: Iterable[AspectCandidate], gold: Sequence[AspectSpan]) -> list[AspectCandidate]:
    return [AspectCandidate(c.span, heuristic_score(c.span, gold)) for c in cands]


def filter_candidates(cands: Iterable[AspectCandidate], stopwords: Iterable[str] | None = None) -> list[AspectCandidate]:
    """Drop candidates with stopword boundaries, punctuation or digits."""
    stops = frozenset(stopwords) if stopwords is not None else default_stopwords()
    out = []
    for c in cands:
        toks = c.span.surface.split()
        if not toks:
            continue
        if toks[0].lower() in stops or toks[-1].lower() in stops:
            continue
        if any(has_punct(t) or any(ch.isdigit() for ch in t) for t in toks):
            continue
        out.append(c)
    return out


def rank(cands: Iterable[AspectCandidate]) -> list[AspectCandidate]:
    """Descending score, ties by (start, length)."""
    return sorted(cands, key=lambda c: (-c.score, c.span.start, c.span.length))


def top_t(ranked: Sequence[AspectCandidate], t: int = 2) -> list[AspectSpan]:
    """Take the best ``t`` spans, skipping any that overlap one already taken."""
    chosen: list[AspectSpan] = []
    if t <= 0:
        return chosen
    for c in rank(ranked):
        if any(c.span.overlaps(s) for s in chosen):
            continue
        chosen.append(c.span)
        if len(chosen) == t:
            break
    return chosen


# -- BIO ---------------------------------------------------------------------

def bio_encode(token_count: int, spans: Iterable[AspectSpan]) -> list[str]:
    tags = ["O"] * token_count
    for s in sorted(spans, key=lambda s: s.start):
        if s.end > token_count:
            raise BioError(f"span {s} exceeds {token_count} tokens")
        if any(tags[i] != "O" for i in range(s.start, s.end)):
            raise BioError(f"span {s} overlaps another span")
        tags[s.start] = "B"
        for i in range(s.start + 1, s.end):
            tags[i] = "I"
    return tags


def bio_decode(tags: Sequence[str], tokens: Sequence[str] | None = None) -> list[AspectSpan]:
    """Maximal ``B I*`` runs; an ``I`` that cannot continue a run starts one.

    Runs longer than the aspect limit are split into consecutive chunks.
    """
    if tokens is not None and len(tokens) != len(tags):
        raise BioError(f"{len(tags)} tags for {len(tokens)} tokens")
    runs: list[list[int]] = []
    for i, tag in enumerate(tags):
        if tag == "B" or (tag == "I" and (i == 0 or tags[i - 1] == "O")):
            runs.append([i, 1])
        elif tag == "I":
            runs[-1][1] += 1
        elif tag != "O":
            raise BioError(f"unknown tag {tag!r}")
    spans = []
    for start, length in runs:
        while length > 0:
            k = min(length, MAX_ASPECT_TOKENS)
            surface = " ".join(tokens[start:start + k]) if tokens is not None else ""
            spans.append(AspectSpan(start, k, surface))
            start += k
            length -= k
    return spans


# -- metrics -----------------------------------------------------------------

def _surface(item) -> str:
    if isinstance(item, AspectCandidate):
        item = item.span
    if isinstance(item, AspectSpan):
        item = item.surface
    return " ".join(str(item).lower().split())


def recall_at_k(samples: Iterable[tuple[Sequence, Sequence]], k: int, mode: str = "fraction") -> float:
    """Mean recall of gold aspects among the first ``k`` ranked candidates.

    ``mode="fraction"`` scores each sample by matched/gold; ``"all"`` counts a
    sample as 1 only when every gold aspect is matched; ``"any"`` when at
    least one is. Samples without gold aspects are skipped.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if mode not in ("fraction", "all", "any"):
        raise ValueError(f"unknown mode {mode!r}")
    per_sample = []
    for ranked, gold in samples:
        gold = [_surface(g) for g in gold]
        if not gold:
            continue
        top = {_surface(c) for c in list(ranked)[:k]}
        hit = sum(1 for g in gold if g in top)
        if mode == "fraction":
            per_sample.append(hit / len(gold))
        elif mode == "all":
            per_sample.append(float(hit == len(gold)))
        else:
            per_sample.append(float(hit > 0))
    if not per_sample:
        raise UndefinedMetricError("no sample has gold aspects")
    return sum(per_sample) / len(per_sample)


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def token_f1_macro(pred: Sequence[Sequence[str]], gold: Sequence[Sequence[str]]) -> EvalReport:
    """Flattened token-level macro P/R/F1 over the B, I and O classes."""
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predicted sequences for {len(gold)} gold sequences")
    flat_p, flat_g = [], []
    for i, (p, g) in enumerate(zip(pred, gold)):
        if len(p) != len(g):
            raise ValueError(f"sequence {i}: {len(p)} predicted tags for {len(g)} gold tags")
        flat_p.extend(p)
        flat_g.extend(g)
    per_class = {}
    for cls in BIO_CLASSES:
        tp = sum(1 for a, b in zip(flat_p, flat_g) if a == cls and b == cls)
        fp = sum(1 for a, b in zip(flat_p, flat_g) if a == cls and b != cls)
        fn = sum(1 for a, b in zip(flat_p, flat_g) if a != cls and b == cls)
        per_class[cls] = dict(zip(("precision", "recall", "f1"), prf(tp, fp, fn)))
    metrics = {
        f"{name}_macro": sum(per_class[c][name] for c in BIO_CLASSES) / len(BIO_CLASSES)
        for name in ("precision", "recall", "f1")
    }
    return EvalReport(metrics, per_class, len(flat_g))


# -- dataset -----------------------------------------------------------------

_POS_RE = re.compile(r"^\(\s*(\d+)\s*,\s*(\d+)\s*\)$")

STANCE_ALIASES = {
    "pro": "PRO", "argument_for": "PRO", "supporting": "PRO", "for": "PRO",
    "con": "CON", "argument_against": "CON", "attacking": "CON", "against": "CON",
}


@dataclass
class AspectRecord:
    hash: str
    topic: str
    stance: str
    sentence: str
    tokens: list[str]
    spans: list[AspectSpan]
    aspects: list[str]


@dataclass
class AspectDataset:
    records: list[AspectRecord] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)
    unaligned: int = 0  # aspects whose token span is empty or longer than 4 tokens


def _parse_pos(raw) -> tuple[int, int]:
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return int(raw[0]), int(raw[1])
    m = _POS_RE.match(str(raw).strip())
    if not m:
        raise ValueError(f"bad aspect_pos entry {raw!r}")
    return int(m.group(1)), int(m.group(2))


def _as_list(raw) -> list:
    # some exports store the list itself as a string literal
    if isinstance(raw, str):
        raw = raw.strip()
        if raw.startswith("["):
            try:
                return list(ast.literal_eval(raw))
            except (ValueError, SyntaxError) as e:
                raise ValueError(f"bad list literal {raw[:40]!r}") from e
        return [raw] if raw else []
    return list(raw or [])


def char_span_to_tokens(offsets: Sequence[tuple[str, int, int]], begin: int, length: int) -> tuple[int, int]:
    """Token (start, count) of the tokens overlapping ``[begin, begin+length)``."""
    end = begin + length
    idx = [i for i, (_, s, e) in enumerate(offsets) if s < end and e > begin]
    if not idx:
        return 0, 0
    return idx[0], idx[-1] - idx[0] + 1


def load_aspect_dataset(path, strict: bool = True) -> AspectDataset:
    """Load the line-delimited aspect dataset and verify every character span.

    Each ``(begin,length)`` in ``aspect_pos`` must slice ``sentence`` to exactly
    the corresponding ``aspect_pos_string`` entry. With ``strict`` any failure
    raises :class:`DatasetError` listing all of them.
    """
    ds = AspectDataset()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                sentence = rec["sentence"]
                positions = [_parse_pos(p) for p in _as_list(rec.get("aspect_pos"))]
                strings = [str(x) for x in _as_list(rec.get("aspect_pos_string"))]
            except (ValueError, KeyError, TypeError) as e:
                ds.failures.append(f"line {lineno}: {e}")
                continue
            if len(positions) != len(strings):
                ds.failures.append(f"line {lineno}: {len(positions)} positions for {len(strings)} strings")
                continue
            bad = [
                (b, n, s) for (b, n), s in zip(positions, strings)
                if sentence[b:b + n] != s
            ]
            if bad:
                b, n, s = bad[0]
                ds.failures.append(f"line {lineno}: sentence[{b}:{b + n}]={sentence[b:b + n]!r} != {s!r}")
                continue
            offsets = tokenize_with_offsets(sentence)
            spans = []
            for (b, n), s in zip(positions, strings):
                start, count = char_span_to_tokens(offsets, b, n)
                if not 1 <= count <= MAX_ASPECT_TOKENS:
                    ds.unaligned += 1
                    continue
                span = AspectSpan(start, count, " ".join(t for t, _, _ in offsets[start:start + count]))
                if any(span.overlaps(o) for o in spans):
                    ds.unaligned += 1
                    continue
                spans.append(span)
            spans.sort(key=lambda s: s.start)
            stance = STANCE_ALIASES.get(str(rec.get("stance", "")).strip().lower(), str(rec.get("stance", "")))
            ds.records.append(AspectRecord(
                hash=str(rec.get("hash", lineno)), topic=str(rec.get("topic", "")).strip().lower(),
                stance=stance, sentence=sentence, tokens=[t for t, _, _ in offsets],
                spans=spans, aspects=strings,
            ))
    if strict and ds.failures:
        raise DatasetError(ds.failures)
    return ds
