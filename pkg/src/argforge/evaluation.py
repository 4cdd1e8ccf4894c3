"""Text-overlap metrics, aspect presence and correctness/quality reports."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .aspects import prf
from .report import EvalReport
from .text import contains_run, lower_tokens, stem, stem_tokens, tokenize
from .traindoc import Argument, ControlCode, normalize_stance, representative_aspect, stem_key


def lcs_length(a: Sequence, b: Sequence) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str], beta: float = 1.2) -> tuple[float, float, float]:
    """LCS-based (precision, recall, F) with recall weighted by ``beta``."""
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0, 0.0, 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    f = (1 + beta ** 2) * p * r / (r + beta ** 2 * p)
    return p, r, f


def _align(cand: Sequence[str], ref: Sequence[str], pairs: dict[int, int], key) -> None:
    """Greedy one-to-one alignment of still-unmatched tokens on ``key``.

    Each candidate token prefers the reference slot right after the previous
    alignment so contiguous runs stay in one chunk.
    """
    used = set(pairs.values())
    last = -2
    for i, tok in enumerate(cand):
        if i in pairs:
            last = pairs[i]
            continue
        k = key(tok)
        options = [j for j, r in enumerate(ref) if j not in used and key(r) == k]
        if not options:
            continue
        if last + 1 in options:
            j = last + 1
        else:
            after = [j for j in options if j > last]
            j = after[0] if after else options[0]
        pairs[i] = j
        used.add(j)
        last = j


def count_chunks(pairs: Mapping[int, int]) -> int:
    chunks = 0
    prev = None
    for i in sorted(pairs):
        j = pairs[i]
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor_lite(candidate: Sequence[str], reference: Sequence[str], alpha: float = 0.9,
                gamma: float = 0.5, beta: float = 3.0) -> float:
    """Unigram METEOR with exact then stem matching and a fragmentation penalty."""
    cand = [t.lower() for t in candidate]
    ref = [t.lower() for t in reference]
    pairs: dict[int, int] = {}
    _align(cand, ref, pairs, key=lambda t: t)
    _align(cand, ref, pairs, key=stem)
    m = len(pairs)
    if m == 0:
        return 0.0
    p = m / len(cand)
    r = m / len(ref)
    f_mean = p * r / (alpha * p + (1 - alpha) * r)
    penalty = gamma * (count_chunks(pairs) / m) ** beta
    return f_mean * (1 - penalty)


# -- reference-grouped comparison --------------------------------------------

@dataclass
class ReferenceSet:
    topic: str
    stance: str
    by_stem: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        self.topic = " ".join(self.topic.lower().split())
        self.stance = normalize_stance(self.stance)
        for stem_, texts in self.by_stem.items():
            if any(not t.strip() for t in texts):
                raise ValueError(f"empty reference text under {stem_!r}")

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_stem.values())


def build_reference_sets(records: Iterable[Mapping], tagger) -> list[ReferenceSet]:
    """Group ``{"topic", "stance", "text"}`` records by detected aspect stem."""
    grouped: dict[tuple[str, str], list[str]] = defaultdict(list)
    for rec in records:
        text = rec["text"]
        if not text.strip():
            raise ValueError("empty reference text")
        grouped[(" ".join(rec["topic"].lower().split()), normalize_stance(rec["stance"]))].append(text)
    sets = []
    for (topic, stance), texts in sorted(grouped.items()):
        spans = tagger.detect_aspect_spans(texts, topic)
        by_stem: dict[str, list[str]] = defaultdict(list)
        for text, found in zip(texts, spans):
            for key in dict.fromkeys(stem_key(s.surface) for s in found):
                by_stem[key].append(text)
        sets.append(ReferenceSet(topic, stance, dict(by_stem)))
    return sets


def reference_grouped_eval(generated: Sequence[Argument], refs, beta: float = 1.2) -> EvalReport:
    """Score each argument against references of its topic/stance sharing an aspect stem.

    Per argument the best METEOR and ROUGE-L F over its pool are kept;
    arguments with an empty pool are counted in ``excluded``.
    """
    if isinstance(refs, ReferenceSet):
        refs = [refs]
    if not refs or all(len(r) == 0 for r in refs):
        raise ValueError("reference set is empty")
    index: dict[tuple[str, str], ReferenceSet] = {}
    for r in refs:
        index[(r.topic, r.stance)] = r
    meteor_scores, rouge_scores = [], []
    excluded = 0
    for arg in generated:
        rs = index.get((" ".join(arg.topic.lower().split()), arg.stance))
        pool: list[str] = []
        if rs is not None:
            for key in dict.fromkeys(stem_key(a.surface) for a in arg.aspects if a.surface.strip()):
                pool.extend(rs.by_stem.get(key, []))
        pool = list(dict.fromkeys(pool))
        if not pool:
            excluded += 1
            continue
        cand = lower_tokens(arg.text)
        meteor_scores.append(max(meteor_lite(cand, lower_tokens(ref)) for ref in pool))
        rouge_scores.append(max(rouge_l(cand, lower_tokens(ref), beta)[2] for ref in pool))
    n = len(meteor_scores)
    metrics = {
        "meteor": sum(meteor_scores) / n if n else 0.0,
        "rouge_l": sum(rouge_scores) / n if n else 0.0,
        "excluded": float(excluded),
    }
    return EvalReport(metrics, None, n)


# -- aspect presence ---------------------------------------------------------

def aspect_presence(text: str, aspect: str, synonyms: Sequence[str] = ()) -> bool:
    """Does the stemmed aspect (or a stemmed synonym) occur contiguously in the text?"""
    if not aspect.strip():
        raise ValueError("aspect must be non-empty")
    haystack = stem_tokens(tokenize(text))
    return any(
        contains_run(haystack, stem_tokens(tokenize(phrase)))
        for phrase in (aspect, *synonyms) if phrase.strip()
    )


def _as_code(code) -> ControlCode:
    return code if isinstance(code, ControlCode) else ControlCode.parse(str(code))


def presence_rate(generated: Iterable[tuple], synonyms: Mapping[str, Sequence[str]] | None = None) -> float:
    """Share of (control code, text) pairs whose text mentions the code's aspect.

    ``synonyms`` maps a lowercase aspect to alternative phrasings. An empty
    input gives 0.0.
    """
    synonyms = synonyms or {}
    total = hits = 0
    for code, text in generated:
        code = _as_code(code)
        total += 1
        hits += aspect_presence(text, code.aspect, synonyms.get(code.aspect, ()))
    return hits / total if total else 0.0


# -- classifier-based reports ------------------------------------------------

def stance_correctness_report(generated: Sequence[tuple], argument_client, stance_client) -> EvalReport:
    """F1 for pro/con against the control-code stance, plus the share judged non-argument."""
    items = [(_as_code(c), t) for c, t in generated]
    preds: list[str | None] = [None] * len(items)
    by_topic: dict[str, list[int]] = defaultdict(list)
    for i, (code, _) in enumerate(items):
        by_topic[code.topic].append(i)
    for topic, idx in sorted(by_topic.items()):
        texts = [items[i][1] for i in idx]
        labels = argument_client.classify_arguments(texts, topic)
        args = [i for i, lab in zip(idx, labels) if lab.kind == "argument"]
        for i, lab in zip(idx, labels):
            if lab.kind != "argument":
                preds[i] = "none"
        if args:
            stances = stance_client.classify_stance([items[i][1] for i in args], topic)
            for i, lab in zip(args, stances):
                preds[i] = lab.kind
    gold = [code.stance.lower() for code, _ in items]
    return correctness_from_labels(gold, preds)


def correctness_from_labels(gold: Sequence[str], pred: Sequence[str]) -> EvalReport:
    per_class = {}
    for cls in ("pro", "con"):
        tp = sum(1 for g, p in zip(gold, pred) if g == cls and p == cls)
        fp = sum(1 for g, p in zip(gold, pred) if g != cls and p == cls)
        fn = sum(1 for g, p in zip(gold, pred) if g == cls and p != cls)
        per_class[cls] = dict(zip(("precision", "recall", "f1"), prf(tp, fp, fn)))
    n = len(gold)
    none = sum(1 for p in pred if p == "none")
    metrics = {
        "f1_pro": per_class["pro"]["f1"],
        "f1_con": per_class["con"]["f1"],
        "none_pct": 100.0 * none / n if n else 0.0,
    }
    return EvalReport(metrics, per_class, n)


def quality_report(items: Sequence[tuple], quality_client, k: int = 1) -> EvalReport:
    """Mean/min/max quality and the best and worst ``k`` texts per topic.

    ``items`` are (topic or ControlCode, text) pairs.
    """
    by_topic: dict[str, list[str]] = defaultdict(list)
    for topic, text in items:
        topic = topic.topic if isinstance(topic, ControlCode) else str(topic)
        by_topic[topic].append(text)
    all_scores = []
    exemplars = {}
    for topic, texts in sorted(by_topic.items()):
        scores = [q.value for q in quality_client.score_quality(texts, topic)]
        all_scores.extend(scores)
        ranked = sorted(zip(scores, texts), key=lambda st: (-st[0], st[1]))
        exemplars[topic] = {
            "top": [[s, t] for s, t in ranked[:k]],
            "bottom": [[s, t] for s, t in ranked[::-1][:k]],
        }
    if not all_scores:
        return EvalReport({}, None, 0, {"exemplars": {}})
    metrics = {
        "mean": sum(all_scores) / len(all_scores),
        "min": min(all_scores),
        "max": max(all_scores),
    }
    return EvalReport(metrics, None, len(all_scores), {"exemplars": exemplars})


def aspect_frequency(args: Iterable[Argument], k: int = 5) -> dict[str, list[tuple[str, int]]]:
    """Top-``k`` aspects per topic, counted by stem.

    Each entry is labelled with its most frequent surface form; equal counts
    are ordered alphabetically by label.
    """
    per_topic: dict[str, list[Argument]] = defaultdict(list)
    for arg in args:
        per_topic[arg.topic].append(arg)
    out = {}
    for topic, members in sorted(per_topic.items()):
        counts = Counter(stem_key(a.surface) for arg in members for a in arg.aspects if a.surface.strip())
        labelled = [(representative_aspect(members, key), n) for key, n in counts.items()]
        labelled.sort(key=lambda ln: (-ln[1], ln[0]))
        out[topic] = labelled[:k]
    return out
