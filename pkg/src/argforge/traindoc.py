"""Grouping classified arguments into size-bounded, control-coded training documents."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .aspects import AspectSpan
from .text import stem, tokenize

STANCES = ("PRO", "CON")
PUNCTS = (".", ":")


def normalize_stance(stance: str) -> str:
    s = str(stance).strip().upper()
    if s not in STANCES:
        raise ValueError(f"stance must be PRO or CON, got {stance!r}")
    return s


@dataclass(frozen=True)
class Argument:
    text: str
    topic: str
    stance: str
    confidence: float = 1.0
    aspects: tuple[AspectSpan, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "stance", normalize_stance(self.stance))
        object.__setattr__(self, "aspects", tuple(self.aspects))
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")

    def to_json(self) -> dict:
        return {
            "text": self.text, "topic": self.topic, "stance": self.stance,
            "confidence": self.confidence,
            "aspects": [{"start": a.start, "len": a.length, "surface": a.surface} for a in self.aspects],
        }

    @classmethod
    def from_json(cls, rec: dict) -> "Argument":
        aspects = tuple(AspectSpan(a["start"], a["len"], a.get("surface", "")) for a in rec.get("aspects", []))
        return cls(rec["text"], rec["topic"], rec["stance"], float(rec.get("confidence", 1.0)), aspects)


@dataclass(frozen=True)
class ControlCode:
    topic: str
    stance: str
    aspect: str
    punct: str = "."

    def __post_init__(self):
        object.__setattr__(self, "topic", " ".join(self.topic.lower().split()))
        object.__setattr__(self, "aspect", " ".join(self.aspect.lower().split()))
        object.__setattr__(self, "stance", normalize_stance(self.stance))
        if not self.topic or not self.aspect:
            raise ValueError("topic and aspect must be non-empty")
        if self.punct not in PUNCTS:
            raise ValueError(f"punct must be one of {PUNCTS}, got {self.punct!r}")

    def render(self) -> str:
        return render_control_code(self)

    @classmethod
    def parse(cls, code: str) -> "ControlCode":
        topic, stance, aspect, punct = parse_control_code(code)
        return cls(topic, stance, aspect, punct if punct in PUNCTS else ".")


def render_control_code(c: ControlCode) -> str:
    return f"{c.topic} {c.stance} {c.aspect} {c.punct}"


def parse_control_code(code: str) -> tuple[str, str, str, str]:
    """Split a rendered code into (topic, STANCE, aspect, punct)."""
    toks = code.split()
    for i, tok in enumerate(toks):
        if tok in ("PRO", "CON") and 0 < i < len(toks) - 1:
            rest = toks[i + 1:]
            punct = rest[-1] if len(rest) > 1 and rest[-1] in (".", ":", ";") else ""
            aspect = rest[:-1] if punct else rest
            return " ".join(toks[:i]), tok, " ".join(aspect), punct
    raise ValueError(f"not a control code: {code!r}")


def stem_key(aspect: str) -> str:
    """Lowercased, per-token Porter stems joined by single spaces."""
    toks = aspect.lower().split()
    if not toks:
        raise ValueError("aspect must be non-empty")
    return " ".join(stem(t) for t in toks)


GroupKey = tuple[str, str, str]


def group_arguments(args: Iterable[Argument]) -> dict[GroupKey, list[Argument]]:
    """Map (topic, stance, stem key) to members, highest confidence first.

    An argument joins one group per distinct aspect stem; equal confidences
    keep input order.
    """
    groups: dict[GroupKey, list[tuple[int, Argument]]] = defaultdict(list)
    for i, arg in enumerate(args):
        keys = dict.fromkeys((arg.topic, arg.stance, stem_key(a.surface)) for a in arg.aspects if a.surface.strip())
        for key in keys:
            groups[key].append((i, arg))
    return {
        key: [a for _, a in sorted(members, key=lambda m: (-m[1].confidence, m[0]))]
        for key, members in sorted(groups.items())
    }


@dataclass
class TrainingDocument:
    key: GroupKey
    arguments: list[Argument]
    aspect: str = ""
    stem_key: str = field(init=False)

    def __post_init__(self):
        self.stem_key = self.key[2]
        if not self.aspect:
            self.aspect = representative_aspect(self.arguments, self.stem_key)

    @property
    def topic(self) -> str:
        return self.key[0]

    @property
    def stance(self) -> str:
        return self.key[1]

    def control_code(self, punct: str = ".") -> ControlCode:
        return ControlCode(self.topic, self.stance, self.aspect, punct)


def representative_aspect(args: Sequence[Argument], key: str) -> str:
    """Most frequent lowercase surface stemming to ``key``; ties alphabetical."""
    counts = Counter(
        " ".join(a.surface.lower().split())
        for arg in args for a in arg.aspects
        if a.surface.strip() and stem_key(a.surface) == key
    )
    if not counts:
        return key
    return min(counts, key=lambda s: (-counts[s], s))


def apply_bounds(groups: dict[GroupKey, list[Argument]], min_size: int = 15, max_size: int = 1500,
                 cap: int = 100_000, cap_unique: bool = False) -> list[TrainingDocument]:
    """Drop small groups, truncate large ones, then admit per (topic, stance) under ``cap``.

    Admission goes by descending group size (ties by stem key); a group that
    would push the running total over the cap is skipped and the next one
    tried. The total counts memberships, or distinct argument texts with
    ``cap_unique``.
    """
    if not 1 <= min_size <= max_size <= cap:
        raise ValueError(f"bounds must satisfy 1 <= min <= max <= cap, got {min_size}, {max_size}, {cap}")
    by_ts: dict[tuple[str, str], list[TrainingDocument]] = defaultdict(list)
    for key, members in groups.items():
        if len(members) < min_size:
            continue
        by_ts[key[:2]].append(TrainingDocument(key, list(members[:max_size])))
    admitted = []
    for ts in sorted(by_ts):
        total = 0
        seen: set[str] = set()
        for doc in sorted(by_ts[ts], key=lambda d: (-len(d.arguments), d.stem_key)):
            if cap_unique:
                extra = {a.text for a in doc.arguments} - seen
                if len(seen) + len(extra) > cap:
                    continue
                seen |= extra
            else:
                if total + len(doc.arguments) > cap:
                    continue
                total += len(doc.arguments)
            admitted.append(doc)
    admitted.sort(key=lambda d: d.key)
    return admitted


def document_tokens(doc: TrainingDocument) -> list[str]:
    return tokenize(" ".join(a.text for a in doc.arguments))


def chunk_document(doc: TrainingDocument, seq_len: int = 256, punct: str = ".") -> list[tuple[str, list[str]]]:
    """Consecutive ``seq_len``-token windows, each paired with the rendered code."""
    if seq_len < 8:
        raise ValueError("seq_len must be >= 8")
    toks = document_tokens(doc)
    if not toks:
        raise ValueError(f"document {doc.key} is empty")
    code = render_control_code(doc.control_code(punct))
    return [(code, toks[i:i + seq_len]) for i in range(0, len(toks), seq_len)]


def write_documents(docs: Sequence[TrainingDocument], out_dir, seq_len: int = 256) -> dict:
    """Write ``training.jsonl`` and ``documents.jsonl``; return record counts."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_records = 0
    with open(out / "training.jsonl", "w", encoding="utf-8") as train, \
            open(out / "documents.jsonl", "w", encoding="utf-8") as manifest:
        for doc in docs:
            for code, window in chunk_document(doc, seq_len):
                train.write(json.dumps({"control_code": code, "text": " ".join(window)}, ensure_ascii=False) + "\n")
                n_records += 1
            manifest.write(json.dumps({"topic": doc.topic, "stance": doc.stance,
                                       "stem_key": doc.stem_key, "n_args": len(doc.arguments)},
                                      ensure_ascii=False) + "\n")
    return {"documents": len(docs), "training_records": n_records}


def read_arguments(path) -> list[Argument]:
    with open(path, encoding="utf-8") as fh:
        return [Argument.from_json(json.loads(line)) for line in fh if line.strip()]
