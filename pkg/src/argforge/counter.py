"""Counter-argument generation: same aspects, opposite stance."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .clients import GenerationRequest
from .evaluation import aspect_presence
from .traindoc import ControlCode, normalize_stance

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CounterRequest:
    topic: str
    input_text: str
    input_stance: str | None = None
    max_aspects: int = 5

    def __post_init__(self):
        if not self.topic.strip() or not self.input_text.strip():
            raise ValueError("topic and input_text must be non-empty")
        if self.input_stance is not None:
            object.__setattr__(self, "input_stance", normalize_stance(self.input_stance))
        if self.max_aspects < 1:
            raise ValueError("max_aspects must be >= 1")


@dataclass(frozen=True)
class CounterResult:
    code: ControlCode
    text: str
    aspect_present: bool


@dataclass
class CounterBatch:
    results: list[CounterResult] = field(default_factory=list)
    errors: list[tuple[ControlCode, Exception]] = field(default_factory=list)


def flip_stance(stance: str) -> str:
    return "CON" if normalize_stance(stance) == "PRO" else "PRO"


def build_counter_codes(req: CounterRequest, tagger, stance_client=None) -> list[ControlCode]:
    """One flipped-stance control code per detected aspect, in text order.

    Without ``input_stance`` the stance is taken from ``stance_client``.
    Returns an empty list (and logs a warning) when no aspect is found;
    client failures propagate as exceptions.
    """
    stance = req.input_stance
    if stance is None:
        if stance_client is None:
            raise ValueError("input_stance missing and no stance client given")
        stance = stance_client.classify_stance([req.input_text], req.topic)[0].kind.upper()
    spans = sorted(tagger.detect_aspect_spans([req.input_text], req.topic)[0], key=lambda s: s.start)
    if not spans:
        log.warning("no aspects detected in %r", req.input_text)
        return []
    opposite = flip_stance(stance)
    return [ControlCode(req.topic, opposite, s.surface, ".") for s in spans[: req.max_aspects]]


def generate_counters(codes: Sequence[ControlCode], generator, seed: int = 0, max_tokens: int = 64,
                      synonyms: Mapping[str, Sequence[str]] | None = None, workers: int = 1) -> CounterBatch:
    """Generate one text per code; failures are collected per code instead of aborting."""
    if not codes:
        raise ValueError("codes must be non-empty")
    synonyms = synonyms or {}

    def run(code: ControlCode):
        try:
            return generator.generate_text(GenerationRequest(code.render(), max_tokens, seed))
        except Exception as e:  # reported per code
            return e

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(run, codes))
    else:
        outputs = [run(c) for c in codes]
    batch = CounterBatch()
    for code, out in zip(codes, outputs):
        if isinstance(out, Exception):
            log.warning("generation failed for %r: %s", code.render(), out)
            batch.errors.append((code, out))
        else:
            present = aspect_presence(out, code.aspect, synonyms.get(code.aspect, ()))
            batch.results.append(CounterResult(code, out, present))
    return batch
