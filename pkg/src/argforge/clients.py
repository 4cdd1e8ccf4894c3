"""Model clients for argument, stance, aspect, quality and generation roles.

Two implementations share one surface: :class:`BaselineClient` runs offline
from the shipped lexicons, :class:`HttpClient` speaks the JSON wire protocol
to any model server.
"""

from __future__ import annotations

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

import requests

from .aspects import AspectSpan
from .text import content_tokens, lower_tokens, read_word_list, stem_tokens, tokenize
from .traindoc import parse_control_code

log = logging.getLogger(__name__)

ARGUMENT_KINDS = ("argument", "non_argument")
STANCE_KINDS = ("pro", "con")
STANCE_THRESHOLD = 0.5
DEFAULT_BATCH_SIZE = 32


class ClientError(RuntimeError):
    retryable = False


class TransportError(ClientError):
    retryable = True


class MalformedResponseError(ClientError):
    pass


class LengthMismatchError(MalformedResponseError):
    pass


class EmptyGenerationError(ClientError):
    pass


@dataclass(frozen=True)
class Label:
    kind: str
    score: float  # confidence in ``kind``

    def __post_init__(self):
        if self.kind not in ARGUMENT_KINDS + STANCE_KINDS:
            raise ValueError(f"unknown label kind {self.kind!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"label score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class QualityScore:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"quality {self.value} outside [0, 1]")


@dataclass(frozen=True)
class GenerationRequest:
    control_code: str
    max_tokens: int = 64
    seed: int = 0

    def __post_init__(self):
        if not self.control_code.strip():
            raise ValueError("control_code must be non-empty")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


def label_from_probability(p_positive: float, positive: str, negative: str) -> Label:
    if p_positive > STANCE_THRESHOLD:
        return Label(positive, p_positive)
    return Label(negative, 1.0 - p_positive)


# -- offline baseline --------------------------------------------------------

@lru_cache(maxsize=None)
def _lexicons():
    cues = frozenset(read_word_list("argument_cues.txt"))
    pos = frozenset(read_word_list("stance_positive.txt"))
    neg = frozenset(read_word_list("stance_negative.txt"))
    aspects = []
    for phrase in read_word_list("aspect_lexicon.txt"):
        aspects.append(tuple(stem_tokens(tokenize(phrase))))
    # longest phrases first so "right to life" beats "right"
    aspects.sort(key=lambda a: (-len(a), a))
    return cues, pos, neg, tuple(aspects)


@lru_cache(maxsize=None)
def _templates():
    raw = resources.files("argforge").joinpath("data", "generation_templates.json").read_text("utf-8")
    return json.loads(raw)


class BaselineClient:
    """Deterministic lexicon- and template-based stand-in for every model role.

    With ``use_aspect=False`` the generator ignores the aspect field of the
    control code (the ablation used to check that aspect presence discriminates).
    """

    def __init__(self, use_aspect: bool = True):
        self.use_aspect = use_aspect

    def classify_arguments(self, texts: Sequence[str], topic: str) -> list[Label]:
        _require_texts(texts)
        cues = _lexicons()[0]
        topic_toks = set(lower_tokens(topic))
        out = []
        for text in texts:
            toks = lower_tokens(text)
            hits = sum(1 for t in toks if t in cues)
            if hits and topic_toks.intersection(toks):
                out.append(label_from_probability(min(1.0, 0.6 + 0.1 * hits), "argument", "non_argument"))
            else:
                out.append(label_from_probability(0.2 if hits else 0.1, "argument", "non_argument"))
        return out

    def classify_stance(self, texts: Sequence[str], topic: str) -> list[Label]:
        _require_texts(texts)
        _, pos, neg, _ = _lexicons()
        out = []
        for text in texts:
            toks = lower_tokens(text)
            p = sum(1 for t in toks if t in pos)
            n = sum(1 for t in toks if t in neg)
            # ties land exactly on the threshold and resolve to con
            p_pro = 0.5 + 0.5 * (p - n) / (p + n + 1)
            out.append(label_from_probability(p_pro, "pro", "con"))
        return out

    def detect_aspect_spans(self, texts: Sequence[str], topic: str) -> list[list[AspectSpan]]:
        lexicon = _lexicons()[3]
        out = []
        for text in texts:
            toks = tokenize(text)
            stems = stem_tokens(toks)
            spans = []
            i = 0
            while i < len(toks):
                for phrase in lexicon:
                    n = len(phrase)
                    if tuple(stems[i:i + n]) == phrase:
                        spans.append(AspectSpan(i, n, " ".join(toks[i:i + n])))
                        i += n
                        break
                else:
                    i += 1
            out.append(spans)
        return out

    def score_quality(self, texts: Sequence[str], topic: str) -> list[QualityScore]:
        return [QualityScore(min(1.0, max(0.0, 0.3 + 0.05 * len(content_tokens(t))))) for t in texts]

    def generate_text(self, req: GenerationRequest) -> str:
        topic, stance, aspect, _ = parse_control_code(req.control_code)
        table = _templates()["aspect" if self.use_aspect else "ablated"][stance]
        text = table[req.seed % len(table)].format(topic=topic, aspect=aspect)
        toks = text.split()[: req.max_tokens]
        if not toks:
            raise EmptyGenerationError(f"empty generation for {req.control_code!r}")
        return " ".join(toks)


def _require_texts(texts):
    if not texts:
        raise ValueError("texts must be non-empty")


# -- HTTP --------------------------------------------------------------------

class HttpClient:
    """Client for a model server speaking the argforge JSON protocol.

    Requests are split into batches of ``batch_size`` texts, sent with at
    most ``max_in_flight`` concurrent requests, and reassembled in order.
    Transport failures are retried up to ``retries`` times; malformed
    responses are never retried.
    """

    def __init__(self, endpoint: str | None = None, timeout_ms: int | None = None,
                 batch_size: int = DEFAULT_BATCH_SIZE, max_in_flight: int = 4,
                 retries: int = 3, backoff: float = 0.2, token: str | None = None,
                 session: requests.Session | None = None):
        endpoint = endpoint or os.environ.get("ARGFORGE_ENDPOINT")
        if not endpoint:
            raise ValueError("no endpoint given and ARGFORGE_ENDPOINT is unset")
        if timeout_ms is None:
            timeout_ms = int(os.environ.get("ARGFORGE_TIMEOUT_MS", "30000"))
        if batch_size < 1 or max_in_flight < 1 or retries < 0:
            raise ValueError("batch_size and max_in_flight must be >= 1, retries >= 0")
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout_ms / 1000.0
        self.batch_size = batch_size
        self.max_in_flight = max_in_flight
        self.retries = retries
        self.backoff = backoff
        self.session = session or requests.Session()
        self.headers = {"Authorization": f"Bearer {token}"} if token else {}

    def _post(self, route: str, body: dict) -> dict:
        url = f"{self.endpoint}{route}"
        attempt = 0
        while True:
            try:
                resp = self.session.post(url, json=body, timeout=self.timeout, headers=self.headers)
                if resp.status_code >= 500 or resp.status_code == 429:
                    raise TransportError(f"{route}: HTTP {resp.status_code}")
                if resp.status_code >= 400:
                    raise MalformedResponseError(f"{route}: HTTP {resp.status_code}: {resp.text[:200]}")
                try:
                    data = resp.json()
                except ValueError as e:
                    raise MalformedResponseError(f"{route}: response is not JSON") from e
                if not isinstance(data, dict):
                    raise MalformedResponseError(f"{route}: response is not a JSON object")
                return data
            except requests.RequestException as e:
                err: ClientError = TransportError(f"{route}: {e}")
                err.__cause__ = e
            except TransportError as e:
                err = e
            if attempt >= self.retries:
                raise err
            attempt += 1
            log.warning("retrying %s (attempt %d/%d): %s", route, attempt, self.retries, err)
            time.sleep(self.backoff * attempt)

    def _batched(self, route: str, texts: Sequence[str], topic: str, parse):
        batches = [list(texts[i:i + self.batch_size]) for i in range(0, len(texts), self.batch_size)]

        def run(batch):
            data = self._post(route, {"topic": topic, "texts": batch})
            items = parse(data, batch)
            if len(items) != len(batch):
                raise LengthMismatchError(f"{route}: sent {len(batch)} texts, got {len(items)} results")
            return items

        if len(batches) == 1:
            return run(batches[0])
        with ThreadPoolExecutor(max_workers=min(self.max_in_flight, len(batches))) as pool:
            results = list(pool.map(run, batches))
        return [item for chunk in results for item in chunk]

    def _labels(self, route, texts, topic, positive, negative):
        _require_texts(texts)

        def parse(data, batch):
            labels = data.get("labels")
            if not isinstance(labels, list):
                raise MalformedResponseError(f"{route}: missing 'labels' list")
            out = []
            for item in labels:
                try:
                    name, score = item["label"], item["score"]
                except (TypeError, KeyError) as e:
                    raise MalformedResponseError(f"{route}: bad label entry {item!r}") from e
                if name not in (positive, negative):
                    raise MalformedResponseError(f"{route}: unknown label {name!r}")
                if not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
                    raise MalformedResponseError(f"{route}: score {score!r} outside [0, 1]")
                out.append(label_from_probability(float(score), positive, negative))
            return out

        return self._batched(route, texts, topic, parse)

    def classify_arguments(self, texts, topic):
        return self._labels("/classify_argument", texts, topic, "argument", "non_argument")

    def classify_stance(self, texts, topic):
        return self._labels("/classify_stance", texts, topic, "pro", "con")

    def detect_aspect_spans(self, texts, topic):
        if not texts:
            return []

        def parse(data, batch):
            spans = data.get("spans")
            if not isinstance(spans, list):
                raise MalformedResponseError("/detect_aspects: missing 'spans' list")
            if len(spans) != len(batch):
                raise LengthMismatchError(f"/detect_aspects: sent {len(batch)} texts, got {len(spans)} results")
            return [_parse_spans(raw, text) for raw, text in zip(spans, batch)]

        return self._batched("/detect_aspects", texts, topic, parse)

    def score_quality(self, texts, topic):
        if not texts:
            return []

        def parse(data, batch):
            scores = data.get("scores")
            if not isinstance(scores, list):
                raise MalformedResponseError("/score_quality: missing 'scores' list")
            out = []
            for s in scores:
                if not isinstance(s, (int, float)) or not 0.0 <= s <= 1.0:
                    raise MalformedResponseError(f"/score_quality: score {s!r} outside [0, 1]")
                out.append(QualityScore(float(s)))
            return out

        return self._batched("/score_quality", texts, topic, parse)

    def generate_text(self, req: GenerationRequest) -> str:
        data = self._post("/generate", {"control_code": req.control_code,
                                        "max_tokens": req.max_tokens, "seed": req.seed})
        text = data.get("text")
        if not isinstance(text, str):
            raise MalformedResponseError("/generate: missing 'text' string")
        if not text.strip():
            raise EmptyGenerationError(f"empty generation for {req.control_code!r}")
        return text

    def probe(self) -> None:
        """Send a one-text quality request; raises on any failure."""
        self.score_quality(["probe"], "probe")


def _parse_spans(raw, text: str) -> list[AspectSpan]:
    if not isinstance(raw, list):
        raise MalformedResponseError("/detect_aspects: span list expected per text")
    toks = tokenize(text)
    spans = []
    for item in raw:
        try:
            start, length = item["start"], item["len"]
        except (TypeError, KeyError) as e:
            raise MalformedResponseError(f"/detect_aspects: bad span {item!r}") from e
        if not isinstance(start, int) or not isinstance(length, int) \
                or start < 0 or not 1 <= length <= 4 or start + length > len(toks):
            raise MalformedResponseError(f"/detect_aspects: span {item!r} out of range for {len(toks)} tokens")
        spans.append(AspectSpan(start, length, " ".join(toks[start:start + length])))
    spans.sort(key=lambda s: (s.start, s.length))
    for a, b in zip(spans, spans[1:]):
        if b.start < a.end:
            raise MalformedResponseError(f"/detect_aspects: overlapping spans {a} and {b}")
    return spans


def make_client(endpoint: str | None = "baseline", **kwargs):
    """``"baseline"`` (or None with no ARGFORGE_ENDPOINT) gives the offline client."""
    if endpoint in (None, "") and not os.environ.get("ARGFORGE_ENDPOINT"):
        endpoint = "baseline"
    if endpoint == "baseline":
        return BaselineClient()
    return HttpClient(endpoint, **kwargs)
