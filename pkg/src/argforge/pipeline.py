"""Configuration and end-to-end orchestration: corpus to training documents."""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .clients import BaselineClient, HttpClient
from .ingest import (QuerySyntaxError, dedup, iter_shards, parse_query, retrieve,
                     split_sentences, topic_filter)
from .text import stopwords_sha256
from .traindoc import Argument, apply_bounds, group_arguments, write_documents

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("invalid config:\n  " + "\n  ".join(errors))
        self.errors = errors


class StageError(RuntimeError):
    def __init__(self, stage: str, manifest: dict, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.manifest = manifest


@dataclass(frozen=True)
class TopicConfig:
    name: str
    query: str
    synonyms: tuple[str, ...] = ()
    queries: Mapping[str, str] = field(default_factory=dict)

    def query_asts(self) -> dict:
        """Per-source query trees; the ``None`` key is the fallback."""
        asts = {None: parse_query(self.query)}
        for source, q in self.queries.items():
            asts[source] = parse_query(q)
        return asts


@dataclass(frozen=True)
class ClientConfig:
    endpoint: str = "baseline"
    timeout_ms: int = 30000
    batch_size: int = 32
    max_in_flight: int = 4
    retries: int = 3

    def build(self):
        if self.endpoint == "baseline":
            return BaselineClient()
        return HttpClient(self.endpoint, timeout_ms=self.timeout_ms, batch_size=self.batch_size,
                          max_in_flight=self.max_in_flight, retries=self.retries)


@dataclass(frozen=True)
class PipelineConfig:
    topics: tuple[TopicConfig, ...]
    min_size: int = 15
    max_size: int = 1500
    cap: int = 100_000
    cap_unique: bool = False
    seq_len: int = 256
    retrieval_limit: int = 1_500_000
    top_t: int = 2
    recall_k: tuple[int, ...] = (5, 10, 15, 20)
    clients: ClientConfig = ClientConfig()
    seed: int = 1
    corpus: tuple[str, ...] = ()
    out: str = "argforge-out"

    def canonical(self) -> dict:
        """Path-free view used for the manifest hash."""
        return {
            "topics": [{"name": t.name, "query": t.query, "queries": dict(sorted(t.queries.items())),
                        "synonyms": list(t.synonyms)} for t in self.topics],
            "bounds": {"min": self.min_size, "max": self.max_size, "cap": self.cap},
            "cap_unique": self.cap_unique, "seq_len": self.seq_len,
            "retrieval_limit": self.retrieval_limit, "top_t": self.top_t,
            "recall_k": list(self.recall_k), "clients": self.clients.endpoint, "seed": self.seed,
        }


def fixture_config_path() -> Path:
    """Config for the bundled two-topic fixture corpus."""
    return Path(str(resources.files("argforge").joinpath("data", "fixture_config.json")))


def default_config() -> dict:
    raw = resources.files("argforge").joinpath("data", "default_config.json").read_text("utf-8")
    return json.loads(raw)


def _merge(base: dict, override: Mapping) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _int(raw: Mapping, key: str, errors: list[str], where: str = "", minimum: int | None = None):
    value = raw.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        errors.append(f"{where}{key}: expected integer, got {value!r}")
        return None
    if minimum is not None and value < minimum:
        errors.append(f"{where}{key}: must be >= {minimum}, got {value}")
        return None
    return value


def validate_config(raw, probe: bool = False) -> PipelineConfig:
    """Build a :class:`PipelineConfig` from a dict or a JSON file path.

    Unset keys fall back to the shipped defaults (topics excepted when a
    ``topics`` key is given). All problems are collected into one
    :class:`ConfigError`. Corpus paths in a file are resolved against the
    file's directory.
    """
    base_dir = None
    if not isinstance(raw, Mapping):
        path = Path(raw)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError([f"cannot read {path}: {e}"]) from e
        base_dir = path.parent
        if not isinstance(raw, Mapping):
            raise ConfigError([f"{path}: top level must be an object"])
    cfg = _merge(default_config(), raw)
    errors: list[str] = []

    topics = []
    raw_topics = cfg.get("topics")
    if not isinstance(raw_topics, list) or not raw_topics:
        errors.append("topics: must be a non-empty list")
        raw_topics = []
    known = {" ".join(t["name"].lower().split()): t for t in default_config()["topics"]}
    names = set()
    for i, t in enumerate(raw_topics):
        if not isinstance(t, Mapping) or not isinstance(t.get("name"), str) or not t["name"].strip():
            errors.append(f"topics[{i}]: needs a non-empty 'name'")
            continue
        name = " ".join(t["name"].lower().split())
        # a bare known topic picks up the shipped query and synonyms
        t = {**known.get(name, {}), **t}
        if name in names:
            errors.append(f"topic {name!r}: duplicate")
        names.add(name)
        query = t.get("query", name)
        queries = t.get("queries") or {}
        synonyms = t.get("synonyms") or []
        if not isinstance(queries, Mapping):
            errors.append(f"topic {name!r}: 'queries' must map source to query")
            queries = {}
        if not isinstance(synonyms, list) or not all(isinstance(s, str) and s.strip() for s in synonyms):
            errors.append(f"topic {name!r}: 'synonyms' must be a list of non-empty strings")
            synonyms = []
        for label, q in [("query", query), *((f"queries.{k}", v) for k, v in queries.items())]:
            if not isinstance(q, str):
                errors.append(f"topic {name!r}: {label} must be a string")
                continue
            try:
                parse_query(q)
            except QuerySyntaxError as e:
                errors.append(f"topic {name!r}: {label}: {e}")
        topics.append(TopicConfig(name, query if isinstance(query, str) else name,
                                  tuple(synonyms), dict(queries)))

    bounds = cfg.get("bounds") or {}
    lo = _int(bounds, "min", errors, "bounds.", 1)
    hi = _int(bounds, "max", errors, "bounds.", 1)
    cap = _int(bounds, "cap", errors, "bounds.", 1)
    if None not in (lo, hi, cap) and not lo <= hi <= cap:
        errors.append(f"bounds: need 1 <= min <= max <= cap, got min={lo} max={hi} cap={cap}")
    seq_len = _int(cfg, "seq_len", errors, "", 8)
    limit = _int(cfg, "retrieval_limit", errors, "", 1)
    top = _int(cfg, "top_t", errors, "", 0)
    seed = _int(cfg, "seed", errors)
    recall_k = cfg.get("recall_k", [])
    if not isinstance(recall_k, list) or not all(isinstance(k, int) and k >= 1 for k in recall_k):
        errors.append(f"recall_k: expected list of positive integers, got {recall_k!r}")
        recall_k = []

    c = cfg.get("clients") or {}
    endpoint = c.get("endpoint", "baseline")
    if not isinstance(endpoint, str) or not (endpoint == "baseline" or re.match(r"^https?://", endpoint)):
        errors.append(f"clients.endpoint: expected 'baseline' or an http(s) URL, got {endpoint!r}")
    client_ints = {k: _int(c, k, errors, "clients.", 0 if k == "retries" else 1)
                   for k in ("timeout_ms", "batch_size", "max_in_flight", "retries")}

    paths = cfg.get("paths") or {}
    corpus = paths.get("corpus", [])
    if isinstance(corpus, str):
        corpus = [corpus]
    if not isinstance(corpus, list) or not all(isinstance(p, str) for p in corpus):
        errors.append("paths.corpus: expected a list of paths")
        corpus = []
    if base_dir is not None:
        corpus = [str(base_dir / p) if not os.path.isabs(p) else p for p in corpus]
    out = paths.get("out", "argforge-out")

    if errors:
        raise ConfigError(errors)
    config = PipelineConfig(
        topics=tuple(topics), min_size=lo, max_size=hi, cap=cap,
        cap_unique=bool(cfg.get("cap_unique", False)), seq_len=seq_len, retrieval_limit=limit,
        top_t=top, recall_k=tuple(recall_k),
        clients=ClientConfig(endpoint, **client_ints), seed=seed,
        corpus=tuple(corpus), out=str(out),
    )
    if probe and endpoint != "baseline":
        try:
            config.clients.build().probe()
        except Exception as e:
            raise ConfigError([f"clients.endpoint: probe failed: {e}"]) from e
    return config


# -- running -----------------------------------------------------------------

def _slug(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", name.lower()).strip("_")


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _write_jsonl(path: Path, records) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


@contextmanager
def _lock(out: Path):
    out.mkdir(parents=True, exist_ok=True)
    lock = out / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise RuntimeError(f"{out} is locked by another pipeline run (remove {lock} if stale)") from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _batches(items, size):
    for i in range(0, len(items), size):
        yield items[i:i + size]


def run_pipeline(config: PipelineConfig, out_dir=None, client=None) -> dict:
    """Run ingest, classification, aspect detection and document building.

    Every stage writes its output under ``out_dir``; the returned manifest
    (also written to ``manifest.json``) holds per-stage counts and content
    hashes and contains no paths or timestamps, so identical inputs give a
    byte-identical manifest.
    """
    out = Path(out_dir or config.out)
    client = client or config.clients.build()
    batch = config.clients.batch_size
    manifest: dict[str, Any] = {
        "config_sha256": hashlib.sha256(json.dumps(config.canonical(), sort_keys=True).encode()).hexdigest(),
        "stopwords_sha256": stopwords_sha256(),
        "stages": {},
        "topics": {},
    }
    stage = "ingest"
    with _lock(out):
        try:
            manifest["corpus_sha256"] = sorted(_sha256_file(Path(p)) for p in config.corpus)
            all_args: list[Argument] = []
            totals = dict.fromkeys(("retrieved", "split", "deduped", "filtered", "arguments",
                                    "non_arguments", "pro", "con", "with_aspects"), 0)
            for topic in config.topics:
                slug = _slug(topic.name)
                stage = "ingest"
                docs = retrieve(iter_shards(config.corpus, topic.name), topic.query_asts(), config.retrieval_limit)
                _write_jsonl(out / "ingest" / f"{slug}.jsonl",
                             ({"id": d.id, "text": d.text, "source": d.source} for d in docs))
                split = [s for d in docs for s in split_sentences(d)]
                unique = dedup(split)
                kept = topic_filter(unique, topic.name, topic.synonyms)
                _write_jsonl(out / "sentences" / f"{slug}.jsonl",
                             ({"text": s.text, "doc_id": s.doc_id, "topic": s.topic} for s in kept))

                stage = "classify"
                texts = [s.text for s in kept]
                arg_texts = []
                for chunk in _batches(texts, batch):
                    labels = client.classify_arguments(chunk, topic.name)
                    arg_texts.extend(t for t, lab in zip(chunk, labels) if lab.kind == "argument")
                stances = []
                for chunk in _batches(arg_texts, batch):
                    stances.extend(client.classify_stance(chunk, topic.name))

                stage = "aspects"
                spans = []
                for chunk in _batches(arg_texts, batch):
                    spans.extend(client.detect_aspect_spans(chunk, topic.name))
                args = [Argument(t, topic.name, lab.kind.upper(), lab.score, tuple(sp))
                        for t, lab, sp in zip(arg_texts, stances, spans)]
                _write_jsonl(out / "arguments" / f"{slug}.jsonl", (a.to_json() for a in args))
                all_args.extend(args)

                counts = {
                    "retrieved": len(docs), "split": len(split), "deduped": len(unique),
                    "filtered": len(kept), "arguments": len(args),
                    "non_arguments": len(kept) - len(args),
                    "pro": sum(a.stance == "PRO" for a in args),
                    "con": sum(a.stance == "CON" for a in args),
                    "with_aspects": sum(bool(a.aspects) for a in args),
                }
                manifest["topics"][topic.name] = counts
                for k, v in counts.items():
                    totals[k] += v
            manifest["stages"].update(totals)

            stage = "build-docs"
            groups = group_arguments(all_args)
            docs = apply_bounds(groups, config.min_size, config.max_size, config.cap, config.cap_unique)
            written = write_documents(docs, out / "docs", config.seq_len)
            manifest["stages"]["groups"] = len(groups)
            manifest["stages"]["memberships"] = sum(len(d.arguments) for d in docs)
            manifest["stages"].update(written)
            manifest["documents"] = [
                {"topic": d.topic, "stance": d.stance, "stem_key": d.stem_key,
                 "aspect": d.aspect, "n_args": len(d.arguments)} for d in docs
            ]
            files = sorted(p for p in out.rglob("*.jsonl"))
            manifest["files"] = {p.relative_to(out).as_posix(): _sha256_file(p) for p in files}
        except Exception as e:
            _write_manifest(out, manifest)
            raise StageError(stage, manifest, e) from e
        _write_manifest(out, manifest)
    return manifest


def _write_manifest(out: Path, manifest: dict) -> None:
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
