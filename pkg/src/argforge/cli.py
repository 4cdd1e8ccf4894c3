"""Command-line entry point: ``argforge <subcommand>``.

Exit codes: 0 success, 2 validation failure, 3 stage failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .clients import BaselineClient, HttpClient
from .counter import CounterRequest, build_counter_codes, generate_counters
from .evaluation import (build_reference_sets, presence_rate, quality_report,
                         reference_grouped_eval, stance_correctness_report)
from .ingest import QuerySyntaxError, dedup, iter_shards, parse_query, retrieve, split_sentences, topic_filter
from .pipeline import ConfigError, StageError, default_config, run_pipeline, validate_config
from .traindoc import (Argument, ControlCode, apply_bounds, group_arguments, read_arguments,
                       write_documents)

EXIT_OK, EXIT_INVALID, EXIT_STAGE = 0, 2, 3


class ValidationError(ValueError):
    pass


def _client(args):
    if args.endpoint in (None, "baseline"):
        return BaselineClient()
    return HttpClient(args.endpoint, timeout_ms=args.timeout_ms, batch_size=args.batch_size)


def _read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _write_jsonl(path, records):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def _known_synonyms(topic: str) -> list[str]:
    for t in default_config()["topics"]:
        if t["name"] == topic.lower():
            return t["synonyms"]
    return []


def cmd_ingest(args):
    raw = args.query
    if raw.startswith("@"):
        raw = Path(raw[1:]).read_text(encoding="utf-8").strip()
    try:
        q = parse_query(raw)
    except QuerySyntaxError as e:
        raise ValidationError(str(e)) from e
    if args.limit < 1:
        raise ValidationError("--limit must be >= 1")
    docs = retrieve(iter_shards(args.corpus, args.topic), q, args.limit)
    synonyms = args.synonym if args.synonym is not None else _known_synonyms(args.topic)
    sentences = topic_filter(dedup(s for d in docs for s in split_sentences(d)), args.topic, synonyms)
    _write_jsonl(args.out, ({"text": s.text, "doc_id": s.doc_id, "topic": s.topic} for s in sentences))
    print(f"{len(docs)} documents, {len(sentences)} sentences -> {args.out}")


def cmd_classify(args):
    client = _client(args)
    by_topic: dict[str, list[str]] = {}
    for rec in _read_jsonl(args.inp):
        by_topic.setdefault(args.topic or rec["topic"], []).append(rec["text"])
    out = []
    for topic, texts in by_topic.items():
        labels = client.classify_arguments(texts, topic)
        kept = [t for t, lab in zip(texts, labels) if lab.kind == "argument"]
        if kept:
            for t, lab in zip(kept, client.classify_stance(kept, topic)):
                out.append(Argument(t, topic, lab.kind.upper(), lab.score).to_json())
    _write_jsonl(args.out, out)
    print(f"{len(out)} arguments -> {args.out}")


def cmd_aspects(args):
    client = _client(args)
    args_in = read_arguments(args.inp)
    out = []
    by_topic: dict[str, list[Argument]] = {}
    for a in args_in:
        by_topic.setdefault(a.topic, []).append(a)
    for topic, members in by_topic.items():
        spans = client.detect_aspect_spans([a.text for a in members], topic)
        for a, sp in zip(members, spans):
            out.append(Argument(a.text, a.topic, a.stance, a.confidence, tuple(sp)))
    _write_jsonl(args.out, (a.to_json() for a in out))
    print(f"{sum(bool(a.aspects) for a in out)} of {len(out)} arguments with aspects -> {args.out}")


def cmd_build_docs(args):
    if not 1 <= args.min <= args.max <= args.cap:
        raise ValidationError(f"need 1 <= --min <= --max <= --cap, got {args.min}, {args.max}, {args.cap}")
    if args.seq_len < 8:
        raise ValidationError("--seq-len must be >= 8")
    docs = apply_bounds(group_arguments(read_arguments(args.inp)), args.min, args.max, args.cap, args.cap_unique)
    counts = write_documents(docs, args.out, args.seq_len)
    print(f"{counts['documents']} documents, {counts['training_records']} training records -> {args.out}")


def cmd_eval(args):
    client = _client(args)
    generated = []
    for rec in _read_jsonl(args.generated):
        generated.append((ControlCode.parse(rec["control_code"]), rec["text"]))
    synonyms = json.loads(Path(args.synonyms).read_text(encoding="utf-8")) if args.synonyms else {}
    report = {"n": len(generated), "presence_rate": presence_rate(generated, synonyms)}
    if generated:
        report["correctness"] = stance_correctness_report(generated, client, client).to_dict()
        report["quality"] = quality_report(generated, client, k=args.k).to_dict()
    if args.refs:
        refs = build_reference_sets(_read_jsonl(args.refs), client)
        gen_args = []
        for code, text in generated:
            spans = client.detect_aspect_spans([text], code.topic)[0]
            gen_args.append(Argument(text, code.topic, code.stance, 1.0, tuple(spans)))
        report["reference"] = reference_grouped_eval(gen_args, refs).to_dict()
    Path(args.report).parent.mkdir(parents=True, exist_ok=True)
    Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{'metric':<24}value")
    print(f"{'presence_rate':<24}{report['presence_rate']:.4f}")
    for section in ("correctness", "quality", "reference"):
        for k, v in (report.get(section) or {}).get("metrics", {}).items():
            print(f"{section + '.' + k:<24}{v:.4f}")


def cmd_counter(args):
    client = _client(args)
    req = CounterRequest(args.topic, args.text, args.stance, args.max_aspects)
    codes = build_counter_codes(req, client, stance_client=client)
    if not codes:
        print(json.dumps({"warning": "no aspects detected"}))
        return
    batch = generate_counters(codes, client, seed=args.seed)
    for r in batch.results:
        print(json.dumps({"control_code": r.code.render(), "text": r.text, "aspect_present": r.aspect_present}))
    for code, err in batch.errors:
        print(json.dumps({"control_code": code.render(), "error": str(err)}))


def cmd_run(args):
    raw = json.loads(Path(args.config).read_text(encoding="utf-8")) if args.config else {}
    overrides = {}
    bounds = {k: v for k, v in (("min", args.min), ("max", args.max), ("cap", args.cap)) if v is not None}
    if bounds:
        overrides["bounds"] = bounds
    for key, value in (("seq_len", args.seq_len), ("seed", args.seed)):
        if value is not None:
            overrides[key] = value
    if args.endpoint:
        overrides["clients"] = {"endpoint": args.endpoint}
    if args.corpus:
        overrides.setdefault("paths", {})["corpus"] = [str(Path(p).resolve()) for p in args.corpus]
    if args.config:
        base = Path(args.config).resolve().parent
        corpus = raw.get("paths", {}).get("corpus", [])
        if isinstance(corpus, list) and "corpus" not in overrides.get("paths", {}):
            raw.setdefault("paths", {})["corpus"] = [str(base / p) for p in corpus]
    raw.update({k: v for k, v in overrides.items() if k not in ("bounds", "clients", "paths")})
    for k in ("bounds", "clients", "paths"):
        if k in overrides:
            raw[k] = {**raw.get(k, {}), **overrides[k]}
    config = validate_config(raw, probe=args.probe)
    manifest = run_pipeline(config, args.out or config.out)
    print(json.dumps(manifest["stages"], sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="argforge", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def client_flags(sp):
        sp.add_argument("--endpoint", default=None, help="model server URL, or 'baseline' (default)")
        sp.add_argument("--timeout-ms", type=int, default=None)
        sp.add_argument("--batch-size", type=int, default=32)

    sp = sub.add_parser("ingest", help="retrieve, split, dedup and topic-filter sentences")
    sp.add_argument("--corpus", nargs="+", required=True)
    sp.add_argument("--topic", required=True)
    sp.add_argument("--query", required=True, help="query string, or @file")
    sp.add_argument("--limit", type=int, default=1_500_000)
    sp.add_argument("--synonym", action="append", default=None)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("classify", help="argument and stance classification")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--topic", default=None)
    sp.add_argument("--out", required=True)
    client_flags(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("aspects", help="aspect detection on classified arguments")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", required=True)
    client_flags(sp)
    sp.set_defaults(func=cmd_aspects)

    sp = sub.add_parser("build-docs", help="group, bound and chunk training documents")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--min", type=int, default=15)
    sp.add_argument("--max", type=int, default=1500)
    sp.add_argument("--cap", type=int, default=100_000)
    sp.add_argument("--cap-unique", action="store_true")
    sp.add_argument("--seq-len", type=int, default=256)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_build_docs)

    sp = sub.add_parser("eval", help="presence, correctness, quality and reference metrics")
    sp.add_argument("--generated", required=True)
    sp.add_argument("--refs", default=None)
    sp.add_argument("--synonyms", default=None)
    sp.add_argument("--report", required=True)
    sp.add_argument("--k", type=int, default=1)
    client_flags(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("counter", help="counter-arguments for an input argument")
    sp.add_argument("--topic", required=True)
    sp.add_argument("--stance", choices=["pro", "con", "PRO", "CON"], default=None)
    sp.add_argument("--text", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-aspects", type=int, default=5)
    client_flags(sp)
    sp.set_defaults(func=cmd_counter)

    sp = sub.add_parser("run", help="full pipeline from a config file")
    sp.add_argument("--config", default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--corpus", nargs="+", default=None)
    sp.add_argument("--min", type=int, default=None)
    sp.add_argument("--max", type=int, default=None)
    sp.add_argument("--cap", type=int, default=None)
    sp.add_argument("--seq-len", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--endpoint", default=None)
    sp.add_argument("--probe", action="store_true")
    sp.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
