"""Boolean query retrieval over streamed corpora, sentence splitting and filtering."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Iterator, Sequence, Union

from .text import contains_run, lower_tokens

SOURCES = ("cc", "reddit", "other")

DEFAULT_ABBREVIATIONS = (
    "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "St.", "Jr.", "Sr.",
    "U.S.", "U.K.", "e.g.", "i.e.", "No.", "vs.", "cf.",
)


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class CorpusError(ValueError):
    def __init__(self, message: str, ordinal: int, path: str | None = None):
        where = f"{path}: " if path else ""
        super().__init__(f"{where}document #{ordinal}: {message}")
        self.ordinal = ordinal
        self.path = path


@dataclass(frozen=True)
class Document:
    id: str
    topic: str
    text: str
    source: str = "other"

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"document {self.id!r} has empty text")
        if self.source not in SOURCES:
            object.__setattr__(self, "source", "other")


@dataclass(frozen=True)
class Sentence:
    text: str
    doc_id: str
    topic: str

    @property
    def normalized(self) -> str:
        return normalize(self.text)


def normalize(text: str) -> str:
    return " ".join(text.lower().split())


# -- query AST ---------------------------------------------------------------

@dataclass(frozen=True)
class Phrase:
    tokens: tuple[str, ...]

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("Phrase needs at least one token")


@dataclass(frozen=True)
class And:
    children: tuple["QueryAst", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple["QueryAst", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


QueryAst = Union[Phrase, And, Or]

_LEX_RE = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


def _lex(raw: str) -> list[tuple[str, str, int]]:
    """Split into (kind, value, offset) with kind in {lp, rp, and, or, word}."""
    out: list[tuple[str, str, int]] = []
    pos = 0
    while True:
        m = _LEX_RE.match(raw, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        if m.group(1):
            out.append(("lp", "(", m.start(1)))
        elif m.group(2):
            out.append(("rp", ")", m.start(2)))
        else:
            word, off = m.group(3), m.start(3)
            if word == "AND":
                out.append(("and", word, off))
            elif word == "OR":
                out.append(("or", word, off))
            # A word directly after ')' can only be an operator; accept lowercase there.
            elif word in ("and", "or") and out and out[-1][0] == "rp":
                out.append((word, word.upper(), off))
            else:
                out.append(("word", word, off))
    return out


class _Parser:
    def __init__(self, raw: str):
        self.raw = raw
        self.toks = _lex(raw)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def parse(self) -> QueryAst:
        if not self.toks:
            raise QuerySyntaxError("empty query", 0)
        node = self.disj()
        tok = self.peek()
        if tok is not None:
            if tok[0] == "rp":
                raise QuerySyntaxError("unbalanced ')'", tok[2])
            raise QuerySyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return node

    def disj(self) -> QueryAst:
        children = [self.conj()]
        while (tok := self.peek()) is not None and tok[0] == "or":
            self.i += 1
            children.append(self.conj(after=tok))
        return children[0] if len(children) == 1 else Or(tuple(children))

    def conj(self, after=None) -> QueryAst:
        children = [self.atom(after)]
        while (tok := self.peek()) is not None and tok[0] == "and":
            self.i += 1
            children.append(self.atom(after=tok))
        return children[0] if len(children) == 1 else And(tuple(children))

    def atom(self, after=None) -> QueryAst:
        tok = self.peek()
        if tok is None:
            if after is not None:
                raise QuerySyntaxError(f"dangling operator {after[1]!r}", after[2])
            raise QuerySyntaxError("unexpected end of query", len(self.raw))
        kind, value, off = tok
        if kind in ("and", "or"):
            raise QuerySyntaxError(f"dangling operator {value!r}", off)
        if kind == "rp":
            if after is not None:
                raise QuerySyntaxError(f"dangling operator {after[1]!r}", after[2])
            raise QuerySyntaxError("empty phrase", off)
        if kind == "lp":
            self.i += 1
            inner = self.peek()
            if inner is not None and inner[0] == "rp":
                raise QuerySyntaxError("empty phrase", inner[2])
            node = self.disj()
            close = self.peek()
            if close is None or close[0] != "rp":
                raise QuerySyntaxError("unbalanced '('", off)
            self.i += 1
            return node
        words = []
        while (tok := self.peek()) is not None and tok[0] == "word":
            words.append(tok[1])
            self.i += 1
        return Phrase(tuple(words))


def parse_query(raw: str) -> QueryAst:
    """Parse a boolean query; ``AND`` binds tighter than ``OR``.

    >>> parse_query("(clone) OR (cloning)")
    Or(children=(Phrase(tokens=('clone',)), Phrase(tokens=('cloning',))))
    """
    if not raw or not raw.strip():
        raise QuerySyntaxError("empty query", 0)
    return _Parser(raw).parse()


def format_query(q: QueryAst) -> str:
    """Render a query so that ``parse_query`` gives back the same tree."""
    if isinstance(q, Phrase):
        return " ".join(q.tokens)
    op = " AND " if isinstance(q, And) else " OR "
    parts = []
    for child in q.children:
        text = format_query(child)
        parts.append(text if isinstance(child, Phrase) else f"({text})")
    return op.join(parts)


def _phrase_tokens(p: Phrase) -> list[str]:
    return lower_tokens(" ".join(p.tokens))


def eval_tokens(q: QueryAst, tokens: Sequence[str]) -> bool:
    """Evaluate against an already lowercased token list."""
    if isinstance(q, Phrase):
        return contains_run(tokens, _phrase_tokens(q))
    if isinstance(q, And):
        return all(eval_tokens(c, tokens) for c in q.children)
    return any(eval_tokens(c, tokens) for c in q.children)


def eval_query(q: QueryAst, d: Document) -> bool:
    return eval_tokens(q, lower_tokens(d.text))


# -- corpus streaming --------------------------------------------------------

def read_corpus(path, topic: str = "") -> Iterator[Document]:
    """Stream documents from a line-delimited JSON file.

    Blank lines are skipped; ordinals count non-blank records from 1.
    """
    path = str(path)
    seen: set[str] = set()
    ordinal = 0
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            ordinal += 1
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"invalid JSON ({e.msg})", ordinal, path) from e
            if not isinstance(rec, dict) or not isinstance(rec.get("id"), str) \
                    or not isinstance(rec.get("text"), str):
                raise CorpusError("record needs string fields 'id' and 'text'", ordinal, path)
            if rec["id"] in seen:
                raise CorpusError(f"duplicate id {rec['id']!r}", ordinal, path)
            if not rec["text"].strip():
                raise CorpusError("empty text", ordinal, path)
            seen.add(rec["id"])
            yield Document(rec["id"], topic, rec["text"], str(rec.get("source", "other")))


def iter_shards(paths: Iterable, topic: str = "") -> Iterator[Document]:
    """Documents from several shards in canonical (sorted path) order."""
    for p in sorted(str(p) for p in paths):
        yield from read_corpus(p, topic)


def retrieve(corpus: Iterable[Document], q, limit: int) -> list[Document]:
    """First ``limit`` matching documents in stream order.

    ``q`` is a QueryAst, or a mapping from source name to QueryAst with an
    optional ``None`` key as fallback for unlisted sources.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")

    def matches(doc: Document) -> bool:
        if isinstance(q, dict):
            query = q.get(doc.source, q.get(None))
            return query is not None and eval_query(query, doc)
        return eval_query(q, doc)

    return list(islice((d for d in corpus if matches(d)), limit))


# -- sentences ---------------------------------------------------------------

_BOUNDARY_RE = re.compile(r"[.!?](?=\s+[\"'(\[]?[A-Z])")


def split_sentences(d: Document, abbreviations: Sequence[str] = DEFAULT_ABBREVIATIONS) -> list[Sentence]:
    text = " ".join(d.text.split())
    abbrevs = set(abbreviations)
    out = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        end = m.end()
        word_start = text.rfind(" ", 0, end) + 1
        if text[word_start:end] in abbrevs:
            continue
        piece = text[start:end].strip()
        if piece:
            out.append(Sentence(piece, d.id, d.topic))
        start = end
    tail = text[start:].strip()
    if tail:
        out.append(Sentence(tail, d.id, d.topic))
    return out


def dedup(sentences: Iterable[Sentence]) -> list[Sentence]:
    seen: set[str] = set()
    out = []
    for s in sentences:
        key = s.normalized
        if key not in seen:
            seen.add(key)
            out.append(s)
    return out


def topic_filter(sentences: Iterable[Sentence], topic: str, synonyms: Sequence[str] = ()) -> list[Sentence]:
    """Keep sentences mentioning a topic token or a synonym phrase."""
    if not topic.strip():
        raise ValueError("topic must be non-empty")
    topic_toks = {t for t in lower_tokens(topic)}
    syn_toks = [lower_tokens(s) for s in synonyms if s.strip()]
    out = []
    for s in sentences:
        toks = lower_tokens(s.text)
        if topic_toks.intersection(toks) or any(contains_run(toks, st) for st in syn_toks):
            out.append(s)
    return out
