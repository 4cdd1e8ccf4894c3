"""Tokenization, stemming and the shipped word lists.

Every module tokenizes the same way: punctuation characters become
standalone tokens, everything else is split on whitespace.
"""

from __future__ import annotations

import hashlib
import re
import string
from functools import lru_cache
from importlib import resources

from nltk.stem.porter import PorterStemmer

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_PUNCT = frozenset(string.punctuation)

_stemmer = PorterStemmer()


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def tokenize_with_offsets(text: str) -> list[tuple[str, int, int]]:
    """Tokens with their ``[start, end)`` character offsets in ``text``."""
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def lower_tokens(text: str) -> list[str]:
    return [t.lower() for t in tokenize(text)]


def is_word(token: str) -> bool:
    return any(ch.isalnum() for ch in token)


def has_punct(token: str) -> bool:
    return any(ch in _PUNCT for ch in token)


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    return _stemmer.stem(token.lower())


def stem_tokens(tokens) -> list[str]:
    return [stem(t) for t in tokens]


def contains_run(haystack, needle) -> bool:
    """True if ``needle`` occurs as a contiguous run inside ``haystack``."""
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    first = needle[0]
    for i in range(len(haystack) - n + 1):
        if haystack[i] == first and list(haystack[i:i + n]) == list(needle):
            return True
    return False


def _read_data(name: str) -> str:
    return resources.files("argforge").joinpath("data", name).read_text(encoding="utf-8")


def read_word_list(name: str) -> list[str]:
    """Read a shipped word list; ``#`` lines are comments."""
    words = []
    for line in _read_data(name).splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.append(line.lower())
    return words


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    return frozenset(read_word_list("stopwords.txt"))


def stopwords_sha256() -> str:
    """Hash of the sorted stopword list, recorded in manifests."""
    joined = "\n".join(sorted(stopwords()))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def content_tokens(text: str) -> set[str]:
    """Distinct lowercase word tokens that are not stopwords."""
    stops = stopwords()
    return {t for t in lower_tokens(text) if is_word(t) and t not in stops}
