"""Whole-word tokenization and phrase matching.

Every lexicon lookup in the package goes through these helpers so that
"as" never matches inside "basically" and "no" never matches inside "not".
Tokens are lowercased; internal apostrophes and hyphens are kept so that
"i'm" and "human-like" stay single words.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"[a-z0-9]+(?:['\-][a-z0-9]+)*")


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase whole-word tokens."""
    return _WORD_RE.findall(text.lower())


def word_count(text: str) -> int:
    return len(tokenize(text))


def contains_phrase(tokens: list[str], phrase_tokens: list[str]) -> bool:
    """True if ``phrase_tokens`` occurs as a contiguous run inside ``tokens``."""
    if not phrase_tokens:
        return False
    n, m = len(tokens), len(phrase_tokens)
    for i in range(n - m + 1):
        if tokens[i:i + m] == phrase_tokens:
            return True
    return False


def count_phrase(tokens: list[str], phrase_tokens: list[str]) -> int:
    """Number of non-overlapping occurrences of a phrase in a token list."""
    if not phrase_tokens:
        return 0
    count = 0
    i = 0
    n, m = len(tokens), len(phrase_tokens)
    while i <= n - m:
        if tokens[i:i + m] == phrase_tokens:
            count += 1
            i += m
        else:
            i += 1
    return count
