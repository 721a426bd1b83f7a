"""Token normalization and fuzzy resolution against a bank vocabulary."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Collection

from .errors import MatchError

# Stripped from token edges only; interior apostrophes and hyphens survive.
STRIP_CHARS = ".,!?;:\"'()[]—–"

DEFAULT_FILLER = "a"
DEFAULT_THRESHOLD = 0.6
DEFAULT_LENGTH_WINDOW = 3


class MatchKind(str, Enum):
    EXACT = "exact"
    FUZZY = "fuzzy"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class Resolution:
    """How one token was resolved against the vocabulary."""

    kind: MatchKind
    matched_word: str
    similarity: float


def normalize_token(raw: str) -> str:
    """Lowercase and strip edge punctuation; empty result means drop the token."""
    return raw.lower().strip(STRIP_CHARS)


_ONES = (
    "zero one two three four five six seven eight nine ten eleven twelve "
    "thirteen fourteen fifteen sixteen seventeen eighteen nineteen"
).split()
_TENS = "zero ten twenty thirty forty fifty sixty seventy eighty ninety".split()


def number_to_words(n: int) -> str:
    """Spell a non-negative integer in plain English words (no hyphens)."""
    if n < 0:
        raise MatchError("cannot spell negative numbers")
    if n < 20:
        return _ONES[n]
    if n < 100:
        tens, rest = divmod(n, 10)
        return _TENS[tens] + (f" {_ONES[rest]}" if rest else "")
    for scale, name in ((10**9, "billion"), (10**6, "million"), (1000, "thousand"), (100, "hundred")):
        if n >= scale:
            head, rest = divmod(n, scale)
            out = f"{number_to_words(head)} {name}"
            return out + (f" {number_to_words(rest)}" if rest else "")
    raise MatchError(f"number too large to spell: {n}")


def tokenize(sentence: str, expand_numbers: bool = False) -> list[tuple[str, str]]:
    """Whitespace-split and normalize a sentence into (raw, token) pairs.

    Tokens normalizing to the empty string are dropped. With expand_numbers,
    all-digit tokens become their spelled-out words (one pair per word).
    """
    pairs: list[tuple[str, str]] = []
    for raw in sentence.split():
        token = normalize_token(raw)
        if not token:
            continue
        if expand_numbers and token.isdigit():
            for word in number_to_words(int(token)).split():
                pairs.append((raw, word))
        else:
            pairs.append((raw, token))
    return pairs


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert / delete / substitute, all cost 1)."""
    if a == b:
        return 0
    if len(a) > len(b):
        a, b = b, a
    previous = list(range(len(a) + 1))
    for i, cb in enumerate(b, start=1):
        current = [i] + [0] * len(a)
        for j, ca in enumerate(a, start=1):
            current[j] = min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            )
        previous = current
    return previous[-1]


def similarity(a: str, b: str) -> float:
    """Normalized surface similarity: 1 - lev(a, b) / max(|a|, |b|)."""
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def resolve(
    token: str,
    vocab: Collection[str],
    filler: str = DEFAULT_FILLER,
    *,
    threshold: float = DEFAULT_THRESHOLD,
    length_window: int = DEFAULT_LENGTH_WINDOW,
) -> Resolution:
    """Resolve a normalized token against the vocabulary.

    Exact hits win outright. Otherwise the most similar candidate within
    +-length_window characters of the token's length is returned when its
    similarity reaches the threshold; ties break on smaller edit distance,
    then lexicographically. No candidate qualifying means the filler word.
    """
    if not token:
        raise MatchError("cannot resolve an empty token")
    if filler not in vocab:
        raise MatchError(f"filler word {filler!r} is not in the vocabulary")
    if token in vocab:
        return Resolution(MatchKind.EXACT, token, 1.0)
    best_key: tuple[float, int, str] | None = None
    best_sim = 0.0
    for candidate in vocab:
        if abs(len(candidate) - len(token)) > length_window:
            continue
        dist = levenshtein(token, candidate)
        sim = 1.0 - dist / max(len(token), len(candidate))
        key = (-sim, dist, candidate)
        if best_key is None or key < best_key:
            best_key, best_sim = key, sim
    if best_key is not None and best_sim >= threshold:
        return Resolution(MatchKind.FUZZY, best_key[2], best_sim)
    return Resolution(MatchKind.FALLBACK, filler, 0.0)
