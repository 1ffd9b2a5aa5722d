"""Dense total order on sibling edges.

Words are plain strings over ``_ # . 0-9`` where ``_`` stands for the
bottom symbol and ``#`` for the separator.  The symbol order is

    _ < # < . < 0 < 1 < ... < 9

A sibling is ordered by its *edge word* ``pos + "#" + phi(id)``; the
``phi`` suffix makes edge words of distinct edges distinct even when two
sites pick the same ``pos`` concurrently.  Comparison is lexicographic and a
strict prefix sorts before its extensions.
"""
from __future__ import annotations

import re
from typing import Sequence

from .identity import Id

BOT = "_"
SEP = "#"
BASE = ".0123456789"
MAX_SYMBOL = "9"
ALPHABET = BOT + SEP + BASE

# '.' and the digits already sort correctly in ASCII; only the two
# out-of-band symbols need remapping below them.
_KEY_TABLE = str.maketrans({BOT: "\x01", SEP: "\x02"})
_POS_RE = re.compile(r"[_#.0-9]*")
_EDGE_WORD_RE = re.compile(r"[_#.0-9]*#[0-9]+\.[0-9]+")


class PositionError(ValueError):
    pass


def sort_key(word: str) -> str:
    """A string whose native ordering is the symbol ordering of ``word``."""
    return word.translate(_KEY_TABLE)


def phi_encode(ident: Id) -> str:
    return f"{ident.site}.{ident.count}"


def edge_word(pos: str, ident: Id) -> str:
    return f"{pos}{SEP}{ident.site}.{ident.count}"


def word_compare(u: str, v: str) -> int:
    """-1, 0 or 1 as ``u`` is less than, equal to or greater than ``v``."""
    ku, kv = sort_key(u), sort_key(v)
    return (ku > kv) - (ku < kv)


def is_position(word: str) -> bool:
    return _POS_RE.fullmatch(word) is not None


def is_edge_word(word: str) -> bool:
    return _EDGE_WORD_RE.fullmatch(word) is not None


def _check_edge_word(word: str) -> None:
    if not is_edge_word(word):
        raise PositionError(f"not an edge word: {word!r}")


def _candidates(lo: str, hi: str):
    j = 0
    limit = min(len(lo), len(hi))
    while j < limit and lo[j] == hi[j]:
        j += 1
    # Copy hi through the first differing index, pad with bottom up to |hi|.
    if j < len(hi):
        yield hi[: j + 1] + BOT * (len(hi) - j - 1)
    # Extend lo with a separator; lands below hi whenever lo is not a prefix.
    yield lo + SEP
    if j == len(lo):
        # lo is a strict prefix of hi: go below the remainder of hi by
        # outnumbering its leading bottoms.
        rest = hi[len(lo):]
        m = len(rest) - len(rest.lstrip(BOT))
        yield lo + BOT * (m + 1)


def between(lo: str, hi: str, ident: Id) -> str:
    """A position ``p`` with ``lo < edge_word(p, ident) < hi``."""
    _check_edge_word(lo)
    _check_edge_word(hi)
    klo, khi = sort_key(lo), sort_key(hi)
    if not klo < khi:
        raise PositionError(f"between() needs lo < hi, got {lo!r} >= {hi!r}")
    for pos in _candidates(lo, hi):
        k = sort_key(edge_word(pos, ident))
        if klo < k < khi:
            return pos
    raise AssertionError(f"no position between {lo!r} and {hi!r}")  # pragma: no cover


def before_all(word: str, ident: Id) -> str:
    """A position whose edge word sorts strictly below ``word``."""
    _check_edge_word(word)
    return BOT * (len(word) + 1)


def after_all(word: str, ident: Id) -> str:
    """A position whose edge word sorts strictly above ``word``."""
    _check_edge_word(word)
    return MAX_SYMBOL * (len(word) + 1)


def position_at(siblings: Sequence[str], index: int, ident: Id) -> str:
    """Position for a new edge inserted at ``index`` among sorted sibling words."""
    if not 0 <= index <= len(siblings):
        raise IndexError(f"sibling index {index} out of range 0..{len(siblings)}")
    if not siblings:
        return ""
    if index == 0:
        return before_all(siblings[0], ident)
    if index == len(siblings):
        return after_all(siblings[-1], ident)
    return between(siblings[index - 1], siblings[index], ident)
