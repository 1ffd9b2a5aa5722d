"""Site-stamped identifiers and the per-replica state vector."""
from __future__ import annotations

import re
from typing import Dict, Iterator, NamedTuple, Tuple


class Id(NamedTuple):
    """An operation/edge identifier: the ``count``-th operation of ``site``.

    Tuple ordering gives the lexicographic order on (site, count), which is
    the order used to break label ties.
    """

    site: int
    count: int

    def __str__(self) -> str:
        return f"{self.site}:{self.count}"

    @classmethod
    def parse(cls, text: str) -> "Id":
        m = _ID_RE.fullmatch(text)
        if m is None:
            raise ValueError(f"malformed identifier {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


_ID_RE = re.compile(r"(0|[1-9][0-9]*):(0|[1-9][0-9]*)")

#: Identifier of the root edge. Owned by no site and never transmitted.
ROOT_ID = Id(0, 0)


def id_less(a: Id, b: Id) -> bool:
    return (a.site, a.count) < (b.site, b.count)


class ContiguityError(RuntimeError):
    """A state vector update would leave a gap; this is a scheduling bug."""


class StateVector:
    """Highest contiguously executed operation count, per site."""

    __slots__ = ("_executed",)

    def __init__(self) -> None:
        self._executed: Dict[int, int] = {}

    def get(self, site: int) -> int:
        return self._executed.get(site, 0)

    __getitem__ = get

    def record(self, site: int, count: int) -> None:
        current = self._executed.get(site, 0)
        if count != current + 1:
            raise ContiguityError(
                f"site {site}: cannot record count {count} after {current}"
            )
        self._executed[site] = count

    def items(self) -> Iterator[Tuple[int, int]]:
        return iter(sorted(self._executed.items()))

    def copy(self) -> "StateVector":
        other = StateVector()
        other._executed = dict(self._executed)
        return other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self._executed == other._executed

    def __repr__(self) -> str:
        body = ", ".join(f"{s}: {c}" for s, c in self.items())
        return f"StateVector({{{body}}})"
