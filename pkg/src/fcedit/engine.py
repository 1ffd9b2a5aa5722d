"""One replica of the concurrent editing algorithm.

A site mints requests stamped ``(site, count)``, applies them locally and
hands them to the caller for broadcast.  Received requests execute as soon as
the previous request from the same origin and the edge they name have been
executed; until then they wait.  No operation ever needs transforming, and
nothing but the live tree, the state vector and the waiting requests is kept.
"""
from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

from .dependence import dependencies_of
from .identity import ROOT_ID, Id, StateVector
from .position import is_position, position_at
from .tree import Add, ChLab, Del, Operation, Tree

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Request:
    op: Operation
    origin: int
    count: int

    @property
    def stamp(self) -> Id:
        return Id(self.origin, self.count)


class MalformedRequest(ValueError):
    pass


class IntentError(ValueError):
    """A local edit cannot be turned into a request."""


class StaleTarget(IntentError):
    """The edit names an edge that is not (or no longer) in the local tree."""


@dataclass(frozen=True)
class InsertChild:
    parent: Id
    index: Optional[int] = None  # None appends after the last sibling


@dataclass(frozen=True)
class DeleteEdge:
    target: Id


@dataclass(frozen=True)
class Relabel:
    target: Id
    text: str


Intent = Union[InsertChild, DeleteEdge, Relabel]


def _valid_id(ident) -> bool:
    if not isinstance(ident, Id):
        return False
    if ident == ROOT_ID:
        return True
    return ident.site >= 1 and ident.count >= 1


def validate_request(r: Request) -> None:
    if not (isinstance(r.origin, int) and isinstance(r.count, int)):
        raise MalformedRequest(f"non-integer stamp in {r!r}")
    if r.origin < 1 or r.count < 1:
        raise MalformedRequest(f"bad stamp {r.origin}:{r.count}")
    op = r.op
    if isinstance(op, Add):
        if op.new != r.stamp:
            raise MalformedRequest(f"Add id {op.new} differs from stamp {r.stamp}")
        if not _valid_id(op.parent):
            raise MalformedRequest(f"bad parent id {op.parent!r}")
        if not is_position(op.pos):
            raise MalformedRequest(f"bad position word {op.pos!r}")
    elif isinstance(op, (Del, ChLab)):
        if not _valid_id(op.target) or op.target == ROOT_ID:
            raise MalformedRequest(f"bad target {op.target!r}")
        if isinstance(op, ChLab):
            if op.setter != r.stamp:
                raise MalformedRequest(f"ChLab setter {op.setter} differs from stamp {r.stamp}")
            if not isinstance(op.dep, int) or op.dep < 0:
                raise MalformedRequest(f"bad dependence level {op.dep!r}")
            if not isinstance(op.text, str):
                raise MalformedRequest(f"bad label text {op.text!r}")
    else:
        raise MalformedRequest(f"unknown operation {op!r}")


class SiteEngine:
    def __init__(self, site_id: int, *, record_trace: bool = False):
        if not isinstance(site_id, int) or site_id < 1:
            raise ValueError(f"site id must be a natural >= 1, got {site_id!r}")
        self.site_id = site_id
        self.op_count = 1
        self.tree = Tree()
        self.received = StateVector()
        self.waiting: Dict[tuple, Request] = {}
        # Waiting requests keyed by the stamp whose execution may unblock them.
        self._blocked: Dict[Id, List[Request]] = {}
        self.dropped = 0
        self.peak_waiting = 0
        self.trace: Optional[List[Request]] = [] if record_trace else None

    def __repr__(self) -> str:
        return (
            f"SiteEngine(site={self.site_id}, next={self.op_count}, "
            f"edges={len(self.tree)}, waiting={len(self.waiting)})"
        )

    # -- local edits --------------------------------------------------------

    def generate(self, intent: Intent) -> Request:
        stamp = Id(self.site_id, self.op_count)
        tree = self.tree
        if isinstance(intent, InsertChild):
            parent = tree.get(intent.parent)
            if parent is None:
                raise StaleTarget(f"parent {intent.parent} is not in the tree")
            words = [e.word for e in parent.sorted_children()]
            index = len(words) if intent.index is None else intent.index
            op: Operation = Add(intent.parent, stamp, position_at(words, index, stamp))
        elif isinstance(intent, (DeleteEdge, Relabel)):
            if intent.target == ROOT_ID:
                raise IntentError("the root edge cannot be deleted or relabelled")
            edge = tree.get(intent.target)
            if edge is None:
                raise StaleTarget(f"edge {intent.target} is not in the tree")
            if isinstance(intent, DeleteEdge):
                op = Del(intent.target)
            else:
                op = ChLab(intent.target, stamp, edge.label.dep + 1, intent.text)
        else:
            raise TypeError(f"not an intent: {intent!r}")
        r = Request(op, self.site_id, self.op_count)
        self._execute(r)
        return r

    def insert(self, parent: Id = ROOT_ID, index: Optional[int] = None) -> Request:
        return self.generate(InsertChild(parent, index))

    def delete(self, target: Id) -> Request:
        return self.generate(DeleteEdge(target))

    def relabel(self, target: Id, text: str) -> Request:
        return self.generate(Relabel(target, text))

    # -- remote requests ----------------------------------------------------

    def _blocker(self, r: Request) -> Optional[Id]:
        received = self.received
        if received.get(r.origin) != r.count - 1:
            return Id(r.origin, r.count - 1)
        for dep in dependencies_of(r.op):
            if received.get(dep.site) < dep.count:
                return dep
        return None

    def is_executable(self, r: Request) -> bool:
        return self._blocker(r) is None

    def receive(self, r: Request) -> List[Request]:
        """Accept ``r`` and return every request executed as a consequence."""
        validate_request(r)
        key = (r.origin, r.count)
        if self.received.get(r.origin) >= r.count or key in self.waiting:
            self.dropped += 1
            log.warning("site %d: dropping duplicate request %s", self.site_id, r.stamp)
            return []
        blocker = self._blocker(r)
        if blocker is not None:
            self.waiting[key] = r
            self._blocked.setdefault(blocker, []).append(r)
            if len(self.waiting) > self.peak_waiting:
                self.peak_waiting = len(self.waiting)
            return []
        executed = []
        ready = [(r.origin, r.count, r)]
        while ready:
            _, _, nxt = heapq.heappop(ready)
            self.waiting.pop((nxt.origin, nxt.count), None)
            self._execute(nxt)
            executed.append(nxt)
            for w in self._blocked.pop(nxt.stamp, ()):
                b = self._blocker(w)
                if b is None:
                    heapq.heappush(ready, (w.origin, w.count, w))
                else:
                    self._blocked.setdefault(b, []).append(w)
        return executed

    def _execute(self, r: Request) -> None:
        self.received.record(r.origin, r.count)
        if r.origin == self.site_id and r.count >= self.op_count:
            # Replaying our own log on a fresh replica.
            self.op_count = r.count + 1
        self.tree.apply(r.op)
        if self.trace is not None:
            self.trace.append(r)

    # -- inspection ---------------------------------------------------------

    @property
    def executed_count(self) -> int:
        return sum(c for _, c in self.received.items())
