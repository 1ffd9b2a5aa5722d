"""The replicated document: an edge-labelled tree with unique edge ids.

Every edge carries a label register ``(text, setter, dep)``.  A relabel write
wins when its ``(dep, setter)`` pair is greater than the current one, so the
register is a max-register and concurrent relabels commute.  There are no
tombstones: deleting an edge drops it and its subtree from the index.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Union

from .identity import ROOT_ID, Id
from .position import edge_word, sort_key


class _NoValue:
    """Label text of an edge that has not been labelled yet."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NoValue"

    def __reduce__(self):
        return (_NoValue, ())


NO_VALUE = _NoValue()
Text = Union[str, _NoValue]


@dataclass(frozen=True)
class Label:
    text: Text
    setter: Id
    dep: int

    def beats(self, other: "Label") -> bool:
        return (self.dep, self.setter) > (other.dep, other.setter)


@dataclass(frozen=True)
class Add:
    parent: Id
    new: Id
    pos: str = ""

    def __post_init__(self):
        if self.parent == self.new:
            raise ValueError(f"Add: parent and new id are both {self.new}")


@dataclass(frozen=True)
class Del:
    target: Id


@dataclass(frozen=True)
class ChLab:
    target: Id
    setter: Id
    dep: int
    text: str


Operation = Union[Add, Del, ChLab]


class TreeError(RuntimeError):
    """Internal inconsistency, e.g. the same id minted twice."""


class Edge:
    __slots__ = ("id", "label", "pos", "parent_id", "children", "key")

    # The parent is held by id, not by reference, so the tree has no
    # reference cycles and a deleted subtree is freed immediately.
    def __init__(self, ident: Id, pos: str, parent_id: Optional[Id]):
        self.id = ident
        self.label = Label(NO_VALUE, ident, 0)
        self.pos = pos
        self.parent_id = parent_id
        self.children: Dict[Id, Edge] = {}
        self.key = sort_key(edge_word(pos, ident))

    @property
    def word(self) -> str:
        return edge_word(self.pos, self.id)

    def sorted_children(self) -> List["Edge"]:
        return sorted(self.children.values(), key=_edge_key)

    def __repr__(self) -> str:
        return f"Edge({self.id}, {self.label.text!r}, pos={self.pos!r})"


def _edge_key(edge: Edge) -> str:
    return edge.key


class Tree:
    """Root edge ``0:0`` plus an id-keyed index over every live edge."""

    def __init__(self) -> None:
        self.root = Edge(ROOT_ID, "", None)
        self.index: Dict[Id, Edge] = {ROOT_ID: self.root}
        # Dense array of live ids for O(1) uniform sampling by the simulator.
        self._ids: List[Id] = [ROOT_ID]
        self._slot: Dict[Id, int] = {ROOT_ID: 0}

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, ident: Id) -> bool:
        return ident in self.index

    def __getitem__(self, ident: Id) -> Edge:
        return self.index[ident]

    def get(self, ident: Id) -> Optional[Edge]:
        return self.index.get(ident)

    def id_at(self, i: int) -> Id:
        """The ``i``-th live id in an arbitrary but deterministic order."""
        return self._ids[i]

    # -- operations ---------------------------------------------------------

    def add(self, parent: Id, new: Id, pos: str = "") -> None:
        if new in self.index:
            raise TreeError(f"edge {new} already exists")
        father = self.index.get(parent)
        if father is None:
            return
        edge = Edge(new, pos, parent)
        father.children[new] = edge
        self.index[new] = edge
        self._slot[new] = len(self._ids)
        self._ids.append(new)

    def delete(self, target: Id) -> None:
        edge = self.index.get(target)
        if edge is None:
            return
        if edge is self.root:
            raise TreeError("the root cannot be deleted")
        del self.index[edge.parent_id].children[target]
        stack = [edge]
        while stack:
            e = stack.pop()
            self._unindex(e.id)
            stack.extend(e.children.values())

    def relabel(self, target: Id, setter: Id, dep: int, text: str) -> None:
        edge = self.index.get(target)
        if edge is None:
            return
        if edge is self.root:
            raise TreeError("the root cannot be relabelled")
        label = Label(text, setter, dep)
        if label.beats(edge.label):
            edge.label = label

    def apply(self, op: Operation) -> None:
        if isinstance(op, Add):
            self.add(op.parent, op.new, op.pos)
        elif isinstance(op, Del):
            self.delete(op.target)
        elif isinstance(op, ChLab):
            self.relabel(op.target, op.setter, op.dep, op.text)
        else:
            raise TypeError(f"not an operation: {op!r}")

    def apply_all(self, ops) -> "Tree":
        for op in ops:
            self.apply(op)
        return self

    def _unindex(self, ident: Id) -> None:
        del self.index[ident]
        i = self._slot.pop(ident)
        last = self._ids.pop()
        if last != ident:
            self._ids[i] = last
            self._slot[last] = i

    # -- traversal / copies -------------------------------------------------

    def walk(self) -> Iterator[tuple]:
        """(depth, edge) pairs, depth first, siblings in edge-word order."""
        stack = [(0, self.root)]
        while stack:
            depth, edge = stack.pop()
            yield depth, edge
            kids = edge.sorted_children()
            stack.extend((depth + 1, k) for k in reversed(kids))

    def copy(self) -> "Tree":
        other = Tree()
        for _, edge in self.walk():
            if edge is self.root:
                continue
            other.add(edge.parent_id, edge.id, edge.pos)
            other.index[edge.id].label = edge.label
        return other

    def check(self) -> None:
        """Assert the structural invariants; used by tests."""
        reachable = {}
        stack = [self.root]
        while stack:
            e = stack.pop()
            assert e.id not in reachable, f"duplicate id {e.id}"
            reachable[e.id] = e
            for cid, c in e.children.items():
                assert c.id == cid and c.parent_id == e.id
                stack.append(c)
        assert reachable.keys() == self.index.keys()
        assert all(self.index[i] is e for i, e in reachable.items())
        assert sorted(self._ids) == sorted(self.index)
        assert all(self._ids[s] == i for i, s in self._slot.items())


def apply_ops(tree: Tree, ops) -> Tree:
    """``[op1; ...; opn](t)`` on a copy of ``tree``."""
    return tree.copy().apply_all(ops)


# -- canonical form ---------------------------------------------------------

NOVALUE_TOKEN = "⟨novalue⟩"
_ESCAPES = {"\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t", "⟨": "\\u27e8"}


def escape_text(text: Text) -> str:
    if text is NO_VALUE:
        return NOVALUE_TOKEN
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ch < " " or ch == "\x7f":
            out.append(f"\\x{ord(ch):02x}")
        else:
            out.append(ch)
    return "".join(out)


def canonical_lines(tree: Tree) -> Iterator[str]:
    for _, e in tree.walk():
        parent = str(e.parent_id) if e.parent_id is not None else "-"
        lab = e.label
        yield (
            f"id={e.id} parent={parent} dep={lab.dep} setter={lab.setter} "
            f"pos={e.pos} text={escape_text(lab.text)}"
        )


def canonical_form(tree: Tree) -> str:
    return "".join(line + "\n" for line in canonical_lines(tree))


def canonical_digest(tree: Tree) -> str:
    return hashlib.sha256(canonical_form(tree).encode("utf-8")).hexdigest()


def shape_form(tree: Tree) -> str:
    """Canonical form with ids, setters and positions masked out."""
    return "".join(
        f"{depth} {escape_text(e.label.text)}\n" for depth, e in tree.walk()
    )


def shape_digest(tree: Tree) -> str:
    return hashlib.sha256(shape_form(tree).encode("utf-8")).hexdigest()
