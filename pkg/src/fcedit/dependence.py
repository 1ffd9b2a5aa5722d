"""Semantic dependence between tree operations.

An operation depends on the ``Add`` that created the edge it names: the
parent for ``Add``, the target for ``Del`` and ``ChLab``.  Because an ``Add``
is stamped with the id it creates, the stamp of the required operation is
that edge id itself.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Iterator, List, Sequence, Set

from .identity import Id
from .tree import Add, ChLab, Del, Operation

DEFAULT_LINEARIZATION_BOUND = 7


def depends_on(earlier: Operation, later: Operation) -> bool:
    """True iff ``later`` needs the effect of ``earlier``."""
    if not isinstance(earlier, Add):
        return False
    created = earlier.new
    if isinstance(later, Add):
        return later.parent == created
    if isinstance(later, (Del, ChLab)):
        return later.target == created
    return False


def dependencies_of(op: Operation) -> Set[Id]:
    if isinstance(op, Add):
        return {op.parent}
    if isinstance(op, (Del, ChLab)):
        return {op.target}
    raise TypeError(f"not an operation: {op!r}")


def _op(item):
    return getattr(item, "op", item)


def is_valid_sequence(seq: Sequence, *, site_order: bool = True) -> bool:
    """Whether ``seq`` linearizes the dependence order.

    Items are requests (anything with ``op``, ``origin`` and ``count``) or
    bare operations.  With ``site_order`` the per-origin counts must also
    appear in increasing order.
    """
    ops = [_op(x) for x in seq]
    creators = {}
    for i, op in enumerate(ops):
        if isinstance(op, Add):
            creators[op.new] = i
    for j, op in enumerate(ops):
        for dep in dependencies_of(op):
            i = creators.get(dep)
            if i is not None and i > j:
                return False
    if site_order:
        last = {}
        for item in seq:
            origin = getattr(item, "origin", None)
            if origin is None:
                continue
            if last.get(origin, 0) >= item.count:
                return False
            last[origin] = item.count
    return True


def all_compliant_linearizations(
    items: Sequence,
    *,
    site_order: bool = True,
    bound: int = DEFAULT_LINEARIZATION_BOUND,
) -> Iterator[List]:
    """Every ordering of ``items`` accepted by :func:`is_valid_sequence`.

    Enumerated directly over the precedence DAG (no permutation filtering),
    in a deterministic order.
    """
    items = list(items)
    n = len(items)
    if n > bound:
        raise ValueError(f"refusing to enumerate linearizations of {n} > {bound} items")
    preds = defaultdict(set)
    for a in range(n):
        for b in range(n):
            if a != b and depends_on(_op(items[a]), _op(items[b])):
                preds[b].add(a)
    if site_order:
        for a in range(n):
            for b in range(n):
                oa = getattr(items[a], "origin", None)
                if oa is not None and oa == getattr(items[b], "origin", None):
                    if items[a].count < items[b].count:
                        preds[b].add(a)

    placed: List[int] = []
    used = [False] * n

    def extend():
        if len(placed) == n:
            yield [items[i] for i in placed]
            return
        for i in range(n):
            if not used[i] and all(used[p] for p in preds[i]):
                used[i] = True
                placed.append(i)
                yield from extend()
                placed.pop()
                used[i] = False

    yield from extend()

