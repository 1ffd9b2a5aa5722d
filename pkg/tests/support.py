"""Test-only oracles and generators, kept independent of the code under test."""
from __future__ import annotations

import itertools
import random
from typing import Iterator, List, Tuple

from fcedit.dependence import depends_on, is_valid_sequence
from fcedit.engine import SiteEngine
from fcedit.identity import ROOT_ID, Id
from fcedit.simnet import choose_intent
from fcedit.tree import Add, ChLab, Del, Label, Tree, canonical_form

# symbol ranks written out by hand, independent of position.sort_key
RANK = {"_": 0, "#": 1, ".": 2, **{str(d): 3 + d for d in range(10)}}


def oracle_key(word: str) -> List[int]:
    return [RANK[c] for c in word]


def oracle_compare(u: str, v: str) -> int:
    a, b = oracle_key(u), oracle_key(v)
    return (a > b) - (a < b)


def transpose(seq, i):
    """The adjacent transposition swapping positions i and i+1."""
    seq = list(seq)
    seq[i], seq[i + 1] = seq[i + 1], seq[i]
    return seq


def brute_force_linearizations(items, *, site_order=True) -> List[list]:
    return [
        list(p)
        for p in itertools.permutations(items)
        if is_valid_sequence(p, site_order=site_order)
    ]


def run(tree: Tree, ops) -> str:
    return canonical_form(tree.copy().apply_all(ops))


# -- exhaustive small universe ---------------------------------------------

ABSENT = (Id(6, 1), Id(6, 2))
SETTERS = (Id(1, 9), Id(9, 1))  # one below and one above the preset setters


def present_id(i: int) -> Id:
    return Id(5, i + 1)


def small_trees(max_edges: int = 4) -> Iterator[Tree]:
    """Every recursive tree shape with up to ``max_edges`` edges below the
    root, each once with fresh labels and once with preset labels."""
    for k in range(max_edges + 1):
        choices = [range(i + 1) for i in range(k)]  # 0 = root, j = edge j-1
        for parents in itertools.product(*choices):
            for preset in (False, True):
                t = Tree()
                for i, p in enumerate(parents):
                    pid = ROOT_ID if p == 0 else present_id(p - 1)
                    t.add(pid, present_id(i), str(i % 3) * (i % 2))
                    if preset:
                        t[present_id(i)].label = Label(f"e{i}", Id(7, i + 1), i % 3)
                yield t


def universe_ops(tree: Tree) -> List:
    present = [i for i in tree.index if i != ROOT_ID]
    targets = present + list(ABSENT)
    ops = []
    for parent in [ROOT_ID] + targets:
        for new in ABSENT:
            if new != parent:
                for pos in ("", "5"):
                    ops.append(Add(parent, new, pos))
    ops += [Del(t) for t in targets]
    for t in targets:
        for s in SETTERS:
            for dep in (0, 1, 2):
                ops.append(ChLab(t, s, dep, f"w{s.site}d{dep}"))
    return ops


def minted(op):
    if isinstance(op, Add):
        return op.new
    if isinstance(op, ChLab):
        return op.setter
    return None


def concurrent_pairs(ops) -> Iterator[Tuple]:
    for a in ops:
        for b in ops:
            if a is b:
                continue
            ma, mb = minted(a), minted(b)
            if ma is not None and ma == mb:
                continue  # one id is never minted twice
            if depends_on(a, b) or depends_on(b, a):
                continue
            yield a, b


# -- small concurrent workloads ---------------------------------------------

def concurrent_op_set(seed: int, size: int = 6, n_sites: int = 3, warmup: int = 6):
    """A base tree shared by all sites plus ``size`` requests generated
    concurrently on top of it, with random partial delivery in between."""
    rng = random.Random(seed)
    engines = [SiteEngine(s + 1) for s in range(n_sites)]
    mix = (0.5, 0.2, 0.3)
    for _ in range(warmup):
        src = rng.randrange(n_sites)
        r = engines[src].generate(choose_intent(engines[src], rng, mix))
        for i, e in enumerate(engines):
            if i != src:
                e.receive(r)
    base = engines[0].tree.copy()
    pending = [[] for _ in engines]
    ops = []
    for _ in range(size):
        src = rng.randrange(n_sites)
        r = engines[src].generate(choose_intent(engines[src], rng, mix))
        ops.append(r)
        for i in range(n_sites):
            if i != src:
                pending[i].append(r)
        for i in range(n_sites):
            rng.shuffle(pending[i])
            while pending[i] and rng.random() < 0.5:
                engines[i].receive(pending[i].pop())
    return base, ops
