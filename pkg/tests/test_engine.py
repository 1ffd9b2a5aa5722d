import logging
import random

import pytest
from hypothesis import given, settings, strategies as st

from fcedit.dependence import is_valid_sequence
from fcedit.engine import (
    DeleteEdge,
    InsertChild,
    IntentError,
    MalformedRequest,
    Relabel,
    Request,
    SiteEngine,
    StaleTarget,
)
from fcedit.identity import ROOT_ID, Id
from fcedit.simnet import check_convergence, choose_intent
from fcedit.tree import Add, ChLab, Del, canonical_digest

I = Id


def test_initialize():
    e = SiteEngine(3)
    assert e.op_count == 1 and not e.waiting
    assert list(e.tree.index) == [ROOT_ID]
    assert e.received.get(3) == 0
    assert canonical_digest(e.tree) == canonical_digest(SiteEngine(9).tree)
    for bad in (0, -1, "1"):
        with pytest.raises(ValueError):
            SiteEngine(bad)


def test_first_generate_is_add_under_root():
    e = SiteEngine(2)
    r = e.generate(InsertChild(ROOT_ID))
    assert r == Request(Add(ROOT_ID, I(2, 1), ""), 2, 1)
    assert I(2, 1) in e.tree


def test_counts_increase_by_one_and_are_recorded():
    e = SiteEngine(4)
    rs = [e.insert(), e.insert(), e.insert()]
    assert [r.count for r in rs] == [1, 2, 3]
    assert e.op_count == 4
    assert e.received.get(4) == 3


def test_generate_refuses_stale_and_root_targets():
    e = SiteEngine(1)
    with pytest.raises(StaleTarget):
        e.insert(I(5, 5))
    with pytest.raises(StaleTarget):
        e.delete(I(5, 5))
    with pytest.raises(StaleTarget):
        e.relabel(I(5, 5), "x")
    with pytest.raises(IntentError):
        e.delete(ROOT_ID)
    with pytest.raises(IntentError):
        e.relabel(ROOT_ID, "x")
    assert e.op_count == 1


def test_relabel_increments_dependence_level():
    e = SiteEngine(1)
    a = e.insert().stamp
    levels = [e.relabel(a, f"v{k}").op.dep for k in range(5)]
    assert levels == [1, 2, 3, 4, 5]


def test_relabel_after_dep4_wins_over_concurrent_dep4():
    a, b = SiteEngine(1), SiteEngine(2)
    x = a.insert()
    history = [x] + [a.relabel(x.stamp, f"a{k}") for k in range(3)]
    for r in history:
        b.receive(r)
    assert a.tree[x.stamp].label.dep == 3
    ra4 = a.relabel(x.stamp, "a-level-4")
    rb4 = b.relabel(x.stamp, "b-level-4")  # concurrent, same level
    b.receive(ra4)
    a.receive(rb4)
    # the level-4 tie goes to the larger setter, 2:5
    assert a.tree[x.stamp].label.text == b.tree[x.stamp].label.text == "b-level-4"
    ra5 = a.relabel(x.stamp, "a-level-5")
    assert ra5.op.dep == 5
    for tail in ([ra4, rb4, ra5], [rb4, ra4, ra5], [ra4, ra5, rb4]):
        c = SiteEngine(3)
        for r in history + tail:
            c.receive(r)
        assert c.tree[x.stamp].label.text == "a-level-5"


def test_is_executable_fifo_and_dependencies():
    e = SiteEngine(1)
    second = Request(Add(ROOT_ID, I(5, 2)), 5, 2)
    assert not e.is_executable(second)
    rm = Request(Del(I(5, 3)), 6, 1)
    for c in range(1, 3):
        e.receive(Request(Add(ROOT_ID, I(5, c)), 5, c))
    assert e.received.get(5) == 2
    assert not e.is_executable(rm)
    e.receive(Request(Add(ROOT_ID, I(5, 3)), 5, 3))
    assert e.is_executable(rm)


def test_first_add_of_any_site_is_executable_on_fresh_engine():
    e = SiteEngine(1)
    for s in range(2, 6):
        assert e.is_executable(Request(Add(ROOT_ID, I(s, 1)), s, 1))


def test_child_before_parent_waits_then_both_execute():
    a, b = SiteEngine(1), SiteEngine(2)
    parent = a.insert()
    c = SiteEngine(3)
    c.receive(parent)
    child = c.insert(parent.stamp)
    assert b.receive(child) == []
    assert list(b.waiting) == [(3, 1)]
    assert b.receive(parent) == [parent, child]
    assert not b.waiting
    assert b.tree[child.stamp].parent_id == parent.stamp


def test_reverse_delivery_from_one_site():
    src = SiteEngine(1)
    rs = [src.insert() for _ in range(10)]
    e = SiteEngine(2)
    for r in reversed(rs[1:]):
        assert e.receive(r) == []
    assert e.receive(rs[0]) == rs
    assert canonical_digest(e.tree) == canonical_digest(src.tree)


def test_ready_request_executes_immediately():
    a, b = SiteEngine(1), SiteEngine(2)
    r = a.insert()
    assert b.receive(r) == [r]
    assert not b.waiting


def test_duplicates_are_dropped(caplog):
    a, b = SiteEngine(1), SiteEngine(2)
    r1, r2 = a.insert(), a.insert()
    b.receive(r2)
    with caplog.at_level(logging.WARNING):
        assert b.receive(r2) == []
        b.receive(r1)
        assert b.receive(r1) == []
        assert b.receive(r2) == []
    assert b.dropped == 3
    assert "duplicate" in caplog.text
    assert canonical_digest(a.tree) == canonical_digest(b.tree)


@pytest.mark.parametrize(
    "bad",
    [
        Request(Add(ROOT_ID, I(1, 2)), 1, 1),           # id differs from stamp
        Request(ChLab(I(1, 1), I(1, 3), 1, "x"), 1, 2),  # setter differs from stamp
        Request(Del(ROOT_ID), 1, 1),
        Request(Add(ROOT_ID, I(0, 1)), 0, 1),
        Request(Add(ROOT_ID, I(1, 0)), 1, 0),
        Request(Add(ROOT_ID, I(1, 1), "ab"), 1, 1),
        Request(Del(I(0, 4)), 1, 1),
        Request("op", 1, 1),
    ],
)
def test_malformed_requests_are_rejected(bad):
    with pytest.raises(MalformedRequest):
        SiteEngine(2).receive(bad)


def test_own_log_replays_on_fresh_engine():
    a = SiteEngine(1)
    rs = [a.insert(), a.insert()]
    rs.append(a.relabel(rs[0].stamp, "z"))
    fresh = SiteEngine(1)
    for r in reversed(rs):
        fresh.receive(r)
    assert canonical_digest(fresh.tree) == canonical_digest(a.tree)
    assert fresh.op_count == 4
    assert fresh.insert().count == 4


def _swarm(seed, n_sites=4, n_ops=60, trace=True):
    rng = random.Random(seed)
    engines = [SiteEngine(s + 1, record_trace=trace) for s in range(n_sites)]
    pending = [[] for _ in engines]
    for _ in range(n_ops):
        s = rng.randrange(n_sites)
        r = engines[s].generate(choose_intent(engines[s], rng))
        for d in range(n_sites):
            if d != s:
                pending[d].append(r)
        for _ in range(rng.randint(0, 2 * n_sites)):
            d = rng.randrange(n_sites)
            if pending[d]:
                engines[d].receive(pending[d].pop(rng.randrange(len(pending[d]))))
                assert is_valid_sequence(engines[d].trace)
                assert all(not engines[d].is_executable(w) for w in engines[d].waiting.values())
                assert engines[d].received.get(engines[d].site_id) == engines[d].op_count - 1
    for d in range(n_sites):
        rng.shuffle(pending[d])
        for r in pending[d]:
            engines[d].receive(r)
    return engines


@settings(max_examples=60)
@given(st.integers(0, 2**32), st.integers(2, 6), st.integers(1, 80))
def test_swarm_is_safe_live_and_convergent(seed, n_sites, n_ops):
    engines = _swarm(seed, n_sites, n_ops)
    for e in engines:
        assert is_valid_sequence(e.trace)
        assert not e.waiting
    assert check_convergence(engines)


def test_final_tree_depends_only_on_delivered_set():
    base = _swarm(7, n_sites=3, n_ops=50, trace=True)
    log = sorted(
        {(r.origin, r.count): r for e in base for r in e.trace}.values(),
        key=lambda r: (r.origin, r.count),
    )
    digests = set()
    for seed in range(10):
        rng = random.Random(seed)
        order = log[:]
        rng.shuffle(order)
        e = SiteEngine(9)
        for r in order:
            e.receive(r)
        assert not e.waiting
        digests.add(canonical_digest(e.tree))
    assert digests == {canonical_digest(base[0].tree)}
