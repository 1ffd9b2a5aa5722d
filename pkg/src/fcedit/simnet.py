"""Deterministic multi-site simulation.

A scenario runs in two phases.

*Authoring*: ``n_sites`` engines edit concurrently.  Each step one random
site generates an edit against its own replica and the request is queued for
every other site; then a random number of queued messages is delivered, each
one picked uniformly from its destination's queue.  Every engine call is
timed.  When the workload is over the queues are drained.

*Redelivery* (optional): the complete request log is handed to fresh engines,
one per site, each in an order drawn from the configured reorder model.  All
replicas of both phases must end with the same digest and no waiting request.

Everything is driven by seeded ``random.Random`` instances, so a config fully
determines the request log, the digests and the structural counters.
"""
from __future__ import annotations

import gc
import random
import re
import string
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .engine import DeleteEdge, InsertChild, Intent, Relabel, Request, SiteEngine
from .identity import ROOT_ID
from .tree import canonical_digest

REORDER_MODELS = ("fifo-per-link", "uniform-shuffle", "bounded-delay")
DEFAULT_MIX = (0.50, 0.10, 0.40)

_DELAY_RE = re.compile(r"bounded-delay[(:]([0-9]+)\)?")


class ConfigError(ValueError):
    pass


def parse_reorder(model: str) -> Tuple[str, int]:
    if model in ("fifo-per-link", "uniform-shuffle"):
        return model, 0
    m = _DELAY_RE.fullmatch(model)
    if m is None:
        raise ConfigError(
            f"unknown reorder model {model!r}; expected fifo-per-link, "
            "uniform-shuffle or bounded-delay(K)"
        )
    return "bounded-delay", int(m.group(1))


@dataclass(frozen=True)
class ScenarioConfig:
    n_sites: int = 20
    n_ops: int = 1000
    seed: int = 0
    mix: Tuple[float, float, float] = DEFAULT_MIX
    reorder: str = "uniform-shuffle"
    redeliver: bool = True
    clear_at_end: bool = False
    threads: bool = False

    def validate(self) -> None:
        if not isinstance(self.n_sites, int) or self.n_sites < 2:
            raise ConfigError("n_sites must be an integer >= 2")
        if not isinstance(self.n_ops, int) or self.n_ops < 0:
            raise ConfigError("n_ops must be a non-negative integer")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if len(self.mix) != 3 or any(p < 0 for p in self.mix):
            raise ConfigError("mix must be three non-negative weights (add, del, chlab)")
        if abs(sum(self.mix) - 1.0) > 1e-9:
            raise ConfigError(f"mix must sum to 1, got {sum(self.mix)}")
        parse_reorder(self.reorder)


@dataclass
class RunReport:
    config: ScenarioConfig
    converged: bool
    digests: List[str]
    author_digests: List[str]
    final_edge_count: int
    peak_edges: int
    max_waiting: List[int]
    dropped: int
    final_waiting: int
    requests: List[Request] = field(repr=False)
    edge_series: List[int] = field(repr=False)
    # wall-clock measurements; everything above is deterministic
    op_timings_ns: List[int] = field(repr=False)
    drain_ns: int = 0
    total_wall_ns: int = 0

    @property
    def digest(self) -> Optional[str]:
        return self.digests[0] if self.converged else None

    @property
    def peak_waiting(self) -> int:
        return max(self.max_waiting, default=0)

    @property
    def engine_ns(self) -> int:
        return sum(self.op_timings_ns) + self.drain_ns

    @property
    def mean_ns_per_op(self) -> float:
        n = len(self.op_timings_ns)
        return self.engine_ns / n if n else 0.0

    def window_mean_ns(self, start: int, stop: int) -> float:
        w = self.op_timings_ns[start:stop]
        return sum(w) / len(w)

    def summary(self, include_timings: bool = True) -> Dict:
        out = {
            "config": asdict(self.config),
            "converged": self.converged,
            "digest": self.digest,
            "digests": list(self.digests),
            "author_digests": list(self.author_digests),
            "final_edge_count": self.final_edge_count,
            "peak_edges": self.peak_edges,
            "peak_waiting": self.peak_waiting,
            "max_waiting": list(self.max_waiting),
            "final_waiting": self.final_waiting,
            "dropped": self.dropped,
            "n_requests": len(self.requests),
        }
        if include_timings:
            out.update(
                mean_ns_per_op=self.mean_ns_per_op,
                engine_ns=self.engine_ns,
                total_wall_ns=self.total_wall_ns,
            )
        return out


def check_convergence(engines: Sequence[SiteEngine]) -> bool:
    if any(e.waiting for e in engines):
        return False
    return len({canonical_digest(e.tree) for e in engines}) <= 1


# -- workload ---------------------------------------------------------------

def _fresh_text(rng: random.Random) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(6))


def choose_intent(engine: SiteEngine, rng: random.Random, mix=DEFAULT_MIX) -> Intent:
    """A random edit that is legal on ``engine``'s current replica."""
    tree = engine.tree
    n = len(tree)
    x = rng.random()
    if n == 1 or x < mix[0]:
        parent = tree.id_at(rng.randrange(n))
        index = rng.randint(0, len(tree[parent].children))
        return InsertChild(parent, index)
    # slot 0 always holds the root
    target = tree.id_at(1 + rng.randrange(n - 1))
    if x < mix[0] + mix[1]:
        return DeleteEdge(target)
    return Relabel(target, _fresh_text(rng))


def delivery_order(
    requests: Sequence[Request], model: str, rng: random.Random
) -> List[Request]:
    """One destination's delivery schedule for a complete request log."""
    name, k = parse_reorder(model)
    if name == "uniform-shuffle":
        order = list(requests)
        rng.shuffle(order)
        return order
    if name == "fifo-per-link":
        queues: Dict[int, List[Request]] = {}
        for r in requests:
            queues.setdefault(r.origin, []).append(r)
        labels = [r.origin for r in requests]
        rng.shuffle(labels)
        heads = dict.fromkeys(queues, 0)
        order = []
        for origin in labels:
            order.append(queues[origin][heads[origin]])
            heads[origin] += 1
        return order
    due = [(i + rng.randint(0, k), i) for i in range(len(requests))]
    due.sort()
    return [requests[i] for _, i in due]


# -- scenario ---------------------------------------------------------------

def _author(cfg: ScenarioConfig):
    rng = random.Random(cfg.seed)
    n = cfg.n_sites
    engines = [SiteEngine(s + 1) for s in range(n)]
    pending: List[List[Request]] = [[] for _ in range(n)]
    log: List[Request] = []
    timings: List[int] = []
    edge_series: List[int] = []
    clock = time.perf_counter_ns
    max_batch = 2 * (n - 1)

    def deliver_one(d: int) -> int:
        q = pending[d]
        i = rng.randrange(len(q))
        q[i], q[-1] = q[-1], q[i]
        msg = q.pop()
        t0 = clock()
        engines[d].receive(msg)
        return clock() - t0

    def step(s: int, intent: Intent) -> None:
        eng = engines[s]
        t0 = clock()
        r = eng.generate(intent)
        spent = clock() - t0
        log.append(r)
        for d in range(n):
            if d != s:
                pending[d].append(r)
        for _ in range(rng.randint(0, max_batch)):
            d = rng.randrange(n)
            if pending[d]:
                spent += deliver_one(d)
        timings.append(spent)
        edge_series.append(len(eng.tree))

    for _ in range(cfg.n_ops):
        s = rng.randrange(n)
        step(s, choose_intent(engines[s], rng, cfg.mix))

    if cfg.clear_at_end:
        order = list(range(n))
        rng.shuffle(order)
        for s in order:
            root = engines[s].tree.root
            while root.children:
                step(s, DeleteEdge(next(iter(root.children))))

    drain = 0
    while True:
        live = [d for d in range(n) if pending[d]]
        if not live:
            break
        drain += deliver_one(rng.choice(live))
    return engines, log, timings, edge_series, drain


def _redeliver_one(site: int, log: Sequence[Request], cfg: ScenarioConfig) -> SiteEngine:
    rng = random.Random(f"{cfg.seed}/{cfg.reorder}/{site}")
    eng = SiteEngine(site)
    for r in delivery_order(log, cfg.reorder, rng):
        eng.receive(r)
    return eng


@contextmanager
def gc_paused():
    """Suspend the cyclic collector, as ``timeit`` does.

    Engines build no reference cycles, so nothing leaks meanwhile; left on,
    the collector's full passes over a large heap would dominate the timings.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    cfg.validate()
    with gc_paused():
        return _run(cfg)


def _run(cfg: ScenarioConfig) -> RunReport:
    start = time.perf_counter_ns()
    engines, log, timings, edge_series, drain = _author(cfg)
    author_digests = [canonical_digest(e.tree) for e in engines]
    converged = check_convergence(engines)
    final_engines = engines
    if cfg.redeliver:
        sites = [e.site_id for e in engines]
        if cfg.threads:
            with ThreadPoolExecutor(max_workers=min(8, len(sites))) as pool:
                final_engines = list(pool.map(lambda s: _redeliver_one(s, log, cfg), sites))
        else:
            final_engines = [_redeliver_one(s, log, cfg) for s in sites]
        converged = (
            converged
            and check_convergence(final_engines)
            and canonical_digest(final_engines[0].tree) == author_digests[0]
        )
    digests = [canonical_digest(e.tree) for e in final_engines]
    peaks = [
        max(a.peak_waiting, b.peak_waiting) for a, b in zip(engines, final_engines)
    ]
    return RunReport(
        config=cfg,
        converged=converged,
        digests=digests,
        author_digests=author_digests,
        final_edge_count=len(final_engines[0].tree),
        peak_edges=max(edge_series, default=1),
        max_waiting=peaks,
        dropped=sum(e.dropped for e in engines) + (
            sum(e.dropped for e in final_engines) if cfg.redeliver else 0
        ),
        final_waiting=sum(len(e.waiting) for e in final_engines),
        requests=log,
        edge_series=edge_series,
        op_timings_ns=timings,
        drain_ns=drain,
        total_wall_ns=time.perf_counter_ns() - start,
    )


# -- benchmarks -------------------------------------------------------------

def bench_users(
    n_ops: int = 1000,
    users: Sequence[int] = tuple(range(10, 81, 10)),
    seed: int = 0,
    repeats: int = 1,
    mix=DEFAULT_MIX,
) -> List[Dict]:
    """Engine time for a fixed workload as the number of sites grows.

    With ``repeats > 1`` the fastest run is kept for the timing columns.
    """
    rows = []
    for u in users:
        cfg = ScenarioConfig(n_sites=u, n_ops=n_ops, seed=seed, mix=tuple(mix), redeliver=False)
        runs = [run_scenario(cfg) for _ in range(max(1, repeats))]
        best = min(runs, key=lambda r: r.engine_ns)
        rows.append(
            {
                "users": u,
                "ops": n_ops,
                "seed": seed,
                "converged": all(r.converged for r in runs),
                "engine_ns": best.engine_ns,
                "mean_ns_per_op": best.mean_ns_per_op,
                "peak_edges": best.peak_edges,
                "peak_waiting": best.peak_waiting,
            }
        )
    return rows


def bench_ops(
    window: int = 10_000,
    totals: Sequence[int] = tuple(range(10_000, 80_001, 10_000)),
    users: int = 20,
    seed: int = 0,
    mix=DEFAULT_MIX,
    repeats: int = 1,
) -> List[Dict]:
    """Time of the last ``window`` operations after ``total`` operations.

    One run of ``max(totals)`` operations is made and sliced, so every row
    shares the same history prefix.  With ``repeats > 1`` the identical run
    is repeated and each window keeps its fastest time.
    """
    totals = sorted(totals)
    if not totals or totals[0] < window:
        raise ConfigError("every total must be at least one window long")
    cfg = ScenarioConfig(n_sites=users, n_ops=totals[-1], seed=seed, mix=tuple(mix), redeliver=False)
    best = [None] * len(totals)
    converged = True
    for _ in range(max(1, repeats)):
        report = run_scenario(cfg)
        converged = converged and report.converged
        live = [report.edge_series[t - 1] for t in totals]
        for i, t in enumerate(totals):
            ns = sum(report.op_timings_ns[t - window : t])
            best[i] = ns if best[i] is None else min(best[i], ns)
        del report  # large runs hold a lot of memory
    return [
        {
            "total_ops": t,
            "window": window,
            "users": users,
            "seed": seed,
            "converged": converged,
            "window_ns": ns,
            "mean_ns_per_op": ns / window,
            "live_edges": n,
        }
        for t, ns, n in zip(totals, best, live)
    ]
