"""Command-line entry point: ``fcedit <subcommand> ...``.

Exit status is 0 on success or convergence, 1 on divergence and 2 on usage
or input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import simnet
from .engine import SiteEngine
from .simnet import ConfigError, ScenarioConfig
from .tree import canonical_digest
from .wire import WireError, read_log, write_log
from .xmlmap import XmlImportError, export_xml, import_xml

SIMULATE_COLUMNS = (
    "sites", "ops", "seed", "mix", "reorder", "clear", "converged", "digest",
    "final_edges", "peak_edges", "peak_waiting", "final_waiting", "dropped", "n_requests",
    "mean_ns_per_op", "wall_ns",
)
WALL_CLOCK_COLUMNS = ("mean_ns_per_op", "wall_ns", "engine_ns", "window_ns")


class UsageError(Exception):
    pass


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _mix(text: str):
    try:
        parts = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected add,del,chlab weights, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("mix needs exactly three weights")
    return parts


def _write_rows(rows: Sequence[Dict], columns: Sequence[str], out: Optional[str]) -> None:
    fp = open(out, "w", newline="", encoding="utf-8") if out else sys.stdout
    try:
        w = csv.DictWriter(fp, fieldnames=list(columns), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow(row)
    finally:
        if out:
            fp.close()


def _load_log(path: str):
    try:
        with open(path, "rb") as fp:
            return list(read_log(fp))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}")
    except WireError as exc:
        raise UsageError(f"{path}: {exc}")


def cmd_simulate(args) -> int:
    cfg = ScenarioConfig(
        n_sites=args.sites,
        n_ops=args.ops,
        seed=args.seed,
        mix=args.mix,
        reorder=args.reorder,
        redeliver=not args.no_redeliver,
        clear_at_end=args.clear,
        threads=args.threads,
    )
    report = simnet.run_scenario(cfg)
    row = {
        "sites": cfg.n_sites,
        "ops": cfg.n_ops,
        "seed": cfg.seed,
        "mix": ",".join(f"{p:g}" for p in cfg.mix),
        "reorder": cfg.reorder,
        "clear": int(cfg.clear_at_end),
        "converged": str(report.converged).lower(),
        "digest": report.digest or "",
        "final_edges": report.final_edge_count,
        "peak_edges": report.peak_edges,
        "peak_waiting": report.peak_waiting,
        "final_waiting": report.final_waiting,
        "dropped": report.dropped,
        "n_requests": len(report.requests),
        "mean_ns_per_op": f"{report.mean_ns_per_op:.1f}",
        "wall_ns": report.total_wall_ns,
    }
    _write_rows([row], SIMULATE_COLUMNS, args.out)
    if args.json:
        Path(args.json).write_text(json.dumps(report.summary(), indent=2) + "\n", encoding="utf-8")
    log_path = args.log
    if not report.converged and not log_path:
        log_path = f"diverged-seed{cfg.seed}.jsonl"
    if log_path:
        with open(log_path, "wb") as fp:
            write_log(report.requests, fp)
    if not report.converged:
        print(f"diverged; request log written to {log_path}", file=sys.stderr)
        return 1
    return 0


def cmd_check(args) -> int:
    blobs = []
    for path in args.exports:
        try:
            blobs.append(Path(path).read_bytes())
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}")
    if len(set(blobs)) <= 1:
        print("converged")
        return 0
    print("diverged")
    return 1


def cmd_replay(args) -> int:
    log = _load_log(args.log)
    engines = [SiteEngine(s) for s in range(1, args.sites + 1)]
    for e in engines:
        for r in log:
            e.receive(r)
    digests = {canonical_digest(e.tree) for e in engines}
    waiting = sum(len(e.waiting) for e in engines)
    if len(digests) == 1 and not waiting:
        print(digests.pop())
        return 0
    print(f"diverged: {len(digests)} distinct digests, {waiting} waiting requests")
    return 1


def cmd_import(args) -> int:
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}")
    try:
        tree, requests = import_xml(text, site=args.site)
    except XmlImportError as exc:
        raise UsageError(f"{args.input}: {exc}")
    if args.out:
        with open(args.out, "wb") as fp:
            write_log(requests, fp)
    else:
        write_log(requests, sys.stdout.buffer)
    print(canonical_digest(tree), file=sys.stderr)
    return 0


def cmd_export(args) -> int:
    log = _load_log(args.input)
    engine = SiteEngine(args.site)
    for r in log:
        engine.receive(r)
    if engine.waiting:
        print(f"{len(engine.waiting)} requests could not be executed", file=sys.stderr)
    text = export_xml(engine.tree, args.mode)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if not engine.waiting else 1


def cmd_bench_users(args) -> int:
    rows = simnet.bench_users(
        n_ops=args.ops, users=args.users, seed=args.seed, repeats=args.repeats, mix=args.mix
    )
    _write_rows(rows, list(rows[0]) if rows else [], args.out)
    return 0 if all(r["converged"] for r in rows) else 1


def cmd_bench_ops(args) -> int:
    rows = simnet.bench_ops(
        window=args.window, totals=args.totals, users=args.users, seed=args.seed, mix=args.mix,
        repeats=args.repeats,
    )
    _write_rows(rows, list(rows[0]), args.out)
    return 0 if all(r["converged"] for r in rows) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fcedit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one seeded multi-site scenario")
    s.add_argument("--sites", type=int, default=20)
    s.add_argument("--ops", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mix", type=_mix, default=simnet.DEFAULT_MIX, help="add,del,chlab weights")
    s.add_argument("--reorder", default="uniform-shuffle",
                   help="fifo-per-link | uniform-shuffle | bounded-delay(K)")
    s.add_argument("--out", help="CSV report (default: stdout)")
    s.add_argument("--json", help="also write a JSON report with the config echo")
    s.add_argument("--log", help="write the request log (JSON lines)")
    s.add_argument("--clear", action="store_true", help="every site deletes all top-level edges at the end")
    s.add_argument("--no-redeliver", action="store_true", help="skip the redelivery phase")
    s.add_argument("--threads", action="store_true", help="redeliver with one thread per engine")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="compare per-site canonical exports")
    c.add_argument("exports", nargs="+")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("replay", help="re-execute a request log on fresh sites")
    r.add_argument("--log", required=True)
    r.add_argument("--sites", type=int, default=1)
    r.set_defaults(func=cmd_replay)

    i = sub.add_parser("import", help="XML document to request log")
    i.add_argument("--in", dest="input", required=True)
    i.add_argument("--out")
    i.add_argument("--site", type=int, default=1)
    i.set_defaults(func=cmd_import)

    e = sub.add_parser("export", help="request log to XML or canonical form")
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--out")
    e.add_argument("--mode", choices=("pretty", "canonical"), default="pretty")
    e.add_argument("--canonical", dest="mode", action="store_const", const="canonical",
                   help="shorthand for --mode canonical")
    e.add_argument("--site", type=int, default=1)
    e.set_defaults(func=cmd_export)

    bu = sub.add_parser("bench-users", help="engine time against number of sites")
    bu.add_argument("--ops", type=int, default=1000)
    bu.add_argument("--users", type=_int_list, default=list(range(10, 81, 10)))
    bu.add_argument("--seed", type=int, default=0)
    bu.add_argument("--repeats", type=int, default=1)
    bu.add_argument("--mix", type=_mix, default=simnet.DEFAULT_MIX)
    bu.add_argument("--out")
    bu.set_defaults(func=cmd_bench_users)

    bo = sub.add_parser("bench-ops", help="windowed engine time against history length")
    bo.add_argument("--window", type=int, default=10_000)
    bo.add_argument("--totals", type=_int_list, default=list(range(10_000, 80_001, 10_000)))
    bo.add_argument("--users", type=int, default=20)
    bo.add_argument("--seed", type=int, default=0)
    bo.add_argument("--mix", type=_mix, default=simnet.DEFAULT_MIX)
    bo.add_argument("--repeats", type=int, default=1)
    bo.add_argument("--out")
    bo.set_defaults(func=cmd_bench_ops)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, ValueError) as exc:
        sys.stderr.write(parser.format_usage())
        print(f"fcedit {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
