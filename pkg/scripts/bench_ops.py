"""Mean engine time of the last window of operations against history length."""
import argparse
import csv
import sys

from fcedit.simnet import DEFAULT_MIX, bench_ops


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--window", type=int, default=10_000)
    p.add_argument("--totals", type=int, nargs="+", default=list(range(10_000, 80_001, 10_000)))
    p.add_argument("--users", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mix", type=float, nargs=3, default=list(DEFAULT_MIX),
                   metavar=("ADD", "DEL", "CHLAB"))
    p.add_argument("--repeats", type=int, default=2)
    args = p.parse_args(argv)

    rows = bench_ops(window=args.window, totals=args.totals, users=args.users,
                     seed=args.seed, mix=tuple(args.mix), repeats=args.repeats)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    means = [r["mean_ns_per_op"] for r in rows]
    print(f"# max/min window mean: {max(means) / min(means):.2f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
