"""Total engine time for a fixed workload as the number of sites grows.

Prints the CSV table and a one-line summary of the growth exponent.
"""
import argparse
import csv
import math
import statistics
import sys

from fcedit.simnet import bench_users


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ops", type=int, default=1000)
    p.add_argument("--users", type=int, nargs="+", default=list(range(10, 81, 10)))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args(argv)

    rows = bench_users(n_ops=args.ops, users=args.users, seed=args.seed, repeats=args.repeats)
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if len(rows) > 1:
        xs = [math.log(r["users"]) for r in rows]
        ys = [math.log(r["engine_ns"]) for r in rows]
        slope = statistics.linear_regression(xs, ys).slope
        ms = [r["engine_ns"] / 1e6 for r in rows]
        print(f"# engine ms {ms[0]:.0f} -> {ms[-1]:.0f}, log-log slope {slope:.2f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
