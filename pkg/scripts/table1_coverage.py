"""Null-design coverage of the bootstrap 95% interval for the indirect effect.

Grid: n in {100, 200, 400} by number of mediators in {5, 10}. The defaults
are full scale and take hours on one core; use --runs/--B to shrink it.
"""

import argparse

from _common import results_dir, write_json, write_rows
from mediation.studies import coverage_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", default="100,200,400")
    ap.add_argument("--mediators", default="5,10")
    ap.add_argument("--runs", type=int, default=500)
    ap.add_argument("--B", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    rows = []
    for r in (int(v) for v in args.mediators.split(",")):
        for n in (int(v) for v in args.ns.split(",")):
            summary, _ = coverage_study("null", n, r, runs=args.runs, B=args.B, seed=args.seed, workers=args.workers)
            rows.append(summary)
            print(f"n={n:4d} mediators={r:3d} coverage={summary['coverage']:.3f} type-I={summary['power']:.3f}",
                  flush=True)
    out = results_dir(args.out)
    write_rows(out / "table1_coverage.csv", rows)
    write_json(out / "table1_coverage.json", {"args": vars(args), "rows": rows})


if __name__ == "__main__":
    main()
