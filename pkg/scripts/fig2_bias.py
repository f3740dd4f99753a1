"""Bias of numeric, rare-disease and probit odds-ratio effects across outcome prevalence.

    python scripts/fig2_bias.py --runs 500 --workers 4
"""

import argparse

from _common import results_dir, write_json, write_rows
from mediation.studies import bias_study, parse_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grid", default="0.05,0.1,0.2,0.3,0.4,0.5")
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--runs", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()

    rows = bias_study(parse_grid(args.grid), n=args.n, runs=args.runs, seed=args.seed, workers=args.workers)
    out = results_dir(args.out)
    write_rows(out / "fig2_bias.csv", rows)
    write_json(out / "fig2_bias.json", {"args": vars(args), "rows": rows})

    print(f"{'prev':>6} {'method':>13} {'DE bias':>10} {'IE bias':>10}")
    for r in rows:
        print(f"{r['prevalence']:>6.2f} {r['method']:>13} {r['de_bias']:>10.4f} {r['ie_bias']:>10.4f}")


if __name__ == "__main__":
    main()
