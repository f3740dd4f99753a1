"""Command-line front end: ``fit``, ``effects``, ``simulate``, ``bench``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import ColumnRoles, Intervention, default_intervention, load_csv, write_csv
from .effects import DEFAULT_SCALE, FAMILY_FOR_OUTCOME, SCALES, AnalysisConfig, fit_outcome
from .errors import ConfigError, DataError, MediationError
from .glm import fit_mediators
from .inference import EFFECTS, bootstrap_effects
from .sim import (
    LogisticSimConfig,
    SurvivalSimConfig,
    gen_logistic,
    gen_pathway_example,
    gen_survival,
    k_for_prevalence,
    true_effects_oracle,
)
from .studies import bias_study, coverage_study, parse_grid

SCHEMA_VERSION = "1.0"
SCALE_ALIASES = {
    "mean": "mean_difference",
    "mean_difference": "mean_difference",
    "odds": "odds_ratio",
    "odds_ratio": "odds_ratio",
    "restricted": "restricted_mean_difference",
    "restricted_mean_difference": "restricted_mean_difference",
}
# flags that never change results, so they stay out of the metadata echo
NON_SEMANTIC = {"workers", "out", "dump_replicates", "func", "quiet"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("ConfigError", message)
        sys.exit(2)


def _emit_error(kind, message):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _metadata(args):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in NON_SEMANTIC}
    return {
        "spec_version": SCHEMA_VERSION,
        "tool": "mediation",
        "version": __version__,
        "command": args.command,
        "config": cfg,
        "seed": getattr(args, "seed", None),
    }


def _write_json(path, obj):
    text = json.dumps(obj, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _write_rows(path, rows, columns=None):
    columns = columns or list(rows[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def _load(args):
    schema = ColumnRoles.load(args.schema)
    return load_csv(args.data, schema)


def _family(args, ds):
    family = args.family or FAMILY_FOR_OUTCOME[ds.outcome_kind]
    expected = FAMILY_FOR_OUTCOME[ds.outcome_kind]
    if family != expected:
        raise ConfigError(f"family {family!r} does not fit a {ds.outcome_kind} outcome (use {expected!r})")
    return family


def _level(v):
    if v is None or str(v).lower() == "auto":
        return None
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"exposure level must be a number or 'auto', got {v!r}") from None


# ----------------------------------------------------------------- commands


def cmd_fit(args):
    ds = _load(args)
    family = _family(args, ds)
    med = fit_mediators(ds, args.covariance_mode)
    out = fit_outcome(ds, family)
    doc = {
        "metadata": _metadata(args),
        "names": {
            "exposures": list(ds.exposure_names),
            "mediators": list(ds.mediator_names),
            "covariates": list(ds.covariate_names),
        },
        "mediator_model": med.to_dict(),
        "outcome_model": out.to_dict(),
    }
    _write_json(args.out, doc)
    return 0


def _table(ds, results):
    head = f"{'Exposure':<24}" + "".join(f"{name.capitalize():>30}" for name in ("indirect", "direct", "total"))
    lines = [head, "-" * len(head)]
    for i, res in results:
        cells = []
        for k in (1, 0, 2):
            est = res.estimate.as_tuple()[k]
            lo, hi = res.intervals[k]
            cells.append(f"{est:>10.4g} [{lo:.4g}, {hi:.4g}]".rjust(30))
        lines.append(f"{ds.exposure_names[i]:<24}" + "".join(cells))
    return "\n".join(lines)


def cmd_effects(args):
    ds = _load(args)
    family = _family(args, ds)
    scale = SCALE_ALIASES.get(args.scale, args.scale) if args.scale else DEFAULT_SCALE[family]
    if scale not in SCALES:
        raise ConfigError(f"unknown scale {args.scale!r}")
    lo, hi = _level(args.x_low), _level(args.x_high)
    if (lo is None) != (hi is None):
        raise ConfigError("--x-low and --x-high must both be numbers or both 'auto'")
    exposures = range(ds.p) if args.all_exposures else [ds.exposure_index(args.exposure)]
    results = []
    for i in exposures:
        cfg = AnalysisConfig(
            family=family, scale=scale, exposure=i, x_low=lo, x_high=hi, L=args.L, draws=args.draws,
            seed=args.seed, covariance_mode=args.covariance_mode, crn=not args.no_crn,
        )
        iv = default_intervention(ds, i) if lo is None else Intervention(i, lo, hi)
        res = bootstrap_effects(ds, cfg, B=args.B, ci_level=args.ci_level, workers=args.workers, iv=iv,
                                min_B=args.min_B)
        results.append((i, res))
    doc = {
        "metadata": _metadata(args),
        "family": family,
        "scale": scale,
        "n": ds.n,
        "exposures": [{"exposure": ds.exposure_names[i], **res.to_dict()} for i, res in results],
    }
    _write_json(args.out, doc)
    if args.dump_replicates:
        rows = []
        for i, res in results:
            for b, rep in enumerate(res.replicates):
                rows.append({"exposure": ds.exposure_names[i], "replicate": b,
                             **{name: float(v) for name, v in zip(EFFECTS, rep)}})
        _write_rows(args.dump_replicates, rows)
    if not args.quiet:
        print(_table(ds, results), file=sys.stderr if args.out in (None, "-") else sys.stdout)
    return 0


def cmd_simulate(args):
    if args.design == "logistic":
        k = args.k if args.k is not None else k_for_prevalence(args.prevalence)
        cfg = LogisticSimConfig(n=args.n, k=k)
        ds = gen_logistic(cfg, args.seed)
        oracle = true_effects_oracle(cfg, draws=args.oracle_draws)
        cfg_doc = cfg.to_dict()
    elif args.design == "survival":
        cfg = SurvivalSimConfig.design(args.strength, args.n, args.n_med)
        ds = gen_survival(cfg, args.seed)
        oracle = true_effects_oracle(cfg, draws=args.oracle_draws)
        cfg_doc = cfg.to_dict()
    else:
        ds = gen_pathway_example(args.n, args.seed)
        oracle = None
        cfg_doc = {"design": "pathway", "n": args.n}
    out = Path(args.out)
    schema = write_csv(ds, out)
    sidecar = {
        "metadata": _metadata(args),
        "generator": cfg_doc,
        "seed": args.seed,
        "schema": schema.to_mapping(),
        "oracle": None if oracle is None else {
            "scale": oracle.scale, "direct": oracle.direct, "indirect": oracle.indirect, "total": oracle.total,
            "intervention": oracle.intervention.to_dict(),
        },
    }
    _write_json(out.with_suffix(".json"), sidecar)
    _write_json(out.with_suffix(".schema.json"), schema.to_mapping())
    return 0


def cmd_bench(args):
    if args.study == "bias":
        rows = bias_study(parse_grid(args.prevalence_grid), n=args.n, runs=args.runs, seed=args.seed,
                          workers=args.workers, truth_n=args.truth_n)
        columns = ["method", "prevalence", "de_bias", "ie_bias", "n_runs", "k", "de_truth", "ie_truth",
                   "de_mean", "ie_mean"]
    else:
        strength = "null" if args.study == "null" else args.strength
        summary, _ = coverage_study(strength, args.n, args.n_med, runs=args.runs, B=args.B, seed=args.seed,
                                    workers=args.workers, ci_level=args.ci_level)
        rows = [summary]
        columns = list(summary)
    out = Path(args.out)
    _write_rows(out, rows, columns)
    _write_json(out.with_suffix(".json"), {"metadata": _metadata(args), "rows": rows})
    if not args.quiet:
        for row in rows:
            print(", ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    return 0


# ------------------------------------------------------------------ parser


def build_parser():
    p = _Parser(prog="mediation", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(sp):
        sp.add_argument("--data", required=True, help="CSV file with a header row")
        sp.add_argument("--schema", required=True, help="JSON/TOML column -> role map")
        sp.add_argument("--family", choices=("linear", "logistic", "cox"), help="default: from the outcome type")
        sp.add_argument("--covariance-mode", choices=("full", "diagonal"), default="full")

    sp = sub.add_parser("fit", help="fit mediator and outcome models, write JSON")
    data_args(sp)
    sp.add_argument("--out", default="-")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("effects", help="effects with bootstrap intervals")
    data_args(sp)
    sp.add_argument("--scale", help="mean | odds | restricted (or the long names)")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exposure", default="0", help="exposure column name or 0-based index")
    g.add_argument("--all-exposures", action="store_true")
    sp.add_argument("--x-low", default="auto")
    sp.add_argument("--x-high", default="auto")
    sp.add_argument("--L", type=float, help="restriction horizon (Cox)")
    sp.add_argument("--draws", type=int, default=1)
    sp.add_argument("--B", type=int, default=1000)
    sp.add_argument("--min-B", type=int, default=100, help=argparse.SUPPRESS)
    sp.add_argument("--ci-level", type=float, default=0.95)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--no-crn", action="store_true", help="independent mediator draws per level")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", default="-")
    sp.add_argument("--dump-replicates", metavar="CSV")
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_effects)

    sp = sub.add_parser("simulate", help="write a simulated dataset plus JSON sidecar")
    sp.add_argument("--design", choices=("logistic", "survival", "pathway"), required=True)
    sp.add_argument("--n", type=int, default=500)
    sp.add_argument("--k", type=float)
    sp.add_argument("--prevalence", type=float, default=0.5)
    sp.add_argument("--n-med", type=int, default=5)
    sp.add_argument("--strength", choices=("null", "weak", "strong"), default="strong")
    sp.add_argument("--oracle-draws", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("bench", help="bias, coverage and power studies")
    sp.add_argument("--study", choices=("bias", "null", "power"), required=True)
    sp.add_argument("--n", type=int, default=400)
    sp.add_argument("--n-med", type=int, default=5)
    sp.add_argument("--strength", choices=("weak", "strong"), default="strong")
    sp.add_argument("--runs", type=int, default=500)
    sp.add_argument("--B", type=int, default=1000)
    sp.add_argument("--ci-level", type=float, default=0.95)
    sp.add_argument("--prevalence-grid", default="0.05,0.1,0.2,0.3,0.4,0.5")
    sp.add_argument("--truth-n", type=int, default=200_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--quiet", action="store_true")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MediationError as e:
        _emit_error(type(e).__name__, str(e))
        return e.exit_code
    except (OSError, UnicodeDecodeError) as e:
        _emit_error("DataError", str(e))
        return DataError.exit_code
    except ValueError as e:
        _emit_error("ConfigError", str(e))
        return ConfigError.exit_code
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        _emit_error("NumericalError", str(e))
        return 4


if __name__ == "__main__":
    sys.exit(main())
