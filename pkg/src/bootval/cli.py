"""Command-line front end.

`bootval validate` runs optimism corrections and confidence intervals on a
user CSV; `bootval simulate` runs scenario coverage studies. Reports are
machine-readable (JSON for validation, CSV + JSON for simulations) and
fully reproducible from the embedded config + seed; progress and timing go
to stderr so stdout stays parseable.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .data import DataError, load_csv
from .intervals import (APPARENT, CI_METHODS, DELONG, LOCATION_SHIFTED,
                        TWO_STAGE, apparent_bootstrap_ci, delong_interval,
                        location_shifted_ci, two_stage_ci)
from .metrics import C_STATISTIC, CALIBRATION_SLOPE, measure_value
from .models import FitRecipe, predict
from .optimism import METHODS, apparent_fit, correct, evaluate_replicates
from .resampling import ResamplePlan, default_workers
from .simulation import (GeneratorConfig, ScenarioSpec, coverage_to_csv,
                         coverage_to_json, read_scenario_params,
                         run_scenario)

RNG_SCHEME = "philox-seedsequence-keyed"


class ConfigError(ValueError):
    pass


def _sig6(x):
    """Print-side rounding to 6 significant digits."""
    return float(f"{x:.6g}")


def _parse_list(raw: str, allowed, what: str) -> list[str]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    for item in items:
        base = item.split(":", 1)[0]
        if base not in allowed:
            raise ConfigError(f"unknown {what} {item!r}")
    if not items:
        raise ConfigError(f"no {what} requested")
    return items


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bootval",
        description="Internal validation of binary-outcome prediction "
                    "models with optimism-corrected bootstrap confidence "
                    "intervals.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="validate a model on a CSV dataset")
    v.add_argument("--input", required=True, help="CSV file (header row, "
                   "comma-delimited, numeric columns)")
    v.add_argument("--outcome-column", required=True)
    v.add_argument("--estimator", choices=["ml", "ridge", "lasso"],
                   default="ml")
    v.add_argument("--penalty", type=float, default=None,
                   help="fixed lambda; omit for CV selection (ridge/lasso)")
    v.add_argument("--measure", choices=[C_STATISTIC, CALIBRATION_SLOPE],
                   default=C_STATISTIC)
    v.add_argument("--corrections", default="harrell,0.632,0.632plus",
                   help="comma-separated subset of harrell,0.632,0.632plus")
    v.add_argument("--ci-methods", default="delong,apparent,location-shift,"
                   "two-stage", help="comma-separated subset of "
                   "delong,apparent,location-shift,two-stage")
    v.add_argument("--B", type=int, default=2000)
    v.add_argument("--inner-B", type=int, default=None,
                   help="inner bootstrap size for two-stage (default: B)")
    v.add_argument("--alpha", type=float, default=0.05)
    v.add_argument("--seed", type=int, default=1)
    v.add_argument("--workers", type=int, default=None)
    v.add_argument("--output", default="-", help="JSON report path or -")

    s = sub.add_parser("simulate", help="run scenario coverage studies")
    s.add_argument("--scenarios", default="1,5,17,21",
                   help="comma-separated scenario ids (1..24)")
    s.add_argument("--scenario-params", default=None,
                   help="key-value scenario parameter file (overrides "
                   "--scenarios)")
    s.add_argument("--generator-params", default=None,
                   help="generator parameter table (default: bundled "
                   "synthetic set)")
    s.add_argument("--methods", default="delong,apparent,"
                   "location-shift:harrell,two-stage:harrell")
    s.add_argument("--replications", type=int, default=200)
    s.add_argument("--B", type=int, default=200)
    s.add_argument("--inner-B", type=int, default=None)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--calibration-n", type=int, default=1_000_000)
    s.add_argument("--estimand-n", type=int, default=500_000)
    s.add_argument("--output-prefix", default="coverage",
                   help="writes <prefix>.csv and <prefix>.json")
    return parser


def _check_common(args):
    if args.B < 1:
        raise ConfigError("B must be >= 1")
    if not 0.0 < args.alpha < 1.0:
        raise ConfigError("alpha must be in (0, 1)")
    if args.inner_B is None:
        args.inner_B = args.B
    if args.inner_B < 1:
        raise ConfigError("inner_B must be >= 1")
    if args.workers is None:
        args.workers = default_workers()
    if args.workers < 1:
        raise ConfigError("workers must be >= 1")


def validate_command(args) -> dict:
    _check_common(args)
    corrections = _parse_list(args.corrections, METHODS, "correction")
    ci_methods = _parse_list(args.ci_methods, CI_METHODS, "CI method")
    if DELONG in ci_methods and args.measure != C_STATISTIC:
        raise ConfigError("the DeLong interval applies to the c-statistic "
                          "only")
    d = load_csv(args.input, args.outcome_column)
    recipe = FitRecipe(args.estimator, penalty=args.penalty)
    plan = ResamplePlan(args.B, args.seed)

    t0 = time.monotonic()
    model = apparent_fit(d, recipe, plan)
    scores = predict(model, d)
    apparent = measure_value(args.measure, scores, d.outcomes)
    reps = evaluate_replicates(d, recipe, args.measure, plan,
                               workers=args.workers)
    print(f"[bootval] {plan.B} replicates evaluated "
          f"({int(reps.valid.sum())} valid)", file=sys.stderr)

    corrections_out = {}
    for method in corrections:
        res = correct(method, d, recipe, args.measure, plan,
                      replicates=reps, apparent=apparent)
        entry = {"apparent": _sig6(res.apparent),
                 "corrected": _sig6(res.corrected),
                 "optimism": _sig6(res.optimism),
                 "n_valid": res.n_valid}
        if res.theta_out is not None:
            entry["theta_out"] = _sig6(res.theta_out)
        if res.R is not None:
            entry["relative_overfitting_rate"] = _sig6(res.R)
            entry["weight"] = _sig6(res.w)
            entry["r_fallback"] = res.r_fallback
        corrections_out[method] = entry

    intervals_out = []

    def record(est):
        row = {"method": est.method, "point": _sig6(est.point),
               "lower": _sig6(est.lower), "upper": _sig6(est.upper),
               "alpha": est.alpha, "n_valid": est.n_valid}
        if est.correction:
            row["correction"] = est.correction
        if est.B_outer:
            row["B_outer"] = est.B_outer
        if est.B_inner:
            row["B_inner"] = est.B_inner
        if est.shift is not None:
            row["shift"] = _sig6(est.shift)
        intervals_out.append(row)

    if DELONG in ci_methods:
        record(delong_interval(d, recipe, plan, args.alpha,
                               apparent_scores=scores))
    if APPARENT in ci_methods:
        record(apparent_bootstrap_ci(d, recipe, args.measure, plan,
                                     args.alpha, replicates=reps,
                                     apparent=apparent))
    if LOCATION_SHIFTED in ci_methods:
        for method in corrections:
            record(location_shifted_ci(d, recipe, args.measure, plan,
                                       method, args.alpha, replicates=reps,
                                       apparent=apparent))
    if TWO_STAGE in ci_methods:
        for method in corrections:
            point = correct(method, d, recipe, args.measure, plan,
                            replicates=reps, apparent=apparent)
            print(f"[bootval] two-stage ({method}): "
                  f"{plan.B} x {args.inner_B} resamples...", file=sys.stderr)
            record(two_stage_ci(d, recipe, args.measure, plan, args.inner_B,
                                method, args.alpha, workers=args.workers,
                                point_result=point))
    print(f"[bootval] validate finished in "
          f"{time.monotonic() - t0:.1f}s", file=sys.stderr)

    return {
        "config": {
            "command": "validate",
            "input": args.input,
            "outcome_column": args.outcome_column,
            "estimator": args.estimator,
            "penalty": args.penalty,
            "measure": args.measure,
            "corrections": corrections,
            "ci_methods": ci_methods,
            "B": args.B,
            "inner_B": args.inner_B,
            "alpha": args.alpha,
            "seed": args.seed,
        },
        "dataset": {"n": d.n, "p": d.p, "names": list(d.names)},
        "apparent": _sig6(apparent),
        "corrections": corrections_out,
        "intervals": intervals_out,
        "replicates": {"B": plan.B, "valid": int(reps.valid.sum()),
                       "oob_valid": int((reps.valid &
                                         reps.oob_valid).sum())},
        "library_version": __version__,
        "rng_scheme": RNG_SCHEME,
    }


def simulate_command(args) -> tuple[str, str]:
    _check_common(args)
    methods = _parse_list(args.methods, CI_METHODS, "CI method")
    if args.replications < 1:
        raise ConfigError("replications must be >= 1")
    if args.scenario_params:
        specs = read_scenario_params(args.scenario_params)
    else:
        ids = [int(s) for s in args.scenarios.split(",") if s.strip()]
        specs = [ScenarioSpec.by_id(i) for i in ids]
    config = (GeneratorConfig.from_file(args.generator_params)
              if args.generator_params else GeneratorConfig.default())

    results = []
    t0 = time.monotonic()
    for spec in specs:
        print(f"[bootval] scenario {spec.id} (n={spec.n}, p={spec.p}): "
              f"{args.replications} replications, B={args.B}, "
              f"inner_B={args.inner_B}", file=sys.stderr)
        results.extend(run_scenario(
            spec, methods, args.replications, args.B, args.inner_B,
            args.seed, alpha=args.alpha, workers=args.workers,
            config=config, calibration_n=args.calibration_n,
            estimand_n=args.estimand_n))
        print(f"[bootval] scenario {spec.id} done "
              f"({time.monotonic() - t0:.1f}s elapsed)", file=sys.stderr)

    meta = {
        "command": "simulate",
        "scenarios": [s.id for s in specs],
        "methods": methods,
        "replications": args.replications,
        "B": args.B,
        "inner_B": args.inner_B,
        "alpha": args.alpha,
        "seed": args.seed,
        "calibration_n": args.calibration_n,
        "estimand_n": args.estimand_n,
        "library_version": __version__,
        "rng_scheme": RNG_SCHEME,
        "binary_generator": "gaussian-copula-dichotomized",
        "estimand_policy": "fixed-per-scenario",
    }
    return coverage_to_csv(results), coverage_to_json(results, meta)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            report = validate_command(args)
            text = json.dumps(report, indent=2, sort_keys=True) + "\n"
            if args.output == "-":
                sys.stdout.write(text)
            else:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
        else:
            csv_text, json_text = simulate_command(args)
            with open(args.output_prefix + ".csv", "w",
                      encoding="utf-8") as fh:
                fh.write(csv_text)
            with open(args.output_prefix + ".json", "w",
                      encoding="utf-8") as fh:
                fh.write(json_text)
    except (ConfigError, DataError, ValueError) as exc:
        print(f"bootval: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
