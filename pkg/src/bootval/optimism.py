"""Bootstrap optimism corrections: Harrell bias correction, 0.632, 0.632+.

All three corrections consume the identical resample sequence from one
plan; the per-replicate quantities (performance on the resample, on the
original data, and on the out-of-bag subjects) are computed once and
shared. Each replicate refits the full model-development recipe, including
any penalty tuning, on the resample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .metrics import MetricError, measure_value, no_information
from .models import FitRecipe, fit, predict
from .resampling import ResamplePlan, draw, map_records, stream

HARRELL = "harrell"
P632 = "0.632"
P632PLUS = "0.632plus"
METHODS = (HARRELL, P632, P632PLUS)

#: resample redraw budget before a replicate is marked invalid
MAX_REDRAWS = 25


class OptimismError(ValueError):
    pass


@dataclass(frozen=True)
class ReplicateSet:
    """Per-replicate performance triples, aligned by replicate index."""

    theta_boot: np.ndarray
    theta_orig: np.ndarray
    theta_out: np.ndarray
    valid: np.ndarray      # resample drawable, boot/orig measurable
    oob_valid: np.ndarray  # valid and OOB nonempty, two-class, measurable

    @property
    def B(self) -> int:
        return self.theta_boot.shape[0]


def apparent_fit(d: Dataset, recipe: FitRecipe, plan: ResamplePlan):
    """Fit the recipe on the original data (deterministic CV stream keyed
    under the plan's level so nested runs never share fold draws)."""
    fold_rng = stream(plan.seed, *plan.level, 0)
    return fit(d, recipe, fold_rng=fold_rng)


class _ReplicateTask:
    """Picklable per-replicate evaluation for the bootstrap engine."""

    def __init__(self, d: Dataset, recipe: FitRecipe, measure: str,
                 plan: ResamplePlan, warm_start=None):
        self.d = d
        self.recipe = recipe
        self.measure = measure
        self.plan = plan
        self.warm_start = warm_start

    def __call__(self, r: int):
        d, plan = self.d, self.plan
        rs = None
        for retry in range(MAX_REDRAWS + 1):
            cand = draw(plan, r, d.n, retry=retry)
            y = d.outcomes[cand.indices]
            if 0.0 < y.mean() < 1.0:
                rs = cand
                break
        if rs is None:
            return r, np.nan, np.nan, np.nan, False, False
        boot_d = d.subset(rs.indices)
        try:
            model = fit(boot_d, self.recipe, fold_rng=plan.cv_rng(r),
                        warm_start=self.warm_start)
            theta_boot = measure_value(self.measure, predict(model, boot_d),
                                       boot_d.outcomes)
            theta_orig = measure_value(self.measure, predict(model, d),
                                       d.outcomes)
        except (MetricError, ValueError):
            return r, np.nan, np.nan, np.nan, False, False
        theta_out, oob_ok = np.nan, False
        if rs.out_of_bag.size > 0:
            oob_d = d.subset(rs.out_of_bag)
            y_out = oob_d.outcomes
            if 0.0 < y_out.mean() < 1.0:
                try:
                    theta_out = measure_value(
                        self.measure, predict(model, oob_d), y_out)
                    oob_ok = True
                except (MetricError, ValueError):
                    pass
        return r, theta_boot, theta_orig, theta_out, True, oob_ok


def evaluate_replicates(d: Dataset, recipe: FitRecipe, measure: str,
                        plan: ResamplePlan, workers: int = 1,
                        warm_start=None) -> ReplicateSet:
    """Compute (theta_boot, theta_orig, theta_out) for every replicate of
    the plan. Order- and worker-count-independent."""
    task = _ReplicateTask(d, recipe, measure, plan, warm_start=warm_start)
    boot = np.full(plan.B, np.nan)
    orig = np.full(plan.B, np.nan)
    out = np.full(plan.B, np.nan)
    valid = np.zeros(plan.B, dtype=bool)
    oob_valid = np.zeros(plan.B, dtype=bool)
    for r, tb, to, tout, ok, oob_ok in map_records(plan.B, task,
                                                   workers=workers):
        boot[r], orig[r], out[r] = tb, to, tout
        valid[r], oob_valid[r] = ok, oob_ok
    return ReplicateSet(boot, orig, out, valid, oob_valid)


@dataclass(frozen=True)
class OptimismResult:
    method: str
    apparent: float
    corrected: float
    optimism: float
    theta_out: float | None = None
    R: float | None = None
    w: float | None = None
    per_replicate: ReplicateSet | None = None
    n_valid: int = 0
    r_fallback: bool = False  # apparent == no-information exactly

    def __post_init__(self):
        # corrected = apparent - optimism holds exactly in the direction the
        # estimator defines it (Harrell derives corrected, the 0.632 family
        # derives optimism); the rearranged form can differ by one ulp.
        if (self.corrected != self.apparent - self.optimism
                and self.optimism != self.apparent - self.corrected):
            raise OptimismError("corrected must equal apparent - optimism")


def _theta_out_mean(reps: ReplicateSet) -> tuple[float, int]:
    mask = reps.valid & reps.oob_valid
    n = int(mask.sum())
    if n == 0:
        raise OptimismError("no valid replicates with usable out-of-bag sets")
    return float(reps.theta_out[mask].mean()), n


def harrell_from_replicates(apparent: float,
                            reps: ReplicateSet) -> OptimismResult:
    mask = reps.valid
    if not mask.any():
        raise OptimismError("no valid replicates")
    lam = float((reps.theta_boot[mask] - reps.theta_orig[mask]).mean())
    return OptimismResult(HARRELL, apparent, apparent - lam, lam,
                          per_replicate=reps, n_valid=int(mask.sum()))


def p632_from_replicates(apparent: float,
                         reps: ReplicateSet) -> OptimismResult:
    theta_out, n = _theta_out_mean(reps)
    corrected = 0.368 * apparent + 0.632 * theta_out
    return OptimismResult(P632, apparent, corrected, apparent - corrected,
                          theta_out=theta_out, per_replicate=reps, n_valid=n)


def p632plus_from_replicates(apparent: float, reps: ReplicateSet,
                             gamma: float) -> OptimismResult:
    theta_out, n = _theta_out_mean(reps)
    fallback = False
    if apparent == gamma:
        r_rate = 0.0
        fallback = True
    else:
        r_rate = (theta_out - apparent) / (gamma - apparent)
        r_rate = min(max(r_rate, 0.0), 1.0)
    w = 0.632 / (1.0 - 0.368 * r_rate)
    corrected = (1.0 - w) * apparent + w * theta_out
    return OptimismResult(P632PLUS, apparent, corrected, apparent - corrected,
                          theta_out=theta_out, R=r_rate, w=w,
                          per_replicate=reps, n_valid=n, r_fallback=fallback)


def correct(method: str, d: Dataset, recipe: FitRecipe, measure: str,
            plan: ResamplePlan, workers: int = 1,
            replicates: ReplicateSet | None = None,
            apparent: float | None = None) -> OptimismResult:
    """Run one optimism correction end to end. A precomputed ReplicateSet
    and apparent value may be passed in so several corrections (and the
    apparent bootstrap CI) share one replicate sequence."""
    if method not in METHODS:
        raise OptimismError(f"unknown correction method {method!r}")
    if apparent is None:
        model = apparent_fit(d, recipe, plan)
        apparent = measure_value(measure, predict(model, d), d.outcomes)
    if replicates is None:
        replicates = evaluate_replicates(d, recipe, measure, plan,
                                         workers=workers)
    if method == HARRELL:
        return harrell_from_replicates(apparent, replicates)
    if method == P632:
        return p632_from_replicates(apparent, replicates)
    return p632plus_from_replicates(apparent, replicates,
                                    no_information(measure))


def harrell_correct(d, recipe, measure, plan, **kw) -> OptimismResult:
    return correct(HARRELL, d, recipe, measure, plan, **kw)


def p632_correct(d, recipe, measure, plan, **kw) -> OptimismResult:
    return correct(P632, d, recipe, measure, plan, **kw)


def p632plus_correct(d, recipe, measure, plan, **kw) -> OptimismResult:
    return correct(P632PLUS, d, recipe, measure, plan, **kw)
