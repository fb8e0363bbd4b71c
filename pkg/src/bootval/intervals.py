"""Confidence intervals for optimism-corrected accuracy measures.

Four families: DeLong's Wald interval (comparator), the apparent bootstrap
percentile interval, the location-shifted interval (apparent interval
translated by the estimated optimism), and the two-stage interval
(percentile interval of corrected estimates from a full inner bootstrap
inside each outer replicate).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .metrics import MetricError, delong_ci, measure_value
from .models import FitRecipe, predict
from .optimism import (OptimismResult, ReplicateSet, apparent_fit, correct,
                       evaluate_replicates, MAX_REDRAWS)
from .resampling import (BootstrapDistribution, ReplicateInvalid,
                         ResamplePlan, draw, inner_level, map_indices,
                         percentile_interval)

DELONG = "delong"
APPARENT = "apparent"
LOCATION_SHIFTED = "location-shift"
TWO_STAGE = "two-stage"
CI_METHODS = (DELONG, APPARENT, LOCATION_SHIFTED, TWO_STAGE)


class IntervalError(ValueError):
    pass


@dataclass(frozen=True)
class IntervalEstimate:
    method: str
    point: float
    lower: float
    upper: float
    alpha: float
    correction: str | None = None
    B_outer: int = 0
    B_inner: int = 0
    shift: float | None = None  # location-shifted only
    n_valid: int = 0

    def __post_init__(self):
        if self.lower > self.upper:
            raise IntervalError("interval bounds out of order")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def delong_interval(d: Dataset, recipe: FitRecipe, plan: ResamplePlan,
                    alpha: float = 0.05,
                    apparent_scores=None) -> IntervalEstimate:
    """metrics.delong_ci wrapped into an IntervalEstimate (C-statistic only)."""
    if apparent_scores is None:
        apparent_scores = predict(apparent_fit(d, recipe, plan), d)
    auc = measure_value("c-statistic", apparent_scores, d.outcomes)
    lower, upper = delong_ci(apparent_scores, d.outcomes, alpha)
    return IntervalEstimate(DELONG, auc, lower, upper, alpha,
                            B_outer=0, n_valid=d.n)


def apparent_bootstrap_ci(d: Dataset, recipe: FitRecipe, measure: str,
                          plan: ResamplePlan, alpha: float = 0.05,
                          workers: int = 1,
                          replicates: ReplicateSet | None = None,
                          apparent: float | None = None) -> IntervalEstimate:
    """Percentile interval of the replicate-on-own-resample distribution."""
    if apparent is None:
        model = apparent_fit(d, recipe, plan)
        apparent = measure_value(measure, predict(model, d), d.outcomes)
    if replicates is None:
        replicates = evaluate_replicates(d, recipe, measure, plan,
                                         workers=workers)
    dist = BootstrapDistribution(replicates.theta_boot, replicates.valid)
    lower, upper = percentile_interval(dist, alpha)
    return IntervalEstimate(APPARENT, apparent, lower, upper, alpha,
                            B_outer=plan.B,
                            n_valid=int(replicates.valid.sum()))


def location_shifted_ci(d: Dataset, recipe: FitRecipe, measure: str,
                        plan: ResamplePlan, correction: str,
                        alpha: float = 0.05, workers: int = 1,
                        replicates: ReplicateSet | None = None,
                        apparent: float | None = None) -> IntervalEstimate:
    """Apparent bootstrap interval translated by the optimism estimate;
    width equals the apparent interval's width exactly."""
    if replicates is None:
        replicates = evaluate_replicates(d, recipe, measure, plan,
                                         workers=workers)
    app_ci = apparent_bootstrap_ci(d, recipe, measure, plan, alpha,
                                   replicates=replicates, apparent=apparent)
    corr = correct(correction, d, recipe, measure, plan,
                   replicates=replicates, apparent=app_ci.point)
    shift = corr.apparent - corr.corrected
    return IntervalEstimate(LOCATION_SHIFTED, corr.corrected,
                            app_ci.lower - shift, app_ci.upper - shift,
                            alpha, correction=correction, B_outer=plan.B,
                            shift=shift, n_valid=app_ci.n_valid)


class _TwoStageOuterTask:
    """Outer replicate task: treat the resample as a derivation dataset and
    run the chosen correction with a full inner bootstrap keyed to the
    outer replicate index."""

    def __init__(self, d: Dataset, recipe: FitRecipe, measure: str,
                 outer_plan: ResamplePlan, inner_B: int, correction: str):
        self.d = d
        self.recipe = recipe
        self.measure = measure
        self.outer_plan = outer_plan
        self.inner_B = inner_B
        self.correction = correction

    def __call__(self, b: int) -> float:
        d, plan = self.d, self.outer_plan
        rs = None
        for retry in range(MAX_REDRAWS + 1):
            cand = draw(plan, b, d.n, retry=retry)
            y = d.outcomes[cand.indices]
            if 0.0 < y.mean() < 1.0:
                rs = cand
                break
        if rs is None:
            raise ReplicateInvalid
        boot_d = d.subset(rs.indices)
        inner_plan = ResamplePlan(self.inner_B, plan.seed,
                                  level=inner_level(b))
        try:
            result = correct(self.correction, boot_d, self.recipe,
                             self.measure, inner_plan)
        except (MetricError, ValueError):
            raise ReplicateInvalid from None
        return result.corrected


def two_stage_ci(d: Dataset, recipe: FitRecipe, measure: str,
                 outer_plan: ResamplePlan, inner_B: int, correction: str,
                 alpha: float = 0.05, workers: int = 1,
                 point_result: OptimismResult | None = None) -> IntervalEstimate:
    """Percentile interval of corrected estimates computed on each outer
    resample via an inner bootstrap. The point is the corrected estimate on
    the original data (computed from the same outer resample sequence)."""
    if inner_B < 1:
        raise IntervalError("inner_B must be >= 1")
    task = _TwoStageOuterTask(d, recipe, measure, outer_plan, inner_B,
                              correction)
    values, valid = map_indices(outer_plan.B, task, workers=workers)
    if not valid.any():
        raise IntervalError("all outer replicates invalid")
    dist = BootstrapDistribution(values, valid)
    lower, upper = percentile_interval(dist, alpha)
    if point_result is None:
        point_result = correct(correction, d, recipe, measure, outer_plan,
                               workers=workers)
    return IntervalEstimate(TWO_STAGE, point_result.corrected, lower, upper,
                            alpha, correction=correction,
                            B_outer=outer_plan.B, B_inner=inner_B,
                            n_valid=int(valid.sum()))
