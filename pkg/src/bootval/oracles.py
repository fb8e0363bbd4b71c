"""Brute-force reference implementations, used only by the test suite.

Everything here is written straight from first principles: explicit pair
enumeration for the AUC, dense grid searches for logistic fits, a
sort-and-index percentile rule, a permutation estimate of the
no-information value, and literal sequential transcriptions of the
location-shifted and two-stage interval algorithms. The only things shared
with the production path are the RNG stream definition (otherwise equality
tests would be impossible) and the model-fit primitive (the quantity being
resampled, not the algorithm under test).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .models import FitRecipe, fit, log_likelihood, predict
from .resampling import ResamplePlan, inner_level, stream


@dataclass(frozen=True)
class OracleVerdict:
    name: str
    fast_value: float
    oracle_value: float
    tolerance: float

    @property
    def difference(self) -> float:
        return abs(self.fast_value - self.oracle_value)

    @property
    def passed(self) -> bool:
        return self.difference <= self.tolerance


def auc_bruteforce(scores, outcomes) -> float:
    """Explicit double loop over all event-nonevent pairs, 0.5 tie credit."""
    scores = np.asarray(scores, dtype=np.float64)
    outcomes = np.asarray(outcomes)
    if scores.shape[0] > 10_000:
        raise ValueError("brute-force AUC capped at n=10,000")
    pos = scores[outcomes == 1]
    neg = scores[outcomes == 0]
    if pos.size == 0 or neg.size == 0:
        raise ValueError("need both outcome classes")
    total = 0.0
    for a in pos:
        for b in neg:
            if a > b:
                total += 1.0
            elif a == b:
                total += 0.5
    return total / (pos.size * neg.size)


def jackknife_auc_variance(scores, outcomes) -> float:
    """Stratified (per-class) jackknife variance of the empirical AUC:
    ((m-1)/m) * sum over left-out events of the squared leave-one-out
    deviation, plus the analogous nonevent term."""
    scores = np.asarray(scores, dtype=np.float64)
    outcomes = np.asarray(outcomes)
    n = scores.shape[0]
    theta = auc_bruteforce(scores, outcomes)
    pos_idx = np.flatnonzero(outcomes == 1)
    neg_idx = np.flatnonzero(outcomes == 0)
    m, n_neg = pos_idx.size, neg_idx.size

    def loo(i):
        keep = np.arange(n) != i
        return auc_bruteforce(scores[keep], outcomes[keep])

    var = 0.0
    dev_pos = np.array([loo(i) - theta for i in pos_idx])
    dev_neg = np.array([loo(j) - theta for j in neg_idx])
    var += (m - 1) / m * float(np.sum(dev_pos ** 2))
    var += (n_neg - 1) / n_neg * float(np.sum(dev_neg ** 2))
    return var


def gridsearch_logistic_2d(d: Dataset, span: float = 8.0,
                           refine_to: float = 1e-4) -> np.ndarray:
    """Dense grid search of the (intercept, slope) log-likelihood for a
    single-predictor dataset, refined until the grid step is <= refine_to."""
    assert d.p == 1
    center = np.zeros(2)
    half = span
    step = half / 20.0
    while step > refine_to / 2.0:
        b0s = np.arange(center[0] - half, center[0] + half + step / 2, step)
        b1s = np.arange(center[1] - half, center[1] + half + step / 2, step)
        best, best_ll = None, -math.inf
        for b0 in b0s:
            for b1 in b1s:
                ll = log_likelihood(np.array([b0, b1]), d)
                if ll > best_ll:
                    best_ll, best = ll, (b0, b1)
        center = np.array(best)
        half = 2.0 * step
        step = half / 20.0
    return center


def gridsearch_slope_1d(lp, outcomes, span: float = 8.0,
                        refine_to: float = 1e-4) -> float:
    """Grid search for the calibration slope: univariate logistic of
    outcomes on the linear predictors, intercept profiled on a grid too."""
    d = Dataset(np.asarray(outcomes, dtype=float),
                np.asarray(lp, dtype=float)[:, None])
    return float(gridsearch_logistic_2d(d, span=span, refine_to=refine_to)[1])


def percentile_oracle(values, q: float) -> float:
    """Sort-and-index percentile with linear interpolation between closest
    order statistics (type 7), written independently."""
    v = sorted(float(x) for x in values)
    n = len(v)
    g = (n - 1) * q
    lo = int(math.floor(g))
    if lo >= n - 1:
        return v[n - 1]
    return v[lo] + (g - lo) * (v[lo + 1] - v[lo])


def permutation_no_information(scores, outcomes, n_perm: int,
                               rng: np.random.Generator) -> float:
    """Monte Carlo estimate of the no-information AUC: mean brute-force AUC
    over random outcome permutations."""
    outcomes = np.asarray(outcomes)
    total = 0.0
    for _ in range(n_perm):
        total += auc_bruteforce(scores, rng.permutation(outcomes))
    return total / n_perm


def _resample_with_redraw(d: Dataset, plan: ResamplePlan, r: int,
                          max_redraws: int = 25):
    """Literal copy of the redraw-with-perturbed-counter rule."""
    for retry in range(max_redraws + 1):
        rng = stream(plan.seed, *plan.level, r, 0, retry)
        idx = rng.integers(0, d.n, size=d.n)
        y = d.outcomes[idx]
        if 0.0 < y.mean() < 1.0:
            in_bag = np.zeros(d.n, dtype=bool)
            in_bag[idx] = True
            return idx, np.flatnonzero(~in_bag)
    return None, None


def _fit_on(d: Dataset, recipe: FitRecipe, plan: ResamplePlan,
            r: int | None):
    if r is None:
        fold_rng = stream(plan.seed, *plan.level, 0)
    else:
        fold_rng = stream(plan.seed, *plan.level, r, 1, 0)
    return fit(d, recipe, fold_rng=fold_rng)


def _corrected_reference(d: Dataset, recipe: FitRecipe, method: str,
                         plan: ResamplePlan) -> float:
    """Sequential, literal transcription of one optimism correction for the
    C-statistic: apparent value minus the mean in-bag/original gap
    (Harrell), or the 0.632 / 0.632+ weighted averages."""
    model_app = _fit_on(d, recipe, plan, None)
    theta_app = auc_bruteforce(predict(model_app, d).values, d.outcomes)
    boots, origs, outs = [], [], []
    for b in range(plan.B):
        idx, oob = _resample_with_redraw(d, plan, b)
        if idx is None:
            continue
        boot_d = d.subset(idx)
        model = _fit_on(boot_d, recipe, plan, b)
        boots.append(auc_bruteforce(predict(model, boot_d).values,
                                    boot_d.outcomes))
        origs.append(auc_bruteforce(predict(model, d).values, d.outcomes))
        if oob.size > 0:
            y_out = d.outcomes[oob]
            if 0.0 < y_out.mean() < 1.0:
                oob_d = d.subset(oob)
                outs.append(auc_bruteforce(predict(model, oob_d).values,
                                           y_out))
    if method == "harrell":
        lam = float(np.mean(np.array(boots) - np.array(origs)))
        return theta_app - lam
    theta_out = float(np.mean(outs))
    if method == "0.632":
        return 0.368 * theta_app + 0.632 * theta_out
    gamma = 0.5
    r_rate = 0.0 if theta_app == gamma else (
        (theta_out - theta_app) / (gamma - theta_app))
    r_rate = min(max(r_rate, 0.0), 1.0)
    w = 0.632 / (1.0 - 0.368 * r_rate)
    return (1.0 - w) * theta_app + w * theta_out


def location_shifted_reference(d: Dataset, recipe: FitRecipe, method: str,
                               B: int, seed: int,
                               alpha: float = 0.05) -> tuple[float, float]:
    """Straight-line rewrite of the location-shifted interval: percentile
    interval of the in-bag replicate values, translated by the estimated
    bias."""
    plan = ResamplePlan(B, seed)
    model_app = _fit_on(d, recipe, plan, None)
    theta_app = auc_bruteforce(predict(model_app, d).values, d.outcomes)
    boots = []
    for b in range(B):
        idx, _ = _resample_with_redraw(d, plan, b)
        if idx is None:
            continue
        boot_d = d.subset(idx)
        model = _fit_on(boot_d, recipe, plan, b)
        boots.append(auc_bruteforce(predict(model, boot_d).values,
                                    boot_d.outcomes))
    lower = percentile_oracle(boots, alpha / 2.0)
    upper = percentile_oracle(boots, 1.0 - alpha / 2.0)
    delta = theta_app - _corrected_reference(d, recipe, method, plan)
    return lower - delta, upper - delta


def two_stage_reference(d: Dataset, recipe: FitRecipe, method: str,
                        B: int, inner_B: int, seed: int,
                        alpha: float = 0.05) -> tuple[float, float, float]:
    """Straight-line rewrite of the two-stage interval: for each outer
    resample, compute the corrected value with a full inner bootstrap, then
    take percentiles. Returns (point, lower, upper).

    Small instances only: n <= 100 and B * inner_B <= 10,000."""
    if d.n > 100 or B * inner_B > 10_000:
        raise ValueError("reference implementation is for small instances")
    outer = ResamplePlan(B, seed)
    corrected = []
    for b in range(B):
        idx, _ = _resample_with_redraw(d, outer, b)
        if idx is None:
            continue
        boot_d = d.subset(idx)
        inner = ResamplePlan(inner_B, seed, level=inner_level(b))
        corrected.append(_corrected_reference(boot_d, recipe, method, inner))
    point = _corrected_reference(d, recipe, method, outer)
    lower = percentile_oracle(corrected, alpha / 2.0)
    upper = percentile_oracle(corrected, 1.0 - alpha / 2.0)
    return point, lower, upper
