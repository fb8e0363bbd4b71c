import numpy as np
import pytest

from bootval.intervals import (APPARENT, DELONG, IntervalError,
                               IntervalEstimate, LOCATION_SHIFTED, TWO_STAGE,
                               apparent_bootstrap_ci, delong_interval,
                               location_shifted_ci, two_stage_ci)
from bootval.metrics import C_STATISTIC, delong_ci, measure_value
from bootval.models import FitRecipe, predict
from bootval.optimism import METHODS, apparent_fit, evaluate_replicates
from bootval.oracles import (location_shifted_reference, percentile_oracle,
                             two_stage_reference)
from bootval.resampling import BootstrapDistribution, ResamplePlan

from conftest import make_dataset


def test_interval_estimate_invariants():
    est = IntervalEstimate("x", 0.8, 0.7, 0.9, 0.05)
    assert est.width == pytest.approx(0.2)
    assert est.contains(0.8) and not est.contains(0.95)
    with pytest.raises(IntervalError):
        IntervalEstimate("x", 0.8, 0.9, 0.7, 0.05)


def test_delong_interval_wraps_metrics():
    d = make_dataset(61, n=100, p=2)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(5, 1)
    scores = predict(apparent_fit(d, recipe, plan), d)
    est = delong_interval(d, recipe, plan, 0.05, apparent_scores=scores)
    lo, hi = delong_ci(scores, d.outcomes, 0.05)
    assert (est.lower, est.upper) == (lo, hi)
    assert est.method == DELONG
    assert est.point == measure_value(C_STATISTIC, scores, d.outcomes)


def test_apparent_ci_matches_percentile_oracle_on_replicates():
    d = make_dataset(63, n=70, p=2)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(60, 8)
    reps = evaluate_replicates(d, recipe, C_STATISTIC, plan)
    est = apparent_bootstrap_ci(d, recipe, C_STATISTIC, plan, 0.05,
                                replicates=reps)
    vals = reps.theta_boot[reps.valid]
    assert est.lower == percentile_oracle(vals, 0.025)
    assert est.upper == percentile_oracle(vals, 0.975)
    assert est.method == APPARENT


def test_location_shift_identity_all_corrections():
    d = make_dataset(65, n=80, p=3)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(40, 13)
    reps = evaluate_replicates(d, recipe, C_STATISTIC, plan)
    apparent = measure_value(C_STATISTIC,
                             predict(apparent_fit(d, recipe, plan), d),
                             d.outcomes)
    app_ci = apparent_bootstrap_ci(d, recipe, C_STATISTIC, plan, 0.05,
                                   replicates=reps, apparent=apparent)
    for correction in METHODS:
        est = location_shifted_ci(d, recipe, C_STATISTIC, plan, correction,
                                  0.05, replicates=reps, apparent=apparent)
        assert est.lower == app_ci.lower - est.shift
        assert est.upper == app_ci.upper - est.shift
        assert est.width == app_ci.width
        assert est.method == LOCATION_SHIFTED
        assert est.correction == correction
        assert est.shift == apparent - est.point


def test_location_shift_zero_shift_equals_apparent():
    # stub replicate set with boot == orig makes the Harrell shift zero
    from bootval.optimism import ReplicateSet
    vals = np.linspace(0.6, 0.9, 10)
    reps = ReplicateSet(vals, vals.copy(), np.full(10, np.nan),
                        np.ones(10, dtype=bool), np.zeros(10, dtype=bool))
    d = make_dataset(67, n=40, p=1)
    plan = ResamplePlan(10, 1)
    app = apparent_bootstrap_ci(d, FitRecipe("ml"), C_STATISTIC, plan,
                                0.05, replicates=reps, apparent=0.75)
    shifted = location_shifted_ci(d, FitRecipe("ml"), C_STATISTIC, plan,
                                  "harrell", 0.05, replicates=reps,
                                  apparent=0.75)
    assert shifted.shift == 0.0
    assert (shifted.lower, shifted.upper) == (app.lower, app.upper)


def test_location_shift_matches_oracle():
    d = make_dataset(69, n=50, p=2)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(30, 17)
    est = location_shifted_ci(d, recipe, C_STATISTIC, plan, "harrell", 0.05)
    ref = location_shifted_reference(d, recipe, "harrell", 30, 17, 0.05)
    assert (est.lower, est.upper) == ref


def test_two_stage_matches_oracle_exactly():
    d = make_dataset(71, n=60, p=2)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(25, 19)
    est = two_stage_ci(d, recipe, C_STATISTIC, plan, 25, "harrell", 0.05)
    ref = two_stage_reference(d, recipe, "harrell", 25, 25, 19, 0.05)
    assert (est.point, est.lower, est.upper) == ref
    assert est.method == TWO_STAGE
    assert est.B_outer == 25 and est.B_inner == 25


def test_two_stage_worker_count_invariance():
    d = make_dataset(73, n=50, p=2)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(12, 23)
    seq = two_stage_ci(d, recipe, C_STATISTIC, plan, 12, "harrell", 0.05,
                       workers=1)
    par = two_stage_ci(d, recipe, C_STATISTIC, plan, 12, "harrell", 0.05,
                       workers=4)
    assert (seq.point, seq.lower, seq.upper) == (par.point, par.lower,
                                                 par.upper)


def test_two_stage_inner_b_validation():
    d = make_dataset(75, n=40, p=1)
    with pytest.raises(IntervalError):
        two_stage_ci(d, FitRecipe("ml"), C_STATISTIC, ResamplePlan(5, 1),
                     0, "harrell")


def test_two_stage_point_is_original_data_corrected_value():
    d = make_dataset(77, n=50, p=2)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(15, 29)
    from bootval.optimism import correct
    point = correct("harrell", d, recipe, C_STATISTIC, plan)
    est = two_stage_ci(d, recipe, C_STATISTIC, plan, 10, "harrell", 0.05,
                       point_result=point)
    est2 = two_stage_ci(d, recipe, C_STATISTIC, plan, 10, "harrell", 0.05)
    assert est.point == point.corrected == est2.point


def test_two_stage_wider_than_location_shift_on_average():
    # the two-stage interval reflects corrected-estimate variability and is
    # wider than the shifted apparent interval averaged over seeds
    widths_ls, widths_ts = [], []
    for seed in range(8):
        d = make_dataset(1000 + seed, n=60, p=3)
        recipe = FitRecipe("ml")
        plan = ResamplePlan(30, seed)
        ls = location_shifted_ci(d, recipe, C_STATISTIC, plan, "harrell")
        ts = two_stage_ci(d, recipe, C_STATISTIC, plan, 30, "harrell")
        widths_ls.append(ls.width)
        widths_ts.append(ts.width)
    assert np.mean(widths_ts) > np.mean(widths_ls)


def test_reference_inner_b_stability():
    # widening inner_B changes the oracle interval only modestly
    d = make_dataset(79, n=60, p=1)
    recipe = FitRecipe("ml")
    a = two_stage_reference(d, recipe, "harrell", 40, 10, 3, 0.05)
    b = two_stage_reference(d, recipe, "harrell", 40, 100, 3, 0.05)
    assert abs(a[1] - b[1]) < 0.05 and abs(a[2] - b[2]) < 0.05


def test_reference_rejects_large_instances():
    d = make_dataset(81, n=60, p=1)
    with pytest.raises(ValueError, match="small instances"):
        two_stage_reference(d, FitRecipe("ml"), "harrell", 200, 200, 1)
