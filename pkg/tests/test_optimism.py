import numpy as np
import pytest

from bootval.metrics import C_STATISTIC, no_information
from bootval.models import FitRecipe, predict
from bootval.optimism import (HARRELL, P632, P632PLUS, OptimismError,
                              OptimismResult, ReplicateSet, apparent_fit,
                              correct, evaluate_replicates,
                              harrell_correct, harrell_from_replicates,
                              p632_correct, p632_from_replicates,
                              p632plus_correct, p632plus_from_replicates)
from bootval.oracles import _corrected_reference
from bootval.resampling import ResamplePlan

from conftest import make_dataset


def reps_of(boot, orig, out=None):
    boot = np.asarray(boot, dtype=float)
    orig = np.asarray(orig, dtype=float)
    if out is None:
        out = np.full_like(boot, np.nan)
        oob = np.zeros(boot.size, dtype=bool)
    else:
        out = np.asarray(out, dtype=float)
        oob = np.ones(boot.size, dtype=bool)
    return ReplicateSet(boot, orig, out, np.ones(boot.size, dtype=bool), oob)


def test_harrell_hand_arithmetic():
    # B=2: boot [0.90, 0.88], orig [0.85, 0.87], apparent 0.84
    res = harrell_from_replicates(0.84, reps_of([0.90, 0.88], [0.85, 0.87]))
    assert abs(res.optimism - 0.03) < 1e-15
    assert abs(res.corrected - 0.81) < 1e-15
    assert res.n_valid == 2


def test_harrell_zero_optimism():
    res = harrell_from_replicates(0.77, reps_of([0.8, 0.9], [0.8, 0.9]))
    assert res.corrected == 0.77
    assert res.optimism == 0.0


def test_p632_hand_arithmetic():
    res = p632_from_replicates(0.9, reps_of([0.9, 0.9], [0.9, 0.9],
                                            [0.8, 0.8]))
    assert res.corrected == 0.368 * 0.9 + 0.632 * 0.8
    assert abs(res.corrected - 0.8368) < 1e-15
    assert res.theta_out == 0.8


def test_p632_convex_combination_fixed_point():
    res = p632_from_replicates(0.7, reps_of([0.7], [0.7], [0.7]))
    assert res.corrected == 0.7


def test_p632plus_hand_arithmetic():
    # apparent 0.9, theta_out 0.8, gamma 0.5 -> R 0.25, w ~ 0.6960
    res = p632plus_from_replicates(0.9, reps_of([0.9], [0.9], [0.8]), 0.5)
    assert abs(res.R - 0.25) < 1e-15
    assert abs(res.w - 0.632 / 0.908) < 1e-15
    assert abs(res.corrected - ((1 - res.w) * 0.9 + res.w * 0.8)) == 0.0
    assert abs(res.corrected - 0.8304) < 1e-3


def test_p632plus_no_overfitting_limit():
    # theta_out == apparent -> R=0, w=0.632 exactly, equals 0.632 estimator
    res = p632plus_from_replicates(0.8, reps_of([0.8], [0.8], [0.8]), 0.5)
    assert res.R == 0.0
    assert res.w == 0.632
    p632 = p632_from_replicates(0.8, reps_of([0.8], [0.8], [0.8]))
    assert res.corrected == p632.corrected


def test_p632plus_total_overfitting_limit():
    # theta_out == gamma -> R=1, w=1 exactly, corrected = theta_out
    res = p632plus_from_replicates(0.9, reps_of([0.9], [0.9], [0.5]), 0.5)
    assert res.R == 1.0
    assert res.w == 1.0
    assert res.corrected == 0.5


def test_p632plus_r_clamped_and_fallback():
    # theta_out above apparent -> raw R negative, clamped to 0
    res = p632plus_from_replicates(0.7, reps_of([0.7], [0.7], [0.75]), 0.5)
    assert res.R == 0.0
    # apparent == gamma exactly -> flagged fallback
    res2 = p632plus_from_replicates(0.5, reps_of([0.5], [0.5], [0.45]), 0.5)
    assert res2.r_fallback and res2.R == 0.0


def test_p632plus_weight_range():
    rng = np.random.default_rng(6)
    for _ in range(50):
        app = rng.uniform(0.5, 1.0)
        out = rng.uniform(0.3, 1.0)
        res = p632plus_from_replicates(app, reps_of([app], [app], [out]), 0.5)
        assert 0.632 <= res.w <= 1.0
        lo, hi = min(app, res.theta_out), max(app, res.theta_out)
        assert lo - 1e-12 <= res.corrected <= hi + 1e-12


def test_result_invariant_enforced():
    with pytest.raises(OptimismError):
        OptimismResult(HARRELL, apparent=0.8, corrected=0.7, optimism=0.05)


def test_corrections_share_replicates_and_match_oracle():
    d = make_dataset(51, n=50, p=2)
    recipe = FitRecipe("ml")
    plan = ResamplePlan(30, 99)
    reps = evaluate_replicates(d, recipe, C_STATISTIC, plan)
    from bootval.metrics import measure_value
    apparent = measure_value(C_STATISTIC,
                             predict(apparent_fit(d, recipe, plan), d),
                             d.outcomes)
    for method in (HARRELL, P632, P632PLUS):
        fast = correct(method, d, recipe, C_STATISTIC, plan,
                       replicates=reps, apparent=apparent)
        oracle = _corrected_reference(d, recipe, method, plan)
        assert fast.corrected == oracle
        # end-to-end wrappers agree with the shared-replicate path
        wrapper = {HARRELL: harrell_correct, P632: p632_correct,
                   P632PLUS: p632plus_correct}[method]
        assert wrapper(d, recipe, C_STATISTIC, plan).corrected == oracle


def test_correct_is_deterministic():
    d = make_dataset(53, n=60, p=3)
    plan = ResamplePlan(20, 5)
    a = harrell_correct(d, FitRecipe("ml"), C_STATISTIC, plan)
    b = harrell_correct(d, FitRecipe("ml"), C_STATISTIC, plan)
    assert a.corrected == b.corrected and a.optimism == b.optimism


def test_worker_count_invariance():
    d = make_dataset(55, n=60, p=2)
    plan = ResamplePlan(16, 7)
    seq = evaluate_replicates(d, FitRecipe("ml"), C_STATISTIC, plan,
                              workers=1)
    par = evaluate_replicates(d, FitRecipe("ml"), C_STATISTIC, plan,
                              workers=4)
    assert np.array_equal(seq.theta_boot, par.theta_boot, equal_nan=True)
    assert np.array_equal(seq.theta_orig, par.theta_orig, equal_nan=True)
    assert np.array_equal(seq.theta_out, par.theta_out, equal_nan=True)
    assert np.array_equal(seq.valid, par.valid)
    assert np.array_equal(seq.oob_valid, par.oob_valid)


def test_unknown_method_rejected():
    d = make_dataset(57, n=30, p=1)
    with pytest.raises(OptimismError, match="unknown correction"):
        correct("jackknife", d, FitRecipe("ml"), C_STATISTIC,
                ResamplePlan(5, 1))


def test_no_valid_replicates_is_fatal():
    empty = ReplicateSet(np.array([np.nan]), np.array([np.nan]),
                         np.array([np.nan]), np.array([False]),
                         np.array([False]))
    with pytest.raises(OptimismError):
        harrell_from_replicates(0.8, empty)
    with pytest.raises(OptimismError):
        p632_from_replicates(0.8, empty)


def test_gamma_comes_from_measure():
    assert no_information(C_STATISTIC) == 0.5
