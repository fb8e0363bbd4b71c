import numpy as np
import pytest

from bootval.simulation import (BINARY_NAMES, COLUMN_NAMES,
                                CovariateGenerator, GeneratorConfig,
                                ScenarioSpec, SimulationError, TrueModel,
                                calibrate_intercept, coverage_to_csv,
                                coverage_to_json, CoverageResult, derive_n,
                                estimate_true_auc, generate_cohort,
                                parse_method, read_scenario_params,
                                write_scenario_params)
from bootval.resampling import stream


def test_derive_n_examples():
    assert derive_n(8, 10, 0.125) == 640
    assert derive_n(17, 10, 0.125) == 1360
    assert derive_n(17, 40, 0.0625) == 10880


def test_scenario_spec_by_id_and_validation():
    s = ScenarioSpec.by_id(1)
    assert (s.epv, s.event_rate, s.p, s.coefficient_type) == (10, 0.125, 8, 1)
    assert s.n == 640
    assert ScenarioSpec.by_id(21).n == 5440
    with pytest.raises(SimulationError):
        ScenarioSpec.by_id(25)
    with pytest.raises(SimulationError):
        ScenarioSpec(1, 20, 0.125, 8, 1)  # wrong EPV for scenario 1


def test_parse_method():
    assert parse_method("delong") == ("delong", None)
    assert parse_method("two-stage:0.632plus") == ("two-stage", "0.632plus")
    with pytest.raises(SimulationError):
        parse_method("two-stage")  # correction required
    with pytest.raises(SimulationError):
        parse_method("delong:harrell")  # no correction allowed
    with pytest.raises(SimulationError):
        parse_method("waldo")


def test_default_config_loads_and_is_consistent():
    cfg = GeneratorConfig.default()
    assert cfg.continuous_means.shape == (3,)
    assert cfg.continuous_covariance.shape == (3, 3)
    assert abs(cfg.smoking_proportions.sum() - 1.0) < 1e-9
    assert cfg.binary_marginals.shape == (len(BINARY_NAMES),)
    assert cfg.binary_correlations.shape == (len(BINARY_NAMES),
                                             len(BINARY_NAMES))
    for p in (8, 17):
        for t in (1, 2):
            want = 8 if p == 8 else len(COLUMN_NAMES)
            assert cfg.coefficients[(p, t)].shape == (want,)


def test_generator_sample_shape_and_determinism():
    gen = CovariateGenerator(GeneratorConfig.default())
    a = gen.sample(500, stream(1, 0))
    b = gen.sample(500, stream(1, 0))
    assert a.shape == (500, len(COLUMN_NAMES))
    assert np.array_equal(a, b)
    # dichotomized/dummy columns are 0/1
    names = list(COLUMN_NAMES)
    for col in ("A65", "SMK1", "SMK2", *BINARY_NAMES):
        vals = a[:, names.index(col)]
        assert set(np.unique(vals)) <= {0.0, 1.0}


def test_generator_marginals_roughly_match():
    gen = CovariateGenerator(GeneratorConfig.default())
    x = gen.sample(100_000, stream(2, 0))
    cfg = gen.config
    names = list(COLUMN_NAMES)
    for name, target in zip(BINARY_NAMES, cfg.binary_marginals):
        assert abs(x[:, names.index(name)].mean() - target) < 0.01
    smk1 = x[:, names.index("SMK1")].mean()
    assert abs(smk1 - cfg.smoking_proportions[0]) < 0.01
    hei = x[:, names.index("HEI")]
    assert abs(hei.mean() - cfg.continuous_means[0]) < 0.2


def test_infeasible_binary_correlation_rejected():
    cfg = GeneratorConfig.default()
    bad = cfg.binary_correlations.copy()
    bad[0, 1] = bad[1, 0] = 0.99  # infeasible for small marginals
    from dataclasses import replace
    with pytest.raises(SimulationError, match="infeasible"):
        CovariateGenerator(replace(cfg, binary_correlations=bad))


def test_calibrate_intercept_closed_forms():
    gen = CovariateGenerator(GeneratorConfig.default())
    b0 = calibrate_intercept(gen, np.zeros(8), 0.5, 8, sample_n=20_000,
                             seed=3)
    assert abs(b0) < 1e-6
    b0 = calibrate_intercept(gen, np.zeros(8), 0.125, 8, sample_n=20_000,
                             seed=3)
    assert abs(b0 - np.log(0.125 / 0.875)) < 1e-6
    with pytest.raises(SimulationError):
        calibrate_intercept(gen, np.zeros(8), 1.5, 8)


def test_calibrated_rate_achieved_on_fresh_cohort():
    cfg = GeneratorConfig.default()
    gen = CovariateGenerator(cfg)
    slopes = cfg.coefficients[(8, 1)]
    b0 = calibrate_intercept(gen, slopes, 0.125, 8, sample_n=200_000, seed=4)
    d = generate_cohort(gen, TrueModel(b0, slopes), 8, 100_000, seed=5)
    assert abs(d.outcomes.mean() - 0.125) < 0.01


def test_generate_cohort_determinism_and_shape():
    cfg = GeneratorConfig.default()
    gen = CovariateGenerator(cfg)
    model = TrueModel(-2.0, cfg.coefficients[(8, 1)])
    a = generate_cohort(gen, model, 8, 300, seed=6)
    b = generate_cohort(gen, model, 8, 300, seed=6)
    c = generate_cohort(gen, model, 8, 300, seed=7)
    assert np.array_equal(a.outcomes, b.outcomes)
    assert np.array_equal(a.predictors, b.predictors)
    assert not np.array_equal(a.outcomes, c.outcomes)
    assert a.p == 8 and a.names == COLUMN_NAMES[:8]


def test_generate_cohort_slope_width_mismatch():
    cfg = GeneratorConfig.default()
    gen = CovariateGenerator(cfg)
    with pytest.raises(SimulationError, match="width"):
        generate_cohort(gen, TrueModel(0.0, np.zeros(5)), 8, 100, seed=1)


def test_estimate_true_auc_uninformative_model():
    gen = CovariateGenerator(GeneratorConfig.default())
    auc = estimate_true_auc(gen, TrueModel(0.0, np.zeros(8)), 8, 50_000,
                            seed=8)
    assert abs(auc - 0.5) < 0.01
    with pytest.raises(SimulationError):
        estimate_true_auc(gen, TrueModel(0.0, np.zeros(8)), 8, 10, seed=8)


def test_estimate_true_auc_informative_and_stable():
    cfg = GeneratorConfig.default()
    gen = CovariateGenerator(cfg)
    slopes = cfg.coefficients[(8, 1)]
    b0 = calibrate_intercept(gen, slopes, 0.125, 8, sample_n=100_000, seed=9)
    model = TrueModel(b0, slopes)
    a = estimate_true_auc(gen, model, 8, 100_000, seed=10)
    b = estimate_true_auc(gen, model, 8, 100_000, seed=11)
    assert a > 0.6  # the bundled coefficients give an informative model
    assert abs(a - b) < 0.01


def test_coverage_result_validation():
    with pytest.raises(SimulationError):
        CoverageResult(1, "delong", 10, 1.2, 0.1, 0, 0.7)


def test_coverage_serialization_shapes():
    rows = [CoverageResult(1, "delong", 10, 0.9, 0.11, 0, 0.73),
            CoverageResult(1, "apparent", 10, 0.8, 0.12, 0, 0.73)]
    csv_text = coverage_to_csv(rows)
    lines = csv_text.strip().split("\n")
    assert lines[0].startswith("scenario,method,")
    assert len(lines) == 3
    import json
    payload = json.loads(coverage_to_json(rows, {"seed": 1}))
    assert payload["meta"]["seed"] == 1
    assert len(payload["results"]) == 2


def test_scenario_params_roundtrip(tmp_path):
    path = tmp_path / "scenarios.txt"
    write_scenario_params(path, [1, 5, 17, 21])
    specs = read_scenario_params(path)
    assert [s.id for s in specs] == [1, 5, 17, 21]
    assert specs[3].n == 5440
