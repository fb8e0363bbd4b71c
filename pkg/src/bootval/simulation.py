"""Coverage study harness: synthetic cohorts mimicking a GUSTO-like trial,
all interval methods run on each replication, coverage and width tabulated
against an externally estimated true AUC.

The scenario grid crosses events-per-variable (10/20/40), event rate
(0.125/0.0625), candidate predictor count (8/17) and coefficient type
(1 = dense, 2 = sparse/shrunk). Derivation sample size is
round(p * EPV / event_rate). Covariates come from three independent
blocks: multivariate normal (height, weight, age; age dichotomized),
multinomial smoking expanded to two dummies, and correlated binaries
generated by a Gaussian copula matched to target marginals and pairwise
correlations.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy.optimize import brentq
from scipy.stats import multivariate_normal, norm

from .data import Dataset
from .intervals import (APPARENT, DELONG, LOCATION_SHIFTED, TWO_STAGE,
                        apparent_bootstrap_ci, delong_interval,
                        location_shifted_ci, two_stage_ci)
from .metrics import c_statistic_value, measure_value
from .models import FitRecipe, logistic, predict
from .optimism import METHODS, apparent_fit, correct, evaluate_replicates
from .resampling import ResamplePlan, map_records, stream


class SimulationError(ValueError):
    pass


#: Table of scenario parameters: id -> (EPV, event rate, p, coefficient type)
SCENARIO_TABLE = {
    1: (10, 0.1250, 8, 1), 2: (10, 0.0625, 8, 1),
    3: (10, 0.1250, 8, 2), 4: (10, 0.0625, 8, 2),
    5: (10, 0.1250, 17, 1), 6: (10, 0.0625, 17, 1),
    7: (10, 0.1250, 17, 2), 8: (10, 0.0625, 17, 2),
    9: (20, 0.1250, 8, 1), 10: (20, 0.0625, 8, 1),
    11: (20, 0.1250, 8, 2), 12: (20, 0.0625, 8, 2),
    13: (20, 0.1250, 17, 1), 14: (20, 0.0625, 17, 1),
    15: (20, 0.1250, 17, 2), 16: (20, 0.0625, 17, 2),
    17: (40, 0.1250, 8, 1), 18: (40, 0.0625, 8, 1),
    19: (40, 0.1250, 8, 2), 20: (40, 0.0625, 8, 2),
    21: (40, 0.1250, 17, 1), 22: (40, 0.0625, 17, 1),
    23: (40, 0.1250, 17, 2), 24: (40, 0.0625, 17, 2),
}


def derive_n(p: int, epv: int, event_rate: float) -> int:
    """Derivation sample size: (predictors * EPV) / expected event fraction."""
    return int(round(p * epv / event_rate))


@dataclass(frozen=True)
class ScenarioSpec:
    id: int
    epv: int
    event_rate: float
    p: int
    coefficient_type: int

    def __post_init__(self):
        expected = SCENARIO_TABLE.get(self.id)
        if expected != (self.epv, self.event_rate, self.p,
                        self.coefficient_type):
            raise SimulationError(
                f"scenario {self.id} parameters {expected} do not match "
                f"({self.epv}, {self.event_rate}, {self.p}, "
                f"{self.coefficient_type})")

    @property
    def n(self) -> int:
        return derive_n(self.p, self.epv, self.event_rate)

    @classmethod
    def by_id(cls, scenario_id: int) -> "ScenarioSpec":
        try:
            epv, rate, p, ctype = SCENARIO_TABLE[scenario_id]
        except KeyError:
            raise SimulationError(f"no scenario {scenario_id}") from None
        return cls(scenario_id, epv, rate, p, ctype)


# Predictor column order; the 8-predictor scenarios use the first 8 columns.
COLUMN_NAMES = ("A65", "SEX", "DIA", "HYP", "HRT", "HIG", "SHO", "TTR",
                "PMI", "HEI", "WEI", "HTN", "SMK1", "SMK2", "LIP", "PAN",
                "FAM", "ST4")
BINARY_NAMES = ("SEX", "DIA", "HYP", "HRT", "HIG", "SHO", "TTR", "PMI",
                "HTN", "LIP", "PAN", "FAM", "ST4")


def columns_for_p(p: int) -> tuple[int, int]:
    """Slice of COLUMN_NAMES used by a p-predictor scenario (as a range)."""
    if p == 8:
        return 0, 8
    if p == 17:
        return 0, len(COLUMN_NAMES)
    raise SimulationError(f"unsupported predictor count {p}")


@dataclass(frozen=True)
class GeneratorConfig:
    """Raw generator parameters, loadable from the delimited-table file."""

    continuous_means: np.ndarray        # height, weight, age
    continuous_covariance: np.ndarray   # 3x3
    age_threshold: float
    smoking_proportions: np.ndarray     # current, ex, never
    binary_marginals: np.ndarray        # aligned with BINARY_NAMES
    binary_correlations: np.ndarray
    coefficients: dict                  # (p, type) -> slope vector

    @classmethod
    def default(cls) -> "GeneratorConfig":
        text = (resources.files("bootval") / "params" /
                "default_generator.table").read_text()
        return cls.from_text(text)

    @classmethod
    def from_file(cls, path) -> "GeneratorConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    @classmethod
    def from_text(cls, text: str) -> "GeneratorConfig":
        sections: dict[str, list[list[str]]] = {}
        current = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1]
                sections[current] = []
                continue
            if current is None:
                raise SimulationError("table rows before any section header")
            sections[current].append([c.strip() for c in line.split(",")])

        def matrix(name):
            return np.array([[float(c) for c in row]
                             for row in sections[name]])

        def keyed(name):
            return {row[0]: float(row[1]) for row in sections[name]}

        means = keyed("continuous_means")
        smk = keyed("smoking_proportions")
        marg = keyed("binary_marginals")
        coeffs = {}
        for p in (8, 17):
            for t in (1, 2):
                key = f"coefficients_{p}_type{t}"
                coeffs[(p, t)] = matrix(key).ravel()
        return cls(
            continuous_means=np.array([means["height"], means["weight"],
                                       means["age"]]),
            continuous_covariance=matrix("continuous_covariance"),
            age_threshold=float(sections["age_threshold"][0][0]),
            smoking_proportions=np.array([smk["current"], smk["ex"],
                                          smk["never"]]),
            binary_marginals=np.array([marg[name] for name in BINARY_NAMES]),
            binary_correlations=matrix("binary_correlations"),
            coefficients=coeffs,
        )


def _phi_bounds(p1: float, p2: float) -> tuple[float, float]:
    """Feasible range of the correlation between two Bernoullis with the
    given marginals."""
    denom = np.sqrt(p1 * (1 - p1) * p2 * (1 - p2))
    lo = (max(0.0, p1 + p2 - 1.0) - p1 * p2) / denom
    hi = (min(p1, p2) - p1 * p2) / denom
    return lo, hi


def _latent_rho(p1: float, p2: float, target: float) -> float:
    """Latent normal correlation whose dichotomization (at the marginal
    thresholds) reproduces the target binary correlation."""
    if target == 0.0:
        return 0.0
    t1 = norm.ppf(1.0 - p1)
    t2 = norm.ppf(1.0 - p2)
    joint_target = p1 * p2 + target * np.sqrt(
        p1 * (1 - p1) * p2 * (1 - p2))

    def upper_tail(rho):
        cdf = multivariate_normal.cdf([t1, t2], mean=[0.0, 0.0],
                                      cov=[[1.0, rho], [rho, 1.0]])
        return 1.0 - norm.cdf(t1) - norm.cdf(t2) + cdf

    return brentq(lambda r: upper_tail(r) - joint_target, -0.999, 0.999,
                  xtol=1e-10)


def _nearest_psd_correlation(m: np.ndarray) -> np.ndarray:
    """Eigenvalue clipping followed by rescaling to unit diagonal."""
    w, v = np.linalg.eigh((m + m.T) / 2.0)
    w = np.clip(w, 1e-10, None)
    out = (v * w) @ v.T
    d = np.sqrt(np.diag(out))
    out = out / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    return out


class CovariateGenerator:
    """Samples the 18-column predictor matrix. Constructed once per
    scenario; construction validates covariances, proportions, and binary
    correlation feasibility, and precomputes Cholesky factors."""

    def __init__(self, config: GeneratorConfig):
        cov = config.continuous_covariance
        if not np.allclose(cov, cov.T):
            raise SimulationError("continuous covariance must be symmetric")
        try:
            self._cont_chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise SimulationError(
                "continuous covariance is not positive semi-definite"
            ) from None
        props = config.smoking_proportions
        if abs(props.sum() - 1.0) > 1e-9 or np.any(props < 0):
            raise SimulationError("smoking proportions must sum to 1")
        marg = config.binary_marginals
        corr = config.binary_correlations
        k = marg.size
        if corr.shape != (k, k) or not np.allclose(corr, corr.T):
            raise SimulationError("binary correlation matrix malformed")
        latent = np.eye(k)
        for i in range(k):
            for j in range(i + 1, k):
                lo, hi = _phi_bounds(marg[i], marg[j])
                if not lo <= corr[i, j] <= hi:
                    raise SimulationError(
                        f"binary correlation {corr[i, j]} between "
                        f"{BINARY_NAMES[i]} and {BINARY_NAMES[j]} is "
                        f"infeasible for marginals ({marg[i]}, {marg[j]})")
                latent[i, j] = latent[j, i] = _latent_rho(
                    marg[i], marg[j], corr[i, j])
        latent = _nearest_psd_correlation(latent)
        self._latent_chol = np.linalg.cholesky(latent)
        self._binary_thresholds = norm.ppf(1.0 - marg)
        self.config = config

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """One (n, 18) predictor matrix in COLUMN_NAMES order."""
        cfg = self.config
        cont = (rng.standard_normal((n, 3)) @ self._cont_chol.T
                + cfg.continuous_means)
        height, weight, age = cont[:, 0], cont[:, 1], cont[:, 2]
        a65 = (age >= cfg.age_threshold).astype(float)

        u = rng.random(n)
        cut = np.cumsum(cfg.smoking_proportions)
        smk1 = (u < cut[0]).astype(float)                 # current
        smk2 = ((u >= cut[0]) & (u < cut[1])).astype(float)  # ex

        z = rng.standard_normal((n, self._binary_thresholds.size))
        z = z @ self._latent_chol.T
        binary = (z > self._binary_thresholds).astype(float)
        by_name = dict(zip(BINARY_NAMES, binary.T))

        columns = {"A65": a65, "HEI": height, "WEI": weight,
                   "SMK1": smk1, "SMK2": smk2, **by_name}
        return np.column_stack([columns[name] for name in COLUMN_NAMES])


@dataclass(frozen=True)
class TrueModel:
    """The data-generating logistic model and its estimand."""

    beta0: float
    slopes: np.ndarray
    true_auc: float = float("nan")


def _subseed(seed: int, *path: int) -> int:
    """Derive an independent integer seed for a sub-computation."""
    return int(np.random.SeedSequence(
        seed, spawn_key=tuple(int(k) for k in path)).generate_state(1)[0])


def _sample_lp(gen: CovariateGenerator, slopes: np.ndarray, col_hi: int,
               n: int, rng: np.random.Generator,
               chunk: int = 200_000) -> np.ndarray:
    out = np.empty(n)
    done = 0
    while done < n:
        take = min(chunk, n - done)
        x = gen.sample(take, rng)[:, :col_hi]
        out[done:done + take] = x @ slopes
        done += take
    return out


def calibrate_intercept(gen: CovariateGenerator, slopes: np.ndarray,
                        target_rate: float, p: int,
                        sample_n: int = 1_000_000,
                        seed: int = 0) -> float:
    """Intercept giving the target event fraction, by monotone root search
    on the Monte Carlo mean of the event probability."""
    if not 0.0 < target_rate < 1.0:
        raise SimulationError("target rate must be in (0, 1)")
    _, hi = columns_for_p(p)
    lp = _sample_lp(gen, slopes, hi, sample_n, stream(seed, 3, 0))
    base = float(np.log(target_rate / (1.0 - target_rate)))

    def excess(b0):
        return float(logistic(b0 + lp).mean()) - target_rate

    lo, up = base - 15.0, base + 15.0
    if excess(lo) > 0 or excess(up) < 0:
        raise SimulationError("intercept root not bracketed; check slopes")
    return float(brentq(excess, lo, up, xtol=1e-10))


def generate_cohort(gen: CovariateGenerator, model: TrueModel, p: int,
                    n: int, seed: int) -> Dataset:
    """Covariates per block, event probability from the true model, and
    Bernoulli outcomes; deterministic per seed."""
    _, hi = columns_for_p(p)
    rng = stream(seed, 3, 1)
    x = gen.sample(n, rng)[:, :hi]
    if model.slopes.shape[0] != x.shape[1]:
        raise SimulationError("slope vector does not match generator width")
    pi = logistic(model.beta0 + x @ model.slopes)
    y = (rng.random(n) < pi).astype(float)
    return Dataset(y, x, COLUMN_NAMES[:hi])


def estimate_true_auc(gen: CovariateGenerator, model: TrueModel, p: int,
                      test_n: int, seed: int) -> float:
    """Empirical AUC of the true risk score on a fresh external cohort."""
    if test_n < 1000:
        raise SimulationError("external test cohort must have >= 1000 rows")
    d = generate_cohort(gen, model, p, test_n, seed)
    lp = model.beta0 + d.predictors @ model.slopes
    return c_statistic_value(lp, d.outcomes)


@dataclass(frozen=True)
class CoverageResult:
    scenario_id: int
    method: str
    replications: int
    coverage: float
    mean_width: float
    failures: int
    true_auc: float

    def __post_init__(self):
        if not 0.0 <= self.coverage <= 1.0:
            raise SimulationError("coverage must lie in [0, 1]")


def parse_method(method: str) -> tuple[str, str | None]:
    """'two-stage:harrell' -> ('two-stage', 'harrell'); bare names pass
    through with no correction."""
    if ":" in method:
        kind, correction = method.split(":", 1)
    else:
        kind, correction = method, None
    if kind not in (DELONG, APPARENT, LOCATION_SHIFTED, TWO_STAGE):
        raise SimulationError(f"unknown CI method {method!r}")
    if kind in (LOCATION_SHIFTED, TWO_STAGE):
        if correction not in METHODS:
            raise SimulationError(
                f"{kind} requires a correction, got {correction!r}")
    elif correction is not None:
        raise SimulationError(f"{kind} takes no correction")
    return kind, correction


class _ReplicationTask:
    """One simulation replication: generate a cohort, compute every
    requested interval, report (covered, width) per method."""

    def __init__(self, gen, model, spec: ScenarioSpec, methods, B, inner_B,
                 alpha, seed):
        self.gen = gen
        self.model = model
        self.spec = spec
        self.methods = tuple(methods)
        self.B = B
        self.inner_B = inner_B
        self.alpha = alpha
        self.seed = seed

    def __call__(self, i: int):
        spec = self.spec
        rep_seed = _subseed(self.seed, 3, spec.id, i)
        d = generate_cohort(self.gen, self.model, spec.p, spec.n, rep_seed)
        recipe = FitRecipe("ml")
        plan = ResamplePlan(self.B, rep_seed)
        out = {}
        try:
            model = apparent_fit(d, recipe, plan)
            scores = predict(model, d)
            apparent = measure_value("c-statistic", scores, d.outcomes)
            reps = evaluate_replicates(d, recipe, "c-statistic", plan)
            for method in self.methods:
                kind, correction = parse_method(method)
                if kind == DELONG:
                    est = delong_interval(d, recipe, plan, self.alpha,
                                          apparent_scores=scores)
                elif kind == APPARENT:
                    est = apparent_bootstrap_ci(
                        d, recipe, "c-statistic", plan, self.alpha,
                        replicates=reps, apparent=apparent)
                elif kind == LOCATION_SHIFTED:
                    est = location_shifted_ci(
                        d, recipe, "c-statistic", plan, correction,
                        self.alpha, replicates=reps, apparent=apparent)
                else:
                    point = correct(correction, d, recipe, "c-statistic",
                                    plan, replicates=reps, apparent=apparent)
                    est = two_stage_ci(d, recipe, "c-statistic", plan,
                                       self.inner_B, correction, self.alpha,
                                       point_result=point)
                out[method] = (est.contains(self.model.true_auc), est.width)
        except (ValueError, ArithmeticError):
            return None  # replication-level failure, recorded not fatal
        return out


def run_scenario(spec: ScenarioSpec, methods, replications: int, B: int,
                 inner_B: int, seed: int, alpha: float = 0.05,
                 workers: int = 1, config: GeneratorConfig | None = None,
                 calibration_n: int = 1_000_000,
                 estimand_n: int = 500_000) -> list[CoverageResult]:
    """Run one scenario end to end and aggregate coverage per method."""
    for method in methods:
        parse_method(method)
    config = config or GeneratorConfig.default()
    gen = CovariateGenerator(config)
    slopes = config.coefficients[(spec.p, spec.coefficient_type)]
    beta0 = calibrate_intercept(gen, slopes, spec.event_rate, spec.p,
                                sample_n=calibration_n,
                                seed=_subseed(seed, 1, spec.id))
    model = TrueModel(beta0, slopes)
    true_auc = estimate_true_auc(gen, model, spec.p, estimand_n,
                                 seed=_subseed(seed, 2, spec.id))
    model = TrueModel(beta0, slopes, true_auc)

    task = _ReplicationTask(gen, model, spec, methods, B, inner_B, alpha,
                            seed)
    records = map_records(replications, task, workers=workers)
    results = []
    for method in methods:
        covered, widths, failures = 0, [], 0
        for rec in records:
            if rec is None or method not in rec:
                failures += 1
                continue
            hit, width = rec[method]
            covered += bool(hit)
            widths.append(width)
        done = replications - failures
        results.append(CoverageResult(
            scenario_id=spec.id, method=method, replications=done,
            coverage=covered / done if done else 0.0,
            mean_width=float(np.mean(widths)) if widths else float("nan"),
            failures=failures, true_auc=true_auc))
    return results


def coverage_to_csv(results: list[CoverageResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "method", "replications", "coverage",
                     "mean_width", "failures", "true_auc"])
    for r in results:
        writer.writerow([r.scenario_id, r.method, r.replications,
                         f"{r.coverage:.6g}", f"{r.mean_width:.6g}",
                         r.failures, f"{r.true_auc:.6g}"])
    return buf.getvalue()


def coverage_to_json(results: list[CoverageResult], meta: dict) -> str:
    payload = {
        "meta": meta,
        "results": [
            {"scenario": r.scenario_id, "method": r.method,
             "replications": r.replications,
             "coverage": round(r.coverage, 6),
             "mean_width": round(r.mean_width, 6)
             if np.isfinite(r.mean_width) else None,
             "failures": r.failures,
             "true_auc": round(r.true_auc, 6)}
            for r in results
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_scenario_params(path, scenario_ids) -> None:
    """Key-value scenario parameter file (one line per scenario)."""
    with open(path, "w", encoding="utf-8") as fh:
        for sid in scenario_ids:
            s = ScenarioSpec.by_id(sid)
            fh.write(f"scenario={s.id} epv={s.epv} event_rate={s.event_rate} "
                     f"p={s.p} coefficient_type={s.coefficient_type} "
                     f"n={s.n}\n")


def read_scenario_params(path) -> list[ScenarioSpec]:
    specs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            kv = dict(item.split("=", 1) for item in line.split())
            spec = ScenarioSpec(int(kv["scenario"]), int(kv["epv"]),
                                float(kv["event_rate"]), int(kv["p"]),
                                int(kv["coefficient_type"]))
            if "n" in kv and int(kv["n"]) != spec.n:
                raise SimulationError(
                    f"scenario {spec.id}: stated n={kv['n']} does not match "
                    f"the derived value {spec.n}")
            specs.append(spec)
    return specs
