"""Logistic regression fitting: maximum likelihood, ridge, and lasso.

The ML solver is Newton-Raphson/IRLS with step-halving (tolerance 1e-8 on
the relative log-likelihood change, 100-iteration cap). The penalized
solver is cyclic coordinate descent on the IRLS quadratic approximation,
with predictors standardized internally and coefficients back-transformed.
The intercept is never penalized.

All fitting is a pure function of (dataset, recipe, fold rng); under
separation the capped estimate is returned with converged=False rather
than aborting, so bootstrap replicates never fail.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .data import Dataset

# Linear predictors are clipped here before the logistic transform so
# probabilities stay strictly inside (0,1) in float64 even for capped
# separated fits. The clip is monotone.
LP_CLIP = 30.0


class FitError(ValueError):
    """Raised for structurally unfittable inputs (not for non-convergence)."""


@dataclass(frozen=True)
class FitRecipe:
    """Everything needed to reproduce a model-development run.

    penalty=None with a penalized estimator means lambda is selected by
    K-fold cross-validated deviance over a descending log-spaced grid.
    """

    estimator: str = "ml"  # "ml" | "ridge" | "lasso"
    penalty: float | None = None
    cv_folds: int = 10
    n_lambdas: int = 100
    lambda_min_ratio: float = 1e-4
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if self.estimator not in ("ml", "ridge", "lasso"):
            raise FitError(f"unknown estimator {self.estimator!r}")
        if self.penalty is not None and self.penalty < 0:
            raise FitError("penalty must be nonnegative")


@dataclass(frozen=True)
class FittedModel:
    estimator: str
    intercept: float
    slopes: np.ndarray
    penalty: float = 0.0
    converged: bool = True
    iterations: int = 0

    def coefficients(self) -> np.ndarray:
        return np.concatenate(([self.intercept], self.slopes))


@dataclass(frozen=True)
class RiskScores:
    """Estimated event probabilities and the linear predictors behind them.

    values[i] = logistic(linear_predictors[i]) exactly, and every value is
    strictly inside (0,1) (linear predictors are clipped at +/-LP_CLIP).
    """

    values: np.ndarray
    linear_predictors: np.ndarray


def logistic(eta: np.ndarray) -> np.ndarray:
    return expit(eta)


def _sum_log1pexp(eta: np.ndarray) -> float:
    """Numerically stable sum of log(1 + exp(eta))."""
    return float(np.sum(np.maximum(eta, 0.0)
                        + np.log1p(np.exp(-np.abs(eta)))))


def log_likelihood(beta: np.ndarray, d: Dataset) -> float:
    """Bernoulli log-likelihood at beta = (intercept, slopes)."""
    eta = beta[0] + d.predictors @ beta[1:]
    return float(np.sum(d.outcomes * eta)) - _sum_log1pexp(eta)


def log_likelihood_gradient(beta: np.ndarray, d: Dataset) -> np.ndarray:
    """Analytic gradient of the log-likelihood: Z^T (y - p), Z = [1, X]."""
    eta = beta[0] + d.predictors @ beta[1:]
    resid = d.outcomes - logistic(eta)
    return np.concatenate(([resid.sum()], d.predictors.T @ resid))


def _newton_irls(y, z, beta0, max_iter, tol):
    """Newton-Raphson with step-halving on the log-likelihood.

    z is the design matrix including the intercept column. Returns
    (beta, converged, iterations)."""
    beta = beta0.copy()
    eta = z @ beta
    ll = float(y @ eta) - _sum_log1pexp(eta)
    for it in range(1, max_iter + 1):
        p = logistic(eta)
        w = p * (1.0 - p)
        # guard against exactly-zero weights under extreme separation
        np.maximum(w, 1e-12, out=w)
        grad = z.T @ (y - p)
        hess = (z * w[:, None]).T @ z
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(hess, grad, rcond=None)
        t = 1.0
        for _ in range(40):
            cand = beta + t * step
            eta_c = z @ cand
            ll_c = float(y @ eta_c) - _sum_log1pexp(eta_c)
            if ll_c >= ll or t < 1e-12:
                break
            t *= 0.5
        if ll_c < ll:  # no improving step found
            return beta, True, it
        improved = ll_c - ll
        beta, eta, ll = cand, eta_c, ll_c
        if improved <= tol * (abs(ll) + 1e-12):
            return beta, True, it
    return beta, False, max_iter


def fit_ml(d: Dataset, recipe: FitRecipe | None = None,
           warm_start: np.ndarray | None = None) -> FittedModel:
    """Maximum-likelihood logistic fit."""
    recipe = recipe or FitRecipe("ml")
    d.check_fittable()
    z = np.hstack([np.ones((d.n, 1)), d.predictors])
    if warm_start is None:
        beta0 = np.zeros(d.p + 1)
        ybar = float(d.outcomes.mean())
        beta0[0] = np.log(ybar / (1.0 - ybar))
    else:
        beta0 = np.asarray(warm_start, dtype=np.float64)
    beta, converged, it = _newton_irls(
        d.outcomes, z, beta0, recipe.max_iter, recipe.tol)
    return FittedModel("ml", float(beta[0]), beta[1:].copy(),
                       penalty=0.0, converged=converged, iterations=it)


def _standardize(x):
    mu = x.mean(axis=0)
    sd = x.std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (x - mu) / sd, mu, sd


def lasso_lambda_max(d: Dataset) -> float:
    """Smallest lambda at which every lasso slope is exactly zero
    (KKT bound at the intercept-only fit, standardized predictors)."""
    xs, _, _ = _standardize(d.predictors)
    ybar = d.outcomes.mean()
    return float(np.max(np.abs(xs.T @ (d.outcomes - ybar))))


def _cd_penalized(y, xs, kind, lam, a0, b, max_iter, tol):
    """Cyclic coordinate descent on the IRLS quadratic approximation.

    Objective: -loglik + lam * sum(b^2) (ridge) or lam * sum(|b|) (lasso),
    intercept unpenalized, xs pre-standardized. Updates (a0, b) in place
    and returns (a0, b, converged, iterations)."""
    n, p = xs.shape
    eta = a0 + xs @ b
    ll = float(y @ eta) - _sum_log1pexp(eta)
    pen = lam * (np.sum(b * b) if kind == "ridge" else np.sum(np.abs(b)))
    obj = -ll + pen
    for it in range(1, max_iter + 1):
        pr = logistic(eta)
        w = pr * (1.0 - pr)
        np.maximum(w, 1e-12, out=w)
        zresp = eta + (y - pr) / w
        # inner CD on the weighted least-squares surrogate
        wx = w[:, None] * xs
        denom = np.einsum("ij,ij->j", wx, xs)
        wsum = w.sum()
        r = zresp - eta  # residual of the surrogate at current coefficients
        for _ in range(1000):
            delta_max = 0.0
            for j in range(p):
                bj_old = b[j]
                rho = wx[:, j] @ r + denom[j] * bj_old
                if kind == "ridge":
                    bj = rho / (denom[j] + 2.0 * lam)
                else:
                    bj = np.sign(rho) * max(abs(rho) - lam, 0.0) / denom[j]
                if bj != bj_old:
                    r -= (bj - bj_old) * xs[:, j]
                    b[j] = bj
                    delta_max = max(delta_max, abs(bj - bj_old))
            a_new = a0 + (w @ r) / wsum
            if a_new != a0:
                r -= a_new - a0
                delta_max = max(delta_max, abs(a_new - a0))
                a0 = a_new
            if delta_max < 1e-12:
                break
        eta = a0 + xs @ b
        ll = float(y @ eta) - _sum_log1pexp(eta)
        pen = lam * (np.sum(b * b) if kind == "ridge" else np.sum(np.abs(b)))
        obj_new = -ll + pen
        if abs(obj - obj_new) <= tol * (abs(obj_new) + 1e-12):
            return a0, b, True, it
        obj = obj_new
    return a0, b, False, max_iter


def _deviance(model: FittedModel, d: Dataset) -> float:
    eta = np.clip(model.intercept + d.predictors @ model.slopes,
                  -LP_CLIP, LP_CLIP)
    return float(-2.0 * (float(d.outcomes @ eta) - _sum_log1pexp(eta)))


def lambda_grid(d: Dataset, recipe: FitRecipe) -> np.ndarray:
    lmax = lasso_lambda_max(d)
    if lmax <= 0:
        lmax = 1.0
    return np.geomspace(lmax, lmax * recipe.lambda_min_ratio,
                        recipe.n_lambdas)


def fit_penalized(d: Dataset, recipe: FitRecipe,
                  fold_rng: np.random.Generator | None = None) -> FittedModel:
    """Ridge or lasso logistic fit at a fixed or CV-selected lambda."""
    d.check_fittable()
    if recipe.estimator not in ("ridge", "lasso"):
        raise FitError("fit_penalized requires a ridge or lasso recipe")
    if recipe.penalty is not None:
        return _fit_at_lambda(d, recipe, recipe.penalty)

    if fold_rng is None:
        raise FitError("CV-selected penalty requires a fold rng")
    grid = lambda_grid(d, recipe)
    folds = _fold_assignment(d.n, recipe.cv_folds, fold_rng)
    cv_dev = np.zeros(grid.size)
    for k in range(recipe.cv_folds):
        train = d.subset(np.flatnonzero(folds != k))
        test = d.subset(np.flatnonzero(folds == k))
        try:
            train.check_fittable()
        except Exception:
            continue  # degenerate fold: skip its contribution
        for i, model in enumerate(_fit_path(train, recipe, grid)):
            cv_dev[i] += _deviance(model, test)
    best = grid[int(np.argmin(cv_dev))]
    model = _fit_at_lambda(d, recipe, float(best))
    return model


def _fold_assignment(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    perm = rng.permutation(n)
    folds = np.empty(n, dtype=np.intp)
    folds[perm] = np.arange(n) % k
    return folds


def _fit_path(d: Dataset, recipe: FitRecipe, grid: np.ndarray):
    """Fit along a descending lambda grid with warm starts."""
    xs, mu, sd = _standardize(d.predictors)
    ybar = float(d.outcomes.mean())
    a0 = float(np.log(ybar / (1.0 - ybar)))
    b = np.zeros(d.p)
    out = []
    for lam in grid:
        a0, b, conv, it = _cd_penalized(
            d.outcomes, xs, recipe.estimator, float(lam), a0, b,
            recipe.max_iter, recipe.tol)
        out.append(_back_transform(recipe.estimator, a0, b, mu, sd,
                                   float(lam), conv, it))
    return out


def _fit_at_lambda(d: Dataset, recipe: FitRecipe, lam: float) -> FittedModel:
    xs, mu, sd = _standardize(d.predictors)
    ybar = float(d.outcomes.mean())
    a0 = float(np.log(ybar / (1.0 - ybar)))
    b = np.zeros(d.p)
    a0, b, conv, it = _cd_penalized(d.outcomes, xs, recipe.estimator, lam,
                                    a0, b, recipe.max_iter, recipe.tol)
    return _back_transform(recipe.estimator, a0, b, mu, sd, lam, conv, it)


def _back_transform(kind, a0, b, mu, sd, lam, converged, iterations):
    slopes = b / sd
    intercept = a0 - float(slopes @ mu)
    return FittedModel(kind, float(intercept), slopes, penalty=lam,
                       converged=converged, iterations=iterations)


def penalized_objective(model: FittedModel, d: Dataset) -> float:
    """-loglik + lambda * penalty(slopes), on the standardized scale the
    solver works in (so grid-perturbation probes are meaningful)."""
    xs, mu, sd = _standardize(d.predictors)
    b = model.slopes * sd
    a0 = model.intercept + float(model.slopes @ mu)
    eta = a0 + xs @ b
    ll = float(d.outcomes @ eta) - _sum_log1pexp(eta)
    if model.estimator == "ridge":
        pen = model.penalty * float(np.sum(b * b))
    else:
        pen = model.penalty * float(np.sum(np.abs(b)))
    return -ll + pen


def fit(d: Dataset, recipe: FitRecipe,
        fold_rng: np.random.Generator | None = None,
        warm_start: np.ndarray | None = None) -> FittedModel:
    """Dispatch on the recipe's estimator. The single entry point used by
    the bootstrap engine, so the full model-development process (including
    any penalty tuning) is what gets resampled."""
    if recipe.estimator == "ml":
        return fit_ml(d, recipe, warm_start=warm_start)
    return fit_penalized(d, recipe, fold_rng=fold_rng)


def predict(m: FittedModel, d: Dataset) -> RiskScores:
    if d.p != m.slopes.shape[0]:
        raise FitError(
            f"model has {m.slopes.shape[0]} slopes but dataset has p={d.p}")
    lp = np.clip(m.intercept + d.predictors @ m.slopes, -LP_CLIP, LP_CLIP)
    return RiskScores(values=logistic(lp), linear_predictors=lp)
