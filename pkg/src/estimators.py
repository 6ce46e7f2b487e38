"""OLS with classical inference and probit maximum likelihood.

Both estimators take a design matrix whose first column is the
intercept, plus the quarter index of every row, and return immutable
fit records.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.errors import (
    DegenerateDataError,
    DomainError,
    InsufficientDataError,
    SeparationError,
    SingularMatrixError,
)
from src.numerics import (
    as_matrix,
    inverse_mills_array,
    solve_spd,
    spd_inverse,
    std_normal_cdf_array,
    std_normal_inv_cdf,
    std_normal_logcdf_array,
    std_normal_pdf,
)
from src.series_core import QuarterId, Series

logger = logging.getLogger(__name__)

GRADIENT_TOL = 1e-8
MAX_ITERATIONS = 100
MAX_HALVINGS = 40
TIE_RTOL = 1e-12
SEPARATION_BOUND = 1e4


@dataclass(frozen=True)
class RegressionFit:
    coefficient_names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    r_squared: float
    adj_r_squared: float
    rss: float
    tss: float
    sigma: float
    n_obs: int
    residuals: Series
    fitted: Series
    model: str = 'ols'

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.coefficient_names.index(name)])

    def std_error(self, name: str) -> float:
        return float(self.std_errors[self.coefficient_names.index(name)])

    def predict(self, X) -> np.ndarray:
        return as_matrix(X, 'X') @ self.coefficients


@dataclass(frozen=True)
class ProbitFit:
    coefficient_names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    log_likelihood: float
    null_log_likelihood: float
    iterations: int
    converged: bool
    gradient_norm: float
    fitted_probabilities: Series
    n_obs: int
    model: str = 'probit'
    # log-likelihood at the start and after every accepted step
    loglik_path: tuple[float, ...] = ()

    @property
    def pseudo_r_squared(self) -> float:
        """McFadden's 1 - LL / LL0."""
        if self.null_log_likelihood == 0.0:
            return 0.0
        return 1.0 - self.log_likelihood / self.null_log_likelihood

    @property
    def z_stats(self) -> np.ndarray:
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(self.std_errors > 0, self.coefficients / self.std_errors, np.nan)

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.coefficient_names.index(name)])

    def predict(self, X) -> np.ndarray:
        return std_normal_cdf_array(as_matrix(X, 'X') @ self.coefficients)


def _check_system(y, X, names: Sequence[str], index: Sequence[QuarterId], model: str):
    y = np.asarray(y, dtype=float)
    X = as_matrix(X, 'X')
    n, k = X.shape
    if y.shape != (n,):
        raise DomainError(f"{model}: y has {y.shape[0] if y.ndim else 0} rows but X has {n}")
    if len(index) != n:
        raise DomainError(f"{model}: index has {len(index)} quarters but X has {n} rows")
    if len(names) != k:
        raise DomainError(f"{model}: {len(names)} coefficient names for {k} columns")
    if n <= k:
        raise InsufficientDataError(f"{model}: {n} observations for {k} coefficients; need more rows than columns")
    if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
        raise DomainError(f"{model}: non-finite values in the regression system")
    for j in range(1, k):
        if not np.any(X[:, j]):
            raise SingularMatrixError(f"{model}: regressor '{names[j]}' is identically zero")
    return y, X


def ols_fit(y, X, names: Sequence[str], index: Sequence[QuarterId], model: str = 'ols') -> RegressionFit:
    """Least squares through the normal equations, homoskedastic standard errors."""
    y, X = _check_system(y, X, names, index, model)
    n, k = X.shape

    xtx = X.T @ X
    xty = X.T @ y
    try:
        beta = solve_spd(xtx, xty)
        xtx_inv = spd_inverse(xtx)
    except SingularMatrixError as e:
        raise SingularMatrixError(f"{model}: collinear regressors ({e})", pivot=e.pivot) from e

    fitted = X @ beta
    resid = y - fitted
    rss = float(resid @ resid)
    centered = y - y.mean()
    tss = float(centered @ centered)
    df = n - k
    s2 = rss / df
    std_errors = np.sqrt(np.maximum(np.diag(xtx_inv) * s2, 0.0))
    with np.errstate(divide='ignore', invalid='ignore'):
        t_stats = np.where(std_errors > 0, beta / std_errors, np.nan)

    if tss > 0:
        r_squared = min(max(1.0 - rss / tss, 0.0), 1.0)
        adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) / df
    else:
        r_squared = adj_r_squared = 0.0

    quarters = tuple(index)
    logger.debug(f"{model}: OLS on {n} rows, coefficients {np.round(beta, 6).tolist()}, R2={r_squared:.4f}")
    return RegressionFit(
        coefficient_names=tuple(names),
        coefficients=beta,
        std_errors=std_errors,
        t_stats=t_stats,
        r_squared=r_squared,
        adj_r_squared=adj_r_squared,
        rss=rss,
        tss=tss,
        sigma=math.sqrt(s2),
        n_obs=n,
        residuals=Series(f"{model}_residual", quarters, tuple(resid.tolist()), 'percent_growth'),
        fitted=Series(f"{model}_fitted", quarters, tuple(fitted.tolist()), 'percent_growth'),
        model=model,
    )


def probit_loglike(beta, y, X) -> float:
    """Sum of y ln Phi(x'b) + (1-y) ln(1 - Phi(x'b)), via ln Phi(q x'b) with q = 2y - 1."""
    q = 2.0 * np.asarray(y, dtype=float) - 1.0
    return float(np.sum(std_normal_logcdf_array(q * (X @ beta))))


def probit_gradient(beta, y, X) -> np.ndarray:
    q = 2.0 * np.asarray(y, dtype=float) - 1.0
    z = q * (X @ beta)
    return X.T @ (q * inverse_mills_array(z))


def probit_hessian(beta, y, X) -> np.ndarray:
    q = 2.0 * np.asarray(y, dtype=float) - 1.0
    z = q * (X @ beta)
    lam = inverse_mills_array(z)
    weights = lam * (lam + z)
    return -(X.T * weights) @ X


def _strictly_separates(beta, y, X) -> bool:
    index = X @ beta
    ones = index[y == 1.0]
    zeros = index[y == 0.0]
    return bool(ones.min() > zeros.max() or ones.max() < zeros.min())


def _separation(model: str, detail: str) -> SeparationError:
    return SeparationError(
        f"{model}: {detail}; the recession classes appear linearly separable by the "
        f"regressors, so the probit likelihood has no finite maximum. Drop or coarsen "
        f"the separating regressor, or use a longer sample."
    )


def probit_fit(y, X, names: Sequence[str], index: Sequence[QuarterId], model: str = 'probit') -> ProbitFit:
    """Newton-Raphson on the probit log-likelihood with step halving."""
    y, X = _check_system(y, X, names, index, model)
    n, k = X.shape
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DomainError(f"{model}: dependent variable must be 0/1")
    n_ones = int(y.sum())
    if n_ones == 0 or n_ones == n:
        raise DegenerateDataError(
            f"{model}: all {n} observations equal {int(n_ones == n)}; the sample must contain both classes"
        )

    p_bar = n_ones / n
    null_ll = n_ones * math.log(p_bar) + (n - n_ones) * math.log1p(-p_bar)

    beta = np.zeros(k)
    beta[0] = std_normal_inv_cdf(p_bar)
    ll = probit_loglike(beta, y, X)
    grad = probit_gradient(beta, y, X)
    grad_max = float(np.max(np.abs(grad)))
    converged = grad_max < GRADIENT_TOL
    iterations = 0
    path = [ll]

    while not converged and iterations < MAX_ITERATIONS:
        iterations += 1
        try:
            step = solve_spd(-probit_hessian(beta, y, X), grad)
        except SingularMatrixError as e:
            raise SingularMatrixError(f"{model}: information matrix singular at iteration {iterations} ({e})",
                                      pivot=e.pivot) from e

        # within this band the log-likelihood cannot tell two points apart
        tie = TIE_RTOL * max(abs(ll), 1.0)
        gain_unresolved = float(grad @ step) <= tie
        t = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = beta + t * step
            candidate_ll = probit_loglike(candidate, y, X)
            if np.isfinite(candidate_ll):
                if candidate_ll > ll + tie:
                    candidate_grad = probit_gradient(candidate, y, X)
                    break
                if candidate_ll >= ll - tie:
                    candidate_grad = probit_gradient(candidate, y, X)
                    if gain_unresolved or np.max(np.abs(candidate_grad)) < grad_max:
                        break
            t *= 0.5
        else:
            logger.debug(f"{model}: no ascent along the Newton direction at iteration {iterations}")
            break

        beta, ll, grad = candidate, candidate_ll, candidate_grad
        grad_max = float(np.max(np.abs(grad)))
        converged = grad_max < GRADIENT_TOL
        path.append(ll)
        logger.debug(f"{model}: iteration {iterations} loglik={ll:.10f} |grad|={grad_max:.3e} step={t:g}")

        if np.max(np.abs(beta)) > SEPARATION_BOUND:
            raise _separation(model, f"coefficients exceeded {SEPARATION_BOUND:g} in magnitude")
        if _strictly_separates(beta, y, X):
            raise _separation(model, f"the fitted index splits the classes perfectly at iteration {iterations}")

    if not converged:
        raise _separation(model, f"Newton-Raphson did not converge in {iterations} iterations "
                                 f"(gradient max-norm {grad_max:.3e})")

    covariance = spd_inverse(-probit_hessian(beta, y, X))
    std_errors = np.sqrt(np.maximum(np.diag(covariance), 0.0))
    eps = np.finfo(float).eps
    probs = np.clip(std_normal_cdf_array(X @ beta), eps, 1.0 - eps)

    logger.debug(f"{model}: converged in {iterations} iterations, loglik={ll:.6f}")
    return ProbitFit(
        coefficient_names=tuple(names),
        coefficients=beta,
        std_errors=std_errors,
        log_likelihood=ll,
        null_log_likelihood=null_ll,
        iterations=iterations,
        converged=converged,
        gradient_norm=grad_max,
        fitted_probabilities=Series(f"{model}_probability", tuple(index), tuple(probs.tolist()), 'level'),
        n_obs=n,
        model=model,
        loglik_path=tuple(path),
    )


def probit_marginal_effect(fit: ProbitFit, at, coefficient_index: int) -> float:
    """Slope of the fitted probability in regressor j at the point ``at``: b_j * phi(at'b)."""
    at = np.asarray(at, dtype=float)
    k = len(fit.coefficients)
    if at.shape != (k,):
        raise DomainError(f"evaluation point has {at.size} entries, fit has {k} coefficients")
    if not 0 <= coefficient_index < k:
        raise DomainError(f"coefficient index {coefficient_index} out of range 0..{k - 1}")
    return float(fit.coefficients[coefficient_index] * std_normal_pdf(float(at @ fit.coefficients)))
