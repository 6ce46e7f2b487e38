"""Standard normal functions and a small SPD solver.

The normal CDF uses Hart's double-precision rational approximation of
the complementary tail for |x| < 7.07 and a continued fraction beyond,
so both the tail probability and its logarithm stay finite far out.
Scalar entry points take and return floats; the ``*_array`` variants
work elementwise on numpy arrays and back the estimators.
"""

import math

import numpy as np

from src.errors import DomainError, SingularMatrixError

SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Hart (1968) coefficients, highest order first.
_NUM = (3.52624965998911e-02, 0.700383064443688, 6.37396220353165, 33.912866078383,
        112.079291497871, 221.213596169931, 220.206867912376)
_DEN = (8.83883476483184e-02, 1.75566716318264, 16.064177579207, 86.7807322029461,
        296.564248779674, 637.333633378831, 793.826512519948, 440.413735824752)
_SPLIT = 7.07106781186547
_UNDERFLOW = 37.0

PIVOT_FLOOR = 1e-12


def _horner(coefs, x):
    acc = np.full_like(x, coefs[0])
    for c in coefs[1:]:
        acc = acc * x + c
    return acc


def _tail_terms(a: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """For a = |x|, return (Q(a), log Q(a), phi(a)/Q(a)) where Q(a) = 1 - Phi(a)."""
    q = np.empty_like(a)
    log_q = np.empty_like(a)
    mills = np.empty_like(a)

    near = a < _SPLIT
    if np.any(near):
        an = a[near]
        ratio = _horner(_NUM, an) / _horner(_DEN, an)
        q[near] = np.exp(-0.5 * an * an) * ratio
        log_q[near] = -0.5 * an * an + np.log(ratio)
        mills[near] = 1.0 / (SQRT_2PI * ratio)

    far = ~near
    if np.any(far):
        af = a[far]
        cf = af + 0.65
        cf = af + 4.0 / cf
        cf = af + 3.0 / cf
        cf = af + 2.0 / cf
        cf = af + 1.0 / cf
        q[far] = np.where(af > _UNDERFLOW, 0.0, np.exp(-0.5 * af * af) / cf / SQRT_2PI)
        log_q[far] = -0.5 * af * af - LOG_SQRT_2PI - np.log(cf)
        mills[far] = cf
    return q, log_q, mills


def std_normal_pdf_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def std_normal_cdf_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    q, _, _ = _tail_terms(np.abs(x))
    return np.where(x > 0, 1.0 - q, q)


def std_normal_logcdf_array(x) -> np.ndarray:
    """ln Phi(x) without underflow on the left tail."""
    x = np.asarray(x, dtype=float)
    q, log_q, _ = _tail_terms(np.abs(x))
    return np.where(x > 0, np.log1p(-q), log_q)


def inverse_mills_array(x) -> np.ndarray:
    """phi(x) / Phi(x), finite for every finite x."""
    x = np.asarray(x, dtype=float)
    a = np.abs(x)
    q, _, mills_tail = _tail_terms(a)
    right = np.exp(-0.5 * a * a - LOG_SQRT_2PI - np.log1p(-q))
    return np.where(x > 0, right, mills_tail)


def _check_finite(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"expected a finite real, got {x!r}")
    return x


def std_normal_pdf(x: float) -> float:
    x = _check_finite(x)
    return math.exp(-0.5 * x * x) / SQRT_2PI


def std_normal_cdf(x: float) -> float:
    return float(std_normal_cdf_array(np.array([_check_finite(x)]))[0])


def _acklam(p: float) -> float:
    # Acklam's rational approximation, relative error about 1e-9.
    a = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
    b = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
    c = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
    d = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
    p_low = 0.02425

    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    if p > 1.0 - p_low:
        q = math.sqrt(-2.0 * math.log1p(-p))
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)


def std_normal_inv_cdf(p: float) -> float:
    """Quantile of the standard normal, refined with Halley steps against our CDF."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"inverse normal CDF needs 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0

    x = _acklam(p)
    for _ in range(2):
        err = std_normal_cdf(x) - p
        density = std_normal_pdf(x)
        if density == 0.0:
            break
        u = err / density
        x = x - u / (1.0 + 0.5 * x * u)
    return x


def as_matrix(a, name: str = 'matrix') -> np.ndarray:
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DomainError(f"{name} must be a nonempty 2-D array, got shape {m.shape}")
    return m


def cholesky(a) -> np.ndarray:
    """Lower factor L with A = L L^T; fails on a pivot below the relative floor."""
    a = as_matrix(a)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DomainError(f"cholesky needs a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=1e-10, atol=1e-12 * max(1.0, float(np.max(np.abs(a))))):
        raise DomainError("cholesky needs a symmetric matrix")

    scale = float(np.max(np.abs(np.diag(a)))) or 1.0
    lower = np.zeros_like(a)
    for i in range(n):
        for j in range(i + 1):
            s = a[i, j] - np.dot(lower[i, :j], lower[j, :j])
            if i == j:
                if s <= PIVOT_FLOOR * scale:
                    raise SingularMatrixError(
                        f"matrix is not positive definite at pivot {i} (pivot {s:.3e})", pivot=i
                    )
                lower[i, i] = math.sqrt(s)
            else:
                lower[i, j] = s / lower[j, j]
    return lower


def solve_spd(a, b) -> np.ndarray:
    """Solve A x = b for symmetric positive definite A by forward/back substitution."""
    lower = cholesky(a)
    b = np.asarray(b, dtype=float)
    n = lower.shape[0]
    if b.shape != (n,):
        raise DomainError(f"right-hand side has shape {b.shape}, expected ({n},)")

    z = np.zeros(n)
    for i in range(n):
        z[i] = (b[i] - np.dot(lower[i, :i], z[:i])) / lower[i, i]
    x = np.zeros(n)
    for i in reversed(range(n)):
        x[i] = (z[i] - np.dot(lower[i + 1:, i], x[i + 1:])) / lower[i, i]
    return x


def spd_inverse(a) -> np.ndarray:
    """Inverse of an SPD matrix, column by column through solve_spd."""
    a = as_matrix(a)
    n = a.shape[0]
    columns = [solve_spd(a, np.eye(n)[:, j]) for j in range(n)]
    inverse = np.column_stack(columns)
    return 0.5 * (inverse + inverse.T)
