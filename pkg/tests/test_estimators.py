"""OLS and probit estimators against brute-force oracles."""

import math

import numpy as np
import pytest

from src.errors import (
    DegenerateDataError,
    DomainError,
    InsufficientDataError,
    SeparationError,
    SingularMatrixError,
)
from src.estimators import (
    ols_fit,
    probit_fit,
    probit_gradient,
    probit_hessian,
    probit_loglike,
    probit_marginal_effect,
)
from src.numerics import std_normal_cdf_array
from src.series_core import QuarterId

START = QuarterId(1990, 1)


def _index(n):
    return [START + i for i in range(n)]


def _design(x):
    x = np.asarray(x, dtype=float)
    return np.column_stack([np.ones(len(x)), x])


def _oracle_normal_equations(y, X):
    """Gaussian elimination with partial pivoting on X'X b = X'y, written out by hand."""
    a = [[float(sum(X[r, i] * X[r, j] for r in range(len(y)))) for j in range(X.shape[1])] for i in range(X.shape[1])]
    b = [float(sum(X[r, i] * y[r] for r in range(len(y)))) for i in range(X.shape[1])]
    k = len(b)
    for col in range(k):
        pivot = max(range(col, k), key=lambda r: abs(a[r][col]))
        a[col], a[pivot] = a[pivot], a[col]
        b[col], b[pivot] = b[pivot], b[col]
        for r in range(col + 1, k):
            factor = a[r][col] / a[col][col]
            for c in range(col, k):
                a[r][c] -= factor * a[col][c]
            b[r] -= factor * b[col]
    beta = [0.0] * k
    for r in reversed(range(k)):
        beta[r] = (b[r] - sum(a[r][c] * beta[c] for c in range(r + 1, k))) / a[r][r]
    return np.array(beta)


def _erfc_loglike(beta, y, X):
    index = X @ beta
    total = 0.0
    for yi, zi in zip(y, index):
        p = 0.5 * math.erfc(-zi / math.sqrt(2.0))
        total += math.log(p) if yi == 1.0 else math.log1p(-p)
    return total


def _grid_oracle(y, X):
    """Coarse-to-fine 2-D grid maximisation of the probit likelihood."""
    center = np.zeros(2)
    half_width, step = 3.0, 0.1
    while step >= 1e-3 / 2:
        axis = np.arange(-half_width, half_width + step / 2, step)
        best, best_ll = center, -math.inf
        for da in axis:
            for db in axis:
                beta = center + np.array([da, db])
                ll = _erfc_loglike(beta, y, X)
                if ll > best_ll:
                    best, best_ll = beta, ll
        center = best
        half_width, step = 3.0 * step, step / 5.0
    return center, _erfc_loglike(center, y, X)


def _probit_draws(rng, n=50, a=0.3, b=0.8):
    x = rng.normal(size=n)
    y = (rng.uniform(size=n) < 0.5 * (1.0 + np.vectorize(math.erf)((a + b * x) / math.sqrt(2.0)))).astype(float)
    return y, _design(x)


class TestOls:
    def test_hand_example(self):
        fit = ols_fit([2.0, 1.0, 4.0, 3.0], _design([1.0, 2.0, 3.0, 4.0]), ['intercept', 'x'], _index(4))
        assert fit.coefficient('intercept') == pytest.approx(1.0, abs=1e-12)
        assert fit.coefficient('x') == pytest.approx(0.6, abs=1e-12)
        assert fit.rss == pytest.approx(3.2, abs=1e-12)
        assert fit.tss == pytest.approx(5.0, abs=1e-12)
        assert fit.r_squared == pytest.approx(0.36, abs=1e-12)
        # s^2 = 3.2 / 2, se(b) = sqrt(s^2 / Sxx)
        assert fit.std_error('x') == pytest.approx(math.sqrt(1.6 / 5.0), abs=1e-12)
        assert fit.n_obs == 4

    def test_residuals_and_fitted_indexed_by_quarter(self):
        fit = ols_fit([2.0, 1.0, 4.0, 3.0], _design([1.0, 2.0, 3.0, 4.0]), ['intercept', 'x'], _index(4))
        assert fit.residuals.quarters == tuple(_index(4))
        np.testing.assert_allclose(np.array(fit.fitted.values) + np.array(fit.residuals.values), [2.0, 1.0, 4.0, 3.0])

    def test_random_instances_match_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            n = int(rng.integers(10, 201))
            k = int(rng.integers(2, 5))
            X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
            y = X @ rng.normal(size=k) + rng.normal(size=n)
            fit = ols_fit(y, X, [f"b{j}" for j in range(k)], _index(n))
            np.testing.assert_allclose(fit.coefficients, _oracle_normal_equations(y, X), rtol=0.0, atol=1e-10)
            residuals = np.array(fit.residuals.values)
            assert np.max(np.abs(X.T @ residuals)) < 1e-8
            assert 0.0 <= fit.r_squared <= 1.0

    def test_exact_fit(self):
        x = np.linspace(-2.0, 2.0, 12)
        fit = ols_fit(2.0 + 1.0445 * x, _design(x), ['intercept', 'spread'], _index(12))
        assert fit.coefficient('spread') == pytest.approx(1.0445, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_constant_target(self):
        fit = ols_fit(np.full(6, 3.0), _design(np.arange(6.0)), ['intercept', 'x'], _index(6))
        assert fit.r_squared == 0.0

    def test_too_few_rows(self):
        with pytest.raises(InsufficientDataError):
            ols_fit([1.0, 2.0], _design([1.0, 2.0]), ['intercept', 'x'], _index(2))

    def test_collinear(self):
        x = np.arange(6.0)
        X = np.column_stack([np.ones(6), x, 2.0 * x])
        with pytest.raises(SingularMatrixError):
            ols_fit(x, X, ['intercept', 'a', 'b'], _index(6))

    def test_zero_column(self):
        with pytest.raises(SingularMatrixError, match="'x'"):
            ols_fit(np.arange(5.0), _design(np.zeros(5)), ['intercept', 'x'], _index(5))

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            ols_fit([1.0, 2.0, 3.0], _design([1.0, 2.0, 3.0, 4.0]), ['intercept', 'x'], _index(4))
        with pytest.raises(DomainError):
            ols_fit([1.0, 2.0, 3.0, 4.0], _design([1.0, 2.0, 3.0, 4.0]), ['intercept'], _index(4))

    def test_predict(self):
        fit = ols_fit([2.0, 1.0, 4.0, 3.0], _design([1.0, 2.0, 3.0, 4.0]), ['intercept', 'x'], _index(4))
        np.testing.assert_allclose(fit.predict(_design([10.0])), [7.0], atol=1e-12)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(31)
        x = rng.normal(size=60)
        y = 1.5 + 0.7 * x + rng.normal(size=60)
        base = ols_fit(y, _design(x), ['intercept', 'x'], _index(60))
        for c in (0.01, 3.0, 250.0):
            scaled_y = ols_fit(c * y, _design(x), ['intercept', 'x'], _index(60))
            np.testing.assert_allclose(scaled_y.coefficients, c * base.coefficients, rtol=1e-10)
            np.testing.assert_allclose(scaled_y.std_errors, c * base.std_errors, rtol=1e-9)
            assert scaled_y.r_squared == pytest.approx(base.r_squared, abs=1e-12)

            scaled_x = ols_fit(y, _design(c * x), ['intercept', 'x'], _index(60))
            assert scaled_x.coefficient('x') == pytest.approx(base.coefficient('x') / c, rel=1e-10)
            assert scaled_x.coefficient('intercept') == pytest.approx(base.coefficient('intercept'), rel=1e-10)
            assert scaled_x.r_squared == pytest.approx(base.r_squared, abs=1e-12)


class TestProbit:
    def test_constant_only(self):
        X = np.ones((4, 1))
        fit = probit_fit([1.0, 1.0, 0.0, 1.0], X, ['intercept'], _index(4))
        assert fit.coefficients[0] == pytest.approx(0.6744897501960817, abs=1e-6)
        assert fit.converged
        assert fit.log_likelihood == pytest.approx(fit.null_log_likelihood, abs=1e-12)
        assert fit.pseudo_r_squared == pytest.approx(0.0, abs=1e-12)

    def test_separated(self):
        with pytest.raises(SeparationError, match='separable'):
            probit_fit([0.0, 0.0, 1.0, 1.0], _design([-1.0, -1.0, 1.0, 1.0]), ['intercept', 'x'], _index(4))

    def test_single_class(self):
        with pytest.raises(DegenerateDataError):
            probit_fit(np.zeros(6), _design(np.arange(6.0)), ['intercept', 'x'], _index(6))

    def test_non_binary(self):
        with pytest.raises(DomainError):
            probit_fit([0.0, 0.5, 1.0, 1.0], _design(np.arange(4.0)), ['intercept', 'x'], _index(4))

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            y, X = _probit_draws(rng)
            fit = probit_fit(y, X, ['intercept', 'x'], _index(len(y)))
            oracle_beta, oracle_ll = _grid_oracle(y, X)
            np.testing.assert_allclose(fit.coefficients, oracle_beta, rtol=0.0, atol=2e-3)
            assert fit.log_likelihood >= oracle_ll - 1e-8

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            y, X = _probit_draws(rng)
            for _ in range(5):
                beta = rng.normal(scale=0.7, size=2)
                analytic = probit_gradient(beta, y, X)
                h = 1e-6
                numeric = np.array([
                    (probit_loglike(beta + h * e, y, X) - probit_loglike(beta - h * e, y, X)) / (2.0 * h)
                    for e in np.eye(2)
                ])
                np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-6)

    def test_hessian_is_negative_definite(self):
        rng = np.random.default_rng(3)
        y, X = _probit_draws(rng)
        hessian = probit_hessian(np.array([0.2, -0.4]), y, X)
        assert np.all(np.linalg.eigvalsh(hessian) < 0.0)

    def test_loglike_matches_erfc(self):
        rng = np.random.default_rng(4)
        y, X = _probit_draws(rng)
        beta = np.array([0.1, 0.9])
        assert probit_loglike(beta, y, X) == pytest.approx(_erfc_loglike(beta, y, X), rel=1e-12)

    def test_shifting_a_regressor_moves_only_the_intercept(self):
        rng = np.random.default_rng(8)
        y, X = _probit_draws(rng, n=80)
        fit = probit_fit(y, X, ['intercept', 'x'], _index(80))
        shifted = X.copy()
        shifted[:, 1] += 3.0
        moved = probit_fit(y, shifted, ['intercept', 'x'], _index(80))
        b = fit.coefficients[1]
        assert moved.coefficients[1] == pytest.approx(b, abs=1e-7)
        assert moved.coefficients[0] == pytest.approx(fit.coefficients[0] - 3.0 * b, abs=1e-7)
        np.testing.assert_allclose(moved.fitted_probabilities.values, fit.fitted_probabilities.values, atol=1e-8)

    def test_fit_record(self):
        rng = np.random.default_rng(6)
        y, X = _probit_draws(rng, n=120)
        fit = probit_fit(y, X, ['intercept', 'x'], _index(120))
        assert fit.converged
        assert fit.gradient_norm < 1e-8
        assert fit.n_obs == 120
        assert fit.fitted_probabilities.quarters == tuple(_index(120))
        assert 0.0 < fit.pseudo_r_squared < 1.0
        assert np.all(fit.std_errors > 0.0)
        np.testing.assert_allclose(fit.predict(X), fit.fitted_probabilities.values, atol=1e-15)

    @staticmethod
    def _yield_scale_draws(rng):
        n = int(rng.integers(40, 251))
        spread = rng.normal(1.0, 1.2, size=n)
        funds = rng.normal(6.0, 3.0, size=n)
        index = -0.3 - 0.6 * spread + 0.08 * (funds - 6.0)
        y = (rng.uniform(size=n) < std_normal_cdf_array(index)).astype(float)
        return y, np.column_stack([np.ones(n), spread, funds])

    def test_uncentred_yield_scale_samples_converge(self):
        rng = np.random.default_rng(411)
        for _ in range(1500):
            y, X = self._yield_scale_draws(rng)
            n = len(y)
            if y.sum() < 3 or y.sum() > n - 3:
                continue
            fit = probit_fit(y, X, ['intercept', 'spread', 'funds'], _index(n))
            assert fit.converged
            assert fit.gradient_norm < 1e-8

    def test_loglik_never_decreases_across_steps(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            y, X = self._yield_scale_draws(rng)
            if y.sum() < 3 or y.sum() > len(y) - 3:
                continue
            fit = probit_fit(y, X, ['intercept', 'spread', 'funds'], _index(len(y)))
            path = np.array(fit.loglik_path)
            assert len(path) == fit.iterations + 1
            assert path[-1] == fit.log_likelihood
            assert np.all(np.diff(path) >= -1e-12 * max(abs(fit.log_likelihood), 1.0))


class TestMarginalEffect:
    @pytest.fixture
    def fit(self):
        rng = np.random.default_rng(12)
        y, X = _probit_draws(rng, n=150, a=-0.2, b=-1.1)
        return probit_fit(y, X, ['intercept', 'x'], _index(150))

    def test_formula(self, fit):
        at = np.array([1.0, 0.4])
        index = float(at @ fit.coefficients)
        expected = fit.coefficients[1] * math.exp(-0.5 * index * index) / math.sqrt(2.0 * math.pi)
        assert probit_marginal_effect(fit, at, 1) == pytest.approx(expected, rel=1e-14)

    def test_largest_at_zero_index(self, fit):
        a, b = fit.coefficients
        at_zero = np.array([1.0, -a / b])
        at_two = np.array([1.0, (2.0 - a) / b])
        at_minus_two = np.array([1.0, (-2.0 - a) / b])
        peak = abs(probit_marginal_effect(fit, at_zero, 1))
        assert peak > abs(probit_marginal_effect(fit, at_two, 1))
        assert peak > abs(probit_marginal_effect(fit, at_minus_two, 1))

    def test_bad_arguments(self, fit):
        with pytest.raises(DomainError):
            probit_marginal_effect(fit, [1.0, 0.0, 0.0], 1)
        with pytest.raises(DomainError):
            probit_marginal_effect(fit, [1.0, 0.0], 2)
