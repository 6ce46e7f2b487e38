"""Normal distribution kernels and the SPD solver, checked against independent oracles."""

import math

import numpy as np
import pytest

from src.errors import DomainError, SingularMatrixError
from src.numerics import (
    cholesky,
    inverse_mills_array,
    solve_spd,
    spd_inverse,
    std_normal_cdf,
    std_normal_cdf_array,
    std_normal_inv_cdf,
    std_normal_logcdf_array,
    std_normal_pdf,
)


def _simpson_cdf(x, panels=4000):
    """Phi(x) by composite Simpson on the density; tails folded through symmetry."""
    a = abs(x)
    grid = np.linspace(0.0, a, panels + 1)
    density = np.exp(-0.5 * grid * grid) / math.sqrt(2.0 * math.pi)
    h = a / panels
    area = h / 3.0 * (density[0] + density[-1] + 4.0 * density[1:-1:2].sum() + 2.0 * density[2:-1:2].sum())
    return 0.5 + area if x >= 0 else 0.5 - area


class TestCdf:
    def test_zero_is_exactly_half(self):
        assert std_normal_cdf(0.0) == 0.5
        assert std_normal_cdf(-0.0) == 0.5

    def test_matches_quadrature_oracle(self):
        grid = np.linspace(-8.0, 8.0, 1000)
        ours = std_normal_cdf_array(grid)
        oracle = np.array([_simpson_cdf(x) for x in grid])
        np.testing.assert_allclose(ours, oracle, rtol=0.0, atol=1e-7)

    def test_matches_erfc(self):
        grid = np.linspace(-37.0, 8.0, 2001)
        ours = std_normal_cdf_array(grid)
        reference = np.array([0.5 * math.erfc(-x / math.sqrt(2.0)) for x in grid])
        np.testing.assert_allclose(ours, reference, rtol=1e-9, atol=1e-16)

    def test_symmetry(self):
        grid = np.linspace(0.0, 9.0, 1000)
        total = std_normal_cdf_array(grid) + std_normal_cdf_array(-grid)
        np.testing.assert_allclose(total, 1.0, rtol=0.0, atol=1e-15)

    def test_monotone(self):
        grid = np.linspace(-10.0, 10.0, 5001)
        assert np.all(np.diff(std_normal_cdf_array(grid)) >= 0.0)

    def test_far_tails(self):
        assert 0.0 < std_normal_cdf(-8.0) < 1e-15
        assert std_normal_cdf(40.0) == 1.0
        assert std_normal_cdf(-40.0) == 0.0

    def test_pdf_is_derivative(self):
        h = 1e-4
        for x in np.linspace(-5.0, 5.0, 101):
            slope = (std_normal_cdf(x + h) - std_normal_cdf(x - h)) / (2.0 * h)
            assert slope == pytest.approx(std_normal_pdf(x), abs=1e-6)

    def test_non_finite_input(self):
        with pytest.raises(DomainError):
            std_normal_cdf(float('nan'))
        with pytest.raises(DomainError):
            std_normal_pdf(float('inf'))


class TestLogCdfAndMills:
    def test_logcdf_agrees_where_cdf_is_representable(self):
        grid = np.array([-30.0, -8.0, -1.0, 0.0, 1.0, 2.0])
        for x, value in zip(grid, std_normal_logcdf_array(grid)):
            assert value == pytest.approx(math.log(std_normal_cdf(x)), rel=1e-12, abs=1e-300)

    def test_logcdf_finite_deep_in_left_tail(self):
        value = float(std_normal_logcdf_array(np.array([-60.0]))[0])
        assert math.isfinite(value)
        # ln Phi(x) ~ -x^2/2 - ln(-x) - ln sqrt(2 pi)
        asymptote = -1800.0 - math.log(60.0) - 0.5 * math.log(2.0 * math.pi)
        assert value == pytest.approx(asymptote, abs=1e-3)

    def test_inverse_mills(self):
        grid = np.array([-50.0, -10.0, -1.0, 0.0, 1.0, 10.0])
        mills = inverse_mills_array(grid)
        assert np.all(np.isfinite(mills))
        for x, m in zip(grid[1:], mills[1:]):
            assert m == pytest.approx(std_normal_pdf(x) / std_normal_cdf(x), rel=1e-10)
        # far left, phi/Phi grows like -x
        assert mills[0] == pytest.approx(50.0, rel=1e-3)


class TestInverseCdf:
    def test_known_values(self):
        assert std_normal_inv_cdf(0.5) == 0.0
        assert std_normal_inv_cdf(0.75) == pytest.approx(0.6744897501960817, abs=1e-12)
        assert std_normal_inv_cdf(0.975) == pytest.approx(1.959963984540054, abs=1e-12)

    @pytest.mark.parametrize("p", [1e-12, 1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0 - 1e-9])
    def test_inverts_cdf(self, p):
        assert std_normal_cdf(std_normal_inv_cdf(p)) == pytest.approx(p, rel=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float('nan')])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            std_normal_inv_cdf(p)

    @pytest.mark.parametrize("p", [0.05, 0.3, 0.75, 0.9])
    def test_matches_bisection_on_cdf(self, p):
        lo, hi = -10.0, 10.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if std_normal_cdf(mid) < p:
                lo = mid
            else:
                hi = mid
        assert std_normal_inv_cdf(p) == pytest.approx(0.5 * (lo + hi), abs=1e-12)


class TestCholesky:
    def test_two_by_two_solve(self):
        np.testing.assert_allclose(solve_spd([[2.0, 1.0], [1.0, 2.0]], [3.0, 3.0]), [1.0, 1.0], atol=1e-14)

    def test_factor_reconstructs(self):
        rng = np.random.default_rng(7)
        for n in (1, 3, 5):
            m = rng.normal(size=(n + 3, n))
            a = m.T @ m
            lower = cholesky(a)
            assert np.allclose(np.triu(lower, 1), 0.0)
            np.testing.assert_allclose(lower @ lower.T, a, rtol=1e-12, atol=1e-12)

    def test_solve_matches_numpy(self):
        rng = np.random.default_rng(11)
        m = rng.normal(size=(10, 4))
        a = m.T @ m
        b = rng.normal(size=4)
        np.testing.assert_allclose(solve_spd(a, b), np.linalg.solve(a, b), rtol=1e-10)

    def test_inverse(self):
        a = np.array([[4.0, 2.0, 0.6], [2.0, 2.0, 0.5], [0.6, 0.5, 3.0]])
        np.testing.assert_allclose(spd_inverse(a) @ a, np.eye(3), atol=1e-12)

    def test_singular_reports_pivot(self):
        with pytest.raises(SingularMatrixError) as info:
            cholesky([[1.0, 1.0], [1.0, 1.0]])
        assert info.value.pivot == 1

    def test_not_positive_definite(self):
        with pytest.raises(SingularMatrixError):
            cholesky([[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric(self):
        with pytest.raises(DomainError):
            cholesky([[2.0, 1.0], [0.0, 2.0]])

    def test_shape_checks(self):
        with pytest.raises(DomainError):
            cholesky([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        with pytest.raises(DomainError):
            solve_spd([[2.0, 0.0], [0.0, 2.0]], [1.0, 2.0, 3.0])
