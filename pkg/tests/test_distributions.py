import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from cdfpool import (
    BetaTransform,
    DensityUnavailable,
    FiniteDiscrete,
    Gaussian,
    MedianUndefined,
    Mixture,
    SpreadAdjust,
    Transformed,
    TwoPointBernoulli,
    validate_cdf,
)

STANDARD_MIX = Mixture((Gaussian(-1.0, 1.0), Gaussian(1.0, 1.0)), (0.5, 0.5))


class TestCdf:
    def test_gaussian_symmetry(self):
        assert Gaussian(0.0, 1.0).cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_bernoulli_atom_at_success(self):
        assert TwoPointBernoulli(0.3).cdf(0.0) == 0.3

    def test_symmetric_mixture(self):
        assert STANDARD_MIX.cdf(0.0) == pytest.approx(0.5, abs=1e-15)

    def test_vectorized_matches_scalar(self):
        d = Mixture((Gaussian(0.0, 1.0), TwoPointBernoulli(0.4)), (0.7, 0.3))
        ys = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
        assert_allclose(d.cdf(ys), [d.cdf(float(y)) for y in ys], rtol=0, atol=0)


class TestCdfLeft:
    def test_bernoulli_left_limits(self):
        b = TwoPointBernoulli(0.3)
        assert b.cdf_left(0.0) == 0.0
        assert b.cdf_left(1.0) == 0.3

    def test_continuous_has_no_jump(self):
        assert Gaussian(0.0, 1.0).cdf_left(0.0) == 0.5

    def test_left_plus_mass_is_cdf_exactly(self):
        d = FiniteDiscrete((-1.0, 0.5, 2.0), (0.2, 0.45, 0.35))
        for y in (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 3.0):
            assert d.cdf_left(y) + d.point_mass(y) == d.cdf(y)


class TestDensity:
    def test_standard_normal_at_zero(self):
        assert Gaussian(0.0, 1.0).density(0.0) == pytest.approx(0.3989423, abs=1e-7)

    def test_identity_beta_transform_keeps_density(self):
        base = Gaussian(0.3, 1.7)
        t = Transformed(base, BetaTransform(1.0, 1.0))
        ys = np.linspace(-4.0, 5.0, 50)
        assert_allclose(t.density(ys), base.density(ys), rtol=1e-12)

    def test_beta_2_1_of_uniform_like_base(self):
        # base with uniform CDF on (0,1): beta(2,1) density is 2u at u
        t = Transformed(_UniformOnUnit(), BetaTransform(2.0, 1.0))
        assert t.density(0.5) == pytest.approx(1.0, rel=1e-12)

    def test_atomic_kinds_refuse(self):
        with pytest.raises(DensityUnavailable):
            TwoPointBernoulli(0.5).density(0.0)
        with pytest.raises(DensityUnavailable):
            Mixture((Gaussian(0, 1), TwoPointBernoulli(0.5)), (0.5, 0.5)).density(0.0)


class _UniformOnUnit(Gaussian):
    """Standard uniform via the predictive-distribution interface."""

    def __init__(self):
        super().__init__(0.0, 1.0)

    def cdf(self, y):
        return np.clip(np.asarray(y, dtype=float), 0.0, 1.0) if np.ndim(y) else float(
            min(max(y, 0.0), 1.0)
        )

    def cdf_left(self, y):
        return self.cdf(y)

    def density(self, y):
        y_arr = np.asarray(y, dtype=float)
        out = ((y_arr >= 0.0) & (y_arr <= 1.0)).astype(float)
        return out if np.ndim(y) else float(out)

    def quantile(self, p):
        return np.asarray(p, dtype=float) if np.ndim(p) else float(p)

    def support(self):
        return (0.0, 1.0)


class TestQuantile:
    def test_gaussian_median_is_mean(self):
        assert Gaussian(2.0, 3.0).quantile(0.5) == pytest.approx(2.0, abs=1e-12)

    def test_discrete_generalized_inverse(self):
        d = FiniteDiscrete((0.0, 1.0, 2.0), (0.5, 0.25, 0.25))
        assert d.quantile(0.6) == 1.0
        assert d.quantile(0.5) == 0.0
        assert d.quantile(0.76) == 2.0

    def test_beta_transform_inverts_square(self):
        t = Transformed(_UniformOnUnit(), BetaTransform(2.0, 1.0))
        assert t.quantile(0.25) == pytest.approx(0.5, abs=1e-9)

    def test_round_trip_on_grid(self):
        for d in (Gaussian(1.0, 2.0), STANDARD_MIX,
                  Transformed(STANDARD_MIX, BetaTransform(1.5, 2.0))):
            ps = np.linspace(0.001, 0.999, 41)
            qs = np.asarray(d.quantile(ps))
            assert np.max(np.abs(np.asarray(d.cdf(qs)) - ps)) < 1e-9


class TestMoments:
    def test_gaussian_variance(self):
        assert Gaussian(5.0, 2.0).variance() == 4.0

    def test_mixture_within_plus_between(self):
        assert STANDARD_MIX.variance() == pytest.approx(2.0, rel=1e-12)

    def test_spread_adjust_scales_variance(self):
        d = Transformed(Gaussian(0.0, 2.0), SpreadAdjust(c=0.5, median=0.0))
        assert d.variance() == pytest.approx(1.0, rel=1e-12)

    def test_beta_transform_variance_by_quadrature(self):
        d = Transformed(Gaussian(0.0, 1.0), BetaTransform(2.0, 2.0))
        # independent oracle: direct quadrature of y^2 against the density
        m = quad(lambda t: t * d.density(t), -10, 10, epsabs=1e-12)[0]
        v = quad(lambda t: (t - m) ** 2 * d.density(t), -10, 10, epsabs=1e-12)[0]
        assert d.variance() == pytest.approx(v, rel=1e-8)


class TestInvariants:
    def test_densities_integrate_to_one(self):
        dists = (
            Gaussian(0.7, 1.3),
            STANDARD_MIX,
            Transformed(Gaussian(0.0, 1.0), BetaTransform(1.5, 2.5)),
            Transformed(STANDARD_MIX, SpreadAdjust(c=0.6, median=0.0)),
        )
        for d in dists:
            lo, hi = d.quantile(1e-9), d.quantile(1.0 - 1e-9)
            total = quad(d.density, lo, hi, limit=200, epsabs=1e-10)[0]
            assert abs(total - 1.0) < 1e-6

    def test_numeric_cdf_derivative_matches_density(self):
        rng = np.random.default_rng(5)
        dists = (
            Gaussian(0.2, 0.9),
            STANDARD_MIX,
            Transformed(Gaussian(0.0, 1.0), BetaTransform(1.8, 1.2)),
        )
        for d in dists:
            ys = np.asarray(d.quantile(rng.uniform(0.02, 0.98, size=100)))
            h = 1e-6
            fd = (np.asarray(d.cdf(ys + h)) - np.asarray(d.cdf(ys - h))) / (2 * h)
            assert_allclose(fd, np.asarray(d.density(ys)), rtol=1e-5)

    def test_validate_cdf_accepts_all_kinds(self):
        for d in (
            Gaussian(0, 1),
            TwoPointBernoulli(0.3),
            FiniteDiscrete((0.0, 2.0), (0.4, 0.6)),
            STANDARD_MIX,
            Mixture((Gaussian(0, 1), TwoPointBernoulli(0.4)), (0.6, 0.4)),
            Transformed(Gaussian(0, 1), BetaTransform(0.8, 2.0)),
        ):
            validate_cdf(d)


class TestConstruction:
    def test_mass_sum_enforced(self):
        with pytest.raises(ValueError):
            FiniteDiscrete((0.0, 1.0), (0.5, 0.6))

    def test_weight_simplex_enforced(self):
        with pytest.raises(ValueError):
            Mixture((Gaussian(0, 1), Gaussian(1, 1)), (0.7, 0.4))

    def test_positive_sigma(self):
        with pytest.raises(ValueError):
            Gaussian(0.0, 0.0)

    def test_median_undefined_on_flat_cdf(self):
        with pytest.raises(MedianUndefined):
            FiniteDiscrete((0.0, 1.0), (0.5, 0.5)).median()

    def test_median_of_shifted_mixture(self):
        d = Mixture((Gaussian(1.0, 1.0), Gaussian(3.0, 2.0)), (0.5, 0.5))
        m = d.median()
        assert d.cdf(m) == pytest.approx(0.5, abs=1e-9)


class TestSampling:
    def test_sample_matches_cdf(self):
        rng = np.random.default_rng(99)
        d = Transformed(STANDARD_MIX, BetaTransform(1.4, 1.1))
        xs = d.sample(rng, 20000)
        grid = np.linspace(-4, 4, 9)
        emp = np.searchsorted(np.sort(xs), grid, side="right") / xs.size
        assert np.max(np.abs(emp - np.asarray(d.cdf(grid)))) < 0.02
