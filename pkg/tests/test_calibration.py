import numpy as np
import pytest
from numpy.testing import assert_allclose

from cdfpool import (
    BetaTransform,
    EmptyInput,
    FiniteDiscrete,
    Gaussian,
    LengthMismatch,
    Mixture,
    PitSample,
    TooFewSamples,
    Transformed,
    TwoPointBernoulli,
    dispersion_report,
    ks_uniformity,
    marginal_calibration_gap,
    pit_histogram,
    pit_sample,
    randomized_pit,
    reliability_bins,
    var_z_sigma,
)
from cdfpool.calibration import (
    NEUTRAL_PIT_VARIANCE,
    NEUTRALLY_DISPERSED,
    OVERDISPERSED,
    UNDERDISPERSED,
)


class TestRandomizedPit:
    def test_continuous_point_ignores_v(self):
        assert randomized_pit(Gaussian(0, 1), 0.0, 0.77) == 0.5

    def test_atom_interpolates(self):
        assert randomized_pit(TwoPointBernoulli(0.3), 0.0, 0.5) == pytest.approx(0.15)
        assert randomized_pit(TwoPointBernoulli(0.3), 1.0, 0.5) == pytest.approx(0.65)

    def test_v_domain(self):
        with pytest.raises(ValueError):
            randomized_pit(Gaussian(0, 1), 0.0, 0.0)


class TestPitSample:
    def test_ideal_forecast_is_neutrally_dispersed(self):
        rng = np.random.default_rng(1)
        n = 1000
        x = rng.standard_normal(n)
        y = x + rng.standard_normal(n)
        forecasts = [Gaussian(x[j], 1.0) for j in range(n)]
        s = pit_sample(forecasts, y, rng_seed=7)
        var = np.var(s.z, ddof=1)
        # MC standard error of the variance estimate for a uniform sample
        se = np.sqrt((1 / 80 - (1 / 12) ** 2) / n)
        assert abs(var - NEUTRAL_PIT_VARIANCE) < 3 * se

    def test_tight_wrong_forecasts_pin_pit_to_ends(self):
        rng = np.random.default_rng(2)
        y = rng.standard_normal(50)
        forecasts = [Gaussian(5.0 * (-1) ** j, 1e-4) for j in range(50)]
        s = pit_sample(forecasts, y, rng_seed=3)
        assert np.all((s.z < 1e-6) | (s.z > 1 - 1e-6))

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            pit_sample([Gaussian(0, 1)], [0.0, 1.0], rng_seed=0)

    def test_deterministic_given_seed(self):
        forecasts = [Gaussian(0, 1)] * 10
        y = np.linspace(-1, 1, 10)
        a = pit_sample(forecasts, y, rng_seed=5)
        b = pit_sample(forecasts, y, rng_seed=5)
        assert_allclose(a.z, b.z, rtol=0, atol=0)
        assert_allclose(a.v, b.v, rtol=0, atol=0)

    def test_fast_path_matches_general_loop(self):
        d = Mixture((Gaussian(0, 1), TwoPointBernoulli(0.4)), (0.6, 0.4))
        y = np.array([-0.5, 0.0, 0.3, 1.0, 2.0])
        same = pit_sample([d] * 5, y, rng_seed=11)
        mixed = pit_sample([d, d, d, d, Mixture((Gaussian(0, 1), TwoPointBernoulli(0.4)), (0.6, 0.4))],
                           y, rng_seed=11)
        assert_allclose(same.z, mixed.z, rtol=0, atol=1e-15)


class TestKsUniformity:
    @pytest.mark.parametrize(
        "dist",
        [
            Gaussian(0.3, 1.4),
            Mixture((Gaussian(-1, 1), Gaussian(1.5, 0.7)), (0.4, 0.6)),
            Transformed(Gaussian(0, 1), BetaTransform(1.6, 1.2)),
        ],
    )
    def test_continuous_pit_uniform(self, dist):
        rng = np.random.default_rng(13)
        n = 100_000
        y = dist.sample(rng, n)
        s = pit_sample([dist] * n, y, rng_seed=17)
        _, pval = ks_uniformity(s.z)
        assert pval > 0.01

    @pytest.mark.parametrize(
        "dist",
        [
            TwoPointBernoulli(0.3),
            FiniteDiscrete((0.0, 1.0, 2.0), (0.5, 0.25, 0.25)),
            Mixture((Gaussian(0, 1), TwoPointBernoulli(0.5)), (0.5, 0.5)),
        ],
    )
    def test_randomized_pit_uniform_with_atoms(self, dist):
        rng = np.random.default_rng(29)
        n = 100_000
        y = dist.sample(rng, n)
        s = pit_sample([dist] * n, y, rng_seed=31)
        _, pval = ks_uniformity(s.z)
        assert pval > 0.01

    def test_exact_statistic_small_sample(self):
        z = np.array([0.1, 0.2, 0.7])
        # order statistics: D+ = max(i/n - z_i), D- = max(z_i - (i-1)/n)
        stat, _ = ks_uniformity(z)
        assert stat == pytest.approx(max(1 / 3 - 0.1, 2 / 3 - 0.2, 1.0 - 0.7,
                                         0.1, 0.2 - 1 / 3, 0.7 - 2 / 3))


class TestDispersionReport:
    def test_alternating_extremes_are_underdispersed(self):
        z = np.tile([0.0, 1.0], 500)
        rep = dispersion_report(PitSample(z=z, v=np.full(z.size, 0.5)))
        assert rep.pit_variance > 0.24
        assert rep.classification == UNDERDISPERSED

    def test_degenerate_center_is_overdispersed(self):
        z = np.full(100, 0.5)
        rep = dispersion_report(PitSample(z=z, v=np.full(z.size, 0.5)))
        assert rep.pit_variance == 0.0
        assert rep.classification == OVERDISPERSED

    def test_uniform_sample_is_neutral(self):
        rng = np.random.default_rng(4)
        z = rng.random(100_000)
        rep = dispersion_report(PitSample(z=z, v=np.full(z.size, 0.5)))
        assert rep.classification == NEUTRALLY_DISPERSED
        assert abs(rep.pit_variance - NEUTRAL_PIT_VARIANCE) <= rep.ci_halfwidth

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            dispersion_report(PitSample(z=np.array([0.5]), v=np.array([0.5])))


class TestVarZSigma:
    def test_neutral_at_sigma_one(self):
        assert abs(var_z_sigma(1.0) - 1.0 / 12.0) < 1e-9

    def test_degenerate_limit(self):
        assert var_z_sigma(1e-6) == pytest.approx(0.25, abs=1e-4)

    def test_matches_monte_carlo(self):
        # brute-force oracle: Z = Phi(eps / sigma) for Y - X = eps ~ N(0,1)
        from scipy.special import ndtr

        rng = np.random.default_rng(8)
        eps = rng.standard_normal(2_000_000)
        for sigma in (0.75, 1.25):
            z = ndtr(eps / sigma)
            var_mc = float(np.var(z, ddof=1))
            m4 = float(np.mean((z - z.mean()) ** 4))
            se = np.sqrt((m4 - var_mc**2) / z.size)
            assert abs(var_z_sigma(sigma) - var_mc) < 3 * se

    def test_strictly_decreasing_in_sigma(self):
        grid = np.linspace(0.25, 4.0, 16)
        vals = [var_z_sigma(s) for s in grid]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestMarginalGap:
    def test_zero_for_matching_empirical_forecast(self):
        obs = np.array([0.0, 1.0, 2.0, 3.0])
        emp = FiniteDiscrete((0.0, 1.0, 2.0, 3.0), (0.25, 0.25, 0.25, 0.25))
        gap = marginal_calibration_gap([emp] * 4, obs, grid=obs)
        assert gap == pytest.approx(0.0, abs=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(10)
        n = 200
        mu = rng.standard_normal(n)
        y = mu + rng.standard_normal(n)
        forecasts = [Gaussian(m, 1.0) for m in mu]
        grid = np.linspace(-4, 4, 101)
        gap1 = marginal_calibration_gap(forecasts, y, grid)
        perm = rng.permutation(n)
        gap2 = marginal_calibration_gap([forecasts[i] for i in perm], y[perm], grid)
        assert gap1 == pytest.approx(gap2, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(EmptyInput):
            marginal_calibration_gap([], [], grid=[0.0])


class TestReliabilityBins:
    def test_constant_probability_fair_coin(self):
        rng = np.random.default_rng(21)
        n = 100_000
        p = np.full(n, 0.5)
        y = (rng.random(n) < 0.5).astype(float)  # success outcome coded 0
        y = 1.0 - y
        rows = reliability_bins(p, y, bins=10)
        occupied = [r for r in rows if r[2] > 0]
        assert len(occupied) == 1
        center, freq, count = occupied[0]
        assert count == n
        assert abs(freq - 0.5) < 3 * np.sqrt(0.25 / n)

    def test_squared_probability_is_miscalibrated(self):
        from cdfpool.sim import _draw_binary

        rng = np.random.Generator(np.random.Philox(40))
        y, p1, _, _ = _draw_binary(rng, 100_000, 1.0, 1.0)
        rows = reliability_bins(p1 * p1, y, bins=10)
        devs = []
        idx = np.clip((p1 * p1 * 10).astype(int), 0, 9)
        for b, (center, freq, count) in enumerate(rows):
            if count < 100:
                continue
            pbar = float(np.mean((p1 * p1)[idx == b]))
            sigma = np.sqrt(pbar * (1 - pbar) / count)
            devs.append(abs(freq - pbar) / sigma)
        assert max(devs) > 3.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            reliability_bins([0.5], [0.0, 1.0], bins=5)


class TestHistogram:
    def test_counts_sum_to_n(self):
        rng = np.random.default_rng(3)
        z = rng.random(500)
        counts = pit_histogram(z, bins=10)
        assert counts.sum() == 500
        assert counts.size == 10


class TestCalibrationReport:
    def test_bundles_all_diagnostics(self):
        from cdfpool import calibration_report

        rng = np.random.default_rng(33)
        n = 400
        mu = rng.standard_normal(n)
        y = mu + rng.standard_normal(n)
        forecasts = [Gaussian(m, 1.0) for m in mu]
        rep = calibration_report(forecasts, y, rng_seed=12, bins=8)
        assert 0.0 <= rep.ks_statistic <= 1.0
        assert rep.histogram.sum() == n
        assert rep.histogram.size == 8
        assert rep.marginal_gap >= 0.0


class TestQuantileDomain:
    def test_levels_outside_open_interval_rejected(self):
        for p in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                Gaussian(0, 1).quantile(p)
            with pytest.raises(ValueError):
                Mixture((Gaussian(0, 1), Gaussian(1, 1)), (0.5, 0.5)).quantile(p)
