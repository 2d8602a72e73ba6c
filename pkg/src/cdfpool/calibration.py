"""Randomized probability integral transform and calibration diagnostics.

The PIT of a forecast F at an observation y is F(y-) + V (F(y) - F(y-))
with V an auxiliary uniform, which reduces to F(y) at continuity points.
Uniform PIT samples indicate probabilistic calibration; their variance
measures dispersion, with 1/12 the neutral value.  Note the orientation:
PIT variance *above* 1/12 means the forecasts are underdispersed, variance
below 1/12 means overdispersed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import kolmogorov, ndtr

from .distributions import PredictiveDist, _as_array
from .errors import EmptyInput, LengthMismatch, TooFewSamples

NEUTRAL_PIT_VARIANCE = 1.0 / 12.0

UNDERDISPERSED = "underdispersed"
NEUTRALLY_DISPERSED = "neutrally_dispersed"
OVERDISPERSED = "overdispersed"


def uniform_open(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform draws guaranteed to lie strictly inside (0, 1)."""
    return (rng.integers(0, 1 << 53, size=n) + 0.5) / float(1 << 53)


@dataclass(frozen=True)
class PitSample:
    """PIT values together with the auxiliary uniforms that produced them."""

    z: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "v", v)
        if z.shape != v.shape:
            raise LengthMismatch("z and v must have equal length")
        if np.any((z < 0.0) | (z > 1.0)):
            raise ValueError("PIT values must lie in [0, 1]")

    def __len__(self) -> int:
        return self.z.size


@dataclass(frozen=True)
class DispersionReport:
    pit_variance: float
    classification: str
    n: int
    ci_halfwidth: float


@dataclass(frozen=True)
class CalibrationReport:
    ks_statistic: float
    marginal_gap: float
    histogram: np.ndarray


def randomized_pit(d: PredictiveDist, y: float, v: float) -> float:
    """PIT value F(y-) + v (F(y) - F(y-)); equals F(y) where F is continuous."""
    if not 0.0 < v < 1.0:
        raise ValueError("auxiliary uniform v must lie strictly inside (0, 1)")
    left = d.cdf_left(y)
    return left + v * (d.cdf(y) - left)


def pit_sample(forecasts, obs, rng_seed: int) -> PitSample:
    """Apply the randomized PIT case by case with seeded auxiliary uniforms."""
    obs = _as_array(obs)
    if len(forecasts) != obs.size:
        raise LengthMismatch(
            f"{len(forecasts)} forecasts paired with {obs.size} observations"
        )
    rng = np.random.Generator(np.random.Philox(rng_seed))
    v = uniform_open(rng, obs.size)
    first = forecasts[0] if len(forecasts) else None
    if len(forecasts) and all(f is first for f in forecasts):
        left = _as_array(first.cdf_left(obs))
        right = _as_array(first.cdf(obs))
        z = left + v * (right - left)
    else:
        z = np.array(
            [randomized_pit(f, y, vj) for f, y, vj in zip(forecasts, obs, v)]
        )
    return PitSample(z=z, v=v)


def dispersion_report(s: PitSample) -> DispersionReport:
    """Classify dispersion from the unbiased PIT sample variance.

    Neutral dispersion is declared when 1/12 falls inside a 95%
    normal-approximation interval for the variance estimate; otherwise the
    sign of the deviation decides (above 1/12: underdispersed).
    """
    n = len(s)
    if n < 2:
        raise TooFewSamples("need at least two PIT values")
    z = s.z
    var = float(np.var(z, ddof=1))
    m4 = float(np.mean((z - z.mean()) ** 4))
    se2 = max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n
    half = 1.96 * np.sqrt(se2)
    if abs(var - NEUTRAL_PIT_VARIANCE) <= half:
        label = NEUTRALLY_DISPERSED
    elif var > NEUTRAL_PIT_VARIANCE:
        label = UNDERDISPERSED
    else:
        label = OVERDISPERSED
    return DispersionReport(pit_variance=var, classification=label, n=n, ci_halfwidth=half)


def var_z_sigma(sigma: float) -> float:
    """PIT variance of the forecast N(X, sigma^2) for Y = X + noise.

    Both X and the noise are standard normal.  The two unit-interval
    integrals defining the variance are evaluated after substituting
    z = Phi(t), which removes the inverse-normal endpoint singularity.
    """
    if not sigma > 0.0:
        raise ValueError("sigma must be strictly positive")

    def phi(t):
        return np.exp(-0.5 * t * t) / np.sqrt(2.0 * np.pi)

    first, _ = quad(lambda t: ndtr(t) * (1.0 - ndtr(sigma * t)) * phi(t),
                    -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    second, _ = quad(lambda t: (1.0 - ndtr(sigma * t)) * phi(t),
                     -np.inf, np.inf, epsabs=1e-12, epsrel=1e-12, limit=200)
    return 2.0 * first - second * second


def marginal_calibration_gap(forecasts, obs, grid) -> float:
    """Sup over the grid of |average forecast CDF - empirical CDF of obs|."""
    obs = _as_array(obs)
    grid = _as_array(grid)
    if len(forecasts) == 0 or obs.size == 0 or grid.size == 0:
        raise EmptyInput("forecasts, observations, and grid must be nonempty")
    if len(forecasts) != obs.size:
        raise LengthMismatch(
            f"{len(forecasts)} forecasts paired with {obs.size} observations"
        )
    acc = np.zeros(grid.size)
    for f in forecasts:
        acc += _as_array(f.cdf(grid))
    acc /= len(forecasts)
    ecdf = np.searchsorted(np.sort(obs), grid, side="right") / obs.size
    return float(np.max(np.abs(acc - ecdf)))


def reliability_bins(p, y01, bins: int = 10):
    """Conditional success frequencies against binned forecast probabilities.

    Success is coded as outcome 0.  Returns one (bin_center, freq, count)
    triple per equal-width bin on [0, 1]; freq is nan for empty bins.
    """
    p = _as_array(p)
    y01 = _as_array(y01)
    if p.shape != y01.shape:
        raise LengthMismatch("probabilities and outcomes must have equal length")
    idx = np.clip((p * bins).astype(int), 0, bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(float)
    hits = np.bincount(idx, weights=(y01 == 0.0).astype(float), minlength=bins)
    with np.errstate(invalid="ignore", divide="ignore"):
        freq = np.where(counts > 0, hits / counts, np.nan)
    centers = (np.arange(bins) + 0.5) / bins
    return [(float(c), float(f), int(n)) for c, f, n in zip(centers, freq, counts)]


def pit_histogram(z, bins: int = 10) -> np.ndarray:
    """Counts of PIT values in equal-width bins on [0, 1]."""
    counts, _ = np.histogram(_as_array(z), bins=bins, range=(0.0, 1.0))
    return counts


def ks_statistic(z) -> float:
    """Exact Kolmogorov-Smirnov distance of a sample to the uniform law."""
    z = np.sort(_as_array(z))
    n = z.size
    if n == 0:
        raise EmptyInput("empty sample")
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - z)
    d_minus = np.max(z - (i - 1) / n)
    return float(max(d_plus, d_minus))


def ks_uniformity(z) -> tuple[float, float]:
    """KS statistic and asymptotic p-value for uniformity on [0, 1]."""
    z = _as_array(z)
    stat = ks_statistic(z)
    pvalue = float(kolmogorov(np.sqrt(z.size) * stat))
    return stat, pvalue


def calibration_report(forecasts, obs, rng_seed: int, grid=None, bins: int = 10
                       ) -> CalibrationReport:
    """Bundle the KS distance, marginal gap, and PIT histogram for a dataset."""
    obs = _as_array(obs)
    if grid is None:
        if obs.size == 0:
            raise EmptyInput("no observations")
        grid = np.linspace(float(obs.min()), float(obs.max()), 201)
    s = pit_sample(forecasts, obs, rng_seed)
    stat, _ = ks_uniformity(s.z)
    gap = marginal_calibration_gap(forecasts, obs, grid)
    return CalibrationReport(ks_statistic=stat, marginal_gap=gap,
                             histogram=pit_histogram(s.z, bins))
