"""Seeded generators for the joint law of forecasts and observations.

Each generator emits forecast cases together with the latent variables that
produced them, so tests can condition on information sets directly.  The
``check_*`` functions run the statistical diagnostics that the generators
are designed to exhibit, using vectorized closed forms of the component
CDFs for large-sample work.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .calibration import (
    NEUTRAL_PIT_VARIANCE,
    PitSample,
    dispersion_report,
    ks_uniformity,
    uniform_open,
)
from .distributions import FiniteDiscrete, Gaussian, Mixture, TwoPointBernoulli
from .errors import InvalidConfig
from .fitting import ForecastCase
from .pools import coherent_probit_pool

REGRESSION = "regression"
FSIGMA = "fsigma"
BINARY_PROBIT = "binary_probit"
FORECASTER_QUARTET = "forecaster_quartet"
TERNARY = "ternary"

_KINDS = (REGRESSION, FSIGMA, BINARY_PROBIT, FORECASTER_QUARTET, TERNARY)


@dataclass(frozen=True)
class DgpConfig:
    """Configuration for one data-generating process.

    ``a1, a2, a3`` drive the regression process, ``sigma`` the single
    Gaussian forecaster, and ``sigma1, sigma2`` the binary-event signal
    scales; fields irrelevant to ``kind`` are ignored.
    """

    kind: str
    n: int
    seed: int
    a1: float = 1.0
    a2: float = 1.0
    a3: float = 1.1
    sigma: float = 1.0
    sigma1: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidConfig(f"unknown dgp kind {self.kind!r}; choose from {_KINDS}")
        if self.n < 1:
            raise InvalidConfig("n must be at least 1")
        if self.kind == FSIGMA and not self.sigma > 0.0:
            raise InvalidConfig("sigma must be positive")
        if self.kind == BINARY_PROBIT and not (self.sigma1 > 0.0 and self.sigma2 > 0.0):
            raise InvalidConfig("sigma1 and sigma2 must be positive")


@dataclass(frozen=True)
class SimResult:
    cases: list[ForecastCase]
    latents: dict[str, np.ndarray]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------------------
# raw latent draws (shared by simulate() and the vectorized checkers)


def _draw_regression(rng, n, a1, a2, a3):
    x = {f"x{i}": rng.standard_normal(n) for i in range(4)}
    eps = rng.standard_normal(n)
    y = x["x0"] + a1 * x["x1"] + a2 * x["x2"] + a3 * x["x3"] + eps
    means = np.column_stack([
        x["x0"] + a1 * x["x1"],
        x["x0"] + a2 * x["x2"],
        x["x0"] + a3 * x["x3"],
    ])
    sds = np.sqrt(np.array([
        1.0 + a2 * a2 + a3 * a3,
        1.0 + a1 * a1 + a3 * a3,
        1.0 + a1 * a1 + a2 * a2,
    ]))
    latents = dict(x, eps=eps)
    return y, means, sds, latents


def _draw_binary(rng, n, sigma1, sigma2):
    omega1 = sigma1 * rng.standard_normal(n)
    omega2 = sigma2 * rng.standard_normal(n)
    prob0 = ndtr(omega1 + omega2)
    y = np.where(rng.random(n) < prob0, 0.0, 1.0)
    p1 = ndtr(omega1 / np.sqrt(1.0 + sigma2 ** 2))
    p2 = ndtr(omega2 / np.sqrt(1.0 + sigma1 ** 2))
    latents = {"omega1": omega1, "omega2": omega2, "p1": p1, "p2": p2,
               "prob0": prob0}
    return y, p1, p2, latents


def _draw_quartet(rng, n):
    mu = rng.standard_normal(n)
    y = mu + rng.standard_normal(n)
    tau = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    return y, mu, tau, {"mu": mu, "tau": tau}


# ---------------------------------------------------------------------------
# ternary fixture: a probabilistically calibrated forecast that misstates
# the conditional outcome law in both of its scenarios


@dataclass(frozen=True)
class TernaryScenario:
    prob: float
    forecast_masses: tuple[float, float, float]
    outcome_probs: tuple[float, float, float]


TERNARY_OUTCOMES = (0.0, 1.0, 2.0)
TERNARY_SCENARIOS = (
    TernaryScenario(prob=0.5, forecast_masses=(0.5, 0.5, 0.0),
                    outcome_probs=(0.75, 0.25, 0.0)),
    TernaryScenario(prob=0.5, forecast_masses=(0.5, 0.25, 0.25),
                    outcome_probs=(0.25, 0.375, 0.375)),
)


@dataclass(frozen=True)
class TernaryPitLaw:
    """Exact piecewise-constant PIT densities for the ternary fixture."""

    breakpoints: tuple[float, ...]
    scenario_densities: tuple[tuple[float, ...], ...]
    average_density: tuple[float, ...]


def ternary_exact_pit_law() -> TernaryPitLaw:
    """Enumerate the randomized-PIT density exactly (no sampling).

    Within a scenario, an outcome carrying forecast mass q on the segment
    between consecutive CDF values contributes a uniform slab of height
    r / q there, where r is the true conditional outcome probability.  All
    quantities involved are dyadic, so float arithmetic is exact.
    """
    breaks = {0.0, 1.0}
    for s in TERNARY_SCENARIOS:
        breaks.update(np.cumsum(s.forecast_masses).tolist())
    bp = tuple(sorted(breaks))
    scen_dens = []
    for s in TERNARY_SCENARIOS:
        cum = np.concatenate([[0.0], np.cumsum(s.forecast_masses)])
        dens = []
        for lo, hi in zip(bp[:-1], bp[1:]):
            midpoint = 0.5 * (lo + hi)
            level = 0.0
            for m, q in enumerate(s.forecast_masses):
                if q > 0.0 and cum[m] < midpoint < cum[m + 1]:
                    level = s.outcome_probs[m] / q
            dens.append(level)
        scen_dens.append(tuple(dens))
    avg = tuple(
        sum(s.prob * d[i] for s, d in zip(TERNARY_SCENARIOS, scen_dens))
        for i in range(len(bp) - 1)
    )
    return TernaryPitLaw(breakpoints=bp, scenario_densities=tuple(scen_dens),
                         average_density=avg)


def _draw_ternary(rng, n):
    scenario = rng.integers(0, len(TERNARY_SCENARIOS), size=n)
    probs = np.array([s.outcome_probs for s in TERNARY_SCENARIOS])
    cums = np.cumsum(probs, axis=1)
    u = rng.random(n)
    idx = (u[:, None] > cums[scenario]).sum(axis=1)
    y = np.asarray(TERNARY_OUTCOMES)[idx]
    return y, scenario, {"scenario": scenario.astype(float)}


# ---------------------------------------------------------------------------
# public simulation entry point


def simulate(config: DgpConfig) -> SimResult:
    """Draw a dataset of forecast cases plus per-case latent records."""
    rng = _rng(config.seed)
    n = config.n
    if config.kind == REGRESSION:
        y, means, sds, latents = _draw_regression(rng, n, config.a1, config.a2, config.a3)
        cases = [
            ForecastCase(
                components=tuple(Gaussian(means[j, i], sds[i]) for i in range(3)),
                y=y[j],
            )
            for j in range(n)
        ]
    elif config.kind == FSIGMA:
        x = rng.standard_normal(n)
        eps = rng.standard_normal(n)
        y = x + eps
        latents = {"x": x, "eps": eps}
        cases = [
            ForecastCase(components=(Gaussian(x[j], config.sigma),), y=y[j])
            for j in range(n)
        ]
    elif config.kind == BINARY_PROBIT:
        y, p1, p2, latents = _draw_binary(rng, n, config.sigma1, config.sigma2)
        cases = [
            ForecastCase(
                components=(TwoPointBernoulli(p1[j]), TwoPointBernoulli(p2[j])),
                y=y[j],
            )
            for j in range(n)
        ]
    elif config.kind == FORECASTER_QUARTET:
        y, mu, tau, latents = _draw_quartet(rng, n)
        root2 = np.sqrt(2.0)
        cases = [
            ForecastCase(
                components=(
                    Gaussian(mu[j], 1.0),
                    Gaussian(0.0, root2),
                    Mixture((Gaussian(mu[j], 1.0), Gaussian(mu[j] + tau[j], 1.0)),
                            (0.5, 0.5)),
                    Gaussian(-mu[j], 1.0),
                ),
                y=y[j],
            )
            for j in range(n)
        ]
    else:
        y, scenario, latents = _draw_ternary(rng, n)
        cases = [
            ForecastCase(
                components=(
                    FiniteDiscrete(TERNARY_OUTCOMES,
                                   TERNARY_SCENARIOS[scenario[j]].forecast_masses),
                ),
                y=y[j],
            )
            for j in range(n)
        ]
    return SimResult(cases=cases, latents=latents)


# ---------------------------------------------------------------------------
# statistical checkers


def marginal_gap_threshold(n: int, level: float = 0.01) -> float:
    """Conservative distribution-free band for the marginal calibration gap."""
    return 3.0 * np.sqrt(np.log(2.0 / level) / (2.0 * n))


@dataclass(frozen=True)
class OverdispersionReport:
    pit_variance: float
    ci_lo: float
    ci_hi: float
    n: int
    passed: bool
    component_pit_variances: tuple[float, ...]


def check_linear_pool_overdispersion(n: int, seed: int, weights=None,
                                     a=(1.0, 1.0, 1.1)) -> OverdispersionReport:
    """PIT variance of an equal-weight linear pool of ideal regression forecasts.

    Passes when the 95% interval for the pooled PIT variance lies entirely
    below the neutral value 1/12, i.e. the pool is detectably overdispersed.
    """
    if n < 10_000:
        raise InvalidConfig("need n >= 10^4 for a reliable interval")
    rng = _rng(seed)
    y, means, sds, _ = _draw_regression(rng, n, *a)
    k = means.shape[1]
    w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
    z_comp = ndtr((y[:, None] - means) / sds)
    z_pool = z_comp @ w
    rep = dispersion_report(PitSample(z=z_pool, v=np.full(n, 0.5)))
    comp_vars = tuple(float(np.var(z_comp[:, i], ddof=1)) for i in range(k))
    return OverdispersionReport(
        pit_variance=rep.pit_variance,
        ci_lo=rep.pit_variance - rep.ci_halfwidth,
        ci_hi=rep.pit_variance + rep.ci_halfwidth,
        n=n,
        passed=rep.pit_variance + rep.ci_halfwidth < NEUTRAL_PIT_VARIANCE,
        component_pit_variances=comp_vars,
    )


def _bernoulli_pit(y, p, v):
    return np.where(y == 0.0, v * p, p + v * (1.0 - p))


def _reliability_max_sigma_dev(p, y, bins=10):
    """Largest per-bin |frequency - mean forecast| in binomial sigma units."""
    idx = np.clip((p * bins).astype(int), 0, bins - 1)
    counts = np.bincount(idx, minlength=bins).astype(float)
    hits = np.bincount(idx, weights=(y == 0.0).astype(float), minlength=bins)
    psum = np.bincount(idx, weights=p, minlength=bins)
    worst = 0.0
    for b in range(bins):
        if counts[b] == 0:
            continue
        pbar = psum[b] / counts[b]
        sigma = np.sqrt(max(pbar * (1.0 - pbar), 1e-12) / counts[b])
        dev = abs(hits[b] / counts[b] - pbar) / sigma
        worst = max(worst, dev)
    return worst


@dataclass(frozen=True)
class BinaryEquivalenceReport:
    ks_pvalue_calibrated: float
    reliability_dev_calibrated: float
    ks_pvalue_miscalibrated: float
    reliability_dev_miscalibrated: float
    ks_pvalue_pooled: float
    reliability_dev_pooled: float
    pooled_log_score: float
    linear_log_score: float
    passed: bool


def check_binary_calibration_equivalence(n: int, seed: int, sigma1: float = 1.0,
                                         sigma2: float = 1.0, bins: int = 10
                                         ) -> BinaryEquivalenceReport:
    """Probabilistic and conditional calibration agree for binary outcomes.

    The calibrated forecast must pass both the randomized-PIT uniformity
    test (level 0.01) and the reliability check (3 binomial sigma per bin);
    a deliberately miscalibrated transform (squaring) must fail both.  The
    probit-combined forecast must also pass both and beat the equal-weight
    linear average of probabilities on the Bernoulli log score.
    """
    if n < 10_000:
        raise InvalidConfig("need n >= 10^4")
    rng = _rng(seed)
    y, p1, p2, _ = _draw_binary(rng, n, sigma1, sigma2)
    v = uniform_open(rng, n)

    def ks_p(p):
        return ks_uniformity(_bernoulli_pit(y, p, v))[1]

    def bern_score(p):
        pr = np.where(y == 0.0, p, 1.0 - p)
        return float(np.log(np.maximum(pr, 1e-300)).mean())

    p_sq = p1 * p1
    p_pool = coherent_probit_pool(p1, p2, sigma1, sigma2)
    p_lin = 0.5 * (p1 + p2)

    ks_cal = ks_p(p1)
    rel_cal = _reliability_max_sigma_dev(p1, y, bins)
    ks_mis = ks_p(p_sq)
    rel_mis = _reliability_max_sigma_dev(p_sq, y, bins)
    ks_pool = ks_p(p_pool)
    rel_pool = _reliability_max_sigma_dev(p_pool, y, bins)
    score_pool = bern_score(p_pool)
    score_lin = bern_score(p_lin)
    passed = (
        ks_cal > 0.01 and rel_cal <= 3.0
        and ks_mis < 0.01 and rel_mis > 3.0
        and ks_pool > 0.01 and rel_pool <= 3.0
        and score_pool > score_lin
    )
    return BinaryEquivalenceReport(
        ks_pvalue_calibrated=ks_cal,
        reliability_dev_calibrated=rel_cal,
        ks_pvalue_miscalibrated=ks_mis,
        reliability_dev_miscalibrated=rel_mis,
        ks_pvalue_pooled=ks_pool,
        reliability_dev_pooled=rel_pool,
        pooled_log_score=score_pool,
        linear_log_score=score_lin,
        passed=passed,
    )


@dataclass(frozen=True)
class QuartetRow:
    name: str
    ks_pvalue: float
    marginal_gap: float
    ks_pass: bool
    marginal_pass: bool


@dataclass(frozen=True)
class QuartetReport:
    rows: tuple[QuartetRow, ...]
    matches_expected: bool


def check_quartet_classification(n: int, seed: int) -> QuartetReport:
    """Reproduce the two-by-two calibration pattern of the four forecasters.

    Expected: the perfect and climatological forecasters pass both the PIT
    uniformity test and the marginal-gap band; the unfocused forecaster
    passes only the PIT test; the sign-reversed forecaster passes only the
    marginal-gap band.
    """
    rng = _rng(seed)
    y, mu, tau, _ = _draw_quartet(rng, n)
    root2 = np.sqrt(2.0)
    grid = np.linspace(float(y.min()), float(y.max()), 201)
    ecdf = np.searchsorted(np.sort(y), grid, side="right") / n
    threshold = marginal_gap_threshold(n)

    pits = {
        "perfect": ndtr(y - mu),
        "climatological": ndtr(y / root2),
        "unfocused": 0.5 * (ndtr(y - mu) + ndtr(y - mu - tau)),
        "sign_reversed": ndtr(y + mu),
    }

    def mean_cdf(make_row):
        acc = np.zeros(grid.size)
        chunk = 4096
        for start in range(0, n, chunk):
            sl = slice(start, min(start + chunk, n))
            acc += make_row(sl).sum(axis=0)
        return acc / n

    gaps = {
        "perfect": mean_cdf(lambda sl: ndtr(grid[None, :] - mu[sl, None])),
        "climatological": ndtr(grid / root2),
        "unfocused": mean_cdf(
            lambda sl: 0.5 * (ndtr(grid[None, :] - mu[sl, None])
                              + ndtr(grid[None, :] - mu[sl, None] - tau[sl, None]))
        ),
        "sign_reversed": mean_cdf(lambda sl: ndtr(grid[None, :] + mu[sl, None])),
    }

    rows = []
    for name in ("perfect", "climatological", "unfocused", "sign_reversed"):
        _, pval = ks_uniformity(pits[name])
        gap = float(np.max(np.abs(gaps[name] - ecdf)))
        rows.append(QuartetRow(
            name=name,
            ks_pvalue=pval,
            marginal_gap=gap,
            ks_pass=pval > 0.01,
            marginal_pass=gap < threshold,
        ))
    expected = {
        "perfect": (True, True),
        "climatological": (True, True),
        "unfocused": (True, False),
        "sign_reversed": (False, True),
    }
    ok = all((r.ks_pass, r.marginal_pass) == expected[r.name] for r in rows)
    return QuartetReport(rows=tuple(rows), matches_expected=ok)
