"""Predictive distributions as right-continuous CDFs: continuous, discrete, and mixed.

Every distribution is immutable after construction and exposes the same
evaluation surface (``cdf``, ``cdf_left``, ``density``, ``quantile``,
``mean``, ``variance``, ``sample``), so pooling and diagnostic code can stay
agnostic of the concrete kind.  All evaluators accept scalars or numpy
arrays and return a matching shape.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import quad
from scipy.special import betainc, betaincinv, betaln, ndtr, ndtri

from .errors import CdfPoolError, DensityUnavailable, MedianUndefined, MomentUnavailable

_QUANTILE_ATOL = 1e-10  # absolute tolerance in y for bisection inverses
_MOMENT_RTOL = 1e-8


def _as_array(y) -> np.ndarray:
    return np.asarray(y, dtype=float)


def _match(y_in, out: np.ndarray):
    """Return a float for scalar input, an ndarray otherwise."""
    if isinstance(y_in, numbers.Number) or np.ndim(y_in) == 0:
        return float(out)
    return out


def _beta_pdf(u, alpha: float, beta: float) -> np.ndarray:
    u = np.clip(_as_array(u), 1e-300, 1.0 - 1e-16)
    with np.errstate(over="ignore"):
        return np.exp(
            (alpha - 1.0) * np.log(u) + (beta - 1.0) * np.log1p(-u) - betaln(alpha, beta)
        )


class PredictiveDist:
    """Base class: a probability measure on the real line via its CDF."""

    # -- evaluation surface -------------------------------------------------

    def cdf(self, y):
        raise NotImplementedError

    def cdf_left(self, y):
        """Left limit of the CDF; equals ``cdf`` wherever there is no atom."""
        return self.cdf(y)

    def point_mass(self, y):
        return _match(y, _as_array(self.cdf(y)) - _as_array(self.cdf_left(y)))

    @property
    def has_density(self) -> bool:
        return False

    def density(self, y):
        raise DensityUnavailable(f"{type(self).__name__} has no Lebesgue density")

    def support(self) -> tuple[float, float]:
        return (-np.inf, np.inf)

    def atom_locations(self) -> np.ndarray:
        """Locations of jump discontinuities (empty for continuous kinds)."""
        return np.empty(0)

    def quantile(self, p):
        """Generalized inverse inf{y : cdf(y) >= p} for p in (0, 1)."""
        p_arr = _as_array(p)
        if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
            raise ValueError("quantile level must lie strictly inside (0, 1)")
        return _match(p, self._quantile_bisect(np.atleast_1d(p_arr)).reshape(p_arr.shape))

    def median(self) -> float:
        """The unique median, or MedianUndefined if the CDF is flat at 1/2."""
        lo = float(self.quantile(0.5 - 1e-9))
        hi = float(self.quantile(0.5 + 1e-9))
        scale = max(float(self.quantile(0.75)) - float(self.quantile(0.25)), 1e-12)
        if hi - lo > 1e-3 * scale + 10.0 * _QUANTILE_ATOL:
            raise MedianUndefined("CDF is flat at probability 1/2; no unique median")
        return 0.5 * (lo + hi)

    def mean(self) -> float:
        return self._quadrature_moments()[0]

    def variance(self) -> float:
        return self._quadrature_moments()[1]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = (rng.integers(0, 1 << 53, size=n) + 0.5) / float(1 << 53)
        return np.atleast_1d(_as_array(self.quantile(u)))

    # -- generic numerics ---------------------------------------------------

    def _quantile_bisect(self, p: np.ndarray) -> np.ndarray:
        lo_s, hi_s = self.support()
        lo = np.full(p.shape, lo_s - 1.0 if np.isfinite(lo_s) else -1.0)
        hi = np.full(p.shape, hi_s if np.isfinite(hi_s) else 1.0)
        # expand until cdf(lo) < p <= cdf(hi)
        for _ in range(200):
            bad = _as_array(self.cdf(lo)) >= p
            if not bad.any():
                break
            lo[bad] = 2.0 * lo[bad] - 1.0
        for _ in range(200):
            bad = _as_array(self.cdf(hi)) < p
            if not bad.any():
                break
            hi[bad] = 2.0 * hi[bad] + 1.0
        while True:
            mid = 0.5 * (lo + hi)
            stuck = (mid <= lo) | (mid >= hi)
            if np.all((hi - lo <= _QUANTILE_ATOL) | stuck):
                break
            ge = _as_array(self.cdf(mid)) >= p
            hi = np.where(ge & ~stuck, mid, hi)
            lo = np.where(~ge & ~stuck, mid, lo)
        return hi

    def _quadrature_moments(self) -> tuple[float, float]:
        if not self.has_density:
            raise MomentUnavailable(
                f"{type(self).__name__} has atoms; quadrature moments undefined"
            )
        lo = float(self.quantile(1e-11))
        hi = float(self.quantile(1.0 - 1e-11))
        pdf = self.density

        def _integrate(f):
            val, err = quad(f, lo, hi, limit=200, epsabs=1e-12, epsrel=1e-10,
                            full_output=False)
            return val, err

        with np.errstate(all="ignore"):
            m, e1 = _integrate(lambda t: t * pdf(t))
            v, e2 = _integrate(lambda t: (t - m) ** 2 * pdf(t))
        tol = _MOMENT_RTOL * max(abs(v), 1e-10)
        if not (np.isfinite(m) and np.isfinite(v)) or e1 > tol + abs(m) * _MOMENT_RTOL or e2 > tol:
            raise MomentUnavailable("adaptive quadrature for moments did not converge")
        return m, max(v, 0.0)


@dataclass(frozen=True)
class Gaussian(PredictiveDist):
    """Normal distribution with mean ``mu`` and standard deviation ``sigma``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError("sigma must be strictly positive")

    def cdf(self, y):
        return _match(y, ndtr((_as_array(y) - self.mu) / self.sigma))

    @property
    def has_density(self) -> bool:
        return True

    def density(self, y):
        z = (_as_array(y) - self.mu) / self.sigma
        return _match(y, np.exp(-0.5 * z * z) / (self.sigma * np.sqrt(2.0 * np.pi)))

    def quantile(self, p):
        p_arr = _as_array(p)
        if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
            raise ValueError("quantile level must lie strictly inside (0, 1)")
        return _match(p, self.mu + self.sigma * ndtri(p_arr))

    def median(self) -> float:
        return self.mu

    def mean(self) -> float:
        return self.mu

    def variance(self) -> float:
        return self.sigma * self.sigma

    def sample(self, rng, n):
        return rng.normal(self.mu, self.sigma, size=n)


@dataclass(frozen=True)
class FiniteDiscrete(PredictiveDist):
    """Purely atomic distribution on finitely many ascending support points."""

    atoms: tuple[float, ...]
    masses: tuple[float, ...]

    def __post_init__(self):
        atoms = tuple(float(a) for a in self.atoms)
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "masses", masses)
        if len(atoms) != len(masses) or not atoms:
            raise ValueError("atoms and masses must be nonempty and equally long")
        if any(a2 <= a1 for a1, a2 in zip(atoms, atoms[1:])):
            raise ValueError("atoms must be strictly ascending")
        if any(m < 0.0 for m in masses):
            raise ValueError("masses must be nonnegative")
        if abs(sum(masses) - 1.0) > 1e-12:
            raise ValueError("masses must sum to 1 within 1e-12")

    @cached_property
    def _cum(self) -> np.ndarray:
        c = np.concatenate([[0.0], np.cumsum(self.masses)])
        c[-1] = 1.0
        return c

    @cached_property
    def _atoms_arr(self) -> np.ndarray:
        return np.asarray(self.atoms)

    def cdf(self, y):
        idx = np.searchsorted(self._atoms_arr, _as_array(y), side="right")
        return _match(y, self._cum[idx])

    def cdf_left(self, y):
        idx = np.searchsorted(self._atoms_arr, _as_array(y), side="left")
        return _match(y, self._cum[idx])

    def support(self):
        return (self.atoms[0], self.atoms[-1])

    def atom_locations(self):
        return self._atoms_arr.copy()

    def quantile(self, p):
        p_arr = _as_array(p)
        if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
            raise ValueError("quantile level must lie strictly inside (0, 1)")
        idx = np.searchsorted(self._cum[1:], p_arr, side="left")
        return _match(p, self._atoms_arr[idx])

    def median(self) -> float:
        cum = self._cum[1:]
        i = int(np.searchsorted(cum, 0.5, side="left"))
        if cum[i] == 0.5 and i + 1 < len(self.atoms):
            raise MedianUndefined("CDF equals 1/2 on a whole interval")
        return self.atoms[i]

    def mean(self) -> float:
        return float(np.dot(self.masses, self.atoms))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot(self.masses, (self._atoms_arr - m) ** 2))

    def sample(self, rng, n):
        return rng.choice(self._atoms_arr, size=n, p=self.masses)


class TwoPointBernoulli(FiniteDiscrete):
    """Binary-outcome forecast with success coded as outcome 0.

    The CDF jumps by the success probability ``p`` at 0 and reaches 1 at the
    non-success outcome 1.
    """

    def __init__(self, p: float):
        p = float(p)
        if not 0.0 <= p <= 1.0:
            raise ValueError("success probability must lie in [0, 1]")
        object.__setattr__(self, "p", p)
        super().__init__(atoms=(0.0, 1.0), masses=(p, 1.0 - p))

    def __repr__(self):
        return f"TwoPointBernoulli(p={self.p})"


@dataclass(frozen=True)
class Mixture(PredictiveDist):
    """Convex combination of component distributions."""

    components: tuple[PredictiveDist, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)
        if len(comps) != len(w) or not comps:
            raise ValueError("components and weights must be nonempty and equally long")
        if any(x < 0.0 for x in w):
            raise ValueError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    def cdf(self, y):
        acc = sum(w * _as_array(c.cdf(y)) for w, c in zip(self.weights, self.components))
        return _match(y, acc)

    def cdf_left(self, y):
        acc = sum(w * _as_array(c.cdf_left(y)) for w, c in zip(self.weights, self.components))
        return _match(y, acc)

    @property
    def has_density(self) -> bool:
        return all(c.has_density for c in self.components)

    def density(self, y):
        if not self.has_density:
            raise DensityUnavailable("a mixture component carries point masses")
        acc = sum(w * _as_array(c.density(y)) for w, c in zip(self.weights, self.components))
        return _match(y, acc)

    def support(self):
        los, his = zip(*(c.support() for c in self.components))
        return (min(los), max(his))

    def atom_locations(self):
        locs = np.concatenate([c.atom_locations() for c in self.components])
        return np.unique(locs)

    def mean(self) -> float:
        return float(sum(w * c.mean() for w, c in zip(self.weights, self.components)))

    def variance(self) -> float:
        m = self.mean()
        return float(
            sum(
                w * (c.variance() + (c.mean() - m) ** 2)
                for w, c in zip(self.weights, self.components)
            )
        )

    def sample(self, rng, n):
        idx = rng.choice(len(self.components), size=n, p=self.weights)
        out = np.empty(n)
        for i, c in enumerate(self.components):
            mask = idx == i
            cnt = int(mask.sum())
            if cnt:
                out[mask] = c.sample(rng, cnt)
        return out


@dataclass(frozen=True)
class BetaTransform:
    """Probability-scale recalibration u -> B_(alpha,beta)(u)."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError("alpha and beta must be strictly positive")


@dataclass(frozen=True)
class SpreadAdjust:
    """Spread re-scaling about a fixed center: y -> center + (y - center) / c."""

    c: float
    median: float

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("spread adjustment parameter c must be strictly positive")


CdfTransform = BetaTransform | SpreadAdjust


@dataclass(frozen=True)
class Transformed(PredictiveDist):
    """A base distribution composed with a CDF transform."""

    base: PredictiveDist
    transform: CdfTransform

    def _pullback(self, y) -> np.ndarray:
        t = self.transform
        return t.median + (_as_array(y) - t.median) / t.c

    def cdf(self, y):
        t = self.transform
        if isinstance(t, SpreadAdjust):
            return _match(y, _as_array(self.base.cdf(self._pullback(y))))
        return _match(y, betainc(t.alpha, t.beta, _as_array(self.base.cdf(y))))

    def cdf_left(self, y):
        t = self.transform
        if isinstance(t, SpreadAdjust):
            return _match(y, _as_array(self.base.cdf_left(self._pullback(y))))
        return _match(y, betainc(t.alpha, t.beta, _as_array(self.base.cdf_left(y))))

    @property
    def has_density(self) -> bool:
        return self.base.has_density

    def density(self, y):
        t = self.transform
        if isinstance(t, SpreadAdjust):
            g = _as_array(self.base.density(self._pullback(y))) / t.c
            return _match(y, g)
        g = _as_array(self.base.density(y))
        u = _as_array(self.base.cdf(y))
        with np.errstate(invalid="ignore", over="ignore"):
            out = np.where(g > 0.0, _beta_pdf(u, t.alpha, t.beta) * g, 0.0)
        return _match(y, out)

    def support(self):
        lo, hi = self.base.support()
        t = self.transform
        if isinstance(t, SpreadAdjust):
            pushforward = lambda x: t.median + t.c * (x - t.median) if np.isfinite(x) else x
            return (pushforward(lo), pushforward(hi))
        return (lo, hi)

    def atom_locations(self):
        locs = self.base.atom_locations()
        t = self.transform
        if isinstance(t, SpreadAdjust):
            return t.median + t.c * (locs - t.median)
        return locs

    def quantile(self, p):
        p_arr = _as_array(p)
        if np.any((p_arr <= 0.0) | (p_arr >= 1.0)):
            raise ValueError("quantile level must lie strictly inside (0, 1)")
        t = self.transform
        if isinstance(t, SpreadAdjust):
            base_q = _as_array(self.base.quantile(p_arr))
            return _match(p, t.median + t.c * (base_q - t.median))
        return _match(p, _as_array(self.base.quantile(betaincinv(t.alpha, t.beta, p_arr))))

    def median(self) -> float:
        t = self.transform
        if isinstance(t, SpreadAdjust):
            return t.median + t.c * (self.base.median() - t.median)
        return float(self.base.quantile(float(betaincinv(t.alpha, t.beta, 0.5))))

    def mean(self) -> float:
        t = self.transform
        if isinstance(t, SpreadAdjust):
            return t.median + t.c * (self.base.mean() - t.median)
        return super().mean()

    def variance(self) -> float:
        t = self.transform
        if isinstance(t, SpreadAdjust):
            return t.c * t.c * self.base.variance()
        return super().variance()

    def sample(self, rng, n):
        t = self.transform
        if isinstance(t, SpreadAdjust):
            return t.median + t.c * (self.base.sample(rng, n) - t.median)
        u = (rng.integers(0, 1 << 53, size=n) + 0.5) / float(1 << 53)
        return np.atleast_1d(_as_array(self.base.quantile(betaincinv(t.alpha, t.beta, u))))


def validate_cdf(d: PredictiveDist, grid=None) -> None:
    """Check the CDF contract on a grid plus atom locations.

    Verifies monotonicity, range [0, 1], tail limits, right continuity at
    atoms, and ``cdf_left <= cdf``.  Raises CdfPoolError on violation.
    """
    if grid is None:
        grid = np.linspace(-20.0, 20.0, 401)
    pts = np.sort(np.unique(np.concatenate([_as_array(grid), d.atom_locations()])))
    c = _as_array(d.cdf(pts))
    if np.any(np.diff(c) < -1e-12):
        raise CdfPoolError("cdf is not nondecreasing on the test grid")
    if np.any(c < -1e-12) or np.any(c > 1.0 + 1e-12):
        raise CdfPoolError("cdf leaves [0, 1]")
    c_left = _as_array(d.cdf_left(pts))
    if np.any(c_left - c > 1e-12):
        raise CdfPoolError("cdf_left exceeds cdf")
    lo, hi = d.support()
    probe_lo = lo - 1.0 if np.isfinite(lo) else min(pts[0], -1e8)
    probe_hi = hi if np.isfinite(hi) else max(pts[-1], 1e8)
    tail_tol = 1e-9 if np.isfinite(lo) else 1e-6
    if float(d.cdf(probe_lo)) > tail_tol:
        raise CdfPoolError("cdf does not vanish below the support")
    if float(d.cdf(probe_hi)) < 1.0 - 1e-6:
        raise CdfPoolError("cdf does not reach 1 above the support")
    atoms = d.atom_locations()
    if atoms.size:
        scale = max(1.0, float(np.max(np.abs(atoms))))
        step = 1e-9 * scale
        right = _as_array(d.cdf(atoms + step))
        at = _as_array(d.cdf(atoms))
        if np.any(np.abs(right - at) > 1e-6):
            raise CdfPoolError("cdf is not right-continuous at an atom")
