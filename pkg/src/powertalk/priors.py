"""Scalar gain priors with interval mass / partial moments and quantiles.

Exponential priors (Rayleigh-fading power gains) get closed forms; arbitrary
densities fall back to deterministic Gauss-Legendre quadrature.  All supports
live on [0, inf).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegeneratePriorError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentialPrior:
    """Exponential density with the given mean (variance = mean^2)."""

    mean_value: float

    def __post_init__(self):
        if not (np.isfinite(self.mean_value) and self.mean_value > 0):
            raise DegeneratePriorError("exponential prior needs a positive finite mean")

    def mean(self) -> float:
        return self.mean_value

    def variance(self) -> float:
        return self.mean_value ** 2

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, np.exp(-x / self.mean_value) / self.mean_value, 0.0)

    def mass(self, lo, hi):
        lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
        hi = np.asarray(hi, dtype=float)
        return _expm_sf(lo, self.mean_value) - _expm_sf(hi, self.mean_value)

    def first_moment(self, lo, hi):
        m = self.mean_value
        lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
        hi = np.asarray(hi, dtype=float)
        return _expm_poly(lo, m, (m, 1.0)) - _expm_poly(hi, m, (m, 1.0))

    def second_moment(self, lo, hi):
        m = self.mean_value
        lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
        hi = np.asarray(hi, dtype=float)
        return _expm_poly(lo, m, (2 * m * m, 2 * m, 1.0)) - _expm_poly(hi, m, (2 * m * m, 2 * m, 1.0))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        return -self.mean_value * np.log1p(-p)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.exponential(scale=self.mean_value, size=n)


def _expm_sf(x, m):
    """exp(-x/m); exp(-inf) evaluates to 0 without special casing."""
    return np.exp(-np.asarray(x, dtype=float) / m)


def _expm_poly(x, m, coeffs):
    """(c0 + c1*x + c2*x^2 + ...) * exp(-x/m), zero at x = inf."""
    x = np.asarray(x, dtype=float)
    xf = np.where(np.isinf(x), 0.0, x)
    poly = np.zeros_like(xf)
    for c in reversed(coeffs):
        poly = poly * xf + c
    with np.errstate(over="ignore"):
        out = np.where(np.isinf(x), 0.0, poly * np.exp(-xf / m))
    return out


@dataclass(frozen=True)
class DiscretePrior:
    """Finite-support prior given by atoms and probabilities."""

    atoms: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        if atoms.shape != probs.shape or atoms.ndim != 1 or atoms.size == 0:
            raise DegeneratePriorError("atoms and probs must be matching 1-D arrays")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise DegeneratePriorError("probs must form a distribution")
        order = np.argsort(atoms)
        atoms, probs = atoms[order], probs[order]
        atoms.flags.writeable = False
        probs.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    def mean(self) -> float:
        return float(self.atoms @ self.probs)

    def variance(self) -> float:
        return float(self.probs @ (self.atoms - self.mean()) ** 2)

    def _sel(self, lo, hi):
        # half-open [lo, hi) matching gain-quantizer cells
        return (self.atoms >= lo) & (self.atoms < hi)

    def mass(self, lo, hi):
        return float(self.probs[self._sel(lo, hi)].sum())

    def first_moment(self, lo, hi):
        sel = self._sel(lo, hi)
        return float((self.probs[sel] * self.atoms[sel]).sum())

    def second_moment(self, lo, hi):
        sel = self._sel(lo, hi)
        return float((self.probs[sel] * self.atoms[sel] ** 2).sum())

    def quantile(self, p):
        cum = np.cumsum(self.probs)
        return self.atoms[np.searchsorted(cum, np.asarray(p, dtype=float), side="left").clip(0, self.atoms.size - 1)]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(self.atoms, size=n, p=self.probs)


class DensityPrior:
    """Generic density on [0, tail_hi], integrated by fixed Gauss-Legendre rules."""

    def __init__(self, pdf, tail_hi: float, n_points: int = 512):
        if tail_hi <= 0:
            raise DegeneratePriorError("tail_hi must be positive")
        self._pdf = pdf
        self.tail_hi = float(tail_hi)
        nodes, weights = np.polynomial.legendre.leggauss(n_points)
        self._nodes = nodes
        self._weights = weights
        total = self._raw_integral(lambda x: self._pdf(x), 0.0, self.tail_hi)
        if total <= 0 or not np.isfinite(total):
            raise DegeneratePriorError("pdf does not integrate to a positive mass")
        self._norm = total

    def _raw_integral(self, f, lo, hi):
        lo = max(float(lo), 0.0)
        hi = min(float(hi), self.tail_hi)
        if hi <= lo:
            return 0.0
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = mid + half * self._nodes
        return float(half * (self._weights @ np.asarray(f(x), dtype=float)))

    def pdf(self, x):
        return np.asarray(self._pdf(np.asarray(x, dtype=float))) / self._norm

    def mean(self) -> float:
        return self.first_moment(0.0, np.inf)

    def variance(self) -> float:
        m = self.mean()
        return self.second_moment(0.0, np.inf) - m * m

    def mass(self, lo, hi):
        return self._raw_integral(self._pdf, lo, hi) / self._norm

    def first_moment(self, lo, hi):
        return self._raw_integral(lambda x: x * np.asarray(self._pdf(x)), lo, hi) / self._norm

    def second_moment(self, lo, hi):
        return self._raw_integral(lambda x: x * x * np.asarray(self._pdf(x)), lo, hi) / self._norm

    def quantile(self, p):
        grid = np.linspace(0.0, self.tail_hi, 4097)
        dens = np.asarray(self.pdf(grid), dtype=float)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))))
        cum /= cum[-1]
        return np.interp(np.asarray(p, dtype=float), cum, grid)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.asarray(self.quantile(rng.random(n)), dtype=float)


def exponential_column(mean_column: np.ndarray) -> list[ExponentialPrior]:
    """One exponential prior per incoming link of a receiver."""
    return [ExponentialPrior(float(m)) for m in np.asarray(mean_column, dtype=float)]
