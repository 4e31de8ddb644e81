"""Scalar codebook design for the gain-exchange phase.

Three designs: an equal-probability quantizer with centroid representatives
(MEQ), the classical Lloyd-Max iteration (LMA), and a noise-aware Lloyd-Max
variant (ALMA) whose centroid and boundary updates weight each cell by the
probability pi(r|n) that the dequantizer decodes representative r when n was
power-encoded.  With an identity pi, ALMA's updates reduce exactly to the
classical centroid/midpoint conditions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ScalarGainQuantizer:
    """Interval codebook on [0, inf): R = 2^n_bits cells with representatives."""

    bounds: np.ndarray  # length R+1, bounds[0] = 0, bounds[-1] = inf
    reps: np.ndarray  # length R
    n_bits: int

    def __post_init__(self):
        bounds = np.asarray(self.bounds, dtype=float)
        reps = np.asarray(self.reps, dtype=float)
        R = 2 ** self.n_bits
        if bounds.shape != (R + 1,) or reps.shape != (R,):
            raise ValueError("codebook sized inconsistently with n_bits")
        if bounds[0] != 0.0 or not np.isinf(bounds[-1]):
            raise ValueError("outer bounds must be 0 and inf")
        if np.any(np.diff(bounds) <= 0):
            raise ValueError("bounds must be strictly ascending")
        if np.any(reps < 0) or not np.all(np.isfinite(reps)):
            raise ValueError("representatives must be finite and nonnegative")
        bounds.flags.writeable = False
        reps.flags.writeable = False
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "reps", reps)

    @property
    def R(self) -> int:
        return self.reps.size

    def quantize(self, x) -> np.ndarray | int:
        """Cell index of x; cells are [u_r, u_{r+1})."""
        idx = np.searchsorted(self.bounds, np.asarray(x, dtype=float), side="right") - 1
        idx = np.clip(idx, 0, self.R - 1)
        return idx if idx.ndim else int(idx)

    def dequantize(self, index) -> np.ndarray | float:
        out = self.reps[index]
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class RepTransitionMatrix:
    """pi[n, r] = P(decoded representative r | representative n encoded)."""

    pi: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pi, dtype=float)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError("pi must be square")
        if np.any(p < -1e-15) or np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("rows must be probability distributions")
        p.flags.writeable = False
        object.__setattr__(self, "pi", p)

    @property
    def R(self) -> int:
        return self.pi.shape[0]


def identity_pi(R: int) -> RepTransitionMatrix:
    return RepTransitionMatrix(np.eye(R))


@dataclass
class LloydDiagnostics:
    iterations: int = 0
    converged: bool = False
    guard_events: int = 0
    distortion_history: list = field(default_factory=list)


def design_meq(prior, n_bits: int) -> ScalarGainQuantizer:
    """Equal-probability cells (quantile bounds) with centroid representatives."""
    R = 2 ** n_bits
    bounds = np.empty(R + 1)
    bounds[0], bounds[-1] = 0.0, np.inf
    bounds[1:-1] = prior.quantile(np.arange(1, R) / R)
    if np.any(np.diff(bounds[:-1]) <= 0):
        raise ValueError("prior too degenerate for equal-mass cells")
    reps = _centroids(prior, bounds)
    return ScalarGainQuantizer(bounds=bounds, reps=reps, n_bits=n_bits)


def _cell_moments(prior, bounds):
    lo, hi = bounds[:-1], bounds[1:]
    return (
        np.asarray(prior.mass(lo, hi), dtype=float),
        np.asarray(prior.first_moment(lo, hi), dtype=float),
    )


def _centroids(prior, bounds):
    mass, moment = _cell_moments(prior, bounds)
    if np.any(mass <= 0):
        raise ValueError("empty quantizer cell")
    return moment / mass


def _lloyd_iterate(prior, n_bits, pi, init_bounds, max_iter, delta, collect):
    """Shared ALMA/LMA loop; pi=None runs the classical updates."""
    R = 2 ** n_bits
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    if init_bounds is None:
        bounds = design_meq(prior, n_bits).bounds.copy()
    else:
        bounds = np.asarray(init_bounds, dtype=float).copy()
        if bounds.shape != (R + 1,) or np.any(np.diff(bounds[:-1]) <= 0):
            raise ValueError("init bounds must be R+1 ascending values")
        bounds[0], bounds[-1] = 0.0, np.inf
    if delta is None:
        delta = 1e-8 * prior.mean()
    if delta <= 0:
        raise ValueError("delta must be positive")
    diag = LloydDiagnostics()
    reps = _centroids(prior, bounds)
    pim = pi.pi if pi is not None else None

    for it in range(1, max_iter + 1):
        diag.iterations = it
        prev = bounds.copy()
        mass, moment = _cell_moments(prior, bounds)
        # representative update: pi-weighted centroids (plain centroids if no pi)
        if pim is None:
            num, den = moment, mass
        else:
            num, den = pim.T @ moment, pim.T @ mass
        ok = den > 1e-300
        reps = np.where(ok, num / np.where(ok, den, 1.0), reps)
        diag.guard_events += int(np.sum(~ok))
        # boundary update
        for r in range(1, R):
            if pim is None:
                new = 0.5 * (reps[r - 1] + reps[r])
            else:
                drow = pim[r] - pim[r - 1]
                den_b = 2.0 * (drow @ reps)
                if abs(den_b) < 1e-12:
                    diag.guard_events += 1
                    continue
                new = (drow @ reps ** 2) / den_b
            if not (bounds[r - 1] < new < bounds[r + 1]):
                diag.guard_events += 1
                continue
            bounds[r] = new
        if collect:
            q = ScalarGainQuantizer(bounds=bounds.copy(), reps=np.maximum(reps, 0.0), n_bits=n_bits)
            diag.distortion_history.append(
                end_to_end_distortion(q, prior, pi if pi is not None else identity_pi(R))
            )
        move = np.max(np.abs(bounds[1:-1] - prev[1:-1])) if R > 1 else 0.0
        if move <= delta:
            diag.converged = True
            break

    quant = ScalarGainQuantizer(bounds=bounds, reps=np.maximum(reps, 0.0), n_bits=n_bits)
    return quant, diag


def design_lma(
    prior,
    n_bits: int,
    init_bounds=None,
    max_iter: int = 500,
    delta: float | None = None,
    return_diagnostics: bool = False,
):
    """Classical Lloyd-Max: centroid representatives, midpoint boundaries."""
    quant, diag = _lloyd_iterate(prior, n_bits, None, init_bounds, max_iter, delta, False)
    return (quant, diag) if return_diagnostics else quant


def design_alma(
    prior,
    n_bits: int,
    pi: RepTransitionMatrix,
    init_bounds=None,
    max_iter: int = 500,
    delta: float | None = None,
    return_diagnostics: bool = False,
):
    """Noise-aware Lloyd-Max: alternates the pi-weighted updates to a fixed point.

    Degenerate boundary updates (vanishing denominator or ordering violation)
    keep the previous bound for that index and are counted in the diagnostics.
    """
    if pi.R != 2 ** n_bits:
        raise ValueError("pi size must match the codebook size")
    quant, diag = _lloyd_iterate(
        prior, n_bits, pi, init_bounds, max_iter, delta, return_diagnostics
    )
    return (quant, diag) if return_diagnostics else quant


def end_to_end_distortion(quantizer: ScalarGainQuantizer, prior, pi: RepTransitionMatrix) -> float:
    """Mean squared gain error through quantize -> noisy index -> dequantize."""
    lo, hi = quantizer.bounds[:-1], quantizer.bounds[1:]
    m0 = np.asarray(prior.mass(lo, hi), dtype=float)
    m1 = np.asarray(prior.first_moment(lo, hi), dtype=float)
    m2 = np.asarray(prior.second_moment(lo, hi), dtype=float)
    v = quantizer.reps
    # sum_n sum_r pi[n, r] * int_cell_n (x - v_r)^2 phi(x) dx
    per_pair = m2[:, None] - 2.0 * np.outer(m1, v) + np.outer(m0, v ** 2)
    return float(np.sum(pi.pi * per_pair))


def export_codebook_csv(quantizer: ScalarGainQuantizer, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,lower_bound,upper_bound,representative\n")
        for r in range(quantizer.R):
            fh.write(
                f"{r},{format(quantizer.bounds[r], '.12g')},"
                f"{format(quantizer.bounds[r + 1], '.12g')},"
                f"{format(quantizer.reps[r], '.12g')}\n"
            )


def estimate_pi_empirical(
    quantizer: ScalarGainQuantizer,
    chain,
    n_trials: int,
    rng: np.random.Generator,
) -> RepTransitionMatrix:
    """Frequency estimate of the representative-decode channel by simulation.

    ``chain`` is an exchange.ExchangeChain describing the encode -> RSSI ->
    decode path; for each representative the target transmitter encodes it
    while nuisance transmitters send uniform random symbols over random
    channel draws, and the decoded representatives are counted.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    from . import exchange

    R = quantizer.R
    counts = np.zeros((R, R))
    for n in range(R):
        decoded = exchange.simulate_rep_decodes(chain, quantizer, n, n_trials, rng)
        counts[n] = np.bincount(decoded, minlength=R)
    return RepTransitionMatrix(counts / counts.sum(axis=1, keepdims=True))
