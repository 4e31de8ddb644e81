"""Received-power feedback chain: dB-scale quantizer and noisy index channel.

The receiver measures the slot power, quantizes it uniformly in dB and sends
the level index back through a discrete memoryless channel; the transmitter
sees the (possibly corrupted) level.  Dequantization returns the linear value
of the received level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RsQuantizer:
    """Uniform-in-dB scalar quantizer with M = 2^n_bits levels.

    Representatives sit at bin centers; inputs outside the range saturate to
    the first/last level.  A value exactly on a bin edge joins the lower bin.
    """

    n_bits: int
    levels_db: np.ndarray
    bin_edges_db: np.ndarray
    range_db: tuple[float, float]

    def __post_init__(self):
        M = 2 ** self.n_bits
        levels = np.asarray(self.levels_db, dtype=float)
        edges = np.asarray(self.bin_edges_db, dtype=float)
        if levels.shape != (M,) or edges.shape != (M + 1,):
            raise ValueError("levels/edges sized inconsistently with n_bits")
        if np.any(np.diff(levels) <= 0) or np.any(np.diff(edges) <= 0):
            raise ValueError("levels and edges must be strictly ascending")
        lo, hi = self.range_db
        if not lo < hi:
            raise ValueError("empty quantizer range")
        levels.flags.writeable = False
        edges.flags.writeable = False
        object.__setattr__(self, "levels_db", levels)
        object.__setattr__(self, "bin_edges_db", edges)

    @property
    def M(self) -> int:
        return self.levels_db.size

    @property
    def levels_linear(self) -> np.ndarray:
        return 10.0 ** (self.levels_db / 10.0)

    def quantize(self, omega_linear) -> np.ndarray | int:
        """Index of the dB bin containing the input power (vectorized)."""
        omega = np.asarray(omega_linear, dtype=float)
        if np.any(omega <= 0):
            raise ValueError("received power must be positive")
        db = 10.0 * np.log10(omega)
        idx = np.searchsorted(self.bin_edges_db, db, side="left") - 1
        idx = np.clip(idx, 0, self.M - 1)
        return idx if idx.ndim else int(idx)

    def dequantize(self, index) -> np.ndarray | float:
        out = self.levels_linear[index]
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class Dmc:
    """Row-stochastic index-transition matrix; gamma[k, l] = P(receive l | sent k)."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("gamma must be square")
        if np.any(g < -1e-15) or np.any(g > 1 + 1e-12):
            raise ValueError("entries must be probabilities")
        if np.any(np.abs(g.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("rows must sum to 1")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    @property
    def M(self) -> int:
        return self.gamma.shape[0]


def build_uniform_db_quantizer(
    n_bits: int, snr_db: float, range_db: tuple[float, float] | None = None
) -> RsQuantizer:
    """M bins uniform in dB over [snr_db - 20, snr_db + 10] by default."""
    if n_bits < 1:
        raise ValueError("n_bits must be >= 1")
    lo, hi = range_db if range_db is not None else (snr_db - 20.0, snr_db + 10.0)
    M = 2 ** n_bits
    edges = np.linspace(lo, hi, M + 1)
    levels = 0.5 * (edges[:-1] + edges[1:])
    return RsQuantizer(n_bits=n_bits, levels_db=levels, bin_edges_db=edges, range_db=(lo, hi))


def quantize_rs(q: RsQuantizer, omega_linear: float) -> int:
    return int(q.quantize(omega_linear))


def build_nearest_neighbor_dmc(M: int, epsilon: float) -> Dmc:
    """Symbol errors only to the two adjacent levels, each with probability epsilon."""
    if not 0 <= epsilon <= 0.5:
        raise ValueError("epsilon must lie in [0, 1/2]")
    g = np.zeros((M, M))
    idx = np.arange(M)
    if M > 1:
        g[idx[:-1], idx[:-1] + 1] = epsilon
        g[idx[1:], idx[1:] - 1] = epsilon
    g[idx, idx] = 1.0 - g.sum(axis=1)  # self mass balances each row
    return Dmc(g)


def sample_dmc(dmc: Dmc, sent: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One draw per sent index from the corresponding transition row."""
    sent = np.atleast_1d(np.asarray(sent, dtype=int))
    cum = np.cumsum(dmc.gamma[sent], axis=1)
    u = rng.random(sent.shape[0])
    received = (cum > u[:, None]).argmax(axis=1)
    return received


def sample_rssi(
    state,
    profile,
    receiver: int,
    band: int,
    sigma2: float,
    q: RsQuantizer,
    dmc: Dmc,
    rng: np.random.Generator,
) -> int:
    """End-to-end feedback sample: power -> dB quantizer -> noisy index channel."""
    from .network import received_power

    omega = received_power(state, profile, receiver, band, sigma2)
    sent = q.quantize(omega)
    return int(sample_dmc(dmc, np.array([sent]), rng)[0])
