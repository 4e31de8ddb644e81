"""Interference-network model: scenario geometry, gain statistics, channel draws.

Conventions used throughout the package:
  * gains are linear (dimensionless), powers are linear mW,
  * ``g[i, j, s]`` is the gain from transmitter ``i`` to receiver ``j`` on band ``s``,
  * the receive noise power ``sigma2`` is normalized to 1 mW (0 dBm) and dB
    conversions happen only at interfaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

D0_METERS = 5.0

# 3x3 base-station grid and mobile-station drops, in units of d0 (multiply by
# isd/d0 for meters).
_SBS_NORM = np.array(
    [
        (2.5, 2.5), (7.5, 2.5), (12.5, 2.5),
        (2.5, 7.5), (7.5, 7.5), (12.5, 7.5),
        (2.5, 12.5), (7.5, 12.5), (12.5, 12.5),
    ]
)
_MS_NORM = np.array(
    [
        (3.8, 3.2), (7.9, 1.4), (10.2, 0.7),
        (2.3, 5.9), (6.6, 5.9), (14.1, 9.3),
        (1.8, 10.6), (7.1, 14.6), (12.5, 10.7),
    ]
)


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class Scenario:
    """Static network description: K tx/rx pairs, S bands, budgets, geometry."""

    K: int
    S: int
    p_max: float
    sigma2: float
    tx_positions: np.ndarray
    rx_positions: np.ndarray
    d0: float = D0_METERS
    isd: float = D0_METERS

    def __post_init__(self):
        if self.K < 1 or self.S < 1:
            raise ValueError("K and S must be >= 1")
        if self.p_max <= 0 or self.sigma2 <= 0:
            raise ValueError("p_max and sigma2 must be positive")
        if self.d0 <= 0 or self.isd <= 0:
            raise ValueError("d0 and isd must be positive")
        object.__setattr__(self, "tx_positions", _frozen(self.tx_positions))
        object.__setattr__(self, "rx_positions", _frozen(self.rx_positions))
        if self.tx_positions.shape != (self.K, 2) or self.rx_positions.shape != (self.K, 2):
            raise ValueError("position arrays must have shape (K, 2)")


@dataclass(frozen=True)
class GainStatistics:
    """Per-link mean gains E[g_ij^s], shape (K, K, S)."""

    mean_gain: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean_gain", _frozen(self.mean_gain))
        if self.mean_gain.ndim != 3 or self.mean_gain.shape[0] != self.mean_gain.shape[1]:
            raise ValueError("mean_gain must have shape (K, K, S)")
        if not np.all(self.mean_gain > 0):
            raise ValueError("mean gains must be positive")

    @property
    def K(self) -> int:
        return self.mean_gain.shape[0]

    @property
    def S(self) -> int:
        return self.mean_gain.shape[2]


@dataclass(frozen=True)
class ChannelState:
    """One realization of the gain matrix, shape (K, K, S)."""

    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "g", _frozen(self.g))
        if self.g.ndim != 3 or self.g.shape[0] != self.g.shape[1]:
            raise ValueError("g must have shape (K, K, S)")
        if not np.all(np.isfinite(self.g)) or np.any(self.g < 0):
            raise ValueError("gains must be finite and nonnegative")


@dataclass(frozen=True)
class PowerProfile:
    """Transmit powers, shape (K, S); per-user totals must respect p_max."""

    p: np.ndarray
    p_max: float = field(default=np.inf)

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(np.atleast_2d(self.p)))
        if np.any(self.p < 0):
            raise ValueError("powers must be nonnegative")
        if np.any(self.p.sum(axis=1) > self.p_max * (1 + 1e-12)):
            raise ValueError("per-user total power exceeds p_max")


def build_grid_scenario(
    isd: float,
    K: int = 9,
    S: int = 1,
    snr_db: float = 30.0,
    tx_positions=None,
    rx_positions=None,
) -> tuple[Scenario, GainStatistics]:
    """Small-cell grid: 3x3 base stations with spacing ``isd``, one user each.

    sigma2 is pinned to 1 mW and p_max chosen so 10*log10(p_max/sigma2)
    equals ``snr_db``.  Mean gains follow the (d0/d)^2 path-loss law, equal on
    every band.  For K != 9 the caller must supply positions.
    """
    if isd <= 0:
        raise ValueError("isd must be positive")
    if tx_positions is None or rx_positions is None:
        if K != 9:
            raise ValueError("built-in coordinates exist only for K=9; supply positions")
        scale = isd / D0_METERS
        tx_positions = _SBS_NORM * scale
        rx_positions = _MS_NORM * scale
    sigma2 = 1.0
    p_max = sigma2 * 10.0 ** (snr_db / 10.0)
    scen = Scenario(
        K=K, S=S, p_max=p_max, sigma2=sigma2,
        tx_positions=np.asarray(tx_positions, dtype=float),
        rx_positions=np.asarray(rx_positions, dtype=float),
        d0=D0_METERS, isd=isd,
    )
    d = np.linalg.norm(
        scen.tx_positions[:, None, :] - scen.rx_positions[None, :, :], axis=2
    )
    if np.any(d <= 0):
        raise ValueError("transmitter and receiver positions must not coincide")
    mean = (scen.d0 / d) ** 2
    stats = GainStatistics(np.repeat(mean[:, :, None], S, axis=2))
    return scen, stats


def sample_channel(stats: GainStatistics, rng: np.random.Generator) -> ChannelState:
    """Draw one fading realization: independent exponential gains per link/band."""
    return ChannelState(rng.exponential(scale=stats.mean_gain))


def received_power(
    state: ChannelState, profile: PowerProfile, receiver: int, band: int, sigma2: float
) -> float:
    """Total power seen at one receiver: own signal + noise + interference."""
    K = state.g.shape[0]
    if not (0 <= receiver < K and 0 <= band < state.g.shape[2]):
        raise IndexError("receiver or band index out of range")
    return float(state.g[:, receiver, band] @ profile.p[:, band] + sigma2)


def received_power_slot(g_band: np.ndarray, p: np.ndarray, sigma2: float) -> np.ndarray:
    """Vectorized single-band received power at every receiver for one slot."""
    return p @ g_band + sigma2


def sinr(
    state: ChannelState, profile: PowerProfile, receiver: int, band: int, sigma2: float
) -> float:
    own = float(state.g[receiver, receiver, band] * profile.p[receiver, band])
    total = received_power(state, profile, receiver, band, sigma2)
    return own / (total - own)
