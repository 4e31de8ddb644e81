"""Power allocation on acquired CSI: network utilities and optimizers.

Includes the two network utilities (sum-rate, sum-energy-efficiency), a
sequential best-response dynamics driven by the common utility (Team BRD),
the per-user iterative water-filling baseline, and a joint exhaustive-search
oracle over the same grid.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError

EXHAUSTIVE_BUDGET = 10 ** 8


@dataclass(frozen=True)
class UtilitySpec:
    """Which network utility to optimize; c is the efficiency exponent."""

    kind: str = "sum_rate"
    c: float = 1.0

    def __post_init__(self):
        if self.kind not in ("sum_rate", "sum_ee"):
            raise ValueError("kind must be 'sum_rate' or 'sum_ee'")
        if self.c <= 0:
            raise ValueError("c must be positive")


@dataclass(frozen=True)
class PowerGrid:
    """n_grid equally spaced per-band levels in [0, p_max], joint sum feasible."""

    n_grid: int
    p_max: float
    S: int = 1

    def __post_init__(self):
        if self.n_grid < 2:
            raise ValueError("n_grid must be >= 2")
        if self.p_max <= 0 or self.S < 1:
            raise ValueError("p_max and S must be positive")

    @property
    def band_levels(self) -> np.ndarray:
        return np.linspace(0.0, self.p_max, self.n_grid)

    def candidates(self) -> np.ndarray:
        """Feasible per-user power vectors, shape (n, S), lexicographic order."""
        levels = self.band_levels
        if self.S == 1:
            return levels[:, None]
        combos = np.array(list(itertools.product(levels, repeat=self.S)))
        return combos[combos.sum(axis=1) <= self.p_max * (1 + 1e-12)]


def _as_g(state) -> np.ndarray:
    g = getattr(state, "g", state)
    return np.asarray(g, dtype=float)


def _as_p(profile) -> np.ndarray:
    p = getattr(profile, "p", profile)
    p = np.asarray(p, dtype=float)
    return p[:, None] if p.ndim == 1 else p


def sinr_matrix(p: np.ndarray, g: np.ndarray, sigma2: float) -> np.ndarray:
    """SINR of every (receiver, band) under profile p, shape (K, S)."""
    total = np.einsum("ks,kjs->js", p, g) + sigma2
    own = np.einsum("jjs,js->js", g, p)
    return own / (total - own)


def sum_rate(profile, state, sigma2: float) -> float:
    s = sinr_matrix(_as_p(profile), _as_g(state), sigma2)
    return float(np.sum(np.log2(1.0 + s)))


def sum_ee(profile, state, sigma2: float, c: float = 1.0) -> float:
    p = _as_p(profile)
    s = sinr_matrix(p, _as_g(state), sigma2)
    with np.errstate(divide="ignore"):
        f = np.where(s > 0, np.exp(-c / np.where(s > 0, s, 1.0)), 0.0)
    tot = p.sum(axis=1)
    return float(np.sum(np.where(tot > 0, f.sum(axis=1) / np.where(tot > 0, tot, 1.0), 0.0)))


def evaluate_utility(profile, state, sigma2: float, utility: UtilitySpec) -> float:
    if utility.kind == "sum_rate":
        return sum_rate(profile, state, sigma2)
    return sum_ee(profile, state, sigma2, utility.c)


def utility_of_profiles(P: np.ndarray, g: np.ndarray, sigma2: float, utility: UtilitySpec) -> np.ndarray:
    """Vectorized utility of a batch of profiles, P shape (n, K, S)."""
    total = np.einsum("nks,kjs->njs", P, g) + sigma2
    own = np.einsum("jjs,njs->njs", g, P)
    s = own / (total - own)
    if utility.kind == "sum_rate":
        return np.log2(1.0 + s).sum(axis=(1, 2))
    with np.errstate(divide="ignore"):
        f = np.where(s > 0, np.exp(-utility.c / np.where(s > 0, s, 1.0)), 0.0)
    tot = P.sum(axis=2)
    return np.where(tot > 0, f.sum(axis=2) / np.where(tot > 0, tot, 1.0), 0.0).sum(axis=1)


def _best_response(p: np.ndarray, i: int, g: np.ndarray, sigma2: float, utility: UtilitySpec, cand: np.ndarray) -> int:
    """Index of user i's utility-maximizing candidate, others held fixed."""
    n = cand.shape[0]
    total = np.einsum("ks,kjs->js", p, g) + sigma2  # (K, S)
    delta = (cand[:, None, :] - p[i][None, None, :]) * g[i][None, :, :]  # (n, K, S)
    total_c = total[None] + delta
    own = np.einsum("jjs,js->js", g, p)[None].repeat(n, axis=0)
    own[:, i, :] = np.einsum("s,ns->ns", g[i, i], cand)
    s = own / (total_c - own)
    if utility.kind == "sum_rate":
        vals = np.log2(1.0 + s).sum(axis=(1, 2))
    else:
        with np.errstate(divide="ignore"):
            f = np.where(s > 0, np.exp(-utility.c / np.where(s > 0, s, 1.0)), 0.0)
        tot = p.sum(axis=1)[None].repeat(n, axis=0)
        tot[:, i] = cand.sum(axis=1)
        vals = np.where(tot > 0, f.sum(axis=2) / np.where(tot > 0, tot, 1.0), 0.0).sum(axis=1)
    return int(np.argmax(vals))


def centralized_brd(
    g_hat: np.ndarray,
    utility: UtilitySpec,
    grid: PowerGrid,
    sigma2: float,
    max_rounds: int = 50,
    initial: np.ndarray | None = None,
) -> tuple[np.ndarray, int]:
    """Round-robin team best responses on one shared CSI matrix.

    Starts from every user spending p_max split evenly over bands; stops when
    a full round leaves the profile unchanged.  Returns (profile, rounds).
    """
    K, S = g_hat.shape[0], g_hat.shape[2]
    cand = grid.candidates()
    p = np.full((K, S), grid.p_max / S) if initial is None else initial.astype(float).copy()
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        changed = False
        for i in range(K):
            best = _best_response(p, i, g_hat, sigma2, utility, cand)
            if not np.array_equal(cand[best], p[i]):
                p[i] = cand[best]
                changed = True
        if not changed:
            break
    return p, rounds


def team_brd(
    csi: np.ndarray,
    utility: UtilitySpec,
    grid: PowerGrid,
    sigma2: float,
    mode: str = "centralized",
    max_rounds: int = 50,
) -> np.ndarray:
    """Team BRD profile under shared or per-transmitter CSI.

    ``csi`` is (K, K, S) in centralized mode.  In per_transmitter mode it is
    (K, K, K, S) — one full-matrix estimate per transmitter — and each
    transmitter replays the whole dynamics on its own estimate, contributing
    only its own row to the profile actually played.
    """
    if mode == "centralized":
        return centralized_brd(csi, utility, grid, sigma2, max_rounds)[0]
    if mode != "per_transmitter":
        raise ValueError("mode must be 'centralized' or 'per_transmitter'")
    K, S = csi.shape[1], csi.shape[3]
    p = np.empty((K, S))
    for j in range(K):
        run, _ = centralized_brd(csi[j], utility, grid, sigma2, max_rounds)
        p[j] = run[j]
    return p


def stitched_oracle(
    views: np.ndarray,
    utility: UtilitySpec,
    grid: PowerGrid,
    sigma2: float,
) -> np.ndarray:
    """Distributed exhaustive search: each transmitter maximizes on its own
    CSI estimate and plays its own component.  ``views`` is (K, K, K, S);
    identical views collapse to a single joint search."""
    K = views.shape[1]
    if all(np.array_equal(views[j], views[0]) for j in range(1, K)):
        p, _ = exhaustive_oracle(views[0], utility, grid, sigma2)
        return p
    p = np.empty((K, views.shape[3]))
    for j in range(K):
        run, _ = exhaustive_oracle(views[j], utility, grid, sigma2)
        p[j] = run[j]
    return p


def iwfa(
    direct_gains: np.ndarray,
    state,
    sigma2: float,
    p_max: float,
    max_rounds: int = 100,
    tol: float = 1e-9,
) -> tuple[np.ndarray, int]:
    """Sequential iterative water-filling against measured interference.

    Each user water-fills its own rate over bands using ``direct_gains``
    (its believed own-link gains, shape (K, S)) and the interference the true
    channel currently produces.  Returns (profile, rounds).
    """
    g = _as_g(state)
    K, S = g.shape[0], g.shape[2]
    p = np.full((K, S), p_max / S)
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        prev = p.copy()
        for i in range(K):
            interf = np.einsum("ks,ks->s", p, g[:, i, :]) - p[i] * g[i, i, :] + sigma2
            p[i] = water_fill(direct_gains[i], interf, p_max)
        if np.max(np.abs(p - prev)) <= tol:
            break
    return p, rounds


def water_fill(gains: np.ndarray, interference_plus_noise: np.ndarray, p_max: float) -> np.ndarray:
    """Single-user water-filling by bisection on the water level."""
    gains = np.asarray(gains, dtype=float)
    active = gains > 0
    if not np.any(active):
        return np.zeros_like(gains)
    a = interference_plus_noise[active] / gains[active]
    lo, hi = float(a.min()), float(a.max()) + p_max
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        spent = np.maximum(0.0, mu - a).sum()
        if spent > p_max:
            hi = mu
        else:
            lo = mu
    p = np.zeros_like(gains)
    p[active] = np.maximum(0.0, 0.5 * (lo + hi) - a)
    total = p.sum()
    if total > 0:
        p *= p_max / total
    return p


def exhaustive_oracle(
    state,
    utility: UtilitySpec,
    grid: PowerGrid,
    sigma2: float,
    chunk: int = 1 << 16,
) -> tuple[np.ndarray, float]:
    """Joint argmax of the utility over the product grid (first-found ties)."""
    g = _as_g(state)
    K = g.shape[0]
    cand = grid.candidates()
    n = cand.shape[0]
    if K * np.log(n) > np.log(EXHAUSTIVE_BUDGET) + 1e-9:
        raise BudgetExceededError(f"exhaustive search {n}^{K} exceeds {EXHAUSTIVE_BUDGET:g}")
    best_val, best_idx = -np.inf, None
    combo_iter = itertools.product(range(n), repeat=K)
    offset = 0
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combo_iter, chunk)),
            dtype=int,
        ).reshape(-1, K)
        if block.size == 0:
            break
        vals = utility_of_profiles(cand[block], g, sigma2, utility)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_idx = float(vals[k]), block[k]
        offset += block.shape[0]
        if block.shape[0] < chunk:
            break
    return cand[best_idx], best_val
