"""Local CSI estimation from quantized power feedback (training phase).

Each transmitter learns the gains of the links arriving at its own receiver
from T_I feedback samples taken while a known power schedule (training
matrix) is on air.  Two estimators are provided: a least-squares inverse in
the power domain and a Bayesian posterior mean that models the quantizer and
the index channel explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError, DegenerateObservationError, EstimationError
from .feedback import Dmc, RsQuantizer

ENUMERATION_BUDGET = 10 ** 6


@dataclass(frozen=True)
class TrainingMatrix:
    """Known power schedule, shape (T_I, K): row = slot, column = transmitter."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2:
            raise ValueError("training matrix must be 2-D (slots x transmitters)")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("training powers must be finite and nonnegative")
        p.flags.writeable = False
        object.__setattr__(self, "p", p)

    @property
    def n_slots(self) -> int:
        return self.p.shape[0]

    @property
    def K(self) -> int:
        return self.p.shape[1]

    def is_diagonal(self) -> bool:
        return (
            self.p.shape[0] == self.p.shape[1]
            and np.all(self.p[~np.eye(self.K, dtype=bool)] == 0)
            and np.all(np.diag(self.p) > 0)
        )


@dataclass(frozen=True)
class LocalCsiEstimate:
    """Estimated gains of one receiver's incoming links (single band)."""

    g_hat: np.ndarray
    estimator_tag: str

    def __post_init__(self):
        g = np.asarray(self.g_hat, dtype=float)
        if not np.all(np.isfinite(g)):
            raise ValueError("estimates must be finite")
        g.flags.writeable = False
        object.__setattr__(self, "g_hat", g)

    def clamped(self) -> np.ndarray:
        """Physical (nonnegative) version used downstream of the estimator."""
        return np.maximum(self.g_hat, 0.0)


def diagonal_training(K: int, level: float, p_max: float | None = None) -> TrainingMatrix:
    if level <= 0 or (p_max is not None and level > p_max * (1 + 1e-12)):
        raise ValueError("training level must lie in (0, p_max]")
    return TrainingMatrix(level * np.eye(K))


def lspd_estimate(
    train: TrainingMatrix, rssi_linear: np.ndarray, sigma2: float
) -> LocalCsiEstimate:
    """Least-squares gain estimate from linear feedback values.

    Solves the normal equations of the noiseless power model; for diagonal
    training this reduces to (rssi_t - sigma2) / p_t per link.
    """
    omega = np.asarray(rssi_linear, dtype=float)
    if omega.shape != (train.n_slots,):
        raise ValueError("need one feedback value per training slot")
    P = train.p
    gram = P.T @ P
    try:
        g = np.linalg.solve(gram, P.T @ (omega - sigma2))
    except np.linalg.LinAlgError as exc:
        raise EstimationError("training matrix is not pseudo-invertible") from exc
    if not np.all(np.isfinite(g)):
        raise EstimationError("training matrix is not pseudo-invertible")
    return LocalCsiEstimate(g_hat=g, estimator_tag="LSPD")


def gain_cell_bounds(q: RsQuantizer, level: float, sigma2: float) -> tuple[np.ndarray, np.ndarray]:
    """Gain intervals that each feedback index covers for one training slot.

    Index m is observed exactly when level*g + sigma2 falls in dB bin m; the
    first and last bins absorb the out-of-range tails.
    """
    edges_lin = 10.0 ** (q.bin_edges_db / 10.0)
    lo = (edges_lin[:-1] - sigma2) / level
    hi = (edges_lin[1:] - sigma2) / level
    lo[0] = 0.0
    hi[-1] = np.inf
    return np.maximum(lo, 0.0), np.maximum(hi, 0.0)


class MmsepdCoordinateTable:
    """Cached per-coordinate posterior tables for diagonal training.

    With a diagonal schedule the posterior over the gain vector factorizes:
    each coordinate depends only on its own slot's observation, so the exact
    cell enumeration collapses to M mass/moment terms per coordinate.
    """

    def __init__(self, prior, q: RsQuantizer, dmc: Dmc, level: float, sigma2: float):
        self.dmc = dmc
        atoms = getattr(prior, "atoms", None)
        if atoms is not None:
            sent = np.asarray(q.quantize(level * atoms + sigma2))
            self.mass = np.bincount(sent, weights=prior.probs, minlength=q.M)
            self.moment = np.bincount(sent, weights=prior.probs * atoms, minlength=q.M)
        else:
            lo, hi = gain_cell_bounds(q, level, sigma2)
            self.mass = np.asarray(prior.mass(lo, hi), dtype=float)
            self.moment = np.asarray(prior.first_moment(lo, hi), dtype=float)

    def estimate(self, observed_index: int) -> float:
        w = self.dmc.gamma[:, observed_index]
        den = w @ self.mass
        if den <= 0:
            raise DegenerateObservationError("observation has zero posterior mass")
        return float(w @ self.moment / den)


def _check_enumeration_budget(M: int, n_slots: int, budget: int) -> None:
    if n_slots * math.log(M) > math.log(budget) + 1e-9:
        raise BudgetExceededError(
            f"cell enumeration {M}^{n_slots} exceeds the {budget:g} budget"
        )


def mmsepd_estimate_enumerate(
    train: TrainingMatrix,
    rssi_indices: np.ndarray,
    q: RsQuantizer,
    dmc: Dmc,
    priors,
    sigma2: float,
    qmc_points: int = 1 << 16,
    budget: int = ENUMERATION_BUDGET,
) -> LocalCsiEstimate:
    """Posterior-mean gain estimate by exact cell enumeration.

    ``priors`` holds one scalar prior per incoming link.  Diagonal training
    separates per coordinate (closed-form partial moments for exponential
    priors); general schedules integrate the cell decomposition with a
    deterministic Sobol rule.
    """
    obs = np.asarray(rssi_indices, dtype=int)
    if obs.shape != (train.n_slots,):
        raise ValueError("need one feedback index per training slot")
    _check_enumeration_budget(q.M, train.n_slots, budget)
    if train.is_diagonal():
        g = np.empty(train.K)
        for k in range(train.K):
            table = MmsepdCoordinateTable(priors[k], q, dmc, float(train.p[k, k]), sigma2)
            g[k] = table.estimate(int(obs[k]))
        return LocalCsiEstimate(g_hat=g, estimator_tag="MMSEPD")

    from scipy.stats import qmc

    sampler = qmc.Sobol(d=train.K, scramble=False)
    u = sampler.random(qmc_points)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    x = np.column_stack([priors[k].quantile(u[:, k]) for k in range(train.K)])
    w = _observation_weights(train, obs, q, dmc, sigma2, x)
    total = w.sum()
    if total <= 0:
        raise DegenerateObservationError("observation has zero posterior mass")
    return LocalCsiEstimate(g_hat=(w @ x) / total, estimator_tag="MMSEPD")


def mmsepd_estimate_mc(
    train: TrainingMatrix,
    rssi_indices: np.ndarray,
    q: RsQuantizer,
    dmc: Dmc,
    priors,
    sigma2: float,
    n_samples: int,
    rng: np.random.Generator,
) -> LocalCsiEstimate:
    """Self-normalized Monte-Carlo version of the posterior mean."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    obs = np.asarray(rssi_indices, dtype=int)
    x = np.column_stack([priors[k].sample(rng, n_samples) for k in range(train.K)])
    w = _observation_weights(train, obs, q, dmc, sigma2, x)
    total = w.sum()
    if total <= 0:
        raise DegenerateObservationError("all sample weights are zero")
    return LocalCsiEstimate(g_hat=(w @ x) / total, estimator_tag="MMSEPD")


def _observation_weights(train, obs, q, dmc, sigma2, gvecs) -> np.ndarray:
    """P(observed indices | gain vector) for each row of ``gvecs``."""
    omega = gvecs @ train.p.T + sigma2  # (n, T)
    weights = np.ones(gvecs.shape[0])
    valid = np.all(omega > 0, axis=1)
    sent = np.zeros_like(omega, dtype=int)
    sent[valid] = q.quantize(omega[valid])
    for t in range(train.n_slots):
        weights *= dmc.gamma[sent[:, t], obs[t]]
    weights[~valid] = 0.0
    return weights


def likelihood(
    train: TrainingMatrix,
    rssi_indices: np.ndarray,
    gvecs: np.ndarray,
    q: RsQuantizer,
    dmc: Dmc,
    sigma2: float,
) -> np.ndarray:
    """Observation likelihood of candidate gain vectors, shape (n,)."""
    gvecs = np.atleast_2d(np.asarray(gvecs, dtype=float))
    return _observation_weights(train, np.asarray(rssi_indices, dtype=int), q, dmc, sigma2, gvecs)


def ml_set_contains(
    train: TrainingMatrix,
    rssi_indices: np.ndarray,
    candidate,
    q: RsQuantizer,
    dmc: Dmc,
    sigma2: float,
    grid: np.ndarray,
    tol: float = 1e-12,
) -> bool:
    """Whether the candidate's likelihood matches the best over a finite grid."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("candidate grid is empty")
    cand = candidate.g_hat if isinstance(candidate, LocalCsiEstimate) else np.asarray(candidate)
    cand_l = likelihood(train, rssi_indices, cand, q, dmc, sigma2)[0]
    grid_l = likelihood(train, rssi_indices, grid, q, dmc, sigma2)
    return bool(cand_l >= grid_l.max() - tol)
