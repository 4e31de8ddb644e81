"""Trial records and aggregate metrics (estimation SNR, relative utility loss)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ESNR_CAP_DB = 200.0


@dataclass
class TrialRecord:
    """Everything one Monte-Carlo trial produced that metrics may consume."""

    trial_id: int
    seed_key: tuple
    g_true: np.ndarray
    views: np.ndarray | None = None  # (K, K, K, S): entry j = transmitter j's estimate
    profiles: dict = field(default_factory=dict)
    utilities: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def esnr(trials: list[TrialRecord], transmitter="all") -> float:
    """Estimation SNR in dB: signal energy over error energy, means over trials.

    Computed as the dB of the ratio of summed Frobenius energies (a ratio of
    expectations, not a mean of per-trial dBs); ``transmitter='all'`` averages
    the per-transmitter dB values.  Zero error energy returns +inf.
    """
    if not trials:
        raise ValueError("need at least one trial")
    K = trials[0].views.shape[0]
    signal = sum(float(np.sum(t.g_true ** 2)) for t in trials)
    which = range(K) if transmitter == "all" else [int(transmitter)]
    per_tx = []
    for i in which:
        err = sum(float(np.sum((t.g_true - t.views[i]) ** 2)) for t in trials)
        per_tx.append(np.inf if err == 0 else 10.0 * np.log10(signal / err))
    return float(np.mean(per_tx))


def cap_esnr(value_db: float) -> float:
    """CSV-safe ESNR (the +inf sentinel is capped)."""
    return float(min(value_db, ESNR_CAP_DB))


def relative_utility_loss(
    trials: list[TrialRecord], method: str, utility_kind: str
) -> tuple[float, int]:
    """Average relative utility loss in percent against the per-trial oracle.

    Per trial: 100 * (u(p*; G) - u(p~; G)) / u(p*; G), with the oracle profile
    from exhaustive search on the true matrix and the method profile optimized
    on the estimated CSI; both utilities are evaluated on the true matrix.
    Trials with a zero oracle utility are excluded and counted.
    """
    losses = []
    excluded = 0
    for t in trials:
        u_star = t.utilities[f"oracle:{utility_kind}"]
        u_est = t.utilities[f"{method}:{utility_kind}"]
        if u_star == 0:
            excluded += 1
            continue
        losses.append(100.0 * (u_star - u_est) / u_star)
    if not losses:
        raise ValueError("no usable trials for the loss metric")
    return float(np.mean(losses)), excluded
