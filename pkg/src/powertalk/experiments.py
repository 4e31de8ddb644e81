"""Monte-Carlo experiment drivers: one CSV per figure family.

Families
  phase1-esnr        estimation SNR vs SIR, LSPD/MMSEPD, perfect exchange
  phase1-loss        relative utility loss vs SIR, LSPD/MMSEPD, both utilities
  phase2-esnr        estimation SNR vs SIR for MEQ/ALMA/LMA, perfect training
  phase2-loss        relative utility loss vs SIR, MEQ vs ALMA
  phase2-sweep-bits  estimation SNR vs gain-quantizer bits (one symbol per gain)
  phase2-sweep-slots estimation SNR vs exchange slots (binary levels)
  global-sumrate     mean sum-rate vs ISD: IWFA / estimated BRD / perfect BRD

Seeding: every trial-level stream is a PCG64 generator built from
SeedSequence(base_seed, spawn_key=(trial, phase[, method])), with phase
0 = channel draw, 1 = training feedback, 2 = exchange feedback.  The key
carries no sweep index: trial randomness is common across sweep points as
well as across methods (common random numbers), so sweep curves differ only
through the swept parameter and appending a method never perturbs existing
streams.  Sweep-point-level design randomness (decode-channel estimation)
uses spawn_key=(sweep_index,).
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import metrics
from .allocation import (
    PowerGrid,
    UtilitySpec,
    evaluate_utility,
    exhaustive_oracle,
    iwfa,
    stitched_oracle,
    team_brd,
)
from .errors import ConfigError, DegenerateObservationError, EstimationError
from .exchange import ExchangeChain, ExchangeSchedule, default_alphabet, run_exchange
from .feedback import build_nearest_neighbor_dmc, build_uniform_db_quantizer, sample_dmc
from .gain_quantizers import design_alma, design_lma, design_meq, estimate_pi_empirical
from .local_estimation import MmsepdCoordinateTable
from .metrics import TrialRecord
from .network import GainStatistics, Scenario, build_grid_scenario
from .priors import ExponentialPrior

log = logging.getLogger("powertalk")

PHASE_CHANNEL, PHASE_I, PHASE_II = 0, 1, 2

CSV_HEADER = "sweep_var,sweep_value,method,metric,value,n_trials,seed"


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one experiment run (one CSV)."""

    family: str
    # scenario
    scenario_kind: str = "sir"  # "sir" (2-user controlled) or "grid" (9-cell)
    S: int = 1
    snr_db: float = 30.0
    sir_db: float = 0.0
    # feedback chain
    n_bits: int = 8
    epsilon: float = 0.01
    range_db_lo: float | None = None
    range_db_hi: float | None = None
    variants: tuple[tuple[int, float], ...] = ()  # extra (n_bits, epsilon) pairs
    # phase 1
    estimator: str = "lspd"
    training: str = "diagonal"
    mc_samples: int = 100_000
    phase1_perfect: bool = False
    # phase 2
    quantizer: str = "meq"
    n_bits_ii: int = 2
    levels: int = 2
    mode: str = "simultaneous"
    alma_max_iter: int = 500
    alma_delta: float | None = None
    pi_trials: int = 2000
    phase2_perfect: bool = False
    # phase 3
    utility: str = "sum_rate"
    ee_c: float = 1.0
    n_grid: int = 0  # 0 = auto: 100 for S=1, 21 per band for S=2
    max_rounds: int = 50
    brd_mode: str = "per_transmitter"
    # run control
    n_trials: int = 2000
    seed: int = 12345
    sweep_variable: str = "sir_db"
    sweep_values: tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0)
    sir_points: tuple[float, ...] = (0.0, 10.0)  # for the bits/slots sweeps

    def grid_points(self) -> int:
        return self.n_grid if self.n_grid > 0 else (100 if self.S == 1 else 21)

    def feedback_variants(self) -> tuple[tuple[int, float], ...]:
        base = ((self.n_bits, self.epsilon),)
        extra = tuple(v for v in self.variants if v != base[0])
        return base + extra


FAMILY_SWEEP_VARS = {
    "phase1-esnr": "sir_db",
    "phase1-loss": "sir_db",
    "phase2-esnr": "sir_db",
    "phase2-loss": "sir_db",
    "phase2-sweep-bits": "n_bits",
    "phase2-sweep-slots": "t_ii",
    "global-sumrate": "isd",
}


def sir_controlled_stats(sir_db: float, K: int = 2, S: int = 1) -> GainStatistics:
    """Two-user symmetric statistics: unit direct means, cross means set by SIR."""
    if K != 2:
        raise ValueError("SIR-controlled statistics are defined for K=2")
    cross = 10.0 ** (-sir_db / 10.0)
    mean = np.array([[1.0, cross], [cross, 1.0]])
    return GainStatistics(np.repeat(mean[:, :, None], S, axis=2))


def _sir_scenario(cfg: ExperimentConfig) -> Scenario:
    p_max = 10.0 ** (cfg.snr_db / 10.0)
    pos = np.array([[0.0, 0.0], [10.0, 0.0]])
    return Scenario(K=2, S=cfg.S, p_max=p_max, sigma2=1.0,
                    tx_positions=pos, rx_positions=pos + (0.0, 1.0))


def _feedback_for(cfg: ExperimentConfig, n_bits: int, epsilon: float):
    rng_db = None
    if cfg.range_db_lo is not None or cfg.range_db_hi is not None:
        lo = cfg.range_db_lo if cfg.range_db_lo is not None else cfg.snr_db - 20.0
        hi = cfg.range_db_hi if cfg.range_db_hi is not None else cfg.snr_db + 10.0
        rng_db = (lo, hi)
    q = build_uniform_db_quantizer(n_bits, cfg.snr_db, rng_db)
    dmc = build_nearest_neighbor_dmc(q.M, epsilon)
    return q, dmc


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _variant_suffix(cfg: ExperimentConfig, n_bits: int, epsilon: float) -> str:
    if len(cfg.feedback_variants()) == 1:
        return ""
    return f"_n{n_bits}_e{epsilon:g}"


def _guarded_trials(cfg: ExperimentConfig, body) -> int:
    """Run the per-trial body for every trial; estimator-level failures skip
    the trial with a diagnostic instead of killing the sweep."""
    skipped = 0
    for trial in range(cfg.n_trials):
        try:
            body(trial)
        except (DegenerateObservationError, EstimationError) as exc:
            skipped += 1
            log.warning("trial %d skipped: %s", trial, exc)
    if skipped:
        log.warning("family=%s: %d/%d trials skipped", cfg.family, skipped, cfg.n_trials)
    if skipped == cfg.n_trials:
        raise EstimationError("every trial failed; check the configuration")
    return skipped


# ---------------------------------------------------------------------------
# phase 1 pipeline pieces


def _training_level(p_max: float, S: int) -> float:
    # bands train in parallel slots, so the per-slot budget is split evenly
    return p_max if S == 1 else p_max / S


def _phase1_observe(g: np.ndarray, level: float, sigma2: float, q, dmc, rng) -> np.ndarray:
    """Observed feedback indices for diagonal training, shape (K, K, S).

    Slot t has only transmitter t on air (on every band in parallel), so the
    power at receiver i is g[t, i, s] * level + sigma2.
    """
    omega = g * level + sigma2
    sent = q.quantize(omega)
    return sample_dmc(dmc, sent.ravel(), rng).reshape(sent.shape)


def _lspd_columns(recv: np.ndarray, q, level: float, sigma2: float) -> np.ndarray:
    return (q.levels_linear[recv] - sigma2) / level


class _MmsepdBank:
    """Per-coordinate posterior tables for every (link, band), built once."""

    def __init__(self, stats: GainStatistics, q, dmc, level: float, sigma2: float):
        K, S = stats.K, stats.S
        self.tables = [
            [
                [
                    MmsepdCoordinateTable(
                        ExponentialPrior(float(stats.mean_gain[t, i, s])), q, dmc, level, sigma2
                    )
                    for s in range(S)
                ]
                for i in range(K)
            ]
            for t in range(K)
        ]

    def estimate(self, recv: np.ndarray) -> np.ndarray:
        K, _, S = recv.shape
        out = np.empty_like(recv, dtype=float)
        for t in range(K):
            for i in range(K):
                for s in range(S):
                    out[t, i, s] = self.tables[t][i][s].estimate(int(recv[t, i, s]))
        return out


# ---------------------------------------------------------------------------
# phase 2 pipeline pieces


def _exchange_setup(cfg: ExperimentConfig, scen: Scenario, n_bits_ii: int, L: int):
    schedule = ExchangeSchedule(mode=cfg.mode, K=scen.K, n_bits=n_bits_ii, L=L)
    alphabet = default_alphabet(L, scen.p_max)
    if scen.S > 1:
        # parallel bands: keep the per-slot total within the power budget
        worst = scen.S * float(alphabet.levels[-1])
        if worst > scen.p_max:
            alphabet = alphabet.scaled(scen.p_max / worst)
    return schedule, alphabet


def _design_codebooks(kind, stats, scen, q, dmc, schedule, alphabet, cfg, sweep_idx):
    """Per-link codebooks Q[j][i]; one shared pi per scenario for ALMA."""
    K = scen.K
    pi = None
    if kind == "alma":
        chain = ExchangeChain(stats, q, dmc, alphabet, schedule, scen.sigma2)
        probe = design_meq(ExponentialPrior(float(stats.mean_gain[0, 0, 0])), schedule.n_bits)
        pi = estimate_pi_empirical(probe, chain, cfg.pi_trials, _stream(cfg.seed, sweep_idx))
    books = []
    for j in range(K):
        row = []
        for i in range(K):
            prior = ExponentialPrior(float(stats.mean_gain[j, i, 0]))
            if kind == "meq":
                row.append(design_meq(prior, schedule.n_bits))
            elif kind == "lma":
                row.append(design_lma(prior, schedule.n_bits,
                                      max_iter=cfg.alma_max_iter, delta=cfg.alma_delta))
            elif kind == "alma":
                row.append(design_alma(prior, schedule.n_bits, pi,
                                       max_iter=cfg.alma_max_iter, delta=cfg.alma_delta))
            else:
                raise ConfigError(f"unknown gain quantizer '{kind}'")
        books.append(row)
    return books


def _run_phase2(g, est_cols, codebooks, alphabet, schedule, q, dmc, sigma2, rng):
    """Exchange every band in parallel slots; returns views (K,K,K,S) + errors."""
    K, _, S = g.shape
    views = np.empty((K, K, K, S))
    errors = 0
    for s in range(S):
        v, e = run_exchange(g[:, :, s], est_cols[:, :, s], codebooks, alphabet,
                            schedule, q, dmc, sigma2, rng)
        views[:, :, :, s] = v.views
        errors += e
    return views, errors


def _perfect_views(est_cols: np.ndarray) -> np.ndarray:
    """All transmitters share the stacked local estimates (ideal exchange)."""
    K = est_cols.shape[0]
    return np.broadcast_to(est_cols, (K,) + est_cols.shape).copy()


# ---------------------------------------------------------------------------
# family drivers (one sweep point each)


def _point_phase1_esnr(cfg: ExperimentConfig, sweep_idx: int, value: float):
    stats = sir_controlled_stats(value, S=cfg.S)
    scen = _sir_scenario(cfg)
    level = _training_level(scen.p_max, cfg.S)
    rows = []
    for n_bits, eps in cfg.feedback_variants():
        q, dmc = _feedback_for(cfg, n_bits, eps)
        bank = _MmsepdBank(stats, q, dmc, level, scen.sigma2)
        per_method: dict[str, list[TrialRecord]] = {"lspd": [], "mmsepd": []}

        def body(trial, q=q, dmc=dmc, bank=bank, per_method=per_method):
            g = _stream(cfg.seed, trial, PHASE_CHANNEL).exponential(stats.mean_gain)
            recv = _phase1_observe(g, level, scen.sigma2, q, dmc,
                                   _stream(cfg.seed, trial, PHASE_I))
            cols = {
                "lspd": np.maximum(_lspd_columns(recv, q, level, scen.sigma2), 0.0),
                "mmsepd": bank.estimate(recv),
            }
            for name, est in cols.items():
                per_method[name].append(TrialRecord(
                    trial_id=trial, seed_key=(trial,), g_true=g,
                    views=_perfect_views(est)))

        _guarded_trials(cfg, body)
        suffix = _variant_suffix(cfg, n_bits, eps)
        for name, trials in per_method.items():
            rows.append(("sir_db", value, name + suffix, "esnr_db",
                         metrics.cap_esnr(metrics.esnr(trials)), cfg.n_trials, cfg.seed))
    return rows


def _point_phase1_loss(cfg: ExperimentConfig, sweep_idx: int, value: float):
    stats = sir_controlled_stats(value, S=cfg.S)
    scen = _sir_scenario(cfg)
    level = _training_level(scen.p_max, cfg.S)
    q, dmc = _feedback_for(cfg, cfg.n_bits, cfg.epsilon)
    bank = _MmsepdBank(stats, q, dmc, level, scen.sigma2)
    grid = PowerGrid(cfg.grid_points(), scen.p_max, cfg.S)
    kinds = ("sum_rate", "sum_ee")
    utils = {k: UtilitySpec(kind=k, c=cfg.ee_c) for k in kinds}
    trials = []

    def body(trial):
        g = _stream(cfg.seed, trial, PHASE_CHANNEL).exponential(stats.mean_gain)
        recv = _phase1_observe(g, level, scen.sigma2, q, dmc,
                               _stream(cfg.seed, trial, PHASE_I))
        cols = {
            "lspd": np.maximum(_lspd_columns(recv, q, level, scen.sigma2), 0.0),
            "mmsepd": bank.estimate(recv),
        }
        rec = TrialRecord(trial_id=trial, seed_key=(trial,), g_true=g)
        for kind in kinds:
            _, u_star = exhaustive_oracle(g, utils[kind], grid, scen.sigma2)
            rec.utilities[f"oracle:{kind}"] = u_star
            for name, est in cols.items():
                p = stitched_oracle(_perfect_views(est), utils[kind], grid, scen.sigma2)
                rec.utilities[f"{name}:{kind}"] = evaluate_utility(p, g, scen.sigma2, utils[kind])
        trials.append(rec)

    _guarded_trials(cfg, body)
    rows = []
    for kind in kinds:
        for name in ("lspd", "mmsepd"):
            loss, _ = metrics.relative_utility_loss(trials, name, kind)
            rows.append(("sir_db", value, name, f"delta_u_{kind}_pct", loss,
                         cfg.n_trials, cfg.seed))
    return rows


def _phase2_trial_views(cfg, g, scen, q, dmc, codebooks, alphabet, schedule,
                        trial, method_idx):
    """True-gain encode (perfect training phase), one exchange per method."""
    est_cols = g.copy()
    rng = _stream(cfg.seed, trial, PHASE_II, method_idx)
    return _run_phase2(g, est_cols, codebooks, alphabet, schedule, q, dmc, scen.sigma2, rng)


def _point_phase2_esnr(cfg: ExperimentConfig, sweep_idx: int, value: float):
    stats = sir_controlled_stats(value, S=cfg.S)
    scen = _sir_scenario(cfg)
    schedule, alphabet = _exchange_setup(cfg, scen, cfg.n_bits_ii, cfg.levels)
    methods = ("meq", "alma", "lma")
    rows = []
    for n_bits, eps in cfg.feedback_variants():
        q, dmc = _feedback_for(cfg, n_bits, eps)
        books = {m: _design_codebooks(m, stats, scen, q, dmc, schedule, alphabet, cfg, sweep_idx)
                 for m in methods}
        per_method = {m: [] for m in methods}

        def body(trial, q=q, dmc=dmc, books=books, per_method=per_method):
            g = _stream(cfg.seed, trial, PHASE_CHANNEL).exponential(stats.mean_gain)
            for mi, m in enumerate(methods):
                views, errs = _phase2_trial_views(cfg, g, scen, q, dmc, books[m],
                                                  alphabet, schedule, trial, mi)
                per_method[m].append(TrialRecord(
                    trial_id=trial, seed_key=(trial,), g_true=g, views=views,
                    diagnostics={"symbol_errors": errs}))

        _guarded_trials(cfg, body)
        suffix = _variant_suffix(cfg, n_bits, eps)
        for m in methods:
            rows.append(("sir_db", value, m + suffix, "esnr_db",
                         metrics.cap_esnr(metrics.esnr(per_method[m])), cfg.n_trials, cfg.seed))
    return rows


def _point_phase2_loss(cfg: ExperimentConfig, sweep_idx: int, value: float):
    stats = sir_controlled_stats(value, S=cfg.S)
    scen = _sir_scenario(cfg)
    schedule, alphabet = _exchange_setup(cfg, scen, cfg.n_bits_ii, cfg.levels)
    q, dmc = _feedback_for(cfg, cfg.n_bits, cfg.epsilon)
    methods = ("meq", "alma")
    books = {m: _design_codebooks(m, stats, scen, q, dmc, schedule, alphabet, cfg, sweep_idx)
             for m in methods}
    grid = PowerGrid(cfg.grid_points(), scen.p_max, cfg.S)
    kinds = ("sum_rate", "sum_ee")
    utils = {k: UtilitySpec(kind=k, c=cfg.ee_c) for k in kinds}
    trials = []

    def body(trial):
        g = _stream(cfg.seed, trial, PHASE_CHANNEL).exponential(stats.mean_gain)
        rec = TrialRecord(trial_id=trial, seed_key=(trial,), g_true=g)
        views = {m: _phase2_trial_views(cfg, g, scen, q, dmc, books[m], alphabet,
                                        schedule, trial, mi)[0]
                 for mi, m in enumerate(methods)}
        for kind in kinds:
            _, u_star = exhaustive_oracle(g, utils[kind], grid, scen.sigma2)
            rec.utilities[f"oracle:{kind}"] = u_star
            for m in methods:
                p = stitched_oracle(views[m], utils[kind], grid, scen.sigma2)
                rec.utilities[f"{m}:{kind}"] = evaluate_utility(p, g, scen.sigma2, utils[kind])
        trials.append(rec)

    _guarded_trials(cfg, body)
    rows = []
    for kind in kinds:
        for m in methods:
            loss, _ = metrics.relative_utility_loss(trials, m, kind)
            rows.append(("sir_db", value, m, f"delta_u_{kind}_pct", loss, cfg.n_trials, cfg.seed))
    return rows


def _point_phase2_bits(cfg: ExperimentConfig, sweep_idx: int, value: float, slots_mode=False):
    if slots_mode:
        t_ii = int(value)
        if t_ii % 2 != 0 or t_ii < 2:
            raise ConfigError("t_ii values must be positive multiples of K=2")
        bits, L = t_ii // 2, 2
        sweep_var = "t_ii"
    else:
        bits, L = int(value), 2 ** int(value)
        sweep_var = "n_bits"
    scen = _sir_scenario(cfg)
    q, dmc = _feedback_for(cfg, cfg.n_bits, cfg.epsilon)
    rows = []
    for sir in cfg.sir_points:
        stats = sir_controlled_stats(sir, S=cfg.S)
        schedule, alphabet = _exchange_setup(cfg, scen, bits, L)
        books = _design_codebooks("meq", stats, scen, q, dmc, schedule, alphabet, cfg, sweep_idx)
        trials = []

        def body(trial, stats=stats, schedule=schedule, alphabet=alphabet, books=books, trials=trials):
            g = _stream(cfg.seed, trial, PHASE_CHANNEL).exponential(stats.mean_gain)
            views, errs = _phase2_trial_views(cfg, g, scen, q, dmc, books, alphabet,
                                              schedule, trial, 0)
            trials.append(TrialRecord(trial_id=trial, seed_key=(trial,),
                                      g_true=g, views=views,
                                      diagnostics={"symbol_errors": errs}))

        _guarded_trials(cfg, body)
        rows.append((sweep_var, value, f"meq_sir{sir:g}", "esnr_db",
                     metrics.cap_esnr(metrics.esnr(trials)), cfg.n_trials, cfg.seed))
    return rows


def _point_global(cfg: ExperimentConfig, sweep_idx: int, value: float):
    scen, stats = build_grid_scenario(value, K=9, S=cfg.S, snr_db=cfg.snr_db)
    level = _training_level(scen.p_max, cfg.S)
    q, dmc = _feedback_for(cfg, cfg.n_bits, cfg.epsilon)
    schedule, alphabet = _exchange_setup(cfg, scen, cfg.n_bits_ii, cfg.levels)
    books = _design_codebooks(cfg.quantizer, stats, scen, q, dmc, schedule, alphabet,
                              cfg, sweep_idx)
    grid = PowerGrid(cfg.grid_points(), scen.p_max, cfg.S)
    util = UtilitySpec(kind=cfg.utility, c=cfg.ee_c)
    sums = {"brd_perfect": 0.0, "brd_estimated": 0.0, "iwfa": 0.0}

    def body(trial):
        g = _stream(cfg.seed, trial, PHASE_CHANNEL).exponential(stats.mean_gain)
        if cfg.phase1_perfect:
            est_cols = g.copy()
        else:
            recv = _phase1_observe(g, level, scen.sigma2, q, dmc,
                                   _stream(cfg.seed, trial, PHASE_I))
            est_cols = np.maximum(_lspd_columns(recv, q, level, scen.sigma2), 0.0)
        if cfg.phase2_perfect:
            views = _perfect_views(est_cols)
        else:
            views, _ = _run_phase2(g, est_cols, books, alphabet, schedule, q, dmc,
                                   scen.sigma2, _stream(cfg.seed, trial, PHASE_II))
        p_perfect = team_brd(g, util, grid, scen.sigma2, mode="centralized",
                             max_rounds=cfg.max_rounds)
        p_est = team_brd(views, util, grid, scen.sigma2, mode=cfg.brd_mode,
                         max_rounds=cfg.max_rounds)
        direct = np.stack([est_cols[i, i, :] for i in range(scen.K)])
        p_iwfa, _ = iwfa(direct, g, scen.sigma2, scen.p_max, max_rounds=cfg.max_rounds)
        sums["brd_perfect"] += evaluate_utility(p_perfect, g, scen.sigma2, util)
        sums["brd_estimated"] += evaluate_utility(p_est, g, scen.sigma2, util)
        sums["iwfa"] += evaluate_utility(p_iwfa, g, scen.sigma2, util)

    completed = cfg.n_trials - _guarded_trials(cfg, body)
    return [("isd", value, m, "mean_sum_rate", sums[m] / completed, cfg.n_trials, cfg.seed)
            for m in ("brd_perfect", "brd_estimated", "iwfa")]


_DRIVERS = {
    "phase1-esnr": _point_phase1_esnr,
    "phase1-loss": _point_phase1_loss,
    "phase2-esnr": _point_phase2_esnr,
    "phase2-loss": _point_phase2_loss,
    "phase2-sweep-bits": lambda cfg, i, v: _point_phase2_bits(cfg, i, v, slots_mode=False),
    "phase2-sweep-slots": lambda cfg, i, v: _point_phase2_bits(cfg, i, v, slots_mode=True),
    "global-sumrate": _point_global,
}


def _worker(args):
    cfg, idx, value = args
    return _DRIVERS[cfg.family](cfg, idx, value)


def run_sweep(cfg: ExperimentConfig, threads: int = 1) -> list[tuple]:
    """Run every sweep point and return CSV rows ordered by (point, method)."""
    if cfg.family not in _DRIVERS:
        raise ConfigError(f"unknown experiment family '{cfg.family}'")
    points = list(enumerate(cfg.sweep_values))
    jobs = [(cfg, i, v) for i, v in points]
    if threads > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(points))) as pool:
            results = list(pool.map(_worker, jobs))
    else:
        results = []
        for job in jobs:
            log.info("family=%s sweep %s=%s", cfg.family, cfg.sweep_variable, job[2])
            results.append(_worker(job))
    return [row for point_rows in results for row in point_rows]


def write_csv(rows: list[tuple], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for var, value, method, metric, val, n, seed in rows:
            fh.write(f"{var},{format(float(value), '.12g')},{method},{metric},"
                     f"{format(float(val), '.12g')},{int(n)},{int(seed)}\n")
