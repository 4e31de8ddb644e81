"""Fast built-in sanity suite behind the `selftest` CLI subcommand.

Covers hand-computable values of every layer; runs in a few seconds with no
configuration.  The pytest suite is the authoritative check — this exists so
a packaged install can be validated in the field.
"""

from __future__ import annotations

import math

import numpy as np

from . import allocation, exchange, feedback, gain_quantizers, metrics, network
from .local_estimation import diagonal_training, lspd_estimate
from .priors import ExponentialPrior


def _checks():
    g2 = np.array([[2.0, 0.3], [0.5, 1.0]])[:, :, None]
    state = network.ChannelState(g2)
    prof = network.PowerProfile(np.array([[3.0], [4.0]]))

    yield "received power, two-user hand case", lambda: math.isclose(
        network.received_power(state, prof, 0, 0, 1.0), 9.0
    )
    yield "sinr, two-user hand case", lambda: math.isclose(
        network.sinr(state, prof, 0, 0, 1.0), 2.0
    )

    q1 = feedback.build_uniform_db_quantizer(1, 30.0)
    yield "1-bit feedback quantizer centers", lambda: np.allclose(q1.levels_db, [17.5, 32.5])

    dmc = feedback.build_nearest_neighbor_dmc(4, 0.1)
    yield "nearest-neighbor DMC rows", lambda: (
        np.allclose(dmc.gamma[0], [0.9, 0.1, 0, 0]) and np.allclose(dmc.gamma[1], [0.1, 0.8, 0.1, 0])
    )

    train = diagonal_training(2, 2.0)
    est = lspd_estimate(train, np.array([3.0, 5.0]), 1.0)
    yield "LSPD, diagonal hand case", lambda: np.allclose(est.g_hat, [1.0, 2.0])

    prior = ExponentialPrior(1.0)
    meq = gain_quantizers.design_meq(prior, 1)
    yield "MEQ closed form (exponential, 1 bit)", lambda: (
        math.isclose(meq.bounds[1], math.log(2), rel_tol=0, abs_tol=1e-9)
        and np.allclose(meq.reps, [1 - math.log(2), 1 + math.log(2)], atol=1e-9)
    )

    lma = gain_quantizers.design_lma(prior, 1)
    yield "LMA midpoint condition", lambda: math.isclose(
        lma.bounds[1], 0.5 * (lma.reps[0] + lma.reps[1]), rel_tol=0, abs_tol=1e-9
    )

    alma = gain_quantizers.design_alma(prior, 1, gain_quantizers.identity_pi(2))
    pi2 = gain_quantizers.identity_pi(2)
    d_gap = abs(
        gain_quantizers.end_to_end_distortion(alma, prior, pi2)
        - gain_quantizers.end_to_end_distortion(lma, prior, pi2)
    )
    yield "ALMA with identity pi matches LMA", lambda: d_gap <= 1e-9

    sch2 = exchange.ExchangeSchedule(mode="simultaneous", K=2, n_bits=2, L=2)
    yield "exchange slot count (2-bit labels, binary levels)", lambda: sch2.t_ii == 4
    sch1 = exchange.ExchangeSchedule(mode="simultaneous", K=2, n_bits=1, L=2)
    alpha = exchange.default_alphabet(2, 1000.0)
    symbols, powers = exchange.encode_powers(np.array([0.2, 2.0]), [meq, meq], alpha, sch1)
    yield "encode maps ascending labels to ascending powers", lambda: (
        symbols.tolist() == [0, 1] and powers[-1] == 1000.0
    )

    util = allocation.UtilitySpec("sum_rate")
    grid = allocation.PowerGrid(11, 1000.0, 1)
    g1 = np.array([[1.0]])[:, :, None]
    p_brd = allocation.team_brd(g1, util, grid, 1.0, mode="centralized")
    yield "single-user BRD uses full power", lambda: p_brd[0, 0] == 1000.0

    p_wf = allocation.water_fill(np.array([1.0, 1.0]), np.array([1.0, 1.0]), 10.0)
    yield "water-filling splits equal bands evenly", lambda: np.allclose(p_wf, [5.0, 5.0])

    sym = np.array([[1.0, 1.0], [1.0, 1.0]])[:, :, None]
    rate = allocation.sum_rate(np.array([[1.0], [1.0]]), sym, 1.0)
    yield "sum-rate, symmetric hand case", lambda: math.isclose(rate, 2 * math.log2(1.5))

    ee = allocation.sum_ee(np.array([[1.0]]), g1, 1.0, c=1.0)
    yield "sum-EE, single-user hand case", lambda: math.isclose(ee, math.exp(-1.0))

    g_true = np.array([[3.0, 0.0], [0.0, 1.0]])[:, :, None]  # ||G||^2 = 10
    g_est = g_true.copy()
    g_est[0, 0, 0] = 2.0  # ||G - est||^2 = 1
    rec = metrics.TrialRecord(
        trial_id=0, seed_key=(0, 0), g_true=g_true,
        views=np.stack([g_est, g_est]),
    )
    yield "ESNR, single-trial hand case", lambda: math.isclose(metrics.esnr([rec]), 10.0)


def run_selftest() -> int:
    """Run every check; prints one line each and returns the failure count."""
    failures = 0
    for name, check in _checks():
        try:
            ok = bool(check())
        except Exception as exc:  # a crash is a failure with context
            ok = False
            print(f"[FAIL] {name}: {type(exc).__name__}: {exc}")
            failures += 1
            continue
        print(f"[{'ok' if ok else 'FAIL'}] {name}")
        failures += 0 if ok else 1
    return failures
