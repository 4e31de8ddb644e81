"""Local-CSI exchange by power modulation.

Each transmitter quantizes its estimated incoming gains, packs the resulting
bit labels into power-level symbols, and plays them over the exchange slots.
Every other transmitter recovers those levels from its own RSSI by a
nearest-residual search over the finite level set, then dequantizes back to
gain representatives.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceededError
from .feedback import Dmc, RsQuantizer, sample_dmc
from .gain_quantizers import ScalarGainQuantizer
from .network import GainStatistics

DECODE_BUDGET = 10 ** 6


@dataclass(frozen=True)
class PowerAlphabet:
    """Reduced transmit-level set used during the exchange, ascending."""

    levels: np.ndarray

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if levels.ndim != 1 or levels.size < 2:
            raise ValueError("need at least two power levels")
        if np.any(np.diff(levels) <= 0) or np.any(levels < 0):
            raise ValueError("levels must be distinct, ascending and nonnegative")
        levels.flags.writeable = False
        object.__setattr__(self, "levels", levels)

    @property
    def L(self) -> int:
        return self.levels.size

    def scaled(self, factor: float) -> "PowerAlphabet":
        return PowerAlphabet(self.levels * factor)


def default_alphabet(L: int, p_max: float) -> PowerAlphabet:
    """{0, p_max/(L-1), ..., p_max}; reduces to {0, p_max} for L = 2."""
    return PowerAlphabet(np.linspace(0.0, p_max, L))


@dataclass(frozen=True)
class ExchangeSchedule:
    """Slot plan for one exchange round.

    Every transmitter packs its K gain labels (n_bits each, gain-major,
    big-endian) into one bit string, zero-padded at the tail to a whole
    number of log2(L)-bit symbols.  In simultaneous mode all transmitters
    play symbol t in slot t; in solo mode transmitter j owns the contiguous
    slot block [j*symbols_per_tx, (j+1)*symbols_per_tx).
    """

    mode: str
    K: int
    n_bits: int
    L: int

    def __post_init__(self):
        if self.mode not in ("simultaneous", "solo"):
            raise ValueError("mode must be 'simultaneous' or 'solo'")
        if self.K < 1 or self.n_bits < 1:
            raise ValueError("K and n_bits must be >= 1")
        if self.L < 2 or (self.L & (self.L - 1)) != 0:
            raise ValueError("L must be a power of two >= 2")

    @property
    def bits_per_symbol(self) -> int:
        return self.L.bit_length() - 1

    @property
    def symbols_per_tx(self) -> int:
        return -(-self.K * self.n_bits // self.bits_per_symbol)

    @property
    def t_ii(self) -> int:
        n = self.symbols_per_tx
        return n * self.K if self.mode == "solo" else n

    def active_transmitters(self, slot: int) -> list[int]:
        if self.mode == "simultaneous":
            return list(range(self.K))
        return [slot // self.symbols_per_tx]

    def symbol_index(self, slot: int, tx: int) -> int | None:
        """Which of tx's symbols rides in this slot, or None if tx is silent."""
        if self.mode == "simultaneous":
            return slot
        start = tx * self.symbols_per_tx
        if start <= slot < start + self.symbols_per_tx:
            return slot - start
        return None

    def slot_map(self) -> list[list[tuple[int, int]]]:
        """Per slot: list of (transmitter, symbol index) pairs on air."""
        out = []
        for t in range(self.t_ii):
            out.append([(tx, self.symbol_index(t, tx)) for tx in self.active_transmitters(t)])
        return out


def pack_labels(rep_indices: np.ndarray, n_bits: int, bits_per_symbol: int, n_symbols: int) -> np.ndarray:
    """Gain labels -> symbol values: concatenated big-endian bits, tail padded."""
    bits = []
    for r in np.asarray(rep_indices, dtype=int):
        if not 0 <= r < 2 ** n_bits:
            raise ValueError("label out of range for n_bits")
        bits.extend((r >> (n_bits - 1 - b)) & 1 for b in range(n_bits))
    bits.extend([0] * (n_symbols * bits_per_symbol - len(bits)))
    bits = np.asarray(bits, dtype=int).reshape(n_symbols, bits_per_symbol)
    weights = 1 << np.arange(bits_per_symbol - 1, -1, -1)
    return bits @ weights


def unpack_labels(symbols: np.ndarray, n_bits: int, bits_per_symbol: int, n_gains: int) -> np.ndarray:
    """Inverse of pack_labels (padding bits dropped)."""
    bits = []
    for s in np.asarray(symbols, dtype=int):
        bits.extend((s >> (bits_per_symbol - 1 - b)) & 1 for b in range(bits_per_symbol))
    bits = np.asarray(bits[: n_gains * n_bits], dtype=int).reshape(n_gains, n_bits)
    weights = 1 << np.arange(n_bits - 1, -1, -1)
    return bits @ weights


def encode_powers(
    local_csi: np.ndarray,
    quantizers: list[ScalarGainQuantizer],
    alphabet: PowerAlphabet,
    schedule: ExchangeSchedule,
) -> tuple[np.ndarray, np.ndarray]:
    """Quantize one transmitter's gain column and modulate it onto power levels.

    Returns (symbol values, per-own-slot powers); ascending label values map
    to ascending power levels.
    """
    g = np.asarray(local_csi, dtype=float)
    if g.shape != (schedule.K,) or len(quantizers) != schedule.K:
        raise ValueError("gain count does not match the schedule")
    if alphabet.L != schedule.L:
        raise ValueError("alphabet size does not match the schedule")
    reps = np.array([quantizers[j].quantize(g[j]) for j in range(schedule.K)], dtype=int)
    symbols = pack_labels(reps, schedule.n_bits, schedule.bits_per_symbol, schedule.symbols_per_tx)
    return symbols, alphabet.levels[symbols]


def _candidate_matrix(levels: np.ndarray, n_active: int) -> np.ndarray:
    if levels.size ** n_active > DECODE_BUDGET:
        raise BudgetExceededError(
            f"decode search space {levels.size}^{n_active} exceeds {DECODE_BUDGET:g}"
        )
    return np.array(list(itertools.product(range(levels.size), repeat=n_active)), dtype=int)


def decode_powers(
    own_csi_col: np.ndarray,
    own_tx_power: np.ndarray,
    rssi_linear: np.ndarray,
    alphabet: PowerAlphabet,
    schedule: ExchangeSchedule,
    sigma2: float,
    receiver: int,
) -> dict[int, np.ndarray]:
    """Recover the other transmitters' symbol sequences from own feedback.

    Per slot the decoder picks the level combination of the active others
    whose predicted interference best matches the observed residual; ties go
    to the lexicographically lowest combination.
    """
    g = np.asarray(own_csi_col, dtype=float)
    out = {tx: np.full(schedule.symbols_per_tx, -1, dtype=int) for tx in range(schedule.K) if tx != receiver}
    residual = np.asarray(rssi_linear, dtype=float) - np.asarray(own_tx_power, dtype=float) * g[receiver] - sigma2

    if schedule.mode == "simultaneous":
        others = [tx for tx in range(schedule.K) if tx != receiver]
        if not others:
            return out
        cand = _candidate_matrix(alphabet.levels, len(others))
        proj = alphabet.levels[cand] @ g[others]
        best = np.abs(proj[:, None] - residual[None, :]).argmin(axis=0)
        for pos, tx in enumerate(others):
            out[tx] = cand[best, pos]
        return out

    for tx in range(schedule.K):
        if tx == receiver:
            continue
        start = tx * schedule.symbols_per_tx
        seg = residual[start : start + schedule.symbols_per_tx]
        proj = alphabet.levels * g[tx]
        out[tx] = np.abs(proj[:, None] - seg[None, :]).argmin(axis=0)
    return out


@dataclass(frozen=True)
class DistributedCsi:
    """Per-transmitter estimates of the full gain matrix, shape (K, K, K).

    Entry j is transmitter j's matrix; its column j is that transmitter's own
    (clamped) training-phase estimate, the other columns are decoded and
    dequantized from the exchange.
    """

    views: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.views, dtype=float)
        if v.ndim != 3 or len(set(v.shape)) != 1:
            raise ValueError("views must have shape (K, K, K)")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("gain estimates must be finite and nonnegative")
        v.flags.writeable = False
        object.__setattr__(self, "views", v)

    @property
    def K(self) -> int:
        return self.views.shape[0]

    def view(self, transmitter: int) -> np.ndarray:
        return self.views[transmitter]


def assemble_distributed_csi(
    own_estimates: np.ndarray,
    decoded_symbols: list[dict[int, np.ndarray]],
    codebooks,
    schedule: ExchangeSchedule,
) -> DistributedCsi:
    """Build every transmitter's view of the full gain matrix.

    ``own_estimates[:, i]`` is transmitter i's (clamped) training-phase
    estimate of its incoming column; decoded symbols fill in the other
    columns via the shared codebooks.
    """
    K = schedule.K
    own = np.asarray(own_estimates, dtype=float)
    views = np.empty((K, K, K))
    for i in range(K):
        views[i, :, i] = own[:, i]
        for u in range(K):
            if u == i:
                continue
            symbols = decoded_symbols[i][u]
            if np.any(symbols < 0):
                raise ValueError("incomplete symbol set for transmitter %d" % u)
            reps = unpack_labels(symbols, schedule.n_bits, schedule.bits_per_symbol, K)
            views[i, :, u] = [codebooks[j][u].reps[reps[j]] for j in range(K)]
    return DistributedCsi(views)


def _slot_power_matrix(symbols: np.ndarray, alphabet: PowerAlphabet, schedule: ExchangeSchedule) -> np.ndarray:
    """Transmit power of every transmitter in every slot, shape (t_ii, K)."""
    K = schedule.K
    out = np.zeros((schedule.t_ii, K))
    if schedule.mode == "simultaneous":
        out[:] = alphabet.levels[symbols].T
    else:
        n = schedule.symbols_per_tx
        for tx in range(K):
            out[tx * n : (tx + 1) * n, tx] = alphabet.levels[symbols[tx]]
    return out


def run_exchange(
    g_band: np.ndarray,
    own_estimates: np.ndarray,
    codebooks,
    alphabet: PowerAlphabet,
    schedule: ExchangeSchedule,
    q: RsQuantizer,
    dmc: Dmc,
    sigma2: float,
    rng: np.random.Generator,
    decode_estimates: np.ndarray | None = None,
) -> tuple[DistributedCsi, int]:
    """Simulate one full exchange round on one band.

    ``g_band`` is the true (K, K) gain matrix generating the RSSI;
    ``own_estimates[:, i]`` is what transmitter i encodes (and, by default,
    decodes with).  Returns (per-transmitter views, symbol error count).
    """
    K = schedule.K
    if K == 1:
        return DistributedCsi(own_estimates.reshape(1, 1, 1).copy()), 0
    dec = own_estimates if decode_estimates is None else decode_estimates
    symbols = np.empty((K, schedule.symbols_per_tx), dtype=int)
    for i in range(K):
        quantizers = [codebooks[j][i] for j in range(K)]
        symbols[i], _ = encode_powers(own_estimates[:, i], quantizers, alphabet, schedule)

    slot_powers = _slot_power_matrix(symbols, alphabet, schedule)
    omega = slot_powers @ g_band + sigma2  # (t_ii, K)
    sent_idx = q.quantize(omega)
    recv_idx = sample_dmc(dmc, sent_idx.ravel(), rng).reshape(sent_idx.shape)
    rssi_lin = q.levels_linear[recv_idx]

    decoded = []
    errors = 0
    for i in range(K):
        d = decode_powers(
            dec[:, i], slot_powers[:, i], rssi_lin[:, i], alphabet, schedule, sigma2, receiver=i
        )
        for u, sym in d.items():
            errors += int(np.sum(sym != symbols[u]))
        decoded.append(d)
    return assemble_distributed_csi(own_estimates, decoded, codebooks, schedule), errors


@dataclass(frozen=True)
class ExchangeChain:
    """Bundle describing one encode -> RSSI -> decode path for simulation."""

    stats: GainStatistics
    q: RsQuantizer
    dmc: Dmc
    alphabet: PowerAlphabet
    schedule: ExchangeSchedule
    sigma2: float
    sender: int = 0
    receiver: int = 1


def simulate_rep_decodes(
    chain: ExchangeChain,
    quantizer: ScalarGainQuantizer,
    rep_index: int,
    n_trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Decoded representative indices when the sender encodes ``rep_index``.

    Nuisance labels (the sender's other gains and every other transmitter's
    symbols) are uniform; channels are redrawn per trial.  The receiver
    decodes with its true incoming column, matching the no-source-noise
    setting the noise-aware codebook design assumes.
    """
    sch = chain.schedule
    K = sch.K
    out = np.empty(n_trials, dtype=int)
    R = 2 ** sch.n_bits
    for n in range(n_trials):
        g = rng.exponential(scale=chain.stats.mean_gain[:, :, 0])
        labels = rng.integers(0, R, size=(K, K))
        labels[0, chain.sender] = rep_index  # target gain = row 0 of sender's column
        symbols = np.empty((K, sch.symbols_per_tx), dtype=int)
        for i in range(K):
            symbols[i] = pack_labels(labels[:, i], sch.n_bits, sch.bits_per_symbol, sch.symbols_per_tx)
        slot_powers = _slot_power_matrix(symbols, chain.alphabet, sch)
        omega = slot_powers @ g + chain.sigma2
        sent = chain.q.quantize(omega[:, chain.receiver])
        recv = sample_dmc(chain.dmc, sent, rng)
        rssi = chain.q.levels_linear[recv]
        d = decode_powers(
            g[:, chain.receiver],
            slot_powers[:, chain.receiver],
            rssi,
            chain.alphabet,
            sch,
            chain.sigma2,
            receiver=chain.receiver,
        )
        out[n] = unpack_labels(d[chain.sender], sch.n_bits, sch.bits_per_symbol, K)[0]
    return out
