"""Monte-Carlo BER engine: channel and symbol draws, noise, D-PSK detection."""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .model import Channel, SymbolBlock, SystemConfig, TransmitBlock, psk_symbols
from .precoders import PrecoderKind, PrecodingError, precode_block

WORKERS_ENV = "ONEBIT_WORKERS"
UNRELIABLE_BELOW = 20  # bit errors; normal-approximation CI is shaky below this


@dataclass(frozen=True)
class TrialOutcome:
    bit_errors: int = 0
    bits_total: int = 0
    symbol_errors: int = 0
    symbols_total: int = 0

    def __add__(self, other: "TrialOutcome") -> "TrialOutcome":
        return TrialOutcome(
            self.bit_errors + other.bit_errors,
            self.bits_total + other.bits_total,
            self.symbol_errors + other.symbol_errors,
            self.symbols_total + other.symbols_total,
        )

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else float("nan")

    @property
    def ci95_halfwidth(self) -> float:
        if not self.bits_total:
            return float("nan")
        p = self.ber
        return 1.96 * math.sqrt(p * (1 - p) / self.bits_total)

    @property
    def reliable(self) -> bool:
        return self.bit_errors >= UNRELIABLE_BELOW


@dataclass(frozen=True)
class ConstellationDump:
    method: str
    slots: np.ndarray  # 1-based t
    users: np.ndarray
    received: np.ndarray  # noiseless gamma * sum_l H_l x_{t-l}
    rotated: np.ndarray  # z = conj(s) * received

    def __len__(self):
        return self.rotated.size


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, trial); independent of scheduling."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def draw_channel(config: SystemConfig, rng: np.random.Generator) -> Channel:
    shape = (config.n_taps, config.n_users, config.n_antennas)
    scale = math.sqrt(1.0 / (2 * config.n_taps))
    return Channel(scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)))


def draw_symbols(config: SystemConfig, rng: np.random.Generator) -> SymbolBlock:
    idx = rng.integers(0, config.psk_order, size=(config.block_length, config.n_users))
    return SymbolBlock.from_indices(idx, config.psk_order)


def draw_unit_noise(config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    shape = (config.block_length, config.n_users)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def noiseless_received_block(channel: Channel, signals, gamma: float) -> np.ndarray:
    """(T_c, K) array of gamma * sum_l H_l x_{t-l}, zero before the block."""
    x = np.asarray(signals)
    out = np.zeros((x.shape[0], channel.n_users), dtype=complex)
    for ell in range(channel.n_taps):
        if ell >= x.shape[0]:
            break
        out[ell:] += x[: x.shape[0] - ell] @ channel.taps[ell].T
    return gamma * out


def received_signal(channel: Channel, transmit_block: TransmitBlock, t: int,
                    noise, gamma: float) -> np.ndarray:
    x = transmit_block.signals
    if not 1 <= t <= x.shape[0]:
        raise ValueError(f"slot t={t} outside [1, {x.shape[0]}]")
    acc = np.zeros(channel.n_users, dtype=complex)
    for ell in range(min(channel.n_taps, t)):
        acc += channel.taps[ell] @ x[t - 1 - ell]
    return gamma * acc + np.asarray(noise)


def detect_psk(y, psk_order: int):
    """Sector index of arg(y); boundaries go to the counterclockwise sector.

    Accepts scalars or arrays. y = 0 maps to 0 since angle(0) = 0.
    """
    ang = np.mod(np.angle(y), 2 * np.pi)
    d = np.floor(ang / (2 * np.pi / psk_order)).astype(np.int64)
    d = np.minimum(d, psk_order - 1)
    return int(d) if np.ndim(d) == 0 else d


def gray(d):
    d = np.asarray(d, dtype=np.int64)
    return d ^ (d >> 1)


def count_bit_errors(d_true, d_detected, psk_order: int):
    """Hamming distance between Gray codewords (works on arrays, returns the sum)."""
    if psk_order < 2 or psk_order & (psk_order - 1):
        raise ValueError(f"psk_order must be a power of two, got {psk_order}")
    diff = gray(d_true) ^ gray(d_detected)
    bits = psk_order.bit_length() - 1
    total = 0
    for b in range(bits):
        total += int(np.sum((diff >> b) & 1))
    return total


def _draw_hash(channel: Channel, symbols: SymbolBlock) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(channel.taps).tobytes())
    h.update(np.ascontiguousarray(symbols.indices).tobytes())
    return h.hexdigest()[:16]


def _snr_noise_std(config: SystemConfig, snr_db: float) -> float:
    return math.sqrt(config.total_power / 10 ** (snr_db / 10))


@dataclass(frozen=True)
class _TrialJob:
    config: SystemConfig
    kinds: Tuple[PrecoderKind, ...]
    snr_db: Tuple[float, ...]
    trial: int
    allow_large_bwp: bool


def run_trial(job: _TrialJob):
    """One paired trial: every kind sees the same channel, symbols and noise.

    Returns ``(draw_hash, {kind: [TrialOutcome per SNR]})``.
    """
    cfg = job.config
    rng = trial_rng(cfg.rng_seed, job.trial)
    channel = draw_channel(cfg, rng)
    symbols = draw_symbols(cfg, rng)
    noise = draw_unit_noise(cfg, rng)
    n_sym = symbols.indices.size
    outcomes = {}
    for kind in job.kinds:
        try:
            res = precode_block(kind, channel, symbols, cfg,
                                allow_large_bwp=job.allow_large_bwp)
        except PrecodingError as exc:
            raise PrecodingError(f"trial {job.trial}, {kind.value}: {exc}") from exc
        clean = noiseless_received_block(channel, res.transmit_block.signals, cfg.gamma)
        per_snr = []
        for snr in job.snr_db:
            y = clean + _snr_noise_std(cfg, snr) * noise
            det = detect_psk(y, cfg.psk_order)
            per_snr.append(TrialOutcome(
                bit_errors=count_bit_errors(symbols.indices, det, cfg.psk_order),
                bits_total=n_sym * cfg.bits_per_symbol,
                symbol_errors=int(np.sum(det != symbols.indices)),
                symbols_total=n_sym,
            ))
        outcomes[kind] = per_snr
    return _draw_hash(channel, symbols), outcomes


@dataclass
class BerTable:
    config: SystemConfig
    kinds: Tuple[PrecoderKind, ...]
    snr_db: Tuple[float, ...]
    n_trials: int
    counts: Dict[Tuple[PrecoderKind, float], TrialOutcome] = field(default_factory=dict)
    draw_hashes: List[str] = field(default_factory=list)

    def outcome(self, kind, snr_db: float) -> TrialOutcome:
        return self.counts[(PrecoderKind(kind), float(snr_db))]

    def ber(self, kind, snr_db: float) -> float:
        return self.outcome(kind, snr_db).ber

    def rows(self):
        """(method, snr_db, outcome) sorted by method name then SNR."""
        keys = sorted(self.counts, key=lambda k: (k[0].value, k[1]))
        return [(k[0].value, k[1], self.counts[k]) for k in keys]


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    n = int(raw)
    return os.cpu_count() or 1 if n <= 0 else n


def run_ber_experiment(config: SystemConfig, kinds: Sequence, snr_db_list: Sequence[float],
                       n_trials: int, workers: int | None = None,
                       allow_large_bwp: bool = False, first_trial: int = 0) -> BerTable:
    """Paired Monte-Carlo BER sweep.

    Total power stays at ``config.total_power`` and the noise variance follows
    each SNR point (sigma^2 = rho / SNR). Results do not depend on the worker
    count: trial i always uses the stream keyed by (seed, i).
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if not snr_db_list:
        raise ValueError("need at least one SNR point")
    kinds = tuple(PrecoderKind(k) for k in kinds)
    snrs = tuple(float(s) for s in snr_db_list)
    jobs = [_TrialJob(config, kinds, snrs, i, allow_large_bwp)
            for i in range(first_trial, first_trial + n_trials)]
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_trial, jobs, chunksize=max(1, n_trials // (4 * workers))))
    else:
        results = [run_trial(job) for job in jobs]

    table = BerTable(config, kinds, snrs, n_trials)
    for kind in kinds:
        for snr in snrs:
            table.counts[(kind, snr)] = TrialOutcome()
    for draw_hash, outcomes in results:
        table.draw_hashes.append(draw_hash)
        for kind, per_snr in outcomes.items():
            for snr, out in zip(snrs, per_snr):
                table.counts[(kind, snr)] = table.counts[(kind, snr)] + out
    return table


def capture_constellation(config: SystemConfig, kind, trial: int = 0,
                          allow_large_bwp: bool = False) -> ConstellationDump:
    """Noiseless received points of one precoded block (draws of ``trial``)."""
    kind = PrecoderKind(kind)
    rng = trial_rng(config.rng_seed, trial)
    channel = draw_channel(config, rng)
    symbols = draw_symbols(config, rng)
    res = precode_block(kind, channel, symbols, config, allow_large_bwp=allow_large_bwp)
    clean = noiseless_received_block(channel, res.transmit_block.signals, config.gamma)
    rotated = np.conj(symbols.symbols) * clean
    T_c, K = clean.shape
    slots, users = np.meshgrid(np.arange(1, T_c + 1), np.arange(K), indexing="ij")
    return ConstellationDump(kind.value, slots.ravel(), users.ravel(),
                             clean.ravel(), rotated.ravel())
