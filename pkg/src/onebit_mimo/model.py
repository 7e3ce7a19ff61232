"""Scenario configuration, channel taps, D-PSK symbols and safety margins."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    n_antennas: int = 16
    n_users: int = 4
    n_taps: int = 3
    psk_order: int = 8
    total_power: float = 1.0
    noise_variance: float = 1.0
    block_length: int = 256
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("n_antennas", "n_users", "n_taps", "block_length"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.n_antennas < self.n_users:
            raise ValueError("n_antennas must be >= n_users")
        d = self.psk_order
        if d < 2 or d & (d - 1):
            raise ValueError(f"psk_order must be a power of two >= 2, got {d}")
        if not self.total_power > 0:
            raise ValueError("total_power must be positive")
        if not self.noise_variance > 0:
            raise ValueError("noise_variance must be positive")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 unsigned bits")

    @property
    def gamma(self) -> float:
        return math.sqrt(self.total_power / (2 * self.n_antennas))

    @property
    def theta(self) -> float:
        return math.pi / self.psk_order

    @property
    def bits_per_symbol(self) -> int:
        return self.psk_order.bit_length() - 1


@dataclass(frozen=True)
class Channel:
    """L tap matrices, each K x N, stored as one (L, K, N) complex array."""

    taps: np.ndarray = field(repr=False)

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if taps.ndim != 3 or taps.shape[0] < 1:
            raise ValueError("taps must have shape (L, K, N) with L >= 1")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def n_taps(self) -> int:
        return self.taps.shape[0]

    @property
    def n_users(self) -> int:
        return self.taps.shape[1]

    @property
    def n_antennas(self) -> int:
        return self.taps.shape[2]

    def scaled(self, factor: float) -> "Channel":
        return Channel(self.taps * factor)


@dataclass(frozen=True)
class SymbolBlock:
    indices: np.ndarray
    symbols: np.ndarray = field(repr=False)

    @classmethod
    def from_indices(cls, indices, psk_order: int) -> "SymbolBlock":
        idx = np.asarray(indices, dtype=np.int64)
        if idx.ndim != 2:
            raise ValueError("indices must be a (T_c, K) array")
        if idx.size and (idx.min() < 0 or idx.max() >= psk_order):
            raise ValueError(f"symbol index out of range [0, {psk_order - 1}]")
        return cls(idx, psk_symbols(idx, psk_order))

    @property
    def block_length(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class TransmitBlock:
    signals: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.signals, dtype=complex)
        if sig.ndim != 2:
            raise ValueError("signals must be a (T_c, N) array")
        if not (np.all(np.abs(sig.real) == 1) and np.all(np.abs(sig.imag) == 1)):
            raise ValueError("one-bit transmit entries must lie in {+-1 +-1j}")
        object.__setattr__(self, "signals", sig)


def psk_symbols(indices, psk_order: int) -> np.ndarray:
    """Vectorised exp(j*pi*(2d+1)/D)."""
    return np.exp(1j * np.pi * (2 * np.asarray(indices) + 1) / psk_order)


def make_psk_symbol(d: int, psk_order: int) -> complex:
    if psk_order < 2:
        raise ValueError("psk_order must be >= 2")
    if not 0 <= d < psk_order:
        raise ValueError(f"symbol index {d} out of range [0, {psk_order - 1}]")
    return complex(np.exp(1j * np.pi * (2 * d + 1) / psk_order))


def rotated_noiseless_signal(
    channel: Channel,
    past_and_current_x: Sequence[np.ndarray],
    symbols_t,
    gamma: float,
) -> np.ndarray:
    """z_t = gamma * diag(conj(s_t)) * sum_l H_l x_{t-l}.

    ``past_and_current_x`` is ordered x_t, x_{t-1}, ...; entries past its end
    (time before the block starts) count as zero vectors.
    """
    taps = channel.taps
    s = np.asarray(symbols_t, dtype=complex)
    if s.shape != (channel.n_users,):
        raise ValueError(f"expected {channel.n_users} symbols, got shape {s.shape}")
    if len(past_and_current_x) > channel.n_taps:
        raise ValueError("history longer than the number of taps")
    acc = np.zeros(channel.n_users, dtype=complex)
    for ell, x in enumerate(past_and_current_x):
        x = np.asarray(x)
        if x.shape != (channel.n_antennas,):
            raise ValueError(f"transmit vector must have length {channel.n_antennas}")
        acc += taps[ell] @ x
    return gamma * np.conj(s) * acc


def safety_margin(z, theta: float):
    """Signed distance of rotated point(s) z from the nearest decision boundary.

    Works elementwise on arrays as well as on scalars.
    """
    z = np.asarray(z)
    out = z.real * math.sin(theta) - np.abs(z.imag) * math.cos(theta)
    return float(out) if out.ndim == 0 else out


def min_margin_over_users(z, theta: float) -> float:
    z = np.asarray(z)
    if z.size == 0:
        raise ValueError("need at least one user")
    return float(np.min(safety_margin(z, theta)))
