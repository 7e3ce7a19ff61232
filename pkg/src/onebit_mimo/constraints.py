"""Real-valued LP blocks for the symbol-wise safety-margin programs.

A complex transmit vector x is handled through its stacking
xi = [Re x; Im x]. For a slot with effective matrix W and fixed
interference u, z = W x + u, and the condition "every user's margin is at
least delta" becomes the 2K linear rows ``Q @ [xi; delta] <= c``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .lp import LpProblem
from .model import Channel, SymbolBlock, SystemConfig

PASSIVE = "passive"
MAX_MIN = "max-min"
MAX_SUM_MIN = "max-sum-min"
METHODS = (PASSIVE, MAX_MIN, MAX_SUM_MIN)


def build_w(symbols, tap, gamma: float) -> np.ndarray:
    s = np.asarray(symbols, dtype=complex)
    tap = np.asarray(tap, dtype=complex)
    if tap.ndim != 2 or s.shape != (tap.shape[0],):
        raise ValueError(f"symbols {s.shape} incompatible with tap {tap.shape}")
    return gamma * np.conj(s)[:, None] * tap


def build_ab(w):
    """A xi = Re(W x) and B xi = Im(W x)."""
    w = np.asarray(w, dtype=complex)
    a = np.hstack([w.real, -w.imag])
    b = np.hstack([w.imag, w.real])
    return a, b


def build_isi_vector(symbols_future, channel: Channel, history: Sequence[np.ndarray],
                     ell: int, gamma: float) -> np.ndarray:
    """Interference at slot t+ell from already designed vectors.

    ``history`` is ordered x_{t-1}, x_{t-2}, ...; missing entries are zero.
    Only taps ell+1 .. L-1 can reach slot t+ell from before slot t.
    """
    L = channel.n_taps
    if not 0 <= ell < L:
        raise ValueError(f"ell={ell} outside [0, {L - 1}]")
    acc = np.zeros(channel.n_users, dtype=complex)
    for lp in range(ell + 1, L):
        back = lp - ell - 1
        if back < len(history) and history[back] is not None:
            acc += channel.taps[lp] @ np.asarray(history[back])
    return gamma * np.conj(np.asarray(symbols_future, dtype=complex)) * acc


def build_q(a, b, theta: float, margin_vars: int = 1, margin_index: int = 0) -> np.ndarray:
    if not 0 <= margin_index < margin_vars:
        raise ValueError(f"margin_index {margin_index} outside [0, {margin_vars})")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k = a.shape[0]
    t = math.tan(theta)
    sel = np.zeros((k, margin_vars))
    sel[:, margin_index] = 1.0 / math.cos(theta)
    return np.vstack([
        np.hstack([b - t * a, sel]),
        np.hstack([-b - t * a, sel]),
    ])


def build_c(u, theta: float) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    t = math.tan(theta)
    return np.concatenate([t * u.real - u.imag, t * u.real + u.imag])


def effective_horizon(method: str, n_taps: int, t: int, block_length: int) -> int:
    if method == PASSIVE:
        return 1
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    return min(n_taps, block_length - t + 1)


def assemble_active_lp(channel: Channel, symbol_block: SymbolBlock,
                       history: Sequence[np.ndarray], t: int, method: str,
                       config: SystemConfig, gamma: float | None = None) -> LpProblem:
    """LP for slot ``t`` (1-based).

    Variables are [Re x_t; Im x_t; margins]. ``passive`` and ``max-min`` use a
    single margin; ``max-sum-min`` carries one margin per covered slot.
    """
    T_c = symbol_block.block_length
    if not 1 <= t <= T_c:
        raise ValueError(f"slot t={t} outside [1, {T_c}]")
    gamma = config.gamma if gamma is None else gamma
    theta = config.theta
    n = channel.n_antennas
    horizon = effective_horizon(method, channel.n_taps, t, T_c)
    n_margin = horizon if method == MAX_SUM_MIN else 1

    rows, rhs = [], []
    for ell in range(horizon):
        s = symbol_block.symbols[t - 1 + ell]
        a, b = build_ab(build_w(s, channel.taps[ell], gamma))
        idx = ell if method == MAX_SUM_MIN else 0
        rows.append(build_q(a, b, theta, n_margin, idx))
        rhs.append(build_c(build_isi_vector(s, channel, history, ell, gamma), theta))

    objective = np.concatenate([np.zeros(2 * n), np.ones(n_margin)])
    lower = np.concatenate([-np.ones(2 * n), np.full(n_margin, -np.inf)])
    upper = np.concatenate([np.ones(2 * n), np.full(n_margin, np.inf)])
    return LpProblem(objective, np.vstack(rows), np.concatenate(rhs), lower, upper)
