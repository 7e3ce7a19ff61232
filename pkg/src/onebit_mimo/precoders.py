"""One-bit precoders: passive and active symbol-wise LPs, block-wise LP,
sign quantisation, and a brute-force reference for tiny arrays."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import lp
from .constraints import (
    MAX_MIN,
    MAX_SUM_MIN,
    PASSIVE,
    assemble_active_lp,
    build_ab,
    build_q,
    build_w,
    effective_horizon,
)
from .model import (
    Channel,
    SymbolBlock,
    SystemConfig,
    TransmitBlock,
    rotated_noiseless_signal,
    safety_margin,
)

BWP_SIZE_LIMIT = 4096  # max N * T_c for the dense block-wise LP


class PrecoderKind(str, Enum):
    PASSIVE_SWP = "passive"
    ACTIVE_MAX_MIN = "max-min"
    ACTIVE_MAX_SUM_MIN = "max-sum-min"
    BWP = "bwp"

    @classmethod
    def parse(cls, name: str) -> "PrecoderKind":
        for kind in cls:
            if name in (kind.value, kind.name.lower()):
                return kind
        raise ValueError(f"unknown precoder {name!r}; choose from "
                         + ", ".join(k.value for k in cls))

    @property
    def is_symbol_wise(self) -> bool:
        return self is not PrecoderKind.BWP


SWP_KINDS = (PrecoderKind.PASSIVE_SWP, PrecoderKind.ACTIVE_MAX_MIN,
             PrecoderKind.ACTIVE_MAX_SUM_MIN)


class PrecodingError(RuntimeError):
    pass


class BwpSizeError(ValueError):
    pass


@dataclass(frozen=True)
class SlotDiagnostics:
    relaxed_objective: float
    relaxed_values: np.ndarray
    achieved_min_margin: float
    lp_iterations: int


@dataclass(frozen=True)
class PrecodeResult:
    transmit_block: TransmitBlock
    relaxed_objectives: np.ndarray
    achieved_min_margins: np.ndarray
    # BWP only: optimum of the single block LP
    block_objective: Optional[float] = None


def sign_quantize(relaxed) -> np.ndarray:
    """[Re; Im] stacked reals -> complex one-bit vector, with sign(0) = +1."""
    r = np.asarray(relaxed, dtype=float)
    if r.ndim != 1 or r.size % 2:
        raise ValueError("relaxed vector must have even length 2N")
    q = np.where(r >= 0, 1.0, -1.0)
    n = r.size // 2
    return q[:n] + 1j * q[n:]


def _history_window(history: Sequence[np.ndarray], n_taps: int) -> list:
    return list(history[: max(n_taps - 1, 0)])


def slot_margins(channel: Channel, symbol_block: SymbolBlock, x_t,
                 history: Sequence[np.ndarray], t: int, gamma: float,
                 theta: float) -> np.ndarray:
    """Per-user margins at slot t given x_t and the already sent past."""
    past = [x_t] + _history_window(history, channel.n_taps)
    z = rotated_noiseless_signal(channel, past, symbol_block.symbols[t - 1], gamma)
    return safety_margin(z, theta)


def precode_slot(kind: PrecoderKind, channel: Channel, symbol_block: SymbolBlock,
                 history: Sequence[np.ndarray], t: int, config: SystemConfig,
                 gamma: float | None = None):
    """Design x_t for one symbol-wise precoder. Returns ``(x_t, diagnostics)``."""
    kind = PrecoderKind(kind)
    if not kind.is_symbol_wise:
        raise ValueError("precode_slot handles symbol-wise kinds only")
    gamma = config.gamma if gamma is None else gamma
    problem = assemble_active_lp(channel, symbol_block, history, t, kind.value,
                                 config, gamma=gamma)
    sol = lp.solve(problem)
    if not sol.optimal:
        raise PrecodingError(f"slot t={t}: LP {sol.status} {sol.message}".rstrip())
    n = channel.n_antennas
    x_t = sign_quantize(sol.values[: 2 * n])
    achieved = float(np.min(slot_margins(channel, symbol_block, x_t, history, t,
                                         gamma, config.theta)))
    diag = SlotDiagnostics(sol.objective_value, sol.values, achieved, sol.iterations)
    return x_t, diag


def _check_bwp_size(channel: Channel, block_length: int, allow_large: bool):
    size = channel.n_antennas * block_length
    if size > BWP_SIZE_LIMIT and not allow_large:
        raise BwpSizeError(
            f"block-wise LP with N*T_c={size} exceeds {BWP_SIZE_LIMIT}; "
            "pass --allow-large-bwp to run it anyway")


def assemble_bwp_lp(channel: Channel, symbol_block: SymbolBlock,
                    config: SystemConfig, gamma: float | None = None) -> lp.LpProblem:
    """Max-min LP over the whole block.

    Variables: [Re x_1; Im x_1; Re x_2; Im x_2; ...; delta]. Slot t contributes
    2K rows (the +Im rows first) coupling x_t .. x_{t-L+1}.
    """
    gamma = config.gamma if gamma is None else gamma
    theta = config.theta
    T_c = symbol_block.block_length
    K, N, L = channel.n_users, channel.n_antennas, channel.n_taps
    n_vars = 2 * N * T_c + 1
    M = np.zeros((2 * K * T_c, n_vars))
    tan_t = math.tan(theta)
    for t in range(T_c):
        rows = slice(2 * K * t, 2 * K * (t + 1))
        s = symbol_block.symbols[t]
        for ell in range(min(L, t + 1)):
            a, b = build_ab(build_w(s, channel.taps[ell], gamma))
            cols = slice(2 * N * (t - ell), 2 * N * (t - ell + 1))
            M[rows, cols] = np.vstack([b - tan_t * a, -b - tan_t * a])
        M[rows, -1] = 1.0 / math.cos(theta)
    objective = np.zeros(n_vars)
    objective[-1] = 1.0
    lower = np.concatenate([-np.ones(n_vars - 1), [-np.inf]])
    upper = np.concatenate([np.ones(n_vars - 1), [np.inf]])
    return lp.LpProblem(objective, M, np.zeros(2 * K * T_c), lower, upper)


def _precode_bwp(channel, symbol_block, config, gamma, allow_large):
    T_c = symbol_block.block_length
    _check_bwp_size(channel, T_c, allow_large)
    N = channel.n_antennas
    sol = lp.solve(assemble_bwp_lp(channel, symbol_block, config, gamma))
    if not sol.optimal:
        raise PrecodingError(f"block LP {sol.status} {sol.message}".rstrip())
    relaxed = sol.values[:-1].reshape(T_c, 2 * N)
    signals = np.array([sign_quantize(r) for r in relaxed])
    relaxed_x = relaxed[:, :N] + 1j * relaxed[:, N:]
    relaxed_margins = np.empty(T_c)
    achieved = np.empty(T_c)
    for t in range(1, T_c + 1):
        hist = signals[t - 2::-1] if t > 1 else signals[:0]
        rhist = relaxed_x[t - 2::-1] if t > 1 else relaxed_x[:0]
        relaxed_margins[t - 1] = np.min(slot_margins(
            channel, symbol_block, relaxed_x[t - 1], rhist, t, gamma, config.theta))
        achieved[t - 1] = np.min(slot_margins(
            channel, symbol_block, signals[t - 1], hist, t, gamma, config.theta))
    return PrecodeResult(TransmitBlock(signals), relaxed_margins, achieved,
                         block_objective=sol.objective_value)


def precode_block(kind: PrecoderKind, channel: Channel, symbol_block: SymbolBlock,
                  config: SystemConfig, gamma: float | None = None,
                  allow_large_bwp: bool = False) -> PrecodeResult:
    kind = PrecoderKind(kind)
    gamma = config.gamma if gamma is None else gamma
    if kind is PrecoderKind.BWP:
        return _precode_bwp(channel, symbol_block, config, gamma, allow_large_bwp)

    T_c = symbol_block.block_length
    N, L = channel.n_antennas, channel.n_taps
    signals = np.empty((T_c, N), dtype=complex)
    relaxed = np.empty(T_c)
    achieved = np.empty(T_c)
    history: list = []  # most recent first, at most L-1 entries
    for t in range(1, T_c + 1):
        x_t, diag = precode_slot(kind, channel, symbol_block, history, t, config, gamma)
        signals[t - 1] = x_t
        relaxed[t - 1] = diag.relaxed_objective
        achieved[t - 1] = diag.achieved_min_margin
        history = ([x_t] + history)[: max(L - 1, 0)]
    return PrecodeResult(TransmitBlock(signals), relaxed, achieved)


def horizon_objective(method: str, channel: Channel, symbol_block: SymbolBlock,
                      history: Sequence[np.ndarray], t: int, x_t,
                      config: SystemConfig, gamma: float | None = None) -> float:
    """Exact (unrelaxed) objective of ``x_t`` over the method's look-ahead.

    Slots after t see no contribution from vectors that are not designed yet.
    """
    objs = _horizon_margins(method, channel, symbol_block, history, t,
                            np.asarray(x_t)[None, :], config, gamma)
    return float(objs[0])


def _horizon_margins(method, channel, symbol_block, history, t, candidates,
                     config, gamma):
    gamma = config.gamma if gamma is None else gamma
    L = channel.n_taps
    horizon = effective_horizon(method, L, t, symbol_block.block_length)
    zero = np.zeros(channel.n_antennas, dtype=complex)
    hist = _history_window(history, L)
    per_slot = []
    for ell in range(horizon):
        s = symbol_block.symbols[t - 1 + ell]
        # x_{t+ell}, ..., x_{t+1} undesigned (zero), x_t handled via linearity
        past = ([zero] * ell + [zero] + hist)[:L]
        fixed = rotated_noiseless_signal(channel, past, s, gamma)
        # contribution of x_t through tap ell, for every candidate at once
        lin = gamma * np.conj(s)[None, :] * (candidates @ channel.taps[ell].T)
        z = fixed[None, :] + lin
        per_slot.append(np.min(safety_margin(z, config.theta), axis=1))
    per_slot = np.array(per_slot)
    if method == MAX_SUM_MIN:
        return per_slot.sum(axis=0)
    return per_slot.min(axis=0)


def exhaustive_search_oracle(method: str, channel: Channel, symbol_block: SymbolBlock,
                             history: Sequence[np.ndarray], t: int,
                             config: SystemConfig, gamma: float | None = None):
    """Best one-bit x_t by enumerating all 4^N candidates.

    Ties go to the lexicographically smallest stacked [Re; Im] sign vector.
    Returns ``(x_t, value)``.
    """
    if isinstance(method, PrecoderKind):
        method = method.value
    if method not in (PASSIVE, MAX_MIN, MAX_SUM_MIN):
        raise ValueError(f"unknown objective {method!r}")
    n = channel.n_antennas
    if n > 8:
        raise ValueError(f"exhaustive search supports N <= 8, got {n}")
    stacked = np.array(list(itertools.product((-1.0, 1.0), repeat=2 * n)))
    candidates = stacked[:, :n] + 1j * stacked[:, n:]
    values = _horizon_margins(method, channel, symbol_block, history, t,
                              candidates, config, gamma)
    best = int(np.argmax(values))
    return candidates[best], float(values[best])
