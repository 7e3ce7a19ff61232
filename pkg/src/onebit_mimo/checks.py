"""Exhaustive-search dominance suite for tiny arrays (the oracle-check command)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .constraints import assemble_active_lp
from .model import SystemConfig
from .precoders import (
    SWP_KINDS,
    exhaustive_search_oracle,
    horizon_objective,
    sign_quantize,
)
from .sim import draw_channel, draw_symbols, trial_rng

DEFAULT_SIZES = tuple(
    (n, k, L) for n, k, L in itertools.product((1, 2, 3), (1, 2), (1, 2, 3)) if k <= n
)


@dataclass
class DominanceReport:
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def random_slot_instance(n, k, L, seed, index, psk_order=8):
    """Channel, symbols, one-bit history and a slot index for one check."""
    cfg = SystemConfig(n_antennas=n, n_users=k, n_taps=L, psk_order=psk_order,
                       block_length=L + 2, rng_seed=seed)
    rng = trial_rng(seed, index)
    channel = draw_channel(cfg, rng)
    symbols = draw_symbols(cfg, rng)
    t = int(rng.integers(1, cfg.block_length + 1))
    history = []
    for back in range(1, L):
        if t - back >= 1:
            history.append(rng.choice((-1.0, 1.0), n) + 1j * rng.choice((-1.0, 1.0), n))
    return cfg, channel, symbols, history, t


def check_slot(kind, cfg, channel, symbols, history, t, tol=1e-7):
    """Return (relaxed, oracle, quantized) objectives for one slot."""
    problem = assemble_active_lp(channel, symbols, history, t, kind.value, cfg)
    sol = lp.solve(problem)
    if not sol.optimal:
        raise RuntimeError(f"LP {sol.status} at slot {t}")
    x_q = sign_quantize(sol.values[: 2 * channel.n_antennas])
    quantized = horizon_objective(kind.value, channel, symbols, history, t, x_q, cfg)
    _, best = exhaustive_search_oracle(kind.value, channel, symbols, history, t, cfg)
    return sol.objective_value, best, quantized


def oracle_dominance_suite(seed: int = 0, instances: int = 100,
                           sizes=DEFAULT_SIZES, tol: float = 1e-7) -> DominanceReport:
    """relaxed LP >= exhaustive optimum >= quantized LP, for every SWP kind."""
    report = DominanceReport()
    for case, (n, k, L) in enumerate(sizes):
        for i in range(instances):
            cfg, channel, symbols, history, t = random_slot_instance(
                n, k, L, seed, case * 1_000_003 + i)
            for kind in SWP_KINDS:
                relaxed, best, quantized = check_slot(kind, cfg, channel, symbols, history, t)
                report.checked += 1
                if not (relaxed >= best - tol and best >= quantized - tol):
                    report.failures.append(
                        (kind.value, n, k, L, i, relaxed, best, quantized))
    return report
