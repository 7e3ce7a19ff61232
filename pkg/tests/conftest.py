import numpy as np
import pytest

from onebit_mimo.model import Channel, SymbolBlock, SystemConfig


def random_channel(rng, L, K, N):
    shape = (L, K, N)
    return Channel((rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
                   / np.sqrt(2 * L))


def random_onebit(rng, N):
    return rng.choice((-1.0, 1.0), N) + 1j * rng.choice((-1.0, 1.0), N)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_setup(rng):
    cfg = SystemConfig(n_antennas=4, n_users=2, n_taps=3, psk_order=8, block_length=10)
    channel = random_channel(rng, 3, 2, 4)
    symbols = SymbolBlock.from_indices(rng.integers(0, 8, (10, 2)), 8)
    return cfg, channel, symbols


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
