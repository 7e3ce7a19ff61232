import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebit_mimo.model import (
    Channel,
    SymbolBlock,
    SystemConfig,
    TransmitBlock,
    make_psk_symbol,
    min_margin_over_users,
    rotated_noiseless_signal,
    safety_margin,
)

TH = math.pi / 8
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
complexes = st.builds(complex, finite, finite)


def test_config_derived_values():
    cfg = SystemConfig(n_antennas=64, n_users=4, total_power=2.0, psk_order=8)
    assert cfg.gamma == pytest.approx(math.sqrt(2.0 / 128))
    assert cfg.theta == pytest.approx(math.pi / 8)
    assert cfg.bits_per_symbol == 3


@pytest.mark.parametrize("kwargs", [
    dict(n_antennas=2, n_users=4),
    dict(psk_order=6),
    dict(psk_order=1),
    dict(total_power=0.0),
    dict(noise_variance=-1.0),
    dict(block_length=0),
    dict(rng_seed=-1),
])
def test_config_rejects_invalid(kwargs):
    with pytest.raises(ValueError):
        SystemConfig(**kwargs)


@pytest.mark.parametrize("d, D, expected", [
    (0, 4, (math.sqrt(2) / 2) * (1 + 1j)),
    (2, 4, (math.sqrt(2) / 2) * (-1 - 1j)),
    (0, 8, complex(math.cos(math.pi / 8), math.sin(math.pi / 8))),
])
def test_make_psk_symbol(d, D, expected):
    s = make_psk_symbol(d, D)
    assert abs(s - expected) < 1e-12
    assert abs(abs(s) - 1) < 1e-12


@pytest.mark.parametrize("d", [-1, 8, 100])
def test_make_psk_symbol_out_of_range(d):
    with pytest.raises(ValueError):
        make_psk_symbol(d, 8)


def test_symbol_block_invariants(rng):
    idx = rng.integers(0, 8, (20, 3))
    sb = SymbolBlock.from_indices(idx, 8)
    expected = np.exp(1j * np.pi * (2 * idx + 1) / 8)
    assert np.allclose(sb.symbols, expected, atol=1e-15)
    assert np.all(np.abs(np.abs(sb.symbols) - 1) < 1e-12)
    with pytest.raises(ValueError):
        SymbolBlock.from_indices([[8]], 8)


def test_transmit_block_rejects_non_onebit():
    TransmitBlock(np.array([[1 + 1j, -1 - 1j]]))
    with pytest.raises(ValueError):
        TransmitBlock(np.array([[0.5 + 1j, 1 + 1j]]))


def test_rotated_signal_single_tap():
    ch = Channel(np.ones((1, 1, 1)))
    z = rotated_noiseless_signal(ch, [np.array([1 + 1j])], [cmath.exp(1j * math.pi / 8)], 1.0)
    expected = math.sqrt(2) * cmath.exp(1j * math.pi / 8)
    assert abs(z[0] - expected) < 1e-12
    assert abs(z[0] - (1.30656 + 0.54120j)) < 1e-5


def test_rotated_signal_zero_input(rng):
    ch = Channel(rng.standard_normal((3, 2, 4)) + 0j)
    z = rotated_noiseless_signal(ch, [np.zeros(4)], np.exp(1j * np.array([0.3, 1.2])), 0.7)
    assert np.all(z == 0)


def test_rotated_signal_two_taps():
    ch = Channel(np.ones((2, 1, 1)))
    x = np.array([1 + 1j])
    z = rotated_noiseless_signal(ch, [x, x], [cmath.exp(1j * math.pi / 4)], 0.5)
    assert abs(z[0] - math.sqrt(2)) < 1e-12


def test_rotated_signal_dimension_mismatch(rng):
    ch = Channel(rng.standard_normal((2, 2, 3)) + 0j)
    with pytest.raises(ValueError):
        rotated_noiseless_signal(ch, [np.ones(4)], [1, 1], 1.0)
    with pytest.raises(ValueError):
        rotated_noiseless_signal(ch, [np.ones(3)], [1, 1, 1], 1.0)
    with pytest.raises(ValueError):
        rotated_noiseless_signal(ch, [np.ones(3)] * 3, [1, 1], 1.0)


@pytest.mark.parametrize("z, expected", [
    (0j, 0.0),
    (1 + 0j, math.sin(TH)),
    (complex(math.cos(TH), math.sin(TH)), 0.0),
    (-1 + 0j, -math.sin(TH)),
])
def test_safety_margin_examples(z, expected):
    assert safety_margin(z, TH) == pytest.approx(expected, abs=1e-12)


def test_min_margin_over_users():
    assert min_margin_over_users([1 + 0j, 2 + 0j], TH) == pytest.approx(math.sin(TH))
    assert min_margin_over_users([1 + 0j], TH) == pytest.approx(math.sin(TH))
    assert min_margin_over_users([1 + 0j, -1 + 0j], TH) == pytest.approx(-math.sin(TH))
    with pytest.raises(ValueError):
        min_margin_over_users([], TH)


@given(z=complexes, a=st.floats(0, 100))
def test_margin_scaling_equivariance(z, a):
    assert safety_margin(a * z, TH) == pytest.approx(a * safety_margin(z, TH), abs=1e-9, rel=1e-9)


@given(z=complexes)
def test_margin_conjugate_symmetry(z):
    assert safety_margin(z.conjugate(), TH) == safety_margin(z, TH)


@given(d=st.integers(0, 7), c=st.floats(1e-3, 1e3), phase=st.floats(-math.pi, math.pi),
       r=complexes)
def test_margin_rotation_reduction(d, c, phase, r):
    s = make_psk_symbol(d, 8)
    g = cmath.exp(1j * phase)
    lhs = safety_margin(s.conjugate() * g * r, TH)
    rhs = safety_margin(r * cmath.exp(1j * (phase - cmath.phase(s))), TH)
    assert lhs == pytest.approx(rhs, abs=1e-9 * (1 + abs(r)))
    # noiseless signal c*s for real c > 0 lands on the symbol axis
    assert safety_margin(s.conjugate() * c * s, TH) == pytest.approx(c * math.sin(TH), rel=1e-9)


@settings(max_examples=50)
@given(seed=st.integers(0, 2**32 - 1))
def test_rotated_signal_linear_in_x(seed):
    rng = np.random.default_rng(seed)
    ch = Channel(rng.standard_normal((3, 2, 4)) + 1j * rng.standard_normal((3, 2, 4)))
    s = np.exp(1j * rng.uniform(0, 2 * np.pi, 2))
    xs = [rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4) for _ in range(3)]
    ys = [rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4) for _ in range(3)]
    both = rotated_noiseless_signal(ch, [a + b for a, b in zip(xs, ys)], s, 0.3)
    split = rotated_noiseless_signal(ch, xs, s, 0.3) + rotated_noiseless_signal(ch, ys, s, 0.3)
    assert np.allclose(both, split, atol=1e-12)
