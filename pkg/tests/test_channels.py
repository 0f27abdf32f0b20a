import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlimits.channels import compose_impulses, compose_shifts, conjugation_residual, impulse, shift
from qlimits.lattice import FREQUENCY, GridSpec, WaveFunction, fourier, gaussian_packet, norm

from .conftest import random_state


def sup(u, v):
    return float(np.max(np.abs(u.samples - v.samples)))


def test_zero_shift_is_identity(packet1):
    assert sup(shift(packet1, 0.0), packet1) < 1e-13
    assert sup(impulse(packet1, 0.0), packet1) == 0.0


def test_shift_moves_packet_left(grid1):
    moved = shift(gaussian_packet(grid1), 1.0)
    assert sup(moved, gaussian_packet(grid1, [-1.0])) < 1e-9


def test_grid_multiple_shift_is_roll(grid1, rng):
    u = random_state(grid1, rng, smooth=False)
    k = 37
    moved = shift(u, k * grid1.spacing)
    assert np.max(np.abs(moved.samples - np.roll(u.samples, -k))) < 1e-12


def test_impulse_multiplies_phase(grid1):
    u = gaussian_packet(grid1)
    x = np.linspace(-16, 16, 1024, endpoint=False)
    np.testing.assert_allclose(impulse(u, 0.4).samples, np.exp(0.4j * x) * u.samples, atol=1e-15)


def test_parameter_validation(packet1):
    with pytest.raises(ValueError):
        shift(packet1, [1.0, 2.0])
    with pytest.raises(ValueError):
        shift(packet1, np.nan)
    with pytest.raises(ValueError):
        shift(fourier(packet1), 0.1)


def test_unitarity(grid1, rng):
    for _ in range(100):
        u = random_state(grid1, rng, smooth=False)
        a = rng.uniform(-8, 8)
        assert abs(norm(shift(u, a)) - norm(u)) < 1e-12
        assert abs(norm(impulse(u, a)) - norm(u)) < 1e-12


def test_group_law_and_commutativity(grid1, rng):
    for _ in range(100):
        u = random_state(grid1, rng, smooth=False)
        a, b = rng.uniform(-4, 4, size=2)
        ab = shift(shift(u, a), b)
        assert sup(ab, shift(u, a + b)) < 1e-11
        assert sup(ab, shift(shift(u, b), a)) < 1e-11


def test_conjugation_examples(grid1, grid2, rng):
    assert conjugation_residual(gaussian_packet(grid1), 0.0) < 1e-13
    assert conjugation_residual(random_state(grid1, rng, smooth=False), 0.7) < 1e-10
    assert conjugation_residual(random_state(grid2, rng, smooth=False), [0.3, -1.2]) < 1e-10


def test_conjugation_random(grid1, rng):
    worst = max(conjugation_residual(random_state(grid1, rng, smooth=False), rng.uniform(-5, 5))
                for _ in range(100))
    assert worst < 1e-10


def test_compose_empty_and_inverse(packet1):
    assert compose_shifts(packet1, []) is packet1
    assert sup(compose_shifts(packet1, [0.8, -0.8], sequential=True), packet1) < 1e-12


def test_compose_collapse(grid1, rng):
    u = random_state(grid1, rng)
    steps = rng.normal(scale=0.1, size=100)
    seq = compose_shifts(u, steps, sequential=True)
    assert sup(seq, compose_shifts(u, steps)) < 1e-9
    assert abs(norm(seq) - 1) < 100 * 1e-12


def test_compose_impulses(grid2, rng):
    u = random_state(grid2, rng)
    steps = rng.normal(scale=0.1, size=(20, 2))
    assert sup(compose_impulses(u, steps, sequential=True), impulse(u, steps.sum(axis=0))) < 1e-12


def test_shift_in_two_dimensions(grid2):
    moved = shift(gaussian_packet(grid2), [0.5, -1.0])
    assert sup(moved, gaussian_packet(grid2, [-0.5, 1.0])) < 1e-9


def test_continuity_modulus(grid1):
    u = gaussian_packet(grid1)
    a = 0.37
    diffs = [norm(shift(u, a) - shift(u, a + 10.0**-k)) for k in range(1, 7)]
    assert all(later < earlier for earlier, later in zip(diffs, diffs[1:]))
    # first-order rate: the difference tracks |a - b| times the spread of Fu
    assert diffs[-1] == pytest.approx(1e-6 / np.sqrt(2), rel=1e-3)


def test_impulse_acts_on_frequency_domain(grid1, packet1):
    v = packet1.relabel(FREQUENCY)
    out = impulse(v, 1.0)
    assert out.domain == FREQUENCY


@settings(max_examples=30, deadline=None)
@given(a=st.floats(-6, 6), b=st.floats(-6, 6), seed=st.integers(0, 2**32 - 1))
def test_shift_group_property(a, b, seed):
    g = GridSpec(1, 8.0, 128)
    r = np.random.default_rng(seed)
    u = WaveFunction(g, r.normal(size=128) + 1j * r.normal(size=128))
    assert sup(shift(shift(u, a), b), shift(u, a + b)) < 1e-11 * max(1.0, norm(u))
    assert conjugation_residual(u, a) < 1e-10 * max(1.0, norm(u))
