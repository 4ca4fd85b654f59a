import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dnls_lab.profiles import PHI
from dnls_lab.spectral_core import (
    AliasingError,
    LambdaGrid,
    SpaceTimeField,
    SpectralField,
    _uniform_sum,
    antiderivative_mean_free,
    derivative,
    dump_field,
    dump_spacetime,
    forward_transform,
    free_evolution,
    grid_points,
    inverse_transform,
    linear_flow,
    load_field,
    load_spacetime,
    project,
    time_grid,
    twist,
    untwist,
)
from dnls_lab.norms import fl_norm

from conftest import random_field


def test_constant_and_single_exponential():
    f = forward_transform(np.ones(16))
    assert f[0] == pytest.approx(1.0)
    assert np.allclose(np.delete(f.modes, f.n_max), 0, atol=1e-15)
    x = grid_points(16)
    g = forward_transform(np.exp(1j * x))
    assert g[1] == pytest.approx(1.0)
    assert np.sum(np.abs(g.modes)) == pytest.approx(1.0)


def test_forward_rejects_empty():
    with pytest.raises(ValueError):
        forward_transform([])


def test_inverse_trivial_and_aliasing():
    f = SpectralField.from_dict(3, {0: 2 - 1j})
    assert np.allclose(inverse_transform(f, 8), 2 - 1j)
    g = SpectralField.from_dict(3, {1: 1})
    assert np.allclose(inverse_transform(g, 8), np.exp(1j * grid_points(8)))
    with pytest.raises(AliasingError):
        inverse_transform(g, 7)


@given(st.integers(0, 40), st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_round_trip(n, seed):
    f = random_field(n, seed)
    for M in (2 * n + 2, 4 * n + 7):
        g = forward_transform(inverse_transform(f, M)).resized(n)
        assert np.max(np.abs(g.modes - f.modes)) <= 1e-12 * max(1.0, np.max(np.abs(f.modes)))


def test_parseval():
    f = random_field(32, 3)
    u = inverse_transform(f, 128)
    assert np.mean(np.abs(u) ** 2) == pytest.approx(f.l2() ** 2, rel=1e-10)


def test_project():
    mean, rest = project(SpectralField.from_dict(4, {0: 5}))
    assert mean == 5 and not np.any(rest.modes)
    f = SpectralField.from_dict(4, {3: 1})
    mean, rest = project(f)
    assert mean == 0 and np.array_equal(rest.modes, f.modes)
    g = random_field(10, 1)
    mean, rest = project(g)
    assert np.array_equal((rest + SpectralField.from_dict(10, {0: mean})).modes, g.modes)


def test_antiderivative():
    assert antiderivative_mean_free(SpectralField.from_dict(2, {1: 1}))[1] == pytest.approx(-1j)
    assert not np.any(antiderivative_mean_free(SpectralField.from_dict(2, {0: 3})).modes)
    g = random_field(12, 2)
    back = derivative(antiderivative_mean_free(g))
    assert np.allclose(back.modes, project(g)[1].modes, rtol=1e-14, atol=0)


def test_linear_flow():
    f = random_field(8, 4)
    assert np.array_equal(linear_flow(f, 0.0).modes, f.modes)
    s = linear_flow(SpectralField.from_dict(2, {2: 1}), np.pi / 4)
    assert s[2] == pytest.approx(-1.0, abs=1e-15)
    out = linear_flow(f, 0.37)
    assert np.allclose(np.abs(out.modes), np.abs(f.modes), rtol=1e-15)
    for sigma, p in ((0.5, 2), (1.0, 4), (0.0, np.inf)):
        assert fl_norm(out, sigma, p) == pytest.approx(fl_norm(f, sigma, p), rel=1e-14)


def test_spacetime_grid_checks():
    with pytest.raises(ValueError):
        SpaceTimeField(1, np.array([0.0, 0.1, 0.3]), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        SpaceTimeField(1, np.array([0.0, -0.1, -0.2]), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        time_grid(0.0, 1.0, 0.3)


def test_uniform_sum_matches_direct():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2, 37)) + 0j
    x0, dx, y0, dy, m = -1.3, 0.07, -20.0, 0.5, 81
    xs = x0 + dx * np.arange(37)
    ys = y0 + dy * np.arange(m)
    for sign in (-1, 1):
        ref = x @ np.exp(sign * 1j * np.outer(xs, ys))
        assert np.allclose(_uniform_sum(x, x0, dx, y0, dy, m, sign), ref, rtol=0, atol=1e-11)


def _cut_free(n, dt=2.0**-7):
    t = time_grid(-2.5, 2.5, dt)
    f = random_field(n, 5)
    return f, free_evolution(f, t).time_multiply(PHI(t))


def test_twist_of_free_is_phi_hat():
    f, F = _cut_free(16)
    grid = LambdaGrid(-60, 60, 0.25)
    rep = twist(F, grid).twisted
    ref = PHI.hat(rep.lam)[None, :] * f.modes[:, None]
    assert np.max(np.abs(rep.values - ref)) < 1e-10


def test_twist_zero_and_preconditions():
    t = time_grid(-2.5, 2.5, 2.0**-6)
    Z = SpaceTimeField(2, t, np.zeros((t.size, 5)))
    assert not np.any(twist(Z, LambdaGrid(-10, 10, 0.5)).twisted.values)
    f, F = _cut_free(4, 2.0**-6)
    with pytest.raises(ValueError):
        twist(F, LambdaGrid(-10, 10, 1.0))
    with pytest.raises(ValueError):
        twist(F, LambdaGrid(-500, 500, 0.5))
    G = free_evolution(f, t)
    with pytest.raises(ValueError):
        twist(G, LambdaGrid(-10, 10, 0.5))


def test_untwist_then_twist_round_trip():
    f, F = _cut_free(6)
    grid = LambdaGrid(-300, 300, 0.25)
    T = twist(F, grid)
    back = untwist(T, F.times)
    assert np.max(np.abs(back.modes - F.modes)) < 1e-9
    again = twist(back, grid).twisted.values
    assert np.max(np.abs(again - T.twisted.values)) < 1e-9


def test_serialization_round_trip():
    f = random_field(5, 9)
    assert np.array_equal(load_field(dump_field(f)).modes, f.modes)
    assert dump_field(f).splitlines()[0] == "dnls-field v1 n_max=5"
    F = free_evolution(f, time_grid(0, 0.5, 0.125))
    G = load_spacetime(dump_spacetime(F))
    assert np.array_equal(G.modes, F.modes) and np.array_equal(G.times, F.times)
