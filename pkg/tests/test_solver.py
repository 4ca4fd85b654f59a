import warnings

import numpy as np
import pytest

from dnls_lab.norms import fl_norm
from dnls_lab.solver import (
    BlowUpError,
    DivergenceError,
    IntegratorConfig,
    exact_plane_wave,
    integrate_dnls,
    mass,
    picard_iterate_integral,
    plane_wave_residual,
    smooth_random_field,
    time_series_csv,
)
from dnls_lab.spectral_core import SpectralField, free_evolution


def test_plane_wave_regression():
    n = 16
    u0 = exact_plane_wave(0.5, 1, 0.0, n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        u = integrate_dnls(u0, IntegratorConfig(n_max=n, dt=1e-3, T=1.0, save_every=100))
    err = max(np.max(np.abs(u.modes[i] - exact_plane_wave(0.5, 1, t, n).modes)) for i, t in enumerate(u.times))
    assert err <= 1e-6


def test_zero_data():
    u = integrate_dnls(SpectralField.zeros(8), IntegratorConfig(n_max=8, dt=1e-3, T=0.1))
    assert not np.any(u.modes)


def test_time_reversal():
    u0 = smooth_random_field(12, 0.3, 0)
    cfg = IntegratorConfig(n_max=12, dt=1e-3, T=0.2)
    fwd = integrate_dnls(u0, cfg)
    back = integrate_dnls(fwd.slice(-1), cfg, reverse=True)
    fine = integrate_dnls(u0, IntegratorConfig(n_max=12, dt=5e-4, T=0.2))
    fwd_err = np.max(np.abs(fwd.modes[-1] - fine.modes[-1]))
    assert np.max(np.abs(back.modes[0] - u0.modes)) <= 10 * max(fwd_err, 1e-15)


def test_plane_wave_formula():
    assert exact_plane_wave(0.3 + 0.1j, 2, 0.0)[2] == 0.3 + 0.1j
    assert exact_plane_wave(0.4, 0, 7.0)[0] == 0.4
    assert plane_wave_residual(0.5, 1, 0.3) <= 1e-8
    # faster phase, so a shorter difference step
    assert plane_wave_residual(0.2j, -3, 1.1, h=1e-5) <= 1e-8


def test_mass_conserved():
    u0 = smooth_random_field(16, 0.1, 3)
    u = integrate_dnls(u0, IntegratorConfig(n_max=16, dt=1e-3, T=1.0, save_every=50))
    m = mass(u.modes)
    assert np.max(np.abs(m - m[0])) / m[0] <= 1e-8


def test_heuristic_warns_or_raises():
    with pytest.warns(UserWarning):
        IntegratorConfig(n_max=64, dt=1e-3)
    with pytest.raises(ValueError):
        IntegratorConfig(n_max=64, dt=1e-3, strict=True)


def test_blowup_guard():
    u0 = SpectralField.from_dict(8, {k: 40.0 for k in range(-8, 9)})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(BlowUpError):
            integrate_dnls(u0, IntegratorConfig(n_max=8, dt=1e-2, T=1.0))


def test_picard_zero_iterations_is_free():
    u0 = smooth_random_field(8, 0.05, 1)
    u = picard_iterate_integral(u0, 0, 0.1, dt=1e-3)
    assert np.allclose(u.modes, free_evolution(u0, u.times).modes, atol=0)


def test_picard_matches_integrator():
    u0 = smooth_random_field(16, 0.05, 2)
    u, hist = picard_iterate_integral(u0, 8, 0.1, dt=1e-4, return_history=True)
    ref = integrate_dnls(u0, IntegratorConfig(n_max=16, dt=1e-4, T=0.1))
    assert np.max(np.abs(u.modes - ref.modes)) <= 1e-6
    ratios = np.array(hist[1:4]) / np.array(hist[:3])
    assert np.all(ratios < 0.5)


def test_picard_divergence_detected():
    u0 = SpectralField.from_dict(8, {k: 3.0 for k in range(-8, 9)})
    with pytest.raises(DivergenceError):
        picard_iterate_integral(u0, 20, 1.0, dt=1e-3)


def test_regularity_preserved():
    u0 = smooth_random_field(16, 0.1, 5)
    u = integrate_dnls(u0, IntegratorConfig(n_max=16, dt=1e-3, T=1.0, save_every=50))
    h2 = [fl_norm(u.slice(i), 2.0, 3.0) for i in range(u.nt)]
    assert max(h2) <= 2 * h2[0]


def test_time_series_csv():
    u0 = smooth_random_field(4, 0.1, 0)
    u = integrate_dnls(u0, IntegratorConfig(n_max=4, dt=1e-2, T=0.05))
    rows = time_series_csv(u, 3.0)
    assert rows[0] == "t,mass,l2,h_half_p0" and len(rows) == u.nt + 1
