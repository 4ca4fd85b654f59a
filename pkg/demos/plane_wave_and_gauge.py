"""Integrate a plane wave and a small random field, then gauge and un-gauge the result."""

import warnings

import numpy as np

from dnls_lab.gauge import gauge_forward, roundtrip_error
from dnls_lab.solver import IntegratorConfig, exact_plane_wave, integrate_dnls, mass, smooth_random_field

n = 32
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    cfg = IntegratorConfig(n_max=n, dt=1e-3, T=0.5, save_every=100)

u = integrate_dnls(exact_plane_wave(0.5, 1, 0.0, n), cfg)
err = max(np.max(np.abs(u.modes[i] - exact_plane_wave(0.5, 1, t, n).modes)) for i, t in enumerate(u.times))
print(f"plane wave a=0.5 k=1: worst mode error {err:.2e}")

u = integrate_dnls(smooth_random_field(n, 0.1, 0), cfg)
m = mass(u.modes)
print(f"random data: mass drift {np.max(np.abs(m - m[0])) / m[0]:.2e}")
v = gauge_forward(u)
print(f"gauge: L2 change {np.max(np.abs(mass(v.modes) - m)) / m[0]:.2e}, round trip {roundtrip_error(u):.2e}")
