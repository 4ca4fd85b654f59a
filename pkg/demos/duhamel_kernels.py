"""The eta profile, a few values of the Duhamel kernel, and the Y/X complementarity."""

import numpy as np

from dnls_lab.duhamel import EX_apply, EY_apply, IC_apply, build_eta, kernel_K, kernel_parts
from dnls_lab.spectral_core import SpaceTimeField, time_grid

e = build_eta()
print(f"eta^(1) = {e.hat(1.0):.2e}, H eta^(1) = {e.hilbert_hat(1.0):.12f}")

for lam, sig in [(0.0, 1.0), (1.5, -0.7), (10.0, 3.0)]:
    print(f"K({lam}, {sig}) = {kernel_K(lam, sig):.6f}")

p = kernel_parts(np.array([-5.0, 0.0, 5.0]), np.array([0.0, 20.0]), 10.0)
print("|K^Y| at Delta=10:\n", np.round(np.abs(p.Y), 4))

t = time_grid(-3, 3, 2.0**-9)


def mode(k, a):
    m = np.zeros((t.size, 5), complex)
    m[:, k + 2] = np.exp(-t**2 + 1j * a * t - 1j * k * k * t)
    return SpaceTimeField(2, t, m)


v = (mode(1, 0.3), mode(2, -0.2), mode(0, 0.5))
gap = EY_apply("N", *v).modes + EX_apply("N", *v, method="direct").modes - IC_apply("N", *v).modes
print(f"E^Y + E^X - I C on an N triple: {np.max(np.abs(gap)):.2e}")
