"""Split the cubic nonlinearity by frequency class and look at the class census."""

import numpy as np

from dnls_lab.interactions import CLASSES, classify_triple, cubic_apply, resonance_delta, verify_prop23
from dnls_lab.spectral_core import SpectralField

for ks in [(5, 0, 0), (1, 9, 2), (0, 8, 7), (3, 3, 3)]:
    k1, k2, k3 = ks
    print(f"(k1, k2, k3) = {ks}: class {classify_triple(k2 + k3 - k1, k1, k2, k3)}, "
          f"Delta = {resonance_delta(k2 + k3 - k1, k1, k2, k3)}")

rng = np.random.default_rng(0)
n = 16
v = [SpectralField(n, (rng.integers(-64, 65, 2 * n + 1) + 1j * rng.integers(-64, 65, 2 * n + 1)) / 64)
     for _ in range(3)]
full = cubic_apply("full", *v).modes
parts = {c: cubic_apply(c, *v).modes for c in CLASSES}
print("class sum equals full product exactly:", np.array_equal(full, sum(parts.values())))
for c, m in parts.items():
    print(f"  {c}: l2 share {np.linalg.norm(m) / np.linalg.norm(full):.3f}")

rep = verify_prop23(48)
print(f"K=48 census {rep.class_counts}; property violations "
      f"{sum(len(x) for x in rep.violations.values())}")
