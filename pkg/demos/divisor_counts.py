"""Divisors in a ball over Z and Z[omega], and solution counts of the quadratic systems."""

import numpy as np

from dnls_lab.number_theory import (EisensteinInt, divisors_in_ball, growth_fit, max_count_ensemble,
                                    naive_divisors_in_ball)

print("divisors of 720 within 10 of 30:", sorted(divisors_in_ball("Z", 720, 30, 10)))
k = EisensteinInt(7, 3)
print(f"Eisenstein divisors of {k} (norm {k.norm()}) near 0:", len(divisors_in_ball("Zomega", k, EisensteinInt(0, 0), 12)),
      "naive:", len(naive_divisors_in_ball("Zomega", k, EisensteinInt(0, 0), 12)))

rng = np.random.default_rng(0)
counts = []
for N in (128, 256, 512, 1024, 2048):
    best, spec = max_count_ensemble(N, (1, 1, -1), 64, rng)
    counts.append((N, max(best, 1)))
    print(f"N={N}: max no-pairing count {best}")
print(f"log-log slope {growth_fit(counts):.3f}")
