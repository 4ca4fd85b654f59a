import numpy as np
import pytest

from dnls_lab.duhamel import EY_apply
from dnls_lab.probes import FreeLike, ey_bound_probe, ey_free, single_mode_calibration, trilinear_probe
from dnls_lab.spectral_core import time_grid


def _fl(n, k, m):
    a = np.zeros(2 * n + 1, complex)
    a[k + n] = 1.0
    return FreeLike(a, np.full(2 * n + 1, m))


def test_trilinear_deterministic_and_monotone():
    a = trilinear_probe([2, 3], [4, 8], samples=2, seed=1)
    b = trilinear_probe([2, 3], [4, 8], samples=2, seed=1)
    assert a.csv() == b.csv()
    more = trilinear_probe([2], [4, 8], samples=4, seed=1)
    for n in (4, 8):
        assert more.cells[(2, n)] >= a.cells[(2, n)]
    assert a.lower_bound_only
    assert a.growth(2) == [a.cells[(2, 8)] / a.cells[(2, 4)]]


def test_ey_probe_deterministic():
    a = ey_bound_probe("L", [4, 8], samples=2, seed=1)
    assert a.csv() == ey_bound_probe("L", [4, 8], samples=2, seed=1).csv()
    assert all(c > 0 for c in a.cells.values())
    with pytest.raises(ValueError):
        ey_bound_probe("H", [4])


def test_ey_free_matches_time_domain():
    n = 3
    fs = [_fl(n, 1, 0.3), _fl(n, 2, -0.2), _fl(n, 0, 0.5)]
    errs = []
    for dt in (2.0**-9, 2.0**-10):
        t = time_grid(-3, 3, dt)
        a = ey_free("N", *fs, t)
        b = EY_apply("N", *[f.sample(t) for f in fs], truncated=True)
        errs.append(np.max(np.abs(a.modes - b.modes)))
    # the time-domain operator is a trapezoid rule; the gap closes at second order
    assert errs[1] < 1e-7 and errs[0] / errs[1] > 3.5


def test_ey_free_zero_and_mixed_modulation():
    n = 3
    t = time_grid(-3, 3, 2.0**-8)
    z = FreeLike(np.zeros(2 * n + 1, complex), np.zeros(2 * n + 1))
    assert not np.any(ey_free("L", z, _fl(n, 0, 0.1), _fl(n, 0, 0.2), t).modes)
    bad = FreeLike(np.ones(2 * n + 1, complex), np.linspace(-1, 1, 2 * n + 1))
    with pytest.raises(ValueError):
        ey_free("L", bad, bad, bad, t)


@pytest.mark.parametrize("star,triple", [("L", (-3, 0, 0)), ("N", (1, 2, 0))])
def test_single_mode_calibration(star, triple):
    t_norm, f_norm = single_mode_calibration(star, 8, triple)
    assert t_norm == pytest.approx(f_norm, rel=1e-6)
