import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dnls_lab.norms import (
    NormSpec,
    embedding_holds,
    fl_norm,
    ladder,
    lq_lambda,
    named_space,
    norm_record,
    scaling_index,
    xsb_norm,
)
from dnls_lab.profiles import PHI
from dnls_lab.spectral_core import LambdaGrid, SpectralField, free_evolution, time_grid, twist

from conftest import random_field


def test_ladder_values():
    lad = ladder(4, 0.01)
    assert lad.b0 == pytest.approx(0.98)
    assert lad.b1 == pytest.approx(0.99)
    assert lad.q0 == pytest.approx(25)
    assert lad.q1 == pytest.approx(22.2222, rel=1e-5)
    assert lad.r0 == pytest.approx(1.9608, rel=1e-4)
    lad.check()


def test_ladder_rejections_name_the_bound():
    ladder(2, 0.05)
    with pytest.raises(ValueError, match="1/\\(6\\*p0\\)"):
        ladder(8, 0.05)
    with pytest.raises(ValueError, match="p0"):
        ladder(1.5, 0.01)


def test_ladder_small_delta_limit():
    lad = ladder(3, 1e-9)
    for v in (lad.b0, lad.b1):
        assert v == pytest.approx(1, abs=1e-8)
    for r in (lad.r0, lad.r1, lad.r2):
        assert r == pytest.approx(2, abs=1e-7)


@given(st.floats(2, 20), st.floats(0.01, 0.99), st.floats(0.01, 50))
@settings(max_examples=60, deadline=None)
def test_ladder_chain(p0, frac, A):
    lad = ladder(p0, frac / (6 * p0), A)
    lad.check()
    assert lad.A3 <= 1e6 or lad.A3 == A


def test_scaling_index():
    assert scaling_index(0.5, 2) == 0.5
    assert scaling_index(0.5, math.inf) == 0.0
    assert scaling_index(0.5, 4) == 0.25


def test_fl_norm_examples():
    assert fl_norm(SpectralField.from_dict(3, {0: 1}), 0.7, 5) == pytest.approx(1.0)
    f = SpectralField.from_dict(3, {0: 1, 1: 1})
    assert fl_norm(f, 0.5, 2) == pytest.approx(math.sqrt(1 + math.sqrt(2)), rel=1e-14)
    g = random_field(9, 1)
    assert fl_norm(g * (2 - 3j), 0.5, 3) == pytest.approx(abs(2 - 3j) * fl_norm(g, 0.5, 3), rel=1e-13)
    assert fl_norm(g, 1, math.inf) == pytest.approx(np.max(np.sqrt(1 + g.ks**2.0) * np.abs(g.modes)))


def _free_twisted(u0, spacing=0.25, extent=300.0, dt=2.0**-7):
    t = time_grid(-2.5, 2.5, dt)
    F = free_evolution(u0, t).time_multiply(PHI(t))
    return twist(F, LambdaGrid(-extent, extent, spacing))


def test_xsb_single_mode_factor():
    spec = named_space("Y0", ladder(3, 0.05))
    lam = LambdaGrid(-300, 300, 0.25).values
    factor = lq_lambda(lam, PHI.hat(lam), spec.b, spec.q)[0][0]
    for k in (0, 3, -7):
        F = _free_twisted(SpectralField.from_dict(8, {k: 1}))
        assert xsb_norm(F, spec) == pytest.approx(math.sqrt(1 + k * k) ** 0.5 * factor, rel=1e-8)


def test_xsb_zero_and_missing_twist():
    spec = named_space("Z0", ladder(3, 0.05))
    assert xsb_norm(_free_twisted(SpectralField.zeros(4)), spec) == 0.0
    t = time_grid(0, 1, 0.25)
    with pytest.raises(ValueError):
        xsb_norm(free_evolution(SpectralField.zeros(2), t), spec)


def test_xsb_grid_refinement():
    spec = named_space("Z1", ladder(3, 0.05))
    u0 = random_field(6, 2)
    a = xsb_norm(_free_twisted(u0, 0.5), spec)
    b = xsb_norm(_free_twisted(u0, 0.25), spec)
    assert abs(a - b) / b < 0.01


def test_xsb_factorizes_over_random_data():
    lad = ladder(3, 0.05)
    spec = named_space("Y1", lad)
    lam = LambdaGrid(-300, 300, 0.25).values
    factor = lq_lambda(lam, PHI.hat(lam), spec.b, spec.q)[0][0]
    for seed in range(20):
        u0 = random_field(6, seed)
        F = _free_twisted(u0)
        assert xsb_norm(F, spec) == pytest.approx(fl_norm(u0, spec.s, spec.p) * factor, rel=1e-6)


def test_embedding_examples():
    lad = ladder(3, 0.05)
    Z0, Y0 = named_space("Z0", lad), named_space("Y0", lad)
    assert embedding_holds(Z0, Y0)
    assert not embedding_holds(Z0, Z0)
    a = NormSpec(s=0.5, p=3, b=0.6, q=2)
    shifted = NormSpec(s=1.5, p=3, b=1.6, q=2)
    assert embedding_holds(a, shifted, rule="literal")
    assert embedding_holds(shifted, a)


def test_embedding_realized_on_corpus():
    lad = ladder(3, 0.05)
    Z0, Y0 = named_space("Z0", lad), named_space("Y0", lad)
    ratios = []
    for seed in range(6):
        F = _free_twisted(random_field(5, seed))
        ratios.append(xsb_norm(F, Y0) / xsb_norm(F, Z0))
    # one constant serves the whole corpus
    assert max(ratios) / min(ratios) < 1.5
    assert max(ratios) < 10


def test_norm_record():
    spec = named_space("Y0", ladder(3, 0.05))
    rec = json.loads(norm_record("Y0", spec, 1.25, {"lambda_spacing": 0.25}))
    assert set(rec) == {"space", "s", "b", "p", "q", "value", "grid_meta"}
    assert rec["value"] == 1.25
