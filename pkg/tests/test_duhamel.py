import numpy as np
import pytest
from scipy.integrate import quad

from dnls_lab.duhamel import (
    EX_apply,
    EY_apply,
    IC_apply,
    bound_constant,
    duhamel_apply,
    duhamel_series_all,
    fit_bound,
    kernel_K,
    kernel_apply_K,
    kernel_parts,
    kernel_table_text,
    localization_gain_probe,
    spectral_antiderivative,
    truncated_duhamel,
)
from dnls_lab.profiles import PHI, CutoffProfile, build_eta, phi
from dnls_lab.quadrature import PVConvergenceError
from dnls_lab.spectral_core import LambdaGrid, SpaceTimeField, time_grid, twist


def _single(t, n, k, a, w=1.0):
    m = np.zeros((t.size, 2 * n + 1), complex)
    m[:, k + n] = np.exp(-w * t**2 + 1j * a * t - 1j * k * k * t)
    return SpaceTimeField(n, t, m)


def _bump(t):
    out = np.zeros_like(t)
    m = np.abs(t) < 1
    out[m] = np.exp(-1 / (1 - t[m] ** 2))
    return out


# ---------------------------------------------------------------- profiles

def test_cutoff_shape_and_decay():
    t = np.linspace(-3, 3, 601)
    v = phi(t)
    assert np.all(v[np.abs(t) <= 1] == 1) and np.all(v[np.abs(t) >= 2] == 0)
    assert np.all((v >= 0) & (v <= 1))
    x = np.array([50.0, 100.0, 200.0, 400.0])
    scaled = x**8 * np.abs(PHI.hat(x))
    assert scaled[-1] < scaled[-2]
    assert CutoffProfile(0.5)(1.5) == 0.0 and CutoffProfile(0.5)(0.5) == 1.0


@pytest.mark.parametrize("x", [0.4, 0.99, 1.01, 7.0, 33.0])
def test_cutoff_transforms_against_quadrature(x):
    a = quad(lambda s: phi(s) * np.cos(x * s), 0, 2, limit=400)[0] / np.pi
    b = quad(lambda s: phi(s) * np.sin(x * s), 0, 2, limit=400)[0]
    assert PHI.hat(x) == pytest.approx(a, abs=1e-10)
    assert PHI.hilbert_hat(x) == pytest.approx(b, abs=1e-10)


def test_eta_constraints_and_decay():
    e = build_eta()
    assert abs(e.hat(1.0)) <= 1e-8
    assert abs(e.hilbert_hat(1.0) - 1) <= 1e-8
    assert e.residuals["H_eta_hat_at_1"] <= 1e-8
    xi = np.linspace(3, 8, 30)
    c = -np.polyfit(xi**2, np.log(np.abs(e.hat(xi))), 1)[0]
    assert c > 0
    # eta is the inverse transform of eta^
    t0 = 0.7
    ref = quad(lambda s: e.hat(s) * np.cos(s * t0), -10, 10)[0] + 1j * quad(lambda s: e.hat(s) * np.sin(s * t0), -10, 10)[0]
    assert e(t0) == pytest.approx(ref, abs=1e-10)


def test_eta_singular_centres():
    with pytest.raises(ArithmeticError):
        build_eta((1.0, 1.0), 0.5)


# ---------------------------------------------------------------- Duhamel

def test_duhamel_trivial():
    t = time_grid(-1, 1, 2.0**-6)
    Z = SpaceTimeField(2, t, np.zeros((t.size, 5)))
    assert not np.any(duhamel_apply(Z, 0.5).modes)
    c = 0.3 - 0.1j
    m = np.zeros((t.size, 5), complex)
    m[:, 2] = c
    assert duhamel_apply(SpaceTimeField(2, t, m), 0.75)[0] == pytest.approx(c * 0.75)
    assert duhamel_apply(SpaceTimeField(2, t, m), -0.5)[0] == pytest.approx(-c * 0.5)
    with pytest.raises(ValueError):
        duhamel_apply(Z, 0.3)


def test_duhamel_identity_second_order():
    errs = []
    for dt in (2.0**-8, 2.0**-9):
        t = time_grid(-2, 2, dt)
        F = _single(t, 2, 1, 0.7)
        I = duhamel_series_all(F)
        d = (I.modes[2:] - I.modes[:-2]) / (2 * dt)
        k2 = np.arange(-2, 3) ** 2
        errs.append(np.max(np.abs(d + 1j * k2 * I.modes[1:-1] - F.modes[1:-1])))
    assert errs[1] < errs[0] / 3.5


def test_spectral_antiderivative_against_quad():
    t = time_grid(-4, 4, 2.0**-8)
    g = lambda s: np.exp(-3 * s**2) * np.cos(40 * s)  # noqa: E731
    A = spectral_antiderivative(g(t)[:, None] + 0j, t)[:, 0]
    for tj in (-1.2, 0.3, 1.7):
        i = int(np.argmin(np.abs(t - tj)))
        assert A[i].real == pytest.approx(quad(g, 0, t[i], limit=200)[0], abs=1e-11)


def test_truncated_duhamel():
    t = time_grid(-3.5, 3.5, 2.0**-9)
    n = 2
    m = np.zeros((t.size, 2 * n + 1), complex)
    m[:, n + 1] = _bump(t) * np.exp(2j * t)
    F = SpaceTimeField(n, t, m)
    tr = truncated_duhamel(F, method="trapezoid")
    assert np.allclose(tr.at(0.5).modes, duhamel_apply(F, 0.5).modes, atol=1e-15)
    sp = truncated_duhamel(F)
    assert np.max(np.abs(sp.at(0.5).modes - duhamel_apply(F, 0.5).modes)) < 1e-6
    assert not np.any(sp.at(3.0).modes)
    assert np.max(np.abs(sp.at(0.0).modes)) < 1e-15
    short = SpaceTimeField(n, time_grid(-1, 1, 2.0**-6), np.zeros((129, 5)))
    with pytest.raises(ValueError):
        truncated_duhamel(short)


# ---------------------------------------------------------------- kernels

def test_kernel_self_convergence():
    a = kernel_K(1.5, -0.7)
    b = kernel_K(1.5, -0.7, hs=(0.1, 0.05, 0.025, 0.0125), order=24, width=0.25)
    assert abs(a - b) <= 1e-6 * max(1, abs(b))
    assert kernel_K(0.0, 0.0) == pytest.approx(kernel_K(0.0, 0.0, order=24, width=0.25), abs=1e-6)
    with pytest.raises(PVConvergenceError):
        kernel_K(1.5, -0.7, tol=1e-30)


def test_kernel_bound_on_coarse_grid():
    g = np.arange(-60.0, 61.0, 2.0)
    parts = kernel_parts(g, g)
    C = bound_constant(parts, "K")
    assert np.isfinite(C) and C < 1e3


def test_kernel_table_header():
    parts = kernel_parts([0.0, 1.0], [0.5], 10.0)
    text = kernel_table_text(parts, "Y")
    lines = text.splitlines()
    assert lines[0].startswith("# kernel=Y delta=10.0 B=4.0")
    assert lines[2] == "lambda sigma re im" and len(lines) == 5


def test_fit_bound_stable_small():
    fit = fit_bound("K", extent=40.0, spacing=1.0)
    assert fit.stable


def test_dual_representation_of_truncated_duhamel():
    t = time_grid(-6, 6, 2.0**-10)
    F = _single(t, 2, 1, 0.7)
    tw = twist(truncated_duhamel(F), LambdaGrid(-20, 20, 0.25)).twisted
    lam = LambdaGrid(-6, 6, 0.5)
    kv = kernel_apply_K(F, lam, LambdaGrid(-25, 25, 0.25))
    idx = [int(np.argmin(np.abs(tw.lam - x))) for x in lam.values]
    assert np.max(np.abs(kv - tw.values[:, idx])) <= 1e-4


# ---------------------------------------------------------------- E^Y / E^X

def _triple(star, t, n=2):
    k1, k2, k3 = {"L": (-1, 0, 0), "N": (1, 2, 0)}[star]
    return _single(t, n, k1, 0.3), _single(t, n, k2, -0.2), _single(t, n, k3, 0.5)


def test_ey_zero_and_star_check():
    t = time_grid(-3, 3, 2.0**-8)
    v1, v2, v3 = _triple("L", t)
    z = SpaceTimeField.zeros_like(v1)
    assert not np.any(EY_apply("L", v1, z, v3).modes)
    with pytest.raises(ValueError):
        EY_apply("H", v1, v2, v3)


@pytest.mark.parametrize("star", ["N", "L"])
def test_complementarity(star):
    t = time_grid(-3, 3, 2.0**-10)
    v = _triple(star, t)
    ic = IC_apply(star, *v)
    ey = EY_apply(star, *v)
    ex = EX_apply(star, *v, method="direct")
    assert np.max(np.abs(ey.modes + ex.modes - ic.modes)) <= 1e-8
    whole = EX_apply(star, *v)
    assert np.array_equal(whole.modes, (ic - ey).modes)


def test_ey_dual_and_split_consistency():
    t = time_grid(-6, 6, 2.0**-10)
    v = _triple("L", t)
    lam, sig = LambdaGrid(-8, 8, 0.5), LambdaGrid(-40, 40, 0.125)
    idx = None
    tw = twist(EY_apply("L", *v, truncated=True), LambdaGrid(-8, 8, 0.125)).twisted
    idx = [int(np.argmin(np.abs(tw.lam - x))) for x in lam.values]
    fy = EX_apply("L", *v, split="Y", lam=lam, sigma=sig).twisted.values
    assert np.max(np.abs(fy - tw.values[:, idx])) <= 1e-4
    whole = twist(EX_apply("L", *v, truncated=True), LambdaGrid(-8, 8, 0.125)).twisted.values[:, idx]
    x0 = EX_apply("L", *v, split="X0", lam=lam, sigma=sig).twisted.values
    xp = EX_apply("L", *v, split="Xplus", lam=lam, sigma=sig).twisted.values
    assert np.max(np.abs(x0 + xp - whole)) <= 1e-4


# ---------------------------------------------------------------- localization

def _localization_input():
    t = time_grid(-2.5, 2.5, 2.0**-10)
    n = 2
    m = np.zeros((t.size, 2 * n + 1), complex)
    for k in range(-n, n + 1):
        m[:, k + n] = np.exp(-t**2) * np.cos((k + 1) * t) / (1 + k * k)
    return truncated_duhamel(SpaceTimeField(n, t, m))


def test_localization_gain():
    u = _localization_input()
    Ts = [1 / 4, 1 / 8, 1 / 16, 1 / 32]
    r = localization_gain_probe(u, Ts)
    assert r.theta_hat > 0
    r3 = localization_gain_probe(u * 3.0, Ts)
    assert np.allclose(r.ratios, r3.ratios, rtol=1e-12)
    with pytest.raises(ValueError, match="u\\(0\\) = 0"):
        localization_gain_probe(u.with_modes(u.modes + 0.1), Ts)
