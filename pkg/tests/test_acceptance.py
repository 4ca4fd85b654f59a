"""Acceptance criteria, one test each.

Every test records a PASS/FAIL verdict with its measured numbers; the
verdicts are printed as one line per criterion at the end of the run.  A
criterion that is out of reach stays red rather than being relaxed.
"""

import warnings

import numpy as np
import pytest

from conftest import record
from dnls_lab._util import seeded_rng
from dnls_lab.duhamel import (
    EX_apply,
    EY_apply,
    IC_apply,
    build_eta,
    fit_bounds,
    kernel_apply_K,
    localization_gain_probe,
    truncated_duhamel,
)
from dnls_lab.gauge import gauge_forward, roundtrip_error
from dnls_lab.interactions import CLASSES, cubic_apply, verify_prop23, verify_prop24
from dnls_lab.norms import fl_norm
from dnls_lab.number_theory import (
    EisensteinInt,
    check_identities,
    count_system_solutions,
    divisors_in_ball,
    growth_fit,
    max_count_ensemble,
    naive_divisors_in_ball,
)
from dnls_lab.paracontrolled import manifold_membership, picard_solve_w, solve_v_given_w, standard_grid
from dnls_lab.probes import ey_bound_probe, trilinear_probe
from dnls_lab.profiles import CutoffProfile
from dnls_lab.solver import (
    IntegratorConfig,
    exact_plane_wave,
    integrate_dnls,
    mass,
    picard_iterate_integral,
    smooth_random_field,
)
from dnls_lab.spectral_core import LambdaGrid, SpaceTimeField, SpectralField, free_evolution, time_grid, twist


def _flow(u0, n, dt, T, every=50):
    with warnings.catch_warnings():
        # n = 64 with dt = 1e-3 is past the dt * n^2 heuristic; the linear part is exact
        warnings.simplefilter("ignore")
        cfg = IntegratorConfig(n_max=n, dt=dt, T=T, save_every=every)
    return integrate_dnls(u0, cfg)


@pytest.fixture(scope="module")
def corpus():
    """Criterion 2 data: ten seeded smooth fields of amplitude 0.1, flowed to T = 1."""
    return [_flow(smooth_random_field(64, 0.1, s), 64, 1e-3, 1.0) for s in range(10)]


def test_c01_plane_wave():
    n = 64
    u = _flow(exact_plane_wave(0.5, 1, 0.0, n), n, 1e-3, 1.0, every=10)
    err = max(np.max(np.abs(u.modes[i] - exact_plane_wave(0.5, 1, t, n).modes)) for i, t in enumerate(u.times))
    assert record(1, err <= 1e-6, f"max per-mode error {err:.3e} (tol 1e-6)")


def test_c02_conservation(corpus):
    drift = max(float(np.max(np.abs(mass(u.modes) - mass(u.modes[0])))) / float(mass(u.modes[0])) for u in corpus)
    assert record(2, drift <= 1e-8, f"max relative mass drift {drift:.3e} over 10 seeds (tol 1e-8)")


def test_c03_picard_vs_integrator():
    u0 = smooth_random_field(16, 0.05, 2)
    u, hist = picard_iterate_integral(u0, 8, 0.1, dt=1e-4, return_history=True)
    ref = integrate_dnls(u0, IntegratorConfig(n_max=16, dt=1e-4, T=0.1))
    d = float(np.max(np.abs(u.modes - ref.modes)))
    assert record(3, d <= 1e-6, f"sup difference {d:.3e} after 8 iterations (tol 1e-6)")


def test_c04_gauge_round_trip(corpus):
    rt, l2 = 0.0, 0.0
    for u in corpus:
        rt = max(rt, roundtrip_error(u))
        v = gauge_forward(u)
        l2 = max(l2, float(np.max(np.abs(mass(v.modes) - mass(u.modes)) / mass(u.modes))))
    assert record(4, rt <= 1e-10 and l2 <= 1e-10, f"round trip {rt:.3e}, L2 change {l2:.3e} (tol 1e-10 each)")


@pytest.mark.slow
def test_c05_partition():
    rep = verify_prop23(256)
    viol = {i: len(v) for i, v in rep.violations.items()}
    ok = rep.ok
    assert record(5, ok, f"K=256: {rep.triples} triples, overlaps {rep.overlaps}, unclassified "
                         f"{rep.unclassified}, item violations {viol}, delta mismatches {rep.delta_mismatch}")


def test_c06_chain_cases():
    small, big = verify_prop24(24), verify_prop24(48)
    structural = big.unassigned == 0 and big.multiply_assigned == 0 and big.violations == 0
    growth = {}
    for c in big.cases:
        a, b = small.cases[c], big.cases[c]
        if a.count and b.count:
            growth[c] = b.max_ratio / a.max_ratio - 1
    for name, a, b in (("3", small.case3, big.case3), ("3-k5", small.case3_k5, big.case3_k5)):
        if a.count and b.count:
            growth[name] = b.max_ratio / a.max_ratio - 1
    stable = all(g < 0.05 for g in growth.values())
    detail = (f"K=48: {big.chains} chains, unassigned {big.unassigned}, multiply assigned "
              f"{big.multiply_assigned}, violations {big.violations}; ratio growth 24->48 "
              + ", ".join(f"{c} {g:+.1%}" for c, g in growth.items()) + " (tol < 5%)")
    assert record(6, structural and stable, detail)


def _dyadic(n, rng):
    re = rng.integers(-256, 257, 2 * n + 1) / 256
    im = rng.integers(-256, 257, 2 * n + 1) / 256
    return SpectralField(n, re + 1j * im)


def test_c07_splitting():
    bad = 0
    for s in range(100):
        rng = seeded_rng(s, "acceptance/splitting")
        v1, v2, v3 = (_dyadic(32, rng) for _ in range(3))
        full = cubic_apply("full", v1, v2, v3).modes
        parts = sum(cubic_apply(c, v1, v2, v3).modes for c in CLASSES)
        bad += not np.array_equal(full, parts)
    assert record(7, bad == 0, f"{bad} of 100 inputs differ from the class sum (bit-exact required)")


def test_c08_eta():
    e = build_eta()
    a, b = abs(e.hat(1.0)), abs(e.hilbert_hat(1.0) - 1)
    assert record(8, a <= 1e-8 and b <= 1e-8, f"|eta^(1)| {a:.2e}, |H eta^(1) - 1| {b:.2e} (tol 1e-8)")


def _single(t, n, k, a):
    m = np.zeros((t.size, 2 * n + 1), complex)
    m[:, k + n] = np.exp(-t**2 + 1j * a * t - 1j * k * k * t)
    return SpaceTimeField(n, t, m)


_TRIPLES = {"L": (-1, 0, 0), "N": (1, 2, 0)}
_MODS = (0.3, -0.2, 0.5)


@pytest.mark.slow
def test_c09_kernels():
    t = time_grid(-6, 6, 2.0**-10)
    comp, dual = 0.0, 0.0
    lam, sig = LambdaGrid(-8, 8, 0.5), LambdaGrid(-40, 40, 0.125)
    fine = LambdaGrid(-8, 8, 0.125)
    idx = [int(np.argmin(np.abs(fine.values - x))) for x in lam.values]
    for star, ks in _TRIPLES.items():
        v = [_single(t, 2, k, a) for k, a in zip(ks, _MODS)]
        ic, ey = IC_apply(star, *v), EY_apply(star, *v)
        ex = EX_apply(star, *v, method="direct")
        comp = max(comp, float(np.max(np.abs(ey.modes + ex.modes - ic.modes))))
        ty = twist(EY_apply(star, *v, truncated=True), fine).twisted.values[:, idx]
        fy = EX_apply(star, *v, split="Y", lam=lam, sigma=sig).twisted.values
        dual = max(dual, float(np.max(np.abs(fy - ty))))
    F = _single(t, 2, 1, 0.7)
    tk = twist(truncated_duhamel(F), LambdaGrid(-20, 20, 0.25)).twisted
    kidx = [int(np.argmin(np.abs(tk.lam - x))) for x in lam.values]
    fk = kernel_apply_K(F, lam, LambdaGrid(-25, 25, 0.25))
    dual = max(dual, float(np.max(np.abs(fk - tk.values[:, kidx]))))
    names = ("K", "Y", "Y_simple", "X", "X0", "Xplus")
    variation = 1.0
    unstable = []
    for D in (1.0, 10.0, 100.0, 1000.0):
        for f in fit_bounds(names, D).values():
            variation = max(variation, f.variation)
            if not f.stable:
                unstable.append((f.name, D))
    ok = comp <= 1e-8 and dual <= 1e-4 and not unstable
    assert record(9, ok, f"complementarity {comp:.2e} (tol 1e-8), dual representations {dual:.2e} "
                         f"(tol 1e-4), worst constant variation {variation:.3f}x (tol < 2x), unstable {unstable}")


def test_c10_localization():
    t = time_grid(-2.5, 2.5, 2.0**-12)
    n = 2
    m = np.zeros((t.size, 2 * n + 1), complex)
    for k in range(-n, n + 1):
        m[:, k + n] = np.exp(-t**2) * np.cos((k + 1) * t) / (1 + k * k)
    u = truncated_duhamel(SpaceTimeField(n, t, m))
    Ts = [2.0**-j for j in range(1, 6)]
    r = localization_gain_probe(u, Ts, grid=LambdaGrid(-400, 400, 0.5))
    try:
        localization_gain_probe(u.with_modes(u.modes + 0.1), Ts)
        rejected = False
    except ValueError:
        rejected = True
    assert record(10, r.theta_hat > 0 and rejected,
                  f"theta_hat {r.theta_hat:.3f} (need > 0), u(0) != 0 rejected: {rejected}")


@pytest.mark.slow
def test_c11_divisors():
    rng = seeded_rng(0, "acceptance/divisors")
    bad = 0
    for _ in range(1000):
        k = int(rng.integers(1, 10**5 + 1)) * int(rng.choice([-1, 1]))
        q = int(rng.integers(-300, 301))
        rho = int(rng.integers(1, 500))
        bad += sorted(divisors_in_ball("Z", k, q, rho)) != sorted(naive_divisors_in_ball("Z", k, q, rho))
    for _ in range(100):
        while True:
            k = EisensteinInt(*(int(x) for x in rng.integers(-115, 116, 2)))
            if 0 < k.norm() <= 10**4:
                break
        q = EisensteinInt(*(int(x) for x in rng.integers(-20, 21, 2)))
        rho = int(rng.integers(1, 80))
        bad += sorted(divisors_in_ball("Zomega", k, q, rho)) != sorted(naive_divisors_in_ball("Zomega", k, q, rho))
    slopes, ident_fail, witnesses = {}, 0, 0
    for signs in ((1, 1, -1), (1, -1, 1), (1, -1, -1), (1, 1, 1)):
        counts = []
        for N in (2**7, 2**8, 2**9, 2**10, 2**11, 2**12):
            best, spec = max_count_ensemble(N, signs, 256, rng)
            counts.append((N, max(best, 1)))
            _, wit = count_system_solutions(spec)
            res = check_identities(spec, wit)
            witnesses += len(wit)
            ident_fail += sum(res[c][1] for c in ("a", "b", "c"))
        slopes[signs] = growth_fit(counts)
    worst = max(slopes.values())
    ok = bad == 0 and ident_fail == 0 and worst <= 0.2
    assert record(11, ok, f"oracle mismatches {bad} of 1100; identity failures {ident_fail} on {witnesses} "
                          f"witnesses; growth slopes " + ", ".join(f"{s}: {v:.3f}" for s, v in slopes.items())
                          + " (tol <= 0.2)")


def test_c12_paracontrolled():
    T, n, eps, tol = 0.1, 16, 1e-3, 1e-10
    times = standard_grid(T)
    W = free_evolution(smooth_random_field(n, 1.0, 7, label="w"), times).time_multiply(CutoffProfile(T)(times))
    inner = solve_v_given_w(W * eps, tol=tol)
    ratio = max(inner.ratios) if inner.ratios else 0.0
    mem = manifold_membership(inner.v, tol=tol)
    rec_err = float(np.max(np.abs(mem.w.modes - inner.w.modes))) if mem.w is not None else np.inf
    v0 = smooth_random_field(n, eps, 11, label="v0")
    p = picard_solve_w(v0, T=T, tol=tol, with_bounds=False)
    rng = seeded_rng(0, "acceptance/fixpoint")
    start = p.w * 0.5 + p.w.with_modes(eps * 1e-2 * rng.standard_normal(p.w.modes.shape))
    q = picard_solve_w(v0, T=T, tol=tol, w_init=start, with_bounds=False)
    on = np.abs(times) <= T
    agree = float(np.max(np.abs(p.w.modes[on] - q.w.modes[on])))
    ok = (inner.converged and ratio <= 0.5 and inner.residual <= 1e-8 and mem.is_member
          and rec_err <= 10 * tol and p.converged and q.converged and agree <= 10 * tol)
    assert record(12, ok, f"inner ratio {ratio:.2e} residual {inner.residual:.2e}; membership recovery "
                          f"{rec_err:.2e}; outer guesses agree to {agree:.2e} (tol {10 * tol:.0e})")


@pytest.mark.slow
def test_c13_probes():
    ns = [16, 32, 64]
    tri = trilinear_probe([2, 3, 4], ns, samples=8, seed=0)
    eyN = ey_bound_probe("N", ns, samples=8, seed=0)
    eyL = ey_bound_probe("L", ns, samples=8, seed=0)
    gated = {"trilinear p=2": tri.growth(2), "EY_N": eyN.growth(3.0), "EY_L": eyL.growth(3.0)}
    worst = max(g for gs in gated.values() for g in gs)
    again = (trilinear_probe([2, 3, 4], ns, samples=8, seed=0).csv() == tri.csv()
             and ey_bound_probe("N", ns, samples=8, seed=0).csv() == eyN.csv()
             and ey_bound_probe("L", ns, samples=8, seed=0).csv() == eyL.csv())
    info = ", ".join(f"p={p} {tri.growth(p)[0]:.3f}/{tri.growth(p)[1]:.3f}" for p in (3, 4))
    assert record(13, worst <= 2.0 and again,
                  "growth per doubling " + ", ".join(f"{k} " + "/".join(f"{g:.3f}" for g in v) for k, v in gated.items())
                  + f" (tol <= 2); reproducible {again}; report only: {info}")


def test_c14_regularity():
    worst = 0.0
    for s in range(5):
        u = _flow(smooth_random_field(16, 0.1, s), 16, 1e-3, 1.0)
        h2 = [fl_norm(u.slice(i), 2.0, 3.0) for i in range(u.nt)]
        worst = max(worst, max(h2) / h2[0])
    assert record(14, worst <= 2.0, f"max H^2_3 growth factor {worst:.4f} over [0, 1] (tol 2)")
