"""Empirical constants for the trilinear estimate and the E^Y bounds.

Inputs are free-like fields v(t, k) = e^{-ik^2 t} a(k) phi(t) e^{i lambda_k t},
whose twisted transform a(k) phi^(lambda - lambda_k) is known exactly, so
input norms need no time transform.  The output is computed in time on a
grid fine enough to resolve every resonance factor that occurs, twisted
numerically and measured.  A constant is the maximum over the declared
ensemble of output norm / product of input norms: a lower bound for the
operator norm, never a certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import fmt, seeded_rng
from functools import lru_cache

from scipy import sparse
from scipy.interpolate import CubicSpline

from .duhamel import EY_apply, causal_integral, eta, group_plan, truncated_duhamel
from .interactions import triple_table
from .norms import NormSpec, ParameterLadder, ladder, lp, lq_lambda, named_space, xsb_norm
from .profiles import PHI
from .quadrature import panels
from .spectral_core import LambdaGrid, SpaceTimeField, TwistedRep, twist
from ._util import bracket

INPUT_LAMBDA = 150.0
MOD_SPREAD = 4.0
EY_SPREAD = 4.2


@dataclass
class ProbeReport:
    """Empirical constants per (p, n_max) cell; ``slopes`` are log-log slopes in n_max per p."""

    estimate: str
    seed: int
    samples: int
    cells: dict = field(default_factory=dict)  # (p, n) -> constant
    slopes: dict = field(default_factory=dict)  # p -> slope
    meta: dict = field(default_factory=dict)
    lower_bound_only: bool = True

    def finalize(self) -> "ProbeReport":
        for p in sorted({p for p, _ in self.cells}):
            ns = sorted(n for q, n in self.cells if q == p)
            cs = [self.cells[(p, n)] for n in ns]
            if len(ns) >= 2 and all(c > 0 for c in cs):
                self.slopes[p] = float(np.polyfit(np.log(ns), np.log(cs), 1)[0])
            else:
                self.slopes[p] = math.nan
        return self

    def growth(self, p) -> list[float]:
        """Ratios C(2n)/C(n) along the sweep."""
        ns = sorted(n for q, n in self.cells if q == p)
        return [self.cells[(p, b)] / self.cells[(p, a)] for a, b in zip(ns[:-1], ns[1:])]

    def csv(self) -> str:
        rows = ["estimate,p,n_max,samples,seed,constant,slope"]
        for (p, n) in sorted(self.cells):
            rows.append(",".join([self.estimate, fmt(p), str(n), str(self.samples), str(self.seed),
                                  fmt(self.cells[(p, n)]), fmt(self.slopes.get(p, math.nan))]))
        return "\n".join(rows) + "\n"


# --------------------------------------------------------------------------
# inputs


@dataclass(frozen=True)
class FreeLike:
    """a(k) and lambda_k describing e^{-ik^2 t} a(k) phi(t) e^{i lambda_k t}."""

    amp: np.ndarray
    mod: np.ndarray

    @property
    def n(self) -> int:
        return (self.amp.size - 1) // 2

    def sample(self, times: np.ndarray) -> SpaceTimeField:
        ks = np.arange(-self.n, self.n + 1)
        ph = np.exp(1j * np.outer(times, self.mod - ks.astype(float) ** 2))
        return SpaceTimeField(self.n, times, ph * self.amp * PHI(times)[:, None])

    def norm(self, spec: NormSpec, spacing: float = 0.25) -> float:
        lam = np.arange(-INPUT_LAMBDA, INPUT_LAMBDA + spacing / 2, spacing)
        nz = np.flatnonzero(self.amp)
        if nz.size == 0:
            return 0.0
        vals = self.amp[nz, None] * PHI.hat(lam[None, :] - self.mod[nz, None])
        inner, _ = lq_lambda(lam, vals, spec.b, spec.q)
        ks = np.arange(-self.n, self.n + 1)[nz]
        return float(lp(bracket(ks) ** spec.s * inner, spec.p))


def _iso(n: int, rng: np.random.Generator, per_mode: bool = True) -> FreeLike:
    ks = np.arange(-n, n + 1)
    a = (rng.standard_normal(ks.size) + 1j * rng.standard_normal(ks.size)) / bracket(ks)
    mod = rng.uniform(-MOD_SPREAD, MOD_SPREAD, ks.size)
    return FreeLike(a, mod if per_mode else np.full(ks.size, mod[0]))


def _spike(n: int, k: int, rng: np.random.Generator) -> FreeLike:
    a = np.zeros(2 * n + 1, dtype=complex)
    a[k + n] = np.exp(2j * np.pi * rng.uniform())
    return FreeLike(a, np.full(2 * n + 1, rng.uniform(-MOD_SPREAD, MOD_SPREAD)))


def structured_triple(kind: str, n: int, rng: np.random.Generator) -> tuple:
    """A random triple of the class (frequencies of v1, v2, v3), biased to |k| >= n/2."""
    tab = triple_table(n)
    idx = tab.select(kind)
    big = idx[np.maximum(np.abs(tab.k[idx]), np.abs(tab.k1[idx])) >= n // 2]
    pool = big if big.size else idx
    j = pool[int(rng.integers(pool.size))]
    return int(tab.k1[j]), int(tab.k2[j]), int(tab.k3[j])


def edge_triple(kind: str, n: int) -> tuple:
    """The class triple with the largest |Delta| (first in table order on ties)."""
    tab = triple_table(n)
    idx = tab.select(kind)
    j = idx[int(np.argmax(np.abs(tab.delta[idx])))]
    return int(tab.k1[j]), int(tab.k2[j]), int(tab.k3[j])


def _edge_fields(kind: str, n: int) -> tuple:
    amps = []
    for k in edge_triple(kind, n):
        a = np.zeros(2 * n + 1, dtype=complex)
        a[k + n] = 1.0
        amps.append(FreeLike(a, np.zeros(2 * n + 1)))
    return tuple(amps) + (f"edge{edge_triple(kind, n)}",)


def ensemble(kind: str, n: int, rng: np.random.Generator, i: int,
             per_mode: bool = True) -> tuple[FreeLike, FreeLike, FreeLike, str]:
    """Sample i of the mixed ensemble.

    i = 1 is the band-edge triple of the class, other odd i a random triple
    of the class, even i isotropic random fields.
    """
    if i == 1:
        return _edge_fields(kind, n)
    if i % 2 == 0:
        return _iso(n, rng, per_mode), _iso(n, rng, per_mode), _iso(n, rng, per_mode), "isotropic"
    k1, k2, k3 = structured_triple(kind, n, rng)
    return _spike(n, k1, rng), _spike(n, k2, rng), _spike(n, k3, rng), f"triple({k1},{k2},{k3})"


# --------------------------------------------------------------------------
# grids


def _time_step(max_delta: float) -> float:
    """Largest dyadic dt whose alias-free window 0.8 pi / dt covers max_delta + 300."""
    need = max_delta + 300.0 + 2 * MOD_SPREAD * 3
    j = 8
    while 0.8 * np.pi * 2.0**j < need:
        j += 1
    return 2.0**-j


def _grid(dt: float) -> np.ndarray:
    m = int(round(2.0 / dt))
    return dt * np.arange(-m, m + 1)


def _out_grid(times: np.ndarray, extent: float) -> LambdaGrid:
    sp = np.pi / (times[-1] - times[0])
    return LambdaGrid(-extent, extent, sp)


# --------------------------------------------------------------------------
# trilinear product d_x conj(v1) v2 v3


def trilinear_product(v1: SpaceTimeField, v2: SpaceTimeField, v3: SpaceTimeField, chunk: int = 2048) -> SpaceTimeField:
    """Modes |k| <= n of d_x(conj v1) v2 v3, exact (zero padding above 4n)."""
    n = v1.n_max
    L = 1
    while L <= 4 * n + 1:
        L *= 2
    ks = np.arange(-n, n + 1)
    idx = ks % L
    out = np.zeros_like(v1.modes)
    for lo in range(0, v1.nt, chunk):
        sl = slice(lo, lo + chunk)
        # modes of d_x conj(v1) at m are i m conj(v1^(-m))
        d = 1j * ks * np.conj(v1.modes[sl][:, ::-1])
        phys = []
        for m in (d, v2.modes[sl], v3.modes[sl]):
            c = np.zeros((m.shape[0], L), dtype=complex)
            c[:, idx] = m
            phys.append(np.fft.ifft(c, axis=1) * L)
        prod = phys[0] * phys[1] * phys[2]
        out[sl] = (np.fft.fft(prod, axis=1) / L)[:, idx]
    return v1.with_modes(out)


def trilinear_probe(p_values, n_values, samples: int = 8, seed: int = 0, lad: ParameterLadder | None = None,
                    ) -> ProbeReport:
    """Constants for || I(d_x conj(v1) v2 v3) ||_X / prod ||v_j||_X with X = X^{1/2, 1/2 + delta}_{p, 2}."""
    lad = lad or ladder(3.0, 0.05)
    b = 0.5 + lad.delta
    rep = ProbeReport("trilinear", seed, samples, meta={"b": b, "q": 2.0})
    for n in n_values:
        dt = _time_step(8.0 * n * n)
        times = _grid(dt)
        grid = _out_grid(times, 0.8 * np.pi / dt)
        best = {p: 0.0 for p in p_values}
        for i in range(samples):
            rng = seeded_rng(seed, f"probe/trilinear/{n}/{i}")
            f1, f2, f3, label = ensemble("N" if i % 4 == 3 else "L", n, rng, i)
            out = truncated_duhamel(trilinear_product(f1.sample(times), f2.sample(times), f3.sample(times)))
            tw = twist(out, grid)
            for p in p_values:
                spec = NormSpec(0.5, p, b, 2.0)
                den = f1.norm(spec) * f2.norm(spec) * f3.norm(spec)
                if den == 0:
                    continue
                r = xsb_norm(tw, spec) / den
                if r > best[p]:
                    best[p] = r
                    rep.meta[f"argmax_{p}_{n}"] = label
        for p in p_values:
            rep.cells[(p, n)] = best[p]
        rep.meta[f"dt_{n}"] = dt
    return rep.finalize()


@lru_cache(maxsize=1)
def _chi_table(h: float = 2.0**-12):
    """Cubic spline coefficients of phi^4 on [-2, 2] (uniform knots)."""
    x = np.arange(-2.0, 2.0 + h / 2, h)
    return h, np.ascontiguousarray(CubicSpline(x, PHI(x) ** 4).c)


def _chi(s: np.ndarray) -> np.ndarray:
    h, c = _chi_table()
    inside = np.abs(s) < 2.0
    y = np.where(inside, s + 2.0, 0.0)
    i = np.minimum((y / h).astype(np.intp), c.shape[1] - 1)
    u = y - i * h
    return np.where(inside, ((c[0, i] * u + c[1, i]) * u + c[2, i]) * u + c[3, i], 0.0)


def eta_causal(D: float, omega: float, times: np.ndarray, order: int = 16, chunk: int = 2_000_000) -> np.ndarray:
    """phi(t) int_0^t eta(D (t - s)) e^{i omega s} phi(s)^4 ds by composite Gauss-Legendre in the lag.

    The lag t - s is restricted to the support radius of eta(D .), and
    panels are sized so each carries at most a few radians of phase.
    """
    et = eta()
    R = et.support_radius(1e-16)
    W = R / abs(D) if D else np.inf
    B = abs(omega) + 2.5 * abs(D) + 20.0
    # 16-point panels integrate 8 radians of phase to roundoff
    ell = min(1.0 / 16, 8.0 / B)
    span = min(W, 2.0)
    P = max(1, int(np.ceil(span / ell)))
    u, w = panels(np.linspace(0.0, 1.0, P + 1), order)
    out = np.zeros(times.size, dtype=complex)
    live = (np.abs(times) < 2.0) & (times != 0)
    full = live & (np.abs(times) >= W)
    part = np.flatnonzero(live & ~full)
    step = max(1, chunk // u.size)
    # full window: lag nodes are fixed, only phi^4 varies with t
    for sg in (1.0, -1.0):
        idx = np.flatnonzero(full & (np.sign(times) == sg))
        if idx.size == 0:
            continue
        tau = sg * W * u
        kern = sg * W * w * et(D * tau) * np.exp(-1j * omega * tau)
        for lo in range(0, idx.size, step):
            t = times[idx[lo:lo + step]]
            out[idx[lo:lo + step]] = np.exp(1j * omega * t) * (_chi(t[:, None] - tau[None, :]) @ kern)
    for lo in range(0, part.size, step):
        idx = part[lo:lo + step]
        t = times[idx]
        sg = np.sign(t)
        L = np.minimum(np.abs(t), W)
        tau = (sg * L)[:, None] * u[None, :]
        s_ = t[:, None] - tau
        f = et(D * tau) * np.exp(1j * omega * s_) * _chi(s_)
        out[idx] = sg * L * (f @ w)
    return out * PHI(times)


def ey_free(star: str, f1: FreeLike, f2: FreeLike, f3: FreeLike, times: np.ndarray) -> SpaceTimeField:
    """Truncated E^Y for free-like inputs whose modulation is constant within each field.

    Every triple then contributes c e^{i(Delta + mu)s} phi(s)^4 to the twisted
    product, so one scalar integral J_Delta per distinct Delta suffices.
    """
    mods = []
    for f in (f1, f2, f3):
        m = f.mod[f.amp != 0]
        if m.size and np.ptp(m) > 0:
            raise ValueError("ey_free needs one modulation per field")
        mods.append(float(m[0]) if m.size else 0.0)
    n = f1.n
    mu = -mods[0] + mods[1] + mods[2]
    plan = group_plan(star, n)
    c = plan.coef * np.conj(f1.amp[plan.k1 + n]) * f2.amp[plan.k2 + n] * f3.amp[plan.k3 + n]
    ng = plan.gk.size
    C = np.bincount(plan.gid, c.real, ng) + 1j * np.bincount(plan.gid, c.imag, ng)
    keep = C != 0
    ud, di = np.unique(plan.gd[keep], return_inverse=True)
    A = sparse.csr_matrix((C[keep], (np.asarray(di).ravel(), plan.gk[keep] + n)), shape=(ud.size, 2 * n + 1))
    tw = np.zeros((times.size, 2 * n + 1), dtype=complex)
    for j, D in enumerate(ud):
        J = eta_causal(float(D), float(D) + mu, times)
        row = A.getrow(j)
        tw[:, row.indices] += np.outer(J, row.data)
    ks2 = np.arange(-n, n + 1).astype(float) ** 2
    return SpaceTimeField(n, times, tw * np.exp(-1j * np.outer(times, ks2)))


def sparse_class_fields(star: str, n: int, rng: np.random.Generator, m: int = 3) -> tuple:
    """Three fields built from m random triples of the class (amplitudes on their frequencies)."""
    amps = [np.zeros(2 * n + 1, dtype=complex) for _ in range(3)]
    picked = []
    for _ in range(m):
        tr = structured_triple(star, n, rng)
        picked.append(tr)
        for a, k in zip(amps, tr):
            a[k + n] += rng.standard_normal() + 1j * rng.standard_normal()
    fs = tuple(FreeLike(a, np.full(2 * n + 1, rng.uniform(-MOD_SPREAD, MOD_SPREAD))) for a in amps)
    return fs + (f"sparse{picked}",)


def ey_bound_probe(star: str, n_values, samples: int = 8, seed: int = 0,
                   lad: ParameterLadder | None = None) -> ProbeReport:
    """Constants for ||E^Y_*(v1, v2, v3)||_{Y1} / (||v1||_{Z0} ||v2||_{Y0} ||v3||_{Y0}) (truncated operator)."""
    if star not in ("N", "L"):
        raise ValueError(f"star must be N or L, got {star!r}")
    lad = lad or ladder(3.0, 0.05)
    Z0, Y0, Y1 = (named_space(s, lad) for s in ("Z0", "Y0", "Y1"))
    rep = ProbeReport(f"EY_{star}", seed, samples, meta={"p0": lad.p0, "delta": lad.delta})
    for n in n_values:
        tab = triple_table(n)
        idx = tab.select(star)
        dmax = float(np.max(np.abs(tab.delta[idx]))) if idx.size else 0.0
        # eta^(lambda / Delta) is non-negligible for lambda / Delta in [-1.1, 4.1]
        dt = _time_step(EY_SPREAD * dmax)
        times = _grid(dt)
        grid = _out_grid(times, 0.8 * np.pi / dt)
        best = 0.0
        for i in range(samples):
            rng = seeded_rng(seed, f"probe/ey_{star}/{n}/{i}")
            if i == 1:
                f1, f2, f3, _ = _edge_fields(star, n)
            else:
                f1, f2, f3, _ = sparse_class_fields(star, n, rng, 1 if i % 2 else 3)
            den = f1.norm(Z0) * f2.norm(Y0) * f3.norm(Y0)
            if den == 0:
                continue
            out = ey_free(star, f1, f2, f3, times)
            if not np.any(out.modes):
                continue
            best = max(best, xsb_norm(twist(out, grid), Y1) / den)
        rep.cells[(lad.p0, n)] = best
        rep.meta[f"dt_{n}"] = dt
    return rep.finalize()


def single_mode_calibration(star: str, n: int, triple: tuple, lad: ParameterLadder | None = None,
                            mods: tuple = (0.3, -0.2, 0.5)) -> tuple[float, float]:
    """Y1 norm of E^Y on one triple, from the time domain and from the kernel K^Y.

    Each slot carries a single mode with unit amplitude; on the frequency
    side the input transform is known exactly and the output is
    k1 * int K^Y_Delta(lambda, sigma) chi^(sigma - Delta - mu) d sigma with
    chi = phi^3 (the three envelopes) and mu the modulation sum.
    """
    from .duhamel import kernel_parts

    lad = lad or ladder(3.0, 0.05)
    Y1 = named_space("Y1", lad)
    k1, k2, k3 = triple
    k = k2 + k3 - k1
    delta = k * k + k1 * k1 - k2 * k2 - k3 * k3
    fs = []
    for kk, m in zip(triple, mods):
        a = np.zeros(2 * n + 1, dtype=complex)
        a[kk + n] = 1.0
        fs.append(FreeLike(a, np.full(2 * n + 1, m)))
    dt = _time_step(EY_SPREAD * abs(delta))
    times = _grid(dt)
    out = ey_free(star, *fs, times)
    lam_ext = EY_SPREAD * abs(delta) + 60.0
    grid = LambdaGrid(-lam_ext, lam_ext, 0.25)
    t_norm = xsb_norm(twist(out, grid), Y1)
    # frequency side
    mu = -mods[0] + mods[1] + mods[2]
    chi_t = np.arange(-2.0, 2.0 + 1e-12, 2.0**-10)
    sig = LambdaGrid(delta + mu - 40.0, delta + mu + 40.0, 0.125)
    w = np.full(chi_t.size, 2.0**-10)
    w[0] = w[-1] = 2.0**-9
    chi = PHI(chi_t) ** 3
    chi_hat = (np.exp(-1j * np.outer(sig.values - delta - mu, chi_t)) @ (chi * w)) / (2 * np.pi)
    ws = np.full(sig.size, sig.spacing)
    ws[0] = ws[-1] = sig.spacing / 2
    lam = grid.values
    vals = np.zeros((2 * n + 1, lam.size), dtype=complex)
    parts = kernel_parts(lam, sig.values, float(delta))
    vals[k + n] = k1 * (parts.Y @ (chi_hat * ws))
    f_norm = xsb_norm(SpaceTimeField(n, None, None, TwistedRep(lam, vals)), Y1)
    return t_norm, f_norm
