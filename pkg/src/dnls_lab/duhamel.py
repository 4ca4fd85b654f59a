"""Duhamel operators, their time-frequency kernels and the Y/X splitting.

Conventions: the time transform is f^(lambda) = (1/2pi) int f(t) e^{-i lambda t} dt,
H f(x) = PV int f(y) / (x - y) dy, and twisting multiplies mode k by e^{ik^2 t}.
With these, the truncated Duhamel operator has kernel

    K(lambda, sigma) = -i PV int phi^(lambda - mu) phi^(mu - sigma) / mu dmu
                       - i phi^(lambda) (H phi^)(-sigma),

and the eta-weighted piece (time weight eta(Delta tau)) has kernel

    K^Y = -i int phi^(lambda - mu) [h^(mu) (H phi^)(mu - sigma) + phi^(mu - sigma) (H h^)(mu)] dmu

with h^(mu) = eta^(mu / Delta) / |Delta| and (H h^)(mu) = (H eta^)(mu / Delta) / Delta.
Both signs were derived from the sgn-function decomposition of the
indicator 1_{0 < s < t} and are checked against the time-domain operators
by the dual-representation tests.

Time integrals use the trapezoid rule on the sample grid, which must
contain t = 0.  Weighted causal integrals are FFT convolutions, run
separately forward and backward from t = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.signal import fftconvolve

from ._util import bracket, fmt
from .interactions import Multiplier, cubic_apply_series, triple_table, unit_multiplier
from .norms import ParameterLadder, ladder, named_space, xsb_norm
from .profiles import PHI, CutoffProfile, EtaProfile, build_eta, phi, phi_prime
from .quadrature import EXCISIONS, PVConvergenceError, pv_bilinear, pv_mesh
from .spectral_core import LambdaGrid, SpaceTimeField, SpectralField, TwistedRep, _uniform_sum, twist

STARS = ("N", "L")
MU_MARGIN = 250.0
DEFAULT_DT = 2.0**-10


def eta() -> EtaProfile:
    return build_eta()


# --------------------------------------------------------------------------
# time domain


def _zero_index(times: np.ndarray) -> int:
    i0 = int(np.argmin(np.abs(times)))
    dt = times[1] - times[0] if times.size > 1 else 1.0
    if abs(times[i0]) > 1e-9 * dt:
        raise ValueError("time grid must contain t = 0")
    return i0


def _one_side(G: np.ndarray, h: np.ndarray | None, dt: float) -> np.ndarray:
    """int_0^{t_n} h(t_n - s) G(s) ds for t_n = n dt, trapezoid; h=None means h = 1."""
    n = G.shape[0]
    if n == 1:
        return np.zeros_like(G)
    if h is None:
        out = np.zeros_like(G)
        out[1:] = np.cumsum((G[1:] + G[:-1]) * (dt / 2), axis=0)
        return out
    nz = np.flatnonzero(h)
    L = int(nz[-1]) + 1 if nz.size else 1
    conv = fftconvolve(h[:L, None], G, axes=0)[:n]
    conv -= 0.5 * h[:n, None] * G[:1] + 0.5 * h[0] * G
    conv[0] = 0
    return dt * conv


def causal_integral(G: np.ndarray, times: np.ndarray, weight=None) -> np.ndarray:
    """int_0^t w(t - s) G(s) ds on every grid point (columns of G are independent).

    ``weight`` is a vectorized function of the lag or None for w = 1.
    """
    i0 = _zero_index(times)
    dt = float(times[1] - times[0])
    out = np.zeros(G.shape, dtype=complex)
    nf, nb = G.shape[0] - i0, i0 + 1
    lags = np.arange(max(nf, nb)) * dt
    hf = None if weight is None else np.asarray(weight(lags[:nf]))
    hb = None if weight is None else np.asarray(weight(-lags[:nb]))
    out[i0:] = _one_side(G[i0:], hf, dt)
    out[: i0 + 1] = -_one_side(G[i0::-1], hb, dt)[::-1]
    return out


def _k2(n: int) -> np.ndarray:
    return (np.arange(-n, n + 1) ** 2).astype(float)


def duhamel_series_all(F: SpaceTimeField) -> SpaceTimeField:
    """I F on the whole grid (which must contain 0)."""
    k2 = _k2(F.n_max)
    ph = np.exp(1j * np.outer(F.times, k2))
    return F.with_modes(np.conj(ph) * causal_integral(ph * F.modes, F.times))


def duhamel_apply(F: SpaceTimeField, t: float) -> SpectralField:
    """I F(t) = int_0^t e^{-i(t - s) k^2} F(s) ds by the trapezoid rule."""
    if F.modes is None:
        raise ValueError("duhamel_apply needs the physical-time representation")
    times = F.times
    i0 = _zero_index(times)
    j = int(np.argmin(np.abs(times - t)))
    if abs(times[j] - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError(f"t = {t} is not a point of the time grid [{times[0]}, {times[-1]}]")
    lo, hi = sorted((i0, j))
    sl = slice(lo, hi + 1)
    k2 = _k2(F.n_max)
    G = np.exp(-1j * np.outer(t - times[sl], k2)) * F.modes[sl]
    if hi == lo:
        return SpectralField.zeros(F.n_max)
    val = np.trapezoid(G, dx=F.dt, axis=0)
    return SpectralField(F.n_max, val if j >= i0 else -val)


def _check_cover(times: np.ndarray, T: float) -> None:
    if times[0] > -2 * T + 1e-12 or times[-1] < 2 * T - 1e-12:
        raise ValueError(f"time grid [{times[0]}, {times[-1]}] does not cover [-{2 * T}, {2 * T}]")


def spectral_antiderivative(G: np.ndarray, times: np.ndarray, edge_tol: float = 1e-10) -> np.ndarray:
    """int_0^t G(s) ds for columns G vanishing at both ends of the grid.

    G minus its mass times a smooth unit bump has mean zero, so its
    antiderivative is obtained by dividing the (zero padded) DFT by i xi;
    the bump's own antiderivative is known in closed form.  Spectrally
    accurate as long as G is resolved by the grid, unlike the trapezoid
    cumulative sum whose error grows like (frequency * dt)^2.
    """
    scale = np.max(np.abs(G)) if G.size else 0.0
    if scale and max(np.max(np.abs(G[0])), np.max(np.abs(G[-1]))) > edge_tol * scale:
        raise ValueError("spectral antiderivative needs data vanishing at both grid ends")
    i0 = _zero_index(times)
    dt = float(times[1] - times[0])
    c = times[-1] / 2
    if c <= 0:
        raise ValueError("grid must extend to positive times")
    bump = np.where(times > 0, -phi_prime(times / c) / c, 0.0)
    step = np.where(times > 0, 1.0 - phi(times / c), 0.0)
    mass = np.sum(G, axis=0) * dt
    R = G - bump[:, None] * mass
    N = 2 * times.size
    xi = 2 * np.pi * np.fft.fftfreq(N, dt)
    xi[0] = 1.0
    F = np.fft.fft(R, N, axis=0) / (1j * xi[:, None])
    F[0] = 0.0
    A = np.fft.ifft(F, axis=0)[: times.size]
    A = A - A[:1] + step[:, None] * mass
    return A - A[i0]


def duhamel_spectral_all(F: SpaceTimeField) -> SpaceTimeField:
    """I F for compactly supported F (zero at the grid ends), spectrally accurate."""
    k2 = _k2(F.n_max)
    ph = np.exp(1j * np.outer(F.times, k2))
    return F.with_modes(np.conj(ph) * spectral_antiderivative(ph * F.modes, F.times))


def truncated_duhamel(F: SpaceTimeField, T: float = 1.0, method: str = "spectral") -> SpaceTimeField:
    """phi_T(t) I(phi_T(s) F(s)) on the grid of F.

    ``method="spectral"`` is exact up to sampling; ``"trapezoid"`` is the
    cumulative trapezoid sum.
    """
    cut = CutoffProfile(T)
    _check_cover(F.times, T)
    g = cut(F.times)
    if method == "spectral":
        inner = duhamel_spectral_all(F.time_multiply(g))
    elif method == "trapezoid":
        inner = duhamel_series_all(F.time_multiply(g))
    else:
        raise ValueError(f"unknown method {method!r}")
    return inner.time_multiply(g)


# --------------------------------------------------------------------------
# cubic Duhamel terms grouped by (k, Delta)


@dataclass(frozen=True)
class CubicGroups:
    """Twisted products e^{ik^2 s} sum k1 M conj(v1) v2 v3, one column per (k, Delta)."""

    n: int
    times: np.ndarray
    k: np.ndarray
    delta: np.ndarray
    G: np.ndarray  # (n_t, n_groups)


@dataclass(frozen=True)
class GroupPlan:
    """Triples of one class bucketed by (k, Delta); groups are sorted by Delta."""

    n: int
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    coef: np.ndarray
    gid: np.ndarray
    gk: np.ndarray
    gd: np.ndarray


def group_plan(star: str, n: int, M: Multiplier | None = None) -> GroupPlan:
    if star not in STARS and star not in ("H", "S", "full"):
        raise ValueError(f"unknown class {star!r}")
    M = M or unit_multiplier(3)
    tab = triple_table(n)
    idx = tab.select(star)
    k, k1, k2, k3, d = tab.k[idx], tab.k1[idx], tab.k2[idx], tab.k3[idx], tab.delta[idx]
    coef = k1 * (M(k, k1, k2, k3) if not M.unit else 1.0)
    if idx.size:
        # sort keys by (Delta, k) so equal Delta groups are contiguous
        uniq, gid = np.unique(np.stack([d, k], axis=1), axis=0, return_inverse=True)
        gid = np.asarray(gid).ravel()
    else:
        uniq, gid = np.zeros((0, 2), int), idx
    return GroupPlan(n, k1, k2, k3, coef, gid, uniq[:, 1].astype(int), uniq[:, 0].astype(int))


def _group_columns(plan: GroupPlan, v1, v2, v3, g0: int, g1: int, chunk: int = 4_000_000) -> np.ndarray:
    """Twisted group sums for groups g0 <= g < g1, shape (n_t, g1 - g0)."""
    n = plan.n
    sel = np.flatnonzero((plan.gid >= g0) & (plan.gid < g1))
    S = sparse.csr_matrix((np.ones(sel.size), (np.arange(sel.size), plan.gid[sel] - g0)),
                          shape=(sel.size, g1 - g0))
    k1, k2, k3, coef = plan.k1[sel], plan.k2[sel], plan.k3[sel], plan.coef[sel]
    nt = v1.nt
    G = np.zeros((nt, g1 - g0), dtype=complex)
    step = max(1, chunk // max(1, sel.size))
    a, b, c = v1.modes, v2.modes, v3.modes
    for lo in range(0, nt, step):
        sl = slice(lo, min(nt, lo + step))
        prod = np.conj(a[sl][:, k1 + n]) * b[sl][:, k2 + n] * c[sl][:, k3 + n] * coef
        G[sl] = (S.T @ prod.T).T
    G *= np.exp(1j * np.outer(v1.times, plan.gk[g0:g1].astype(float) ** 2))
    return G


def _check_inputs(v1, v2, v3) -> None:
    n = v1.n_max
    for v in (v2, v3):
        if v.n_max != n or v.times.shape != v1.times.shape or np.max(np.abs(v.times - v1.times)) > 1e-12:
            raise ValueError("inputs must share n_max and the time grid")


def cubic_groups(star: str, v1: SpaceTimeField, v2: SpaceTimeField, v3: SpaceTimeField,
                 M: Multiplier | None = None) -> CubicGroups:
    _check_inputs(v1, v2, v3)
    plan = group_plan(star, v1.n_max, M)
    G = _group_columns(plan, v1, v2, v3, 0, plan.gk.size)
    return CubicGroups(v1.n_max, v1.times, plan.gk, plan.gd, G)


def _assemble(groups: CubicGroups, cols: np.ndarray) -> np.ndarray:
    """Sum grouped causal integrals per output mode and undo the twist."""
    n = groups.n
    out = np.zeros((groups.times.size, 2 * n + 1), dtype=complex)
    for j in range(2 * n + 1):
        sel = groups.k == j - n
        if sel.any():
            out[:, j] = cols[:, sel].sum(axis=1)
    return out * np.exp(-1j * np.outer(groups.times, _k2(n)))


def _weighted(groups: CubicGroups, mode: str) -> np.ndarray:
    """Causal integrals of every group column with weight eta(Delta tau) or 1 - eta(Delta tau)."""
    et = eta()
    cols = np.zeros_like(groups.G)
    for D in np.unique(groups.delta):
        sel = groups.delta == D
        R = et.support_radius() / max(abs(D), 1e-300)
        if mode == "eta":
            w = lambda tau, D=D, R=R: np.where(np.abs(tau) <= R, et(D * tau), 0.0)  # noqa: E731
        else:
            w = lambda tau, D=D: 1.0 - et(D * tau)  # noqa: E731
        cols[:, sel] = causal_integral(groups.G[:, sel], groups.times, w)
    return cols


def _cubic_time(star, v1, v2, v3, truncated, M, mode, budget: float = 1e7) -> SpaceTimeField:
    _check_inputs(v1, v2, v3)
    if truncated:
        _check_cover(v1.times, 1.0)
        v1 = v1.time_multiply(PHI(v1.times))
    plan = group_plan(star, v1.n_max, M)
    n, nt = v1.n_max, v1.nt
    out = np.zeros((nt, 2 * n + 1), dtype=complex)
    width = max(1, int(budget // nt))
    g0, ng = 0, plan.gk.size
    while g0 < ng:
        # never split one Delta across batches
        g1 = min(ng, g0 + width)
        while g1 < ng and plan.gd[g1] == plan.gd[g1 - 1]:
            g1 += 1
        G = _group_columns(plan, v1, v2, v3, g0, g1)
        grp = CubicGroups(n, v1.times, plan.gk[g0:g1], plan.gd[g0:g1], G)
        out += _assemble(grp, _weighted(grp, mode))
        g0 = g1
    if truncated:
        out = out * PHI(v1.times)[:, None]
    return SpaceTimeField(n, v1.times, out)


def IC_apply(star: str, v1, v2, v3, truncated: bool = False, M: Multiplier | None = None) -> SpaceTimeField:
    """I applied to the class-restricted cubic term C_*(v1, v2, v3)."""
    if star not in STARS and star not in ("H", "S", "full"):
        raise ValueError(f"unknown class {star!r}")
    if truncated:
        _check_cover(v1.times, 1.0)
        v1 = v1.time_multiply(PHI(v1.times))
    c = cubic_apply_series(star, v1.modes, v2.modes, v3.modes, v1.n_max, M)
    out = (duhamel_spectral_all if truncated else duhamel_series_all)(v1.with_modes(c))
    return out.time_multiply(PHI(v1.times)) if truncated else out


def _check_star(star: str) -> None:
    if star not in STARS:
        raise ValueError(f"the Y/X splitting is defined for classes N and L, got {star!r}")


def EY_apply(star: str, v1, v2, v3, truncated: bool = False, M: Multiplier | None = None) -> SpaceTimeField:
    """Duhamel integral of the cubic term with time weight eta(Delta (t - s))."""
    _check_star(star)
    return _cubic_time(star, v1, v2, v3, truncated, M, "eta")


def EX_apply(star: str, v1, v2, v3, split: str = "whole", truncated: bool = False,
             M: Multiplier | None = None, method: str = "complement",
             lam: LambdaGrid | None = None, sigma: LambdaGrid | None = None) -> SpaceTimeField:
    """The complementary piece with weight 1 - eta(Delta (t - s)).

    ``split="whole"`` works in time: ``method="complement"`` returns I C - E^Y,
    ``method="direct"`` integrates against 1 - eta directly.  ``split`` X0 or
    Xplus evaluates the truncated operator on the frequency side from the
    kernel pieces and returns a twisted field on the ``lam`` grid.
    """
    _check_star(star)
    if split == "whole":
        if method == "complement":
            ic = IC_apply(star, v1, v2, v3, truncated, M)
            return ic - EY_apply(star, v1, v2, v3, truncated, M)
        if method == "direct":
            return _cubic_time(star, v1, v2, v3, truncated, M, "complement")
        raise ValueError(f"unknown method {method!r}")
    if split not in ("X0", "Xplus", "X", "Y"):
        raise ValueError(f"unknown split {split!r}")
    if lam is None or sigma is None:
        raise ValueError("frequency-side evaluation needs lambda and sigma grids")
    grp = cubic_groups(star, v1, v2, v3, M)
    return frequency_apply(grp, split, lam, sigma)


# --------------------------------------------------------------------------
# kernels


def _h_hat(delta: float):
    et = eta()
    return lambda mu: et.hat(mu / delta) / abs(delta)


def _H_h_hat(delta: float):
    et = eta()
    return lambda mu: et.hilbert_hat(mu / delta) / delta


@dataclass
class KernelParts:
    """Kernel pieces on a (lambda, sigma) grid.

    K is the truncated Duhamel kernel; for a given Delta, Y is the eta piece
    and K - Y = T1 + T2 + T3 with
      T1 = -i PV int phi^ phi^ [1/mu - H h^(mu)],
      T2 = +i int phi^(lambda - mu) h^(mu) (H phi^)(mu - sigma),
      T3 = -i phi^(lambda) (H phi^)(-sigma).
    ``gap`` is the largest Richardson disagreement over the table.
    """

    lam: np.ndarray
    sig: np.ndarray
    K: np.ndarray
    gap: float
    delta: float | None = None
    Y: np.ndarray | None = None
    T1: np.ndarray | None = None
    T2: np.ndarray | None = None
    T3: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    @property
    def X(self) -> np.ndarray:
        return self.K - self.Y

    def _masks(self):
        L, S = np.meshgrid(self.lam, self.sig, indexing="ij")
        D = self.delta
        sig_big = bracket(S) >= bracket(D)
        near = bracket(L - S) >= bracket(S - D)
        return sig_big, near

    @property
    def X0(self) -> np.ndarray:
        sig_big, near = self._masks()
        return np.where(sig_big, self.T3, 0) + np.where(near, self.T2, 0)

    @property
    def Xplus(self) -> np.ndarray:
        sig_big, near = self._masks()
        return self.T1 + np.where(sig_big, 0, self.T3) + np.where(near, 0, self.T2)

    def piece(self, name: str) -> np.ndarray:
        return {"K": self.K, "Y": self.Y, "X": self.X if self.Y is not None else None,
                "X0": self.X0 if self.Y is not None else None,
                "Xplus": self.Xplus if self.Y is not None else None}[name]


def kernel_parts(lam, sig, delta: float | None = None, hs: tuple = EXCISIONS, order: int = 16,
                 width: float = 0.5, margin: float = MU_MARGIN, budget: float = 4e8) -> KernelParts:
    """Evaluate K (and the Delta pieces) by principal-value quadrature on a shared mu-mesh."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    sig = np.atleast_1d(np.asarray(sig, dtype=float))
    M = float(max(np.max(np.abs(lam)), np.max(np.abs(sig))) + margin)
    mesh = pv_mesh(M, tuple(hs), order, width)
    s = mesh.nodes
    fh, Hf = PHI.hat_unit, PHI.hilbert_hat_unit
    nl, ns = lam.size, sig.size
    P1 = np.zeros((nl, ns))
    gaps = [0.0]
    want = delta is not None
    if want:
        hh, Hh = _h_hat(delta), _H_h_hat(delta)
        sHp, sHm = s * Hh(s), -s * Hh(-s)
        shp, shm = s * hh(s), -s * hh(-s)
        Q1 = np.zeros((nl, ns))
        Q2 = np.zeros((nl, ns))
    nb = 4 if want else 2
    cblock = max(1, int(budget // (8 * s.size * nb)))
    rblock = max(1, int(budget // (8 * s.size * 6)))
    for c0 in range(0, ns, cblock):
        cs = slice(c0, min(ns, c0 + cblock))
        sg = sig[cs]
        Bp = fh(s[:, None] - sg[None, :])
        Bm = fh(-s[:, None] - sg[None, :])
        if want:
            Cp = Hf(s[:, None] - sg[None, :])
            Cm = Hf(-s[:, None] - sg[None, :])
        for r0 in range(0, nl, rblock):
            rs = slice(r0, min(nl, r0 + rblock))
            lm = lam[rs]
            Ap = fh(lm[:, None] - s[None, :])
            Am = fh(lm[:, None] + s[None, :])
            v, g = pv_bilinear(Ap, Am, Bp, Bm, mesh)
            P1[rs, cs] = v
            gaps.append(float(np.max(g)))
            if want:
                v, g = pv_bilinear(Ap * sHp, Am * sHm, Bp, Bm, mesh)
                Q1[rs, cs] = v
                gaps.append(float(np.max(g)))
                v, g = pv_bilinear(Ap * shp, Am * shm, Cp, Cm, mesh)
                Q2[rs, cs] = v
                gaps.append(float(np.max(g)))
    T3 = -1j * np.outer(fh(lam), Hf(-sig))
    K = -1j * P1 + T3
    params = {"hs": list(hs), "order": order, "panel_width": width, "mu_max": M}
    out = KernelParts(lam, sig, K, max(gaps), delta, params=params)
    if want:
        out.Y = -1j * Q1 - 1j * Q2
        out.T1 = -1j * (P1 - Q1)
        out.T2 = 1j * Q2
        out.T3 = T3
    return out


def kernel_K(lam: float, sigma: float, tol: float = 1e-4, **kw) -> complex:
    """K(lambda, sigma); raises PVConvergenceError when the Richardson levels disagree."""
    parts = kernel_parts([lam], [sigma], **kw)
    val = complex(parts.K[0, 0])
    if not parts.gap <= tol * max(1.0, abs(val)):
        raise PVConvergenceError(
            f"kernel quadrature did not converge at ({lam}, {sigma}): gap {parts.gap:.3g}",
            {"gap": parts.gap, **parts.params},
        )
    return val


def kernel_table_text(parts: KernelParts, piece: str = "K", B: float = 4.0) -> str:
    """Structured-text grid ``lambda sigma re im`` with a header of the parameters."""
    vals = parts.piece(piece)
    if vals is None:
        raise ValueError(f"piece {piece} needs a Delta")
    head = [
        f"# kernel={piece} delta={parts.delta} B={B}",
        f"# quadrature hs={parts.params['hs']} order={parts.params['order']} "
        f"panel_width={parts.params['panel_width']} mu_max={parts.params['mu_max']} gap={fmt(float(np.max(parts.gap)))}",
        "lambda sigma re im",
    ]
    rows = [
        f"{fmt(a)} {fmt(b)} {fmt(vals[i, j].real)} {fmt(vals[i, j].imag)}"
        for i, a in enumerate(parts.lam) for j, b in enumerate(parts.sig)
    ]
    return "\n".join(head + rows) + "\n"


# --------------------------------------------------------------------------
# kernel bounds


def bound(name: str, lam, sig, delta: float | None = None, B: float = 4.0) -> np.ndarray:
    """Right-hand sides of the kernel estimates (without the constant)."""
    L, S = np.meshgrid(np.asarray(lam, float), np.asarray(sig, float), indexing="ij")
    bl, bs, bls = bracket(L), bracket(S), bracket(L - S)
    if name == "K":
        return (bl**-B + bls**-B) / bs
    bd = bracket(delta)
    bsd, bld = bracket(S - delta), bracket(L - delta)
    m_lam = np.minimum(1 / bd, 1 / bl)
    m_sig = np.minimum(1 / bd, 1 / bs)
    if name == "Y":
        return bls**-B * m_sig + m_lam / bls
    if name == "Y_simple":
        return m_lam / bls
    if name == "X":
        return 1 / (bl**B * bs) + bsd / (bls**B * bs) * m_sig + bld / bls * m_lam**2
    if name == "X0":
        return (bs >= bd) / (bl**B * bd) + (bls >= bsd) * m_lam**2
    if name == "Xplus":
        return (bs < bd) / (bl**B * bs) + bsd / (bls**B * bs) * m_sig + (bls < bsd) * bsd / bls * m_lam**2
    raise ValueError(f"unknown bound {name!r}")


BOUND_FOR = {"K": "K", "Y": "Y", "Y_simple": "Y", "X": "X", "X0": "X0", "Xplus": "Xplus"}


def bound_constant(parts: KernelParts, name: str, B: float = 4.0) -> float:
    """max |piece| / bound over the table; +inf where a nonzero piece meets a zero bound."""
    vals = np.abs(parts.piece(BOUND_FOR[name]))
    rhs = bound(name, parts.lam, parts.sig, parts.delta, B)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(rhs > 0, vals / np.where(rhs > 0, rhs, 1), np.where(vals > 1e-14, np.inf, 0.0))
    return float(np.max(r))


@dataclass(frozen=True)
class BoundFit:
    name: str
    delta: float | None
    constant: float
    constant_refined: float

    @property
    def variation(self) -> float:
        a, b = self.constant, self.constant_refined
        if a == 0 and b == 0:
            return 1.0
        return max(a, b) / min(a, b) if min(a, b) > 0 else math.inf

    @property
    def stable(self) -> bool:
        return self.variation < 2.0


def fit_bounds(names, delta: float | None = None, extent: float = 200.0, spacing: float = 1.0,
               B: float = 4.0) -> dict:
    """Fitted constants for several estimates on a grid and on the grid with half the spacing."""
    consts = {name: [] for name in names}
    for sp in (spacing, spacing / 2):
        g = np.arange(-extent, extent + sp / 2, sp)
        parts = kernel_parts(g, g, delta)
        for name in names:
            consts[name].append(bound_constant(parts, name, B))
    return {name: BoundFit(name, delta, *c) for name, c in consts.items()}


def fit_bound(name: str, delta: float | None = None, extent: float = 200.0, spacing: float = 1.0,
              B: float = 4.0) -> BoundFit:
    return fit_bounds([name], None if name == "K" else delta, extent, spacing, B)[name]


# --------------------------------------------------------------------------
# frequency side


def time_transform(G: np.ndarray, times: np.ndarray, grid: LambdaGrid, support_tol: float = 1e-10) -> np.ndarray:
    """(1/2pi) int G(t) e^{-i sigma t} dt per column of G, trapezoid; returns (n_cols, n_sigma)."""
    scale = float(np.max(np.abs(G))) if G.size else 0.0
    edge = float(max(np.max(np.abs(G[0])), np.max(np.abs(G[-1])))) if G.size else 0.0
    if scale > 0 and edge > support_tol * scale:
        raise ValueError("products do not decay inside the time grid")
    dt = float(times[1] - times[0])
    w = np.full(times.size, dt)
    w[0] = w[-1] = dt / 2
    return _uniform_sum((G * w[:, None]).T, times[0], dt, grid.lo, grid.spacing, grid.size, -1) / (2 * np.pi)


def frequency_apply(groups: CubicGroups, piece: str, lam: LambdaGrid, sigma: LambdaGrid) -> SpaceTimeField:
    """sum_Delta int K^piece_Delta(lambda, sigma) G^_{k, Delta}(sigma) d sigma on the lam grid."""
    n = groups.n
    Ghat = time_transform(groups.G, groups.times, sigma)
    sv = sigma.values
    ws = np.full(sv.size, sigma.spacing)
    ws[0] = ws[-1] = sigma.spacing / 2
    out = np.zeros((2 * n + 1, lam.size), dtype=complex)
    lv = lam.values
    for D in np.unique(groups.delta):
        sel = np.flatnonzero(groups.delta == D)
        parts = kernel_parts(lv, sv, float(D))
        Kp = parts.piece(piece)
        for g in sel:
            out[groups.k[g] + n] += Kp @ (Ghat[g] * ws)
    return SpaceTimeField(n, None, None, TwistedRep(lv, out, 0.0))


def kernel_apply_K(F: SpaceTimeField, lam: LambdaGrid, sigma: LambdaGrid) -> np.ndarray:
    """int K(lambda, sigma) F~(k, sigma) d sigma with F~ computed from the time samples of F."""
    k2 = _k2(F.n_max)
    G = np.exp(1j * np.outer(F.times, k2)) * F.modes
    Fh = time_transform(G, F.times, sigma)
    ws = np.full(sigma.size, sigma.spacing)
    ws[0] = ws[-1] = sigma.spacing / 2
    parts = kernel_parts(lam.values, sigma.values)
    return (Fh * ws) @ parts.K.T


# --------------------------------------------------------------------------
# time localization


@dataclass(frozen=True)
class LocalizationResult:
    theta_hat: float
    T: tuple
    ratios: tuple


def localization_gain_probe(u: SpaceTimeField, T_values, lad: ParameterLadder | None = None,
                            grid: LambdaGrid | None = None, zero_tol: float = 1e-10) -> LocalizationResult:
    """Fit ||phi_T u||_{Y0} / ||u||_{Y1} ~ T^theta over the given T values."""
    if u.modes is None:
        raise ValueError("localization probe needs physical-time samples")
    lad = lad or ladder(3.0, 0.05)
    u0 = u.at(0.0, atol=1e-9 * u.dt)
    scale = u.sup_norm()
    if np.max(np.abs(u0.modes)) > zero_tol * max(scale, 1e-300):
        raise ValueError("localization gain needs u(0) = 0")
    if grid is None:
        duration = u.times[-1] - u.times[0]
        sp = min(0.5, np.pi / duration)
        ext = 0.8 * np.pi / u.dt  # stay below the Nyquist frequency of the samples
        grid = LambdaGrid(-ext, ext, sp)
    Y0, Y1 = named_space("Y0", lad), named_space("Y1", lad)
    base = xsb_norm(twist(u, grid), Y1)
    Ts = [float(T) for T in T_values]
    ratios = []
    for T in Ts:
        cut = CutoffProfile(T)
        ratios.append(xsb_norm(twist(u.time_multiply(cut(u.times)), grid), Y0) / base)
    slope = float(np.polyfit(np.log(Ts), np.log(ratios), 1)[0])
    return LocalizationResult(slope, tuple(Ts), tuple(ratios))
