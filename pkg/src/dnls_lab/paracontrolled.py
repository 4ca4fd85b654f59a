"""Paracontrolled fixed points: v = v[w], membership of the solution manifold,
the right-hand side of the w-equation and its outer Picard iteration.

Everything lives on a symmetric grid t = j dt, |t| <= 2T, and the outer
iterate is localized by phi_T, which is 1 on the working interval [-T, T].
Norm bounds are computed from the extension phi_T * f, so they are upper
bounds for the restriction norms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import fmt
from .duhamel import EY_apply, IC_apply
from .gauge import gauge_inverse
from .interactions import Multiplier, quintic_apply_series, unit_multiplier
from .norms import ParameterLadder, ladder, named_space, xsb_norm
from .profiles import CutoffProfile
from .solver import DivergenceError, IntegratorConfig, integrate_dnls
from .spectral_core import LambdaGrid, SpaceTimeField, SpectralField, free_evolution, twist

DEFAULT_DT = 2.0**-12
BLOWUP = 1.0e6


class IterationError(DivergenceError):
    """Divergence of the inner (v given w), outer (w) or membership iteration."""

    def __init__(self, msg: str, history: list[float], stage: str):
        super().__init__(f"[{stage}] {msg}", history)
        self.stage = stage


def standard_grid(T: float, dt: float = DEFAULT_DT) -> np.ndarray:
    """Symmetric grid j dt covering [-2T, 2T], with t = 0 a node."""
    m = int(math.ceil(2 * T / dt - 1e-9))
    return dt * np.arange(-m, m + 1)


@dataclass
class IterRecord:
    iter: int
    ratio: float
    residual: float
    z_bound: float = math.nan
    y_bound: float = math.nan


def log_text(records: list[IterRecord]) -> str:
    lines = ["iter, ratio, residual, z_bound, y_bound"]
    lines += [", ".join([str(r.iter)] + [fmt(x) for x in (r.ratio, r.residual, r.z_bound, r.y_bound)]) for r in records]
    return "\n".join(lines) + "\n"


@dataclass
class ParacontrolledPair:
    w: SpaceTimeField
    v: SpaceTimeField
    residual: float
    log: list[IterRecord] = field(default_factory=list)
    converged: bool = False
    multipliers_supplied: bool = False
    z_bound: float = math.nan
    y_bound: float = math.nan

    @property
    def structural_only(self) -> bool:
        return not self.multipliers_supplied

    @property
    def ratios(self) -> list[float]:
        return [r.ratio for r in self.log if not math.isnan(r.ratio)]


# --------------------------------------------------------------------------
# norms of extensions


def _half_T(F: SpaceTimeField) -> float:
    return float(max(abs(F.times[0]), abs(F.times[-1]))) / 2


def extension_bound(F: SpaceTimeField, space: str, lad: ParameterLadder, T: float | None = None) -> float:
    """||phi_T F|| in the named space, an upper bound for the norm on [-T, T]."""
    T = _half_T(F) if T is None else T
    G = F.time_multiply(CutoffProfile(T)(F.times))
    duration = F.times[-1] - F.times[0]
    grid = LambdaGrid(-0.8 * np.pi / F.dt, 0.8 * np.pi / F.dt, min(0.5, np.pi / duration))
    if not np.any(G.modes):
        return 0.0
    return xsb_norm(twist(G, grid), named_space(space, lad))


# --------------------------------------------------------------------------
# v = v[w]


def _sup(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def _ey_map(w: SpaceTimeField, v: SpaceTimeField, M: Multiplier | None) -> np.ndarray:
    return EY_apply("N", w, w, v, M=M).modes + EY_apply("L", w, v, v, M=M).modes


def _iterate(step, start: SpaceTimeField, tol: float, max_iter: int, stage: str):
    """Run x <- step(x) until the sup-difference is <= tol.

    Raises IterationError when the contraction ratio is >= 1 three times in
    a row or the iterate leaves every reasonable bound.
    """
    x = start
    log: list[IterRecord] = []
    prev = None
    bad = 0
    history: list[float] = []
    for it in range(1, max_iter + 1):
        new = step(x)
        d = _sup(new.modes - x.modes)
        history.append(d)
        if not math.isfinite(d) or _sup(new.modes) > BLOWUP:
            raise IterationError(f"iterate left the bounded region at step {it}", history, stage)
        ratio = d / prev if prev not in (None, 0.0) else math.nan
        log.append(IterRecord(it, ratio, d))
        x = new
        if d <= tol:
            return x, log, True
        bad = bad + 1 if ratio >= 1 else 0
        if bad >= 3:
            raise IterationError("contraction ratio >= 1 for 3 consecutive steps", history, stage)
        prev = d
    return x, log, False


def solve_v_given_w(w: SpaceTimeField, tol: float = 1e-12, max_iter: int = 50,
                    M: Multiplier | None = None) -> ParacontrolledPair:
    """Fixed point of v -> w + E^Y_N(w, w, v) + E^Y_L(w, v, v), starting from v = w."""
    v, log, ok = _iterate(lambda x: w.with_modes(w.modes + _ey_map(w, x, M)), w, tol, max_iter, "inner")
    residual = _sup(v.modes - w.modes - _ey_map(w, v, M))
    return ParacontrolledPair(w, v, residual, log, ok, M is not None and not M.unit)


def homogeneity_order(w: SpaceTimeField, eps: float, M: Multiplier | None = None, tol: float = 1e-16) -> float:
    """log2 of ||v[eps w] - eps w|| / ||v[eps w / 2] - eps w / 2||; about 3 for small eps."""
    a = solve_v_given_w(w * eps, tol=tol, M=M)
    b = solve_v_given_w(w * (eps / 2), tol=tol, M=M)
    na = _sup(a.v.modes - a.w.modes)
    nb = _sup(b.v.modes - b.w.modes)
    return math.log2(na / nb)


def lipschitz_estimate(w: SpaceTimeField, direction: SpaceTimeField, h: float,
                       M: Multiplier | None = None, tol: float = 1e-15) -> float:
    """||v[w + h d] - v[w]|| / ||h d|| (sup norms)."""
    a = solve_v_given_w(w, tol=tol, M=M)
    b = solve_v_given_w(w + direction * h, tol=tol, M=M)
    return _sup(b.v.modes - a.v.modes) / (abs(h) * _sup(direction.modes))


def bisect_amplitude(works, lo: float, hi: float, steps: int = 20) -> float:
    """Largest amplitude in [lo, hi] (to bisection accuracy) with works(amplitude) true.

    ``works(lo)`` must hold; if ``works(hi)`` holds, hi is returned.
    """
    if not works(lo):
        raise ValueError("the lower amplitude does not satisfy the criterion")
    if works(hi):
        return hi
    for _ in range(steps):
        mid = math.sqrt(lo * hi) if lo > 0 else (lo + hi) / 2
        if works(mid):
            lo = mid
        else:
            hi = mid
    return lo


def contracts(w_unit: SpaceTimeField, ratio_max: float = 0.5, M: Multiplier | None = None,
              tol: float = 1e-12, max_iter: int = 30):
    """Criterion for bisect_amplitude: the inner iteration at amplitude a converges with ratios <= ratio_max."""

    def works(a: float) -> bool:
        try:
            pair = solve_v_given_w(w_unit * a, tol=tol * max(a, 1e-300), max_iter=max_iter, M=M)
        except IterationError:
            return False
        return pair.converged and all(r <= ratio_max for r in pair.ratios)

    return works


# --------------------------------------------------------------------------
# membership


@dataclass
class Membership:
    is_member: bool
    w: SpaceTimeField | None
    report: dict


def manifold_membership(v: SpaceTimeField, tol: float = 1e-12, M: Multiplier | None = None,
                        lad: ParameterLadder | None = None, max_iter: int = 50) -> Membership:
    """Recover w from v by w <- v - E^Y_N(w, w, v) - E^Y_L(w, v, v) and check the norm bounds."""
    lad = lad or ladder(3.0, 0.05)
    rep = {"A2": lad.A2, "A3": lad.A3, "upper_bound_only": True}

    def step(w):
        return v.with_modes(v.modes - _ey_map(w, v, M))

    try:
        w, log, ok = _iterate(step, v, tol, max_iter, "membership")
    except IterationError as e:
        rep.update(converged=False, reason=str(e), history=e.history)
        return Membership(False, None, rep)
    z = extension_bound(w, "Z0", lad)
    y = extension_bound(v, "Y0", lad)
    rep.update(converged=ok, iterations=len(log), z_bound=z, y_bound=y,
               ratios=[r.ratio for r in log])
    member = ok and z <= lad.A2 and y <= lad.A3
    return Membership(member, w, rep)


# --------------------------------------------------------------------------
# the w-equation


RHS_TERMS = ("free", "Q", "H", "S", "N_diff", "L_diff", "EX_N", "EX_L")


@dataclass
class RHS:
    terms: dict

    @property
    def total(self) -> SpaceTimeField:
        out = None
        for name in RHS_TERMS:
            t = self.terms[name]
            out = t if out is None else out + t
        return out


def w_rhs(w: SpaceTimeField, v: SpaceTimeField, v0: SpectralField, M3: Multiplier | None = None,
          M5: Multiplier | None = None) -> RHS:
    """All summands of the right-hand side of the w-equation, retrievable by name."""
    from .duhamel import duhamel_series_all

    n = v.n_max
    M5 = M5 or unit_multiplier(5)
    terms = {"free": free_evolution(v0, v.times)}
    q = quintic_apply_series([v.modes] * 5, n, M5)
    terms["Q"] = duhamel_series_all(v.with_modes(q))
    terms["H"] = IC_apply("H", v, v, v, M=M3)
    terms["S"] = IC_apply("S", v, v, v, M=M3)
    terms["N_diff"] = IC_apply("N", v, v, v, M=M3) - IC_apply("N", w, w, v, M=M3)
    terms["L_diff"] = IC_apply("L", v, v, v, M=M3) - IC_apply("L", w, v, v, M=M3)
    terms["EX_N"] = IC_apply("N", w, w, v, M=M3) - EY_apply("N", w, w, v, M=M3)
    terms["EX_L"] = IC_apply("L", w, v, v, M=M3) - EY_apply("L", w, v, v, M=M3)
    return RHS(terms)


def picard_solve_w(v0: SpectralField, lad: ParameterLadder | None = None, T: float = 0.1,
                   tol: float = 1e-12, max_iter: int = 12, M3: Multiplier | None = None,
                   M5: Multiplier | None = None, dt: float = DEFAULT_DT,
                   w_init: SpaceTimeField | None = None, with_bounds: bool = True) -> ParacontrolledPair:
    """Outer iteration w <- phi_T * rhs(w, v[w], v0), inner tolerance tol / 100."""
    if not 0 < T <= 1:
        raise ValueError("need 0 < T <= 1")
    lad = lad or ladder(3.0, 0.05)
    times = standard_grid(T, dt)
    cut = CutoffProfile(T)(times)
    w = w_init if w_init is not None else free_evolution(v0, times).time_multiply(cut)
    log: list[IterRecord] = []
    prev, bad, history = None, 0, []
    pair = None
    supplied = any(m is not None and not m.unit for m in (M3, M5))
    for it in range(1, max_iter + 1):
        try:
            pair = solve_v_given_w(w, tol=tol / 100, M=M3)
        except IterationError as e:
            raise IterationError(f"inner solve failed at outer step {it}: {e}", e.history, "inner") from e
        new = w_rhs(w, pair.v, v0, M3, M5).total.time_multiply(cut)
        d = _sup(new.modes - w.modes)
        history.append(d)
        if not math.isfinite(d) or _sup(new.modes) > BLOWUP:
            raise IterationError(f"outer iterate left the bounded region at step {it}", history, "outer")
        ratio = d / prev if prev not in (None, 0.0) else math.nan
        rec = IterRecord(it, ratio, d)
        if with_bounds:
            rec.z_bound = extension_bound(new, "Z0", lad, T)
            rec.y_bound = extension_bound(pair.v, "Y0", lad, T)
        log.append(rec)
        w = new
        if d <= tol:
            final = solve_v_given_w(w, tol=tol / 100, M=M3)
            final.log = log
            final.converged = True
            final.multipliers_supplied = supplied
            if with_bounds:
                final.z_bound = extension_bound(w, "Z0", lad, T)
                final.y_bound = extension_bound(final.v, "Y0", lad, T)
            return final
        bad = bad + 1 if ratio >= 1 else 0
        if bad >= 3:
            raise IterationError("outer contraction ratio >= 1 for 3 consecutive steps", history, "outer")
        prev = d
    pair.log = log
    pair.converged = False
    pair.multipliers_supplied = supplied
    return pair


# --------------------------------------------------------------------------
# back to the original unknown


def reconstruct_solution(pair: ParacontrolledPair) -> SpaceTimeField:
    """u = gauge_inverse(v)."""
    return gauge_inverse(pair.v)


def compare_with_integrator(pair: ParacontrolledPair, u0: SpectralField, T: float) -> float:
    """Sup-difference on [0, T] between the reconstruction and the direct integrator.

    Only meaningful when the true multipliers were supplied; otherwise the
    w-equation is a structural surrogate and the comparison is refused.
    """
    if pair.structural_only:
        raise ValueError("structural-only pair (unit multipliers): comparison with the PDE flow is disabled")
    u = reconstruct_solution(pair)
    dt = u.dt
    ref = integrate_dnls(u0, IntegratorConfig(n_max=u0.n_max, dt=dt, T=T))
    i0 = int(np.argmin(np.abs(u.times)))
    m = ref.nt
    return _sup(u.modes[i0:i0 + m] - ref.modes)
