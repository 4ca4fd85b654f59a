"""Exponent ladder, Fourier-Lebesgue norms and Fourier restriction norms."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._util import bracket
from .spectral_core import SpaceTimeField, SpectralField

CAP = 1.0e6


@dataclass(frozen=True)
class ParameterLadder:
    p0: float
    delta: float
    b0: float
    b1: float
    q0: float
    q1: float
    r0: float
    r1: float
    r2: float
    theta: float
    A: float
    A1: float
    A2: float
    A3: float

    def check(self) -> None:
        """Assert the ordering chain of the exponent system exactly."""
        assert self.b0 < self.b1 < 1, "b0 < b1 < 1"
        assert self.q1 < self.q0, "q1 < q0"
        assert self.r2 < self.r1 < self.r0 < 2, "r2 < r1 < r0 < 2"
        assert self.delta < 1 / (6 * self.p0), "delta < 1/(6 p0)"
        assert 0 < self.theta < self.delta, "0 < theta < delta"
        assert self.A <= self.A1 <= self.A2 <= self.A3, "A <= A1 <= A2 <= A3"

    def as_dict(self) -> dict:
        return asdict(self)


def _radius_chain(A: float) -> tuple[float, float, float]:
    # exp rule, capped; max() keeps the chain monotone even when A exceeds the cap
    out, prev = [], A
    for _ in range(3):
        nxt = max(prev, min(math.exp(prev) if prev < 700 else math.inf, CAP))
        out.append(nxt)
        prev = nxt
    return tuple(out)


def ladder(p0: float, delta: float, A: float = 1.0, theta: float | None = None) -> ParameterLadder:
    """Populate the full exponent system from (p0, delta) and the radius A."""
    if not p0 >= 2:
        raise ValueError(f"p0 = {p0} violates p0 >= 2")
    if not delta > 0:
        raise ValueError(f"delta = {delta} violates delta > 0")
    if not delta < 1 / (6 * p0):
        raise ValueError(f"delta = {delta} violates delta < 1/(6*p0) = {1 / (6 * p0):.6g}")
    if not A > 0:
        raise ValueError(f"A = {A} violates A > 0")
    th = delta / 2 if theta is None else float(theta)
    if not 0 < th < delta:
        raise ValueError(f"theta = {th} violates 0 < theta < delta")
    A1, A2, A3 = _radius_chain(float(A))
    lad = ParameterLadder(
        p0=float(p0),
        delta=float(delta),
        b0=1 - 2 * delta,
        b1=1 - delta,
        q0=1 / (4 * delta),
        q1=1 / (4.5 * delta),
        r0=1 / (0.5 + delta),
        r1=1 / (0.5 + 2 * delta),
        r2=1 / (0.5 + 3 * delta),
        theta=th,
        A=float(A),
        A1=A1,
        A2=A2,
        A3=A3,
    )
    lad.check()
    return lad


@dataclass(frozen=True)
class NormSpec:
    """Exponents (s, b, p, q); b and q are None for purely spatial norms."""

    s: float
    p: float
    b: float | None = None
    q: float | None = None
    name: str = ""

    def __post_init__(self):
        if not self.p >= 2:
            raise ValueError(f"p = {self.p} must be >= 2")
        if (self.b is None) != (self.q is None):
            raise ValueError("b and q must both be given or both omitted")
        if self.q is not None and not self.q >= 1:
            raise ValueError(f"q = {self.q} must be >= 1")


def named_space(name: str, lad: ParameterLadder) -> NormSpec:
    """The four working spaces Y0, Y1, Z0, Z1 built from a ladder."""
    table = {
        "Y0": (0.5, lad.p0, 0.5, lad.r0),
        "Y1": (0.5, lad.p0, 0.5, lad.r1),
        "Z0": (0.5, lad.p0, lad.b0, lad.q0),
        "Z1": (0.5, lad.p0, lad.b1, lad.q0),
    }
    if name not in table:
        raise ValueError(f"unknown space {name!r}; expected one of {sorted(table)}")
    s, p, b, q = table[name]
    return NormSpec(s=s, p=p, b=b, q=q, name=name)


def scaling_index(sigma: float, p: float) -> float:
    """Sobolev exponent with the same scaling as H^sigma_p."""
    if not p >= 1:
        raise ValueError("p must be >= 1")
    inv = 0.0 if math.isinf(p) else 1.0 / p
    return sigma + inv - 0.5


def lp(x: np.ndarray, p: float, axis=None) -> np.ndarray:
    a = np.abs(x)
    if math.isinf(p):
        return np.max(a, axis=axis) if a.size else 0.0
    return np.sum(a**p, axis=axis) ** (1.0 / p)


def fl_norm(f: SpectralField, sigma: float, p: float) -> float:
    """l^p norm of <k>^sigma f^(k) over the stored modes."""
    return float(lp(bracket(f.ks) ** sigma * f.modes, p))


@dataclass(frozen=True)
class TailFit:
    exponent: float
    added: float
    side: str


def _tail(lam: np.ndarray, y: np.ndarray, q: float, side: str, floor: float | None = None) -> tuple[float, TailFit | None]:
    """Integral of y^q beyond the last sample, with y ~ C |lambda|^{-m} fitted on the outer 10%.

    No tail is added when the outer samples are below ``floor`` (default
    1e-12 of the row maximum), i.e. at the transform's roundoff level.
    """
    n = lam.size
    m_pts = max(4, n // 10)
    sl = slice(n - m_pts, n) if side == "hi" else slice(0, m_pts)
    x = np.abs(lam[sl])
    v = y[sl]
    edge = abs(lam[-1] if side == "hi" else lam[0])
    ref = np.max(y) if y.size else 0.0
    if floor is None:
        floor = 1e-12 * ref
    if ref == 0.0 or np.max(v) <= floor or np.any(v <= 0) or np.min(x) <= 1.0:
        return 0.0, None
    slope, icpt = np.polyfit(np.log(x), np.log(v), 1)
    m = -slope
    if m * q <= 1.0:
        return math.inf, TailFit(m, math.inf, side)
    # in logs: steep fits would overflow C**q
    add = math.exp(q * icpt + (1.0 - m * q) * math.log(edge) - math.log(m * q - 1.0))
    return add, TailFit(m, add, side)


def lq_lambda(lam: np.ndarray, g: np.ndarray, b: float, q: float, tail: bool = True):
    """||<lambda>^b g||_{L^q} along the last axis by trapezoid plus a fitted tail.

    Returns (values, tail_fits) where tail_fits lists the per-row corrections.
    """
    g = np.atleast_2d(g)
    y = bracket(lam)[None, :] ** b * np.abs(g)
    if math.isinf(q):
        return np.max(y, axis=-1), []
    dl = lam[1] - lam[0]
    w = np.full(lam.size, dl)
    w[0] = w[-1] = dl / 2
    core = (y**q) @ w
    fits = []
    if tail:
        # roundoff floor of the unweighted transform, carried to the edge weight
        gmax = float(np.max(np.abs(g))) if g.size else 0.0
        floor = 1e-12 * gmax * float(bracket(np.max(np.abs(lam)))) ** max(b, 0.0)
        for i in range(y.shape[0]):
            for side in ("lo", "hi"):
                add, fit = _tail(lam, y[i], q, side, floor)
                core[i] += add
                if fit is not None:
                    fits.append((i, fit))
    return core ** (1.0 / q), fits


def xsb_norm(F: SpaceTimeField, spec: NormSpec, tail: bool = True, return_meta: bool = False):
    """||<k>^s <lambda>^b F~(k, lambda)||_{l^p_k L^q_lambda} from the twisted representation."""
    if F.twisted is None:
        raise ValueError("xsb_norm needs a twisted representation; call twist() first")
    if spec.b is None:
        raise ValueError("xsb_norm needs a spacetime NormSpec (b and q given)")
    rep = F.twisted
    inner, fits = lq_lambda(rep.lam, rep.values, spec.b, spec.q, tail=tail)
    val = float(lp(bracket(F.ks) ** spec.s * inner, spec.p))
    if not return_meta:
        return val
    meta = {
        "lambda_lo": float(rep.lam[0]),
        "lambda_hi": float(rep.lam[-1]),
        "lambda_spacing": rep.spacing,
        "tail_corrections": len(fits),
        "max_tail": max((f.added for _, f in fits), default=0.0),
        "upper_bound_only": True,
    }
    return val, meta


def embedding_holds(src: NormSpec, dst: NormSpec, rule: str = "holder") -> bool:
    """Whether X^{s,b}_{p,q} embeds continuously in X^{s',b'}_{p',q'}.

    ``rule="holder"`` (default) is the condition under which the embedding
    actually follows from Hoelder on Z x R: the l^p part needs p <= p' and
    s' <= s, while on the non-compact lambda-line one needs q' <= q together
    with b' + 1/q' < b + 1/q.  ``rule="literal"`` evaluates the condition in its
    literal form, comparing s + 1/p and b + 1/q with the roles reversed.
    """
    if src.b is None or dst.b is None:
        raise ValueError("embedding_holds compares spacetime norms")
    inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x  # noqa: E731
    if rule == "holder":
        return (
            src.p <= dst.p
            and dst.q <= src.q
            and dst.s <= src.s
            and dst.b + inv(dst.q) < src.b + inv(src.q)
        )
    if rule == "literal":
        return (
            src.p <= dst.p
            and src.q <= dst.q
            and src.s + inv(src.p) < dst.s + inv(dst.p)
            and src.b + inv(src.q) < dst.b + inv(dst.q)
        )
    raise ValueError(f"unknown rule {rule!r}")


def norm_record(space: str, spec: NormSpec, value: float, grid_meta: dict | None = None) -> str:
    """One line of a line-delimited norm report."""
    rec = {
        "space": space,
        "s": spec.s,
        "b": spec.b,
        "p": spec.p,
        "q": spec.q,
        "value": value,
        "grid_meta": grid_meta or {},
    }
    return json.dumps(rec, sort_keys=True)
