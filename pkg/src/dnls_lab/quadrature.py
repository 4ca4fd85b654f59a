"""Gauss-Legendre panels and principal-value integrals with Richardson extrapolation.

A principal value PV int f(mu)/(mu - x0) dmu is written as the folded
integral int_0^inf [f(x0 + s) - f(x0 - s)] / s ds.  Excising (0, h) leaves
an error c1 h + c3 h^3 + ... (the folded integrand is even in s), so three
half-widths h, h/2, h/4 give two Richardson levels, and the gap between
them is reported as the convergence diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

EXCISIONS = (0.1, 0.05, 0.025)


class PVConvergenceError(ArithmeticError):
    def __init__(self, msg: str, diagnostics: dict):
        super().__init__(msg)
        self.diagnostics = diagnostics


@lru_cache(maxsize=32)
def _gl(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panels(breaks, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on consecutive intervals [breaks[i], breaks[i+1]]."""
    b = np.asarray(breaks, dtype=float)
    x, w = _gl(order)
    lo, hi = b[:-1, None], b[1:, None]
    half = (hi - lo) / 2
    nodes = (lo + hi) / 2 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_breaks(h: float, M: float, width: float = 0.5) -> np.ndarray:
    """Breakpoints on [h, M]: dyadic up to 1, then uniform panels of the given width."""
    b = [h]
    while b[-1] * 2 < 1.0:
        b.append(b[-1] * 2)
    if b[-1] < 1.0:
        b.append(1.0)
    n = max(1, int(np.ceil((M - 1.0) / width)))
    b.extend(np.linspace(1.0, M, n + 1)[1:])
    return np.array(b)


@dataclass(frozen=True)
class PVMesh:
    """Shared folded mesh on [h_min, M] split into the excision bands.

    ``groups[j]`` selects the nodes in [EXCISIONS[j+1], EXCISIONS[j]] for
    j < len-1 and the last group is [EXCISIONS[0], M].
    """

    nodes: np.ndarray
    weights: np.ndarray
    bands: tuple  # slices of nodes: [h0, M], [h1, h0], [h2, h1]
    hs: tuple


@lru_cache(maxsize=16)
def pv_mesh(M: float, hs: tuple = EXCISIONS, order: int = 16, width: float = 0.5) -> PVMesh:
    outer_n, outer_w = panels(graded_breaks(hs[0], M, width), order)
    parts_n, parts_w, bands = [outer_n], [outer_w], []
    start = outer_n.size
    bands.append(slice(0, start))
    for a, b in zip(hs[1:], hs[:-1]):
        n, w = panels([a, b], order)
        parts_n.append(n)
        parts_w.append(w)
        bands.append(slice(start, start + n.size))
        start += n.size
    nodes = np.concatenate(parts_n)
    weights = np.concatenate(parts_w)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return PVMesh(nodes, weights, tuple(bands), tuple(hs))


def richardson(I: list) -> tuple[np.ndarray, np.ndarray]:
    """Extrapolate I(h), I(h/2), ... (halving) in odd powers of h.

    Returns the top-level value and its distance to the best value of the
    previous level.
    """
    row = [np.asarray(x) for x in I]
    prev = row[-1]
    p = 1
    while len(row) > 1:
        f = 2.0**p
        prev = row[-1]
        row = [(f * b - a) / (f - 1) for a, b in zip(row[:-1], row[1:])]
        p += 2
    return row[0], np.abs(row[0] - prev)


def pv_integral(f, x0: float = 0.0, M: float = 200.0, hs: tuple = EXCISIONS, tol: float = 1e-8,
                order: int = 16, width: float = 0.5, raise_on_fail: bool = True):
    """PV int_{x0-M}^{x0+M} f(mu)/(mu - x0) dmu by excision and Richardson extrapolation.

    Returns (value, diagnostics).  ``f`` must accept arrays.
    """
    mesh = pv_mesh(float(M), tuple(hs), order, width)
    s = mesh.nodes
    vals = (np.asarray(f(x0 + s)) - np.asarray(f(x0 - s))) / s * mesh.weights
    partial = [np.sum(vals[b]) for b in mesh.bands]
    I = [partial[0]]
    for p in partial[1:]:
        I.append(I[-1] + p)
    val, gap = richardson(I)
    diag = {"I_h": [complex(x) for x in I], "hs": list(hs), "gap": float(gap), "M": M}
    if raise_on_fail and not gap <= tol * max(1.0, abs(val)):
        raise PVConvergenceError(f"principal value did not converge (gap {float(gap):.3g})", diag)
    return complex(val) if np.iscomplexobj(val) else float(val), diag


def pv_bilinear(A_plus, A_minus, B_plus, B_minus, mesh: PVMesh):
    """Richardson-extrapolated PV of A(mu) B(mu)/mu as matrix products over the folded mesh.

    ``A_plus[:, j] = A(+s_j)`` etc.; returns (value, gap) matrices.
    """
    w = mesh.weights / mesh.nodes
    partial = []
    for b in mesh.bands:
        partial.append((A_plus[:, b] * w[b]) @ B_plus[b] - (A_minus[:, b] * w[b]) @ B_minus[b])
    I = [partial[0]]
    for p in partial[1:]:
        I.append(I[-1] + p)
    return richardson(I)
