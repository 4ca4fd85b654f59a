"""Cubic and quintic gauged nonlinearities and their frequency bookkeeping.

A cubic triple (k1, k2, k3) with output k satisfies k2 + k3 - k1 = k.  It
belongs to V3 when |k2| >= |k3| and k is neither k2 nor k3, or when it is the
diagonal (k, k, k).  V3 is split into four classes by integer thresholds:

    H   |k3| >= 2^-20 |k|
    L   |k2| <  2^-20 |k|
    S   2^-10 |k1| <= |k3| < 2^-20 |k|
    N   everything else

Every comparison is done on integers after cross-multiplying by the powers
of two, so no rounding can move a triple between classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from ._util import bracket
from .spectral_core import SpectralField

CLASSES = ("H", "L", "S", "N")
_CODE = {c: i for i, c in enumerate(CLASSES)}

# --------------------------------------------------------------------------
# multipliers


@dataclass(frozen=True)
class Multiplier:
    """A symbol M(k, k1, ..., kr) with a declared bound |M| <= bound.

    ``rule`` receives integer arrays (k, k1, ..., kr) and returns values of the
    same shape.  ``unit`` marks the constant symbol 1, which enables the fast
    transform-based quintic path.
    """

    arity: int
    rule: Callable[..., np.ndarray]
    bound: float = 1.0
    unit: bool = False
    name: str = "custom"

    def __call__(self, *ks) -> np.ndarray:
        if len(ks) != self.arity + 1:
            raise ValueError(f"multiplier of arity {self.arity} got {len(ks) - 1} frequencies")
        vals = np.asarray(self.rule(*ks), dtype=complex)
        vals = np.broadcast_to(vals, np.broadcast(*[np.asarray(k) for k in ks]).shape)
        if vals.size and np.max(np.abs(vals)) > self.bound * (1 + 1e-12):
            raise ValueError(f"multiplier {self.name} exceeds its declared bound {self.bound}")
        return vals


def unit_multiplier(arity: int) -> Multiplier:
    return Multiplier(arity, lambda *ks: np.ones(np.broadcast(*[np.asarray(k) for k in ks]).shape),
                      1.0, True, f"unit{arity}")


def load_multiplier(path: str, arity: int) -> Multiplier:
    """Table-driven symbol from a text file of lines ``k k1 .. kr re im``.

    Tuples absent from the table evaluate to 0.  The declared bound is the
    largest tabulated modulus.
    """
    table: dict[tuple, complex] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != arity + 3:
                raise ValueError(f"multiplier table row needs {arity + 3} columns: {line!r}")
            key = tuple(int(x) for x in parts[: arity + 1])
            table[key] = complex(float(parts[-2]), float(parts[-1]))
    bound = max((abs(v) for v in table.values()), default=0.0)

    def rule(*ks):
        arrs = np.broadcast_arrays(*[np.asarray(k) for k in ks])
        out = np.zeros(arrs[0].shape, dtype=complex)
        it = np.nditer(arrs, flags=["multi_index"])
        for tup in it:
            out[it.multi_index] = table.get(tuple(int(x) for x in tup), 0.0)
        return out

    return Multiplier(arity, rule, bound, False, f"table:{path}")


# --------------------------------------------------------------------------
# single-triple predicates (Python integers, arbitrary size)


def in_v3(k: int, k1: int, k2: int, k3: int) -> bool:
    if k2 + k3 - k1 != k:
        return False
    if (k1, k2, k3) == (k, k, k):
        return True
    return abs(k2) >= abs(k3) and k != k2 and k != k3


def is_diagonal(k: int, k1: int, k2: int, k3: int) -> bool:
    return k1 == k2 == k3 == k


def classify_triple(k: int, k1: int, k2: int, k3: int) -> str:
    """Class label H, L, S or N of a V3 triple (exact integer comparisons)."""
    k, k1, k2, k3 = int(k), int(k1), int(k2), int(k3)
    if not in_v3(k, k1, k2, k3):
        raise ValueError(f"({k1}, {k2}, {k3}) with output {k} is not in V3")
    a, a1, a2, a3 = abs(k), abs(k1), abs(k2), abs(k3)
    if a3 << 20 >= a:
        return "H"
    if a2 << 20 < a:
        return "L"
    if a1 <= a3 << 10 and a3 << 20 < a:
        return "S"
    return "N"


def resonance_delta(k: int, k1: int, k2: int, k3: int) -> int:
    """Delta = k^2 + k1^2 - k2^2 - k3^2, checked against 2(k-k2)(k-k3) on the constraint."""
    k, k1, k2, k3 = int(k), int(k1), int(k2), int(k3)
    d = k * k + k1 * k1 - k2 * k2 - k3 * k3
    if k2 + k3 - k1 == k:
        f = 2 * (k - k2) * (k - k3)
        if d != f:
            raise AssertionError(f"Delta factorization failed: {d} != {f}")
    return d


@dataclass(frozen=True)
class CubicTriple:
    k: int
    k1: int
    k2: int
    k3: int
    label: str = field(init=False)
    delta: int = field(init=False)
    diagonal: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "label", classify_triple(self.k, self.k1, self.k2, self.k3))
        object.__setattr__(self, "delta", resonance_delta(self.k, self.k1, self.k2, self.k3))
        object.__setattr__(self, "diagonal", is_diagonal(self.k, self.k1, self.k2, self.k3))


# --------------------------------------------------------------------------
# vectorized enumeration


def classify_arrays(k, k1, k2, k3) -> np.ndarray:
    """Vectorized class codes (0=H, 1=L, 2=S, 3=N) for int64 arrays with |k| < 2^40."""
    a, a1, a2, a3 = (np.abs(np.asarray(x, dtype=np.int64)) for x in (k, k1, k2, k3))
    if a.size and max(int(a.max()), int(a1.max()), int(a2.max()), int(a3.max())) >= 1 << 40:
        raise OverflowError("vectorized classification limited to |k| < 2^40")
    code = np.full(a.shape, 3, dtype=np.int8)
    h = (a3 << 20) >= a
    lo = ~h & ((a2 << 20) < a)
    s = ~h & ~lo & (a1 <= (a3 << 10)) & ((a3 << 20) < a)
    code[h] = 0
    code[lo] = 1
    code[s] = 2
    return code


def v3_for_output(k: int, K: int):
    """All V3 triples with output k and |k1|, |k2|, |k3| <= K, in (k2, k3) lexicographic order."""
    r = np.arange(-K, K + 1, dtype=np.int64)
    k2, k3 = np.meshgrid(r, r, indexing="ij")
    k2, k3 = k2.ravel(), k3.ravel()
    k1 = k2 + k3 - k
    keep = (np.abs(k1) <= K) & (
        ((np.abs(k2) >= np.abs(k3)) & (k2 != k) & (k3 != k)) | ((k1 == k) & (k2 == k) & (k3 == k))
    )
    return k1[keep], k2[keep], k3[keep]


@dataclass(frozen=True, eq=False)
class TripleTable:
    """All V3 triples with |k|, |k_j| <= n, ordered by (k, k2, k3)."""

    n: int
    k: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    code: np.ndarray
    delta: np.ndarray

    def select(self, kind: str) -> np.ndarray:
        if kind == "full":
            return np.arange(self.k.size)
        if kind not in _CODE:
            raise ValueError(f"unknown class {kind!r}")
        return np.flatnonzero(self.code == _CODE[kind])


@lru_cache(maxsize=16)
def triple_table(n: int) -> TripleTable:
    parts = [[], [], [], []]
    for k in range(-n, n + 1):
        k1, k2, k3 = v3_for_output(k, n)
        parts[0].append(np.full(k1.size, k, dtype=np.int64))
        parts[1].append(k1)
        parts[2].append(k2)
        parts[3].append(k3)
    k, k1, k2, k3 = (np.concatenate(p) for p in parts)
    code = classify_arrays(k, k1, k2, k3)
    delta = k * k + k1 * k1 - k2 * k2 - k3 * k3
    for a in (k, k1, k2, k3, code, delta):
        a.setflags(write=False)
    return TripleTable(n, k, k1, k2, k3, code, delta)


def _shared_n(*fields: SpectralField) -> int:
    n = fields[0].n_max
    if any(f.n_max != n for f in fields):
        raise ValueError("all inputs must share n_max")
    return n


def cubic_terms(kind: str, v1: SpectralField, v2: SpectralField, v3: SpectralField,
                M: Multiplier | None = None):
    """Per-triple summands k1 M conj(v1(k1)) v2(k2) v3(k3) of the chosen class, with the triple arrays."""
    M = M or unit_multiplier(3)
    if M.arity != 3:
        raise ValueError(f"cubic nonlinearity needs an arity-3 multiplier, got arity {M.arity}")
    n = _shared_n(v1, v2, v3)
    tab = triple_table(n)
    idx = tab.select(kind)
    k, k1, k2, k3 = tab.k[idx], tab.k1[idx], tab.k2[idx], tab.k3[idx]
    coef = k1 * M(k, k1, k2, k3) if not M.unit else k1.astype(float)
    terms = coef * np.conj(v1.modes[k1 + n]) * v2.modes[k2 + n] * v3.modes[k3 + n]
    return k, terms


def cubic_apply(kind: str, v1: SpectralField, v2: SpectralField, v3: SpectralField,
                M: Multiplier | None = None) -> SpectralField:
    """Class-restricted cubic sum, output truncated to the input radius.

    Summands are accumulated sequentially per output mode in (k2, k3)
    lexicographic order, the same order whatever the class filter.
    """
    n = v1.n_max
    k, terms = cubic_terms(kind, v1, v2, v3, M)
    re = np.bincount(k + n, weights=terms.real, minlength=2 * n + 1)
    im = np.bincount(k + n, weights=terms.imag, minlength=2 * n + 1)
    return SpectralField(n, re + 1j * im)


def cubic_apply_direct(kind: str, v1: SpectralField, v2: SpectralField, v3: SpectralField,
                       M: Multiplier | None = None) -> SpectralField:
    """Reference implementation: explicit loops over (k2, k3) per output mode."""
    M = M or unit_multiplier(3)
    n = _shared_n(v1, v2, v3)
    out = np.zeros(2 * n + 1, dtype=complex)
    for k in range(-n, n + 1):
        acc = 0j
        for k2 in range(-n, n + 1):
            for k3 in range(-n, n + 1):
                k1 = k2 + k3 - k
                if abs(k1) > n or not in_v3(k, k1, k2, k3):
                    continue
                if kind != "full" and classify_triple(k, k1, k2, k3) != kind:
                    continue
                m = complex(M(k, k1, k2, k3)) if not M.unit else 1.0
                acc += k1 * m * np.conj(v1[k1]) * v2[k2] * v3[k3]
        out[k + n] = acc
    return SpectralField(n, out)


def cubic_apply_series(kind: str, v1: np.ndarray, v2: np.ndarray, v3: np.ndarray, n: int,
                       M: Multiplier | None = None) -> np.ndarray:
    """cubic_apply on every time slice of (n_t, 2n+1) mode arrays."""
    M = M or unit_multiplier(3)
    tab = triple_table(n)
    idx = tab.select(kind)
    k, k1, k2, k3 = tab.k[idx], tab.k1[idx], tab.k2[idx], tab.k3[idx]
    coef = k1 * (M(k, k1, k2, k3) if not M.unit else 1.0)
    out = np.zeros(v1.shape, dtype=complex)
    if idx.size == 0:
        return out
    bounds = np.searchsorted(k, np.arange(-n, n + 2))
    for j in range(2 * n + 1):
        lo, hi = bounds[j], bounds[j + 1]
        if lo == hi:
            continue
        prod = np.conj(v1[:, k1[lo:hi] + n]) * v2[:, k2[lo:hi] + n] * v3[:, k3[lo:hi] + n]
        out[:, j] = prod @ coef[lo:hi]
    return out


# --------------------------------------------------------------------------
# quintic


def quintic_apply(v1, v2, v3, v4, v5, M: Multiplier | None = None) -> SpectralField:
    """Sum over k1 - k2 + k3 - k4 + k5 = k of M v1 conj(v2) v3 conj(v4) v5, truncated to n.

    The unit symbol is evaluated exactly with a zero-padded transform; any
    other symbol falls back to direct summation.
    """
    M = M or unit_multiplier(5)
    if M.arity != 5:
        raise ValueError(f"quintic nonlinearity needs an arity-5 multiplier, got arity {M.arity}")
    n = _shared_n(v1, v2, v3, v4, v5)
    if not M.unit:
        return quintic_apply_direct(v1, v2, v3, v4, v5, M)
    L = 1
    while L <= 6 * n + 1:
        L *= 2
    from .spectral_core import forward_transform, inverse_transform

    u = [inverse_transform(v, L) for v in (v1, v2, v3, v4, v5)]
    prod = u[0] * np.conj(u[1]) * u[2] * np.conj(u[3]) * u[4]
    return forward_transform(prod).resized(n)


def quintic_apply_direct(v1, v2, v3, v4, v5, M: Multiplier | None = None) -> SpectralField:
    """Direct V5 summation, vectorized over (k1, k2, k3, k4) per output mode."""
    M = M or unit_multiplier(5)
    n = _shared_n(v1, v2, v3, v4, v5)
    r = np.arange(-n, n + 1)
    K1, K2, K3, K4 = np.meshgrid(r, r, r, r, indexing="ij")
    a = (v1.modes[:, None, None, None] * np.conj(v2.modes)[None, :, None, None]
         * v3.modes[None, None, :, None] * np.conj(v4.modes)[None, None, None, :])
    s = K1 - K2 + K3 - K4
    out = np.zeros(2 * n + 1, dtype=complex)
    for k in range(-n, n + 1):
        K5 = k - s
        ok = np.abs(K5) <= n
        m = 1.0 if M.unit else M(np.full(K5[ok].shape, k), K1[ok], K2[ok], K3[ok], K4[ok], K5[ok])
        out[k + n] = np.sum(m * a[ok] * v5.modes[K5[ok] + n])
    return SpectralField(n, out)


def quintic_apply_series(vs: list[np.ndarray], n: int, M: Multiplier | None = None) -> np.ndarray:
    """quintic_apply on every time slice of (n_t, 2n+1) mode arrays."""
    M = M or unit_multiplier(5)
    if not M.unit:
        return np.stack([
            quintic_apply(*[SpectralField(n, v[i]) for v in vs], M=M).modes for i in range(vs[0].shape[0])
        ])
    L = 1
    while L <= 6 * n + 1:
        L *= 2
    ks = np.arange(-n, n + 1)

    def phys(v):
        c = np.zeros((v.shape[0], L), dtype=complex)
        c[:, ks % L] = v
        return np.fft.ifft(c, axis=1) * L

    u = [phys(v) for v in vs]
    prod = u[0] * np.conj(u[1]) * u[2] * np.conj(u[3]) * u[4]
    return (np.fft.fft(prod, axis=1) / L)[:, ks % L]


@dataclass(frozen=True)
class QuinticTuple:
    k: int
    ks: tuple  # (k1, ..., k5)

    SIGNS = (1, -1, 1, -1, 1)

    def __post_init__(self):
        if len(self.ks) != 5:
            raise ValueError("a quintic tuple has five frequencies")
        if sum(s * x for s, x in zip(self.SIGNS, self.ks)) != self.k:
            raise ValueError("k1 - k2 + k3 - k4 + k5 != k")

    @classmethod
    def from_ks(cls, ks) -> "QuinticTuple":
        ks = tuple(int(x) for x in ks)
        return cls(sum(s * x for s, x in zip(cls.SIGNS, ks)), ks)

    def pairs(self) -> list[tuple[int, int]]:
        """All index pairs (1-based) with equal frequencies and opposite signs."""
        out = []
        for i in range(5):
            for j in range(i + 1, 5):
                if self.SIGNS[i] != self.SIGNS[j] and self.ks[i] == self.ks[j]:
                    out.append((i + 1, j + 1))
        return out


def _max_matching(pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    # only two indices carry a minus sign, so a matching has at most two pairs;
    # scanning in lexicographic order returns the smallest maximum matching
    for a in pairs:
        for b in pairs:
            if b > a and not set(a) & set(b):
                return [a, b]
    return pairs[:1]


def pairing_and_index(t: QuinticTuple) -> tuple[list[tuple[int, int]], int, float]:
    """Pairings, the selected index i (1-based), and the witnessed ratio |k_i|/|k|.

    With no pairing i maximizes |k_i|; with one pairing i maximizes |k_i| over
    the remaining three; with two disjoint pairings i is the leftover index.
    Ties go to the smallest index and the smallest lexicographic matching is used.
    """
    pairs = t.pairs()
    match = _max_matching(pairs)
    used = {x for p in match for x in p}
    free = [i for i in range(1, 6) if i not in used]
    mags = [abs(t.ks[i - 1]) for i in free]
    i = free[int(np.argmax(mags))]
    ratio = abs(t.ks[i - 1]) / abs(t.k) if t.k != 0 else float("inf")
    return pairs, i, ratio


def pairing_constant(K: int) -> tuple[float, tuple]:
    """Minimum of |k_i|/|k| over all quintic tuples with |k_j| <= K and k != 0."""
    r = np.arange(-K, K + 1)
    best, wit = float("inf"), None
    for ks in np.array(np.meshgrid(r, r, r, r, r, indexing="ij")).reshape(5, -1).T:
        t = QuinticTuple.from_ks(ks)
        if t.k == 0:
            continue
        _, _, c = pairing_and_index(t)
        if c < best:
            best, wit = c, tuple(int(x) for x in ks)
    return best, wit


# --------------------------------------------------------------------------
# exhaustive checks


def _br(x):
    return bracket(x)


@dataclass
class ClassPropertyReport:
    K: int
    triples: int = 0
    class_counts: dict = field(default_factory=lambda: {c: 0 for c in CLASSES})
    diagonal: int = 0
    overlaps: int = 0
    unclassified: int = 0
    violations: dict = field(default_factory=lambda: {i: [] for i in (1, 2, 3, 4)})
    delta_mismatch: int = 0
    ratio_hs: float = 0.0
    ratio_hs_witness: tuple | None = None
    ratio_ln_max: float = 0.0
    ratio_ln_min: float = float("inf")
    ratio_ln_witness: tuple | None = None

    @property
    def ok(self) -> bool:
        return (self.overlaps == 0 and self.unclassified == 0 and self.delta_mismatch == 0
                and all(not v for v in self.violations.values()))

    def rows(self) -> list[tuple]:
        out = [(c, self.class_counts[c], "", "") for c in CLASSES]
        for i in (1, 2, 3, 4):
            v = self.violations[i]
            out.append((f"item{i}", len(v), "", v[0] if v else ""))
        out.append(("ratio_hs", "", self.ratio_hs, self.ratio_hs_witness))
        out.append(("ratio_ln_max", "", self.ratio_ln_max, self.ratio_ln_witness))
        out.append(("ratio_ln_min", "", self.ratio_ln_min, ""))
        return out


def verify_prop23(K: int, max_witness: int = 5) -> ClassPropertyReport:
    """Exhaustive check of the class properties over |k|, |k_j| <= K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    rep = ClassPropertyReport(K)
    for k in range(-K, K + 1):
        k1, k2, k3 = v3_for_output(k, K)
        kk = np.full(k1.size, k, dtype=np.int64)
        rep.triples += k1.size
        a, a1, a2, a3 = np.abs(kk), np.abs(k1), np.abs(k2), np.abs(k3)
        # independent membership tests, not the cascading classifier
        inH = (a3 << 20) >= a
        inL = (a2 << 20) < a
        inS = ((a3 << 10) >= a1) & ((a3 << 20) < a)
        nmemb = inH.astype(int) + inL + inS
        rep.overlaps += int(np.sum(nmemb > 1))
        inN = nmemb == 0
        code = classify_arrays(kk, k1, k2, k3)
        expect = np.where(inH, 0, np.where(inL, 1, np.where(inS, 2, 3)))
        rep.unclassified += int(np.sum((code != expect) & (nmemb <= 1)))
        for c, m in zip(CLASSES, (inH, inL & ~inH, inS & ~inH & ~inL, inN)):
            rep.class_counts[c] += int(np.sum(m))
        rep.diagonal += int(np.sum((k1 == k) & (k2 == k) & (k3 == k)))
        d1 = kk * kk + k1 * k1 - k2 * k2 - k3 * k3
        d2 = 2 * (kk - k2) * (kk - k3)
        rep.delta_mismatch += int(np.sum(d1 != d2))

        bad = {
            1: inH & ~((a2 >= a3) & ((a3 << 20) >= a)),
            2: inL & ~((2 * a1 >= a) & (a1 <= 2 * a) & (np.minimum(a, a1) >= (np.maximum(a2, a3) << 18))),
            3: inS & ~((2 * a2 >= a) & (a2 <= 2 * a) & (a >= (a3 << 20)) & ((a3 << 10) >= a1)),
            4: inN & ~(((a2 << 22) >= np.maximum(a, a1)) & (np.minimum(a, a1) >= (a3 << 10))),
        }
        for i, m in bad.items():
            for j in np.flatnonzero(m)[: max(0, max_witness - len(rep.violations[i]))]:
                rep.violations[i].append((k, int(k1[j]), int(k2[j]), int(k3[j])))

        hs = inH | (inS & ~inL)
        if np.any(hs):
            r = a1[hs] * (_br(k1[hs]) * _br(k2[hs]) * _br(k3[hs])) ** -0.5 * _br(k) ** 0.5
            j = int(np.argmax(r))
            if r[j] > rep.ratio_hs:
                rep.ratio_hs = float(r[j])
                idx = np.flatnonzero(hs)[j]
                rep.ratio_hs_witness = (k, int(k1[idx]), int(k2[idx]), int(k3[idx]))
        ln = (inL & ~inH) | inN
        if np.any(ln):
            r = np.abs(d1[ln]) / (_br(k) * _br(k1[ln]))
            j = int(np.argmax(r))
            if r[j] > rep.ratio_ln_max:
                rep.ratio_ln_max = float(r[j])
                idx = np.flatnonzero(ln)[j]
                rep.ratio_ln_witness = (k, int(k1[idx]), int(k2[idx]), int(k3[idx]))
            rep.ratio_ln_min = min(rep.ratio_ln_min, float(np.min(r)))
    return rep


CHAIN_CASES = ("1a", "1b-i", "1b-ii", "2a", "2b-i", "2b-ii")


@dataclass
class CaseStat:
    count: int = 0
    max_ratio: float = 0.0
    witness: tuple | None = None
    violations: list = field(default_factory=list)

    def update(self, ratio: np.ndarray, tuples: np.ndarray) -> None:
        self.count += ratio.size
        if ratio.size:
            j = int(np.argmax(ratio))
            if ratio[j] > self.max_ratio or self.witness is None:
                self.max_ratio = float(ratio[j])
                self.witness = tuple(int(x) for x in tuples[j])


@dataclass
class ChainCaseReport:
    K: int
    cases: dict = field(default_factory=lambda: {c: CaseStat() for c in CHAIN_CASES})
    case3: CaseStat = field(default_factory=CaseStat)
    case3_k5: CaseStat = field(default_factory=CaseStat)
    unassigned: int = 0
    multiply_assigned: int = 0

    @property
    def chains(self) -> int:
        return sum(c.count for c in self.cases.values())

    @property
    def violations(self) -> int:
        return sum(len(c.violations) for c in self.cases.values())

    def rows(self) -> list[tuple]:
        out = [(c, s.count, s.max_ratio, s.witness or "") for c, s in self.cases.items()]
        out.append(("3-beta", self.case3.count, self.case3.max_ratio, self.case3.witness or ""))
        out.append(("3-k5", self.case3_k5.count, self.case3_k5.max_ratio, self.case3_k5.witness or ""))
        return out


def _first_triples(kp: int, K: int):
    """V3 triples (k1, k2, k') carrying k' in the third slot, with their output k."""
    r = np.arange(-K, K + 1, dtype=np.int64)
    k1, k2 = np.meshgrid(r, r, indexing="ij")
    k1, k2 = k1.ravel(), k2.ravel()
    k = k2 + kp - k1
    keep = (np.abs(k) <= K) & (
        ((np.abs(k2) >= abs(kp)) & (k != k2) & (k != kp)) | ((k1 == kp) & (k2 == kp) & (k == kp))
    )
    k, k1, k2 = k[keep], k1[keep], k2[keep]
    code = classify_arrays(k, k1, k2, np.full(k.size, kp))
    return k, k1, k2, code


def _chunks(n1: int, n2: int, limit: int = 4_000_000):
    step = max(1, limit // max(1, n2))
    for s in range(0, n1, step):
        yield slice(s, min(n1, s + step))


def verify_prop24(K: int, max_witness: int = 5) -> ChainCaseReport:
    """Exhaustive classification of chained triples within |frequencies| <= K.

    Chains pair a first triple (k1, k2, k') in class * producing k with a
    second triple (k3, k4, k5) in class # producing k'.  Only the class
    combinations the case analysis covers are enumerated: (*, #) in
    {H,S} x {L,N} for case 1 and {L,N} x {L,N} for cases 2 and 3.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    rep = ChainCaseReport(K)
    H, L, S, N = (_CODE[c] for c in CLASSES)
    two40, two30, two5 = 1 << 40, 1 << 30, 1 << 5
    for kp in range(-K, K + 1):
        fk, fk1, fk2, fcode = _first_triples(kp, K)
        s3, s4, s5 = v3_for_output(kp, K)
        scode = classify_arrays(np.full(s3.size, kp), s3, s4, s5)
        for first_set, second_set, family in (((H, S), (L, N), 1), ((L, N), (L, N), 2)):
            fm = np.isin(fcode, first_set)
            sm = np.isin(scode, second_set)
            if not fm.any() or not sm.any():
                continue
            A = (fk[fm], fk1[fm], fk2[fm], fcode[fm])
            B = (s3[sm], s4[sm], s5[sm], scode[sm])
            for sl in _chunks(A[0].size, B[0].size):
                k, k1, k2, cs = (x[sl][:, None] for x in A)
                k3, k4, k5, cb = (x[None, :] for x in B)
                k, k1, k2, cs, k3, k4, k5, cb = np.broadcast_arrays(k, k1, k2, cs, k3, k4, k5, cb)
                k, k1, k2, cs, k3, k4, k5, cb = (x.ravel() for x in (k, k1, k2, cs, k3, k4, k5, cb))
                _classify_chains(rep, family, kp, k, k1, k2, cs, k3, k4, k5, cb,
                                 H, L, N, two40, two30, two5, max_witness)
    return rep


def _classify_chains(rep, family, kp, k, k1, k2, cs, k3, k4, k5, cb, H, L, N, two40, two30, two5, mw):
    a, a1, a2, a3, a4, a5 = (np.abs(x) for x in (k, k1, k2, k3, k4, k5))
    ap = abs(kp)
    D = k * k + k1 * k1 - kp * kp - k2 * k2
    Dp = kp * kp + k3 * k3 - k4 * k4 - k5 * k5
    bD, bDp = bracket(D), bracket(Dp)
    num = a1.astype(float) * a3
    alpha, beta, gamma = num / bD, num / (bD * bDp), num / bDp
    tuples = np.stack([k, k1, k2, np.full(k.size, kp), k3, k4, k5], axis=1)
    bk, bk1, bk3, bk5 = bracket(k), bracket(k1), bracket(k3), bracket(k5)
    nassigned = np.zeros(k.size, dtype=int)

    def record(case, mask, ratio, checks):
        nassigned[mask] += 1
        st = rep.cases[case]
        st.update(ratio[mask], tuples[mask])
        for name, ok in checks:
            badm = mask & ~ok
            for j in np.flatnonzero(badm)[: max(0, mw - len(st.violations))]:
                st.violations.append((name, tuple(int(x) for x in tuples[j])))

    if family == 1:
        b1 = (cs == H) & (a1 >= two40 * ap)
        record("1a", ~b1, gamma, [])
        bi = b1 & ((cb == L) | ((cb == N) & (a3 <= two30 * ap)))
        bii = b1 & ~bi
        mx345 = np.maximum(np.maximum(a3, a4), a5)
        argok = np.where(cb == L, a3 == mx345, (a3 == mx345) | (a4 == mx345))
        record("1b-i", bi,
               gamma * np.maximum.reduce([bk3, bracket(k4), bk5, bk]) / bk1,
               [("|k1|/2<=|k2|<=2|k1|", (a1 <= 2 * a2) & (a2 <= 2 * a1)),
                ("|k1|>=2^5 max(k3,k4,k5)", a1 >= two5 * mx345),
                ("k1!=k2", k1 != k2),
                ("argmax", argok)])
        record("1b-ii", bii,
               alpha * np.maximum.reduce([bk, bk5, bracket(k1 - k2)]) / bk1,
               [("|k1|/2<=|k2|<=2|k1|", (a1 <= 2 * a2) & (a2 <= 2 * a1)),
                ("|k3|/2<=|k4|<=2|k3|", (a3 <= 2 * a4) & (a4 <= 2 * a3)),
                ("|k1|>=2^5 max(k,k5)", a1 >= two5 * np.maximum(a, a5))])
    else:
        b2 = (cb == N) & (a3 >= two40 * a)
        record("2a", ~b2, alpha, [])
        bi = b2 & ((cs == L) | ((cs == N) & (a1 <= two30 * a)))
        bii = b2 & ~bi
        mx125 = np.maximum(np.maximum(a1, a2), a5)
        argok = np.where(cs == L, a1 == mx125, (a1 == mx125) | (a2 == mx125))
        record("2b-i", bi,
               gamma * np.maximum.reduce([bk1, bracket(k2), bk5, bk]) / bk3,
               [("|k3|/2<=|k4|<=2|k3|", (a3 <= 2 * a4) & (a4 <= 2 * a3)),
                ("|k3|>=2^5 max(k1,k2,k5)", a3 >= two5 * mx125),
                ("k3!=k4", k3 != k4),
                ("argmax", argok)])
        record("2b-ii", bii,
               alpha * np.maximum(bk, bk5) / bk3,
               [("|k1|/2<=|k2|<=2|k1|", (a1 <= 2 * a2) & (a2 <= 2 * a1)),
                ("|k3|/2<=|k4|<=2|k3|", (a3 <= 2 * a4) & (a4 <= 2 * a3)),
                ("|k3|>=2^5 max(k,k5)", a3 >= two5 * np.maximum(a, a5)),
                ("|k|!=|k5|", a != a5)])
        # case 3 is a bound on every (L/N, L/N) chain, checked alongside 2a/2b
        rep.case3.update(beta * bk * bracket(k3 - k4), tuples)
        rep.case3_k5.update(bk5 / bk, tuples)
    rep.unassigned += int(np.sum(nassigned == 0))
    rep.multiply_assigned += int(np.sum(nassigned > 1))
