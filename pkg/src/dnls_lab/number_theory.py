"""Divisor counting in Z and Z[omega] and the quadratic systems of the divisor-counting bound.

Everything here is exact integer arithmetic except the final slope fit.
Elements of Z[omega] are stored as a + b*omega with omega = exp(2 pi i / 3),
so omega^2 = -1 - omega and the norm a^2 - ab + b^2 equals |a + b omega|^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np


def _round_div(p: int, n: int) -> int:
    """Nearest integer to p/n for n > 0, ties toward +infinity."""
    return (2 * p + n) // (2 * n)


@dataclass(frozen=True, order=True)
class EisensteinInt:
    a: int
    b: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", int(self.a))
        object.__setattr__(self, "b", int(self.b))

    @classmethod
    def coerce(cls, x) -> "EisensteinInt":
        return x if isinstance(x, EisensteinInt) else cls(int(x), 0)

    def __add__(self, o):
        o = EisensteinInt.coerce(o)
        return EisensteinInt(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, o):
        o = EisensteinInt.coerce(o)
        return EisensteinInt(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        return EisensteinInt.coerce(o) - self

    def __neg__(self):
        return EisensteinInt(-self.a, -self.b)

    def __mul__(self, o):
        o = EisensteinInt.coerce(o)
        a, b, c, d = self.a, self.b, o.a, o.b
        return EisensteinInt(a * c - b * d, a * d + b * c - b * d)

    __rmul__ = __mul__

    def conj(self) -> "EisensteinInt":
        return EisensteinInt(self.a - self.b, -self.b)

    def norm(self) -> int:
        return self.a * self.a - self.a * self.b + self.b * self.b

    def __complex__(self) -> complex:
        return complex(self.a - 0.5 * self.b, self.b * math.sqrt(3) / 2)

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    def divrem(self, y: "EisensteinInt") -> tuple["EisensteinInt", "EisensteinInt"]:
        return eis_divrem(self, y)

    def __repr__(self) -> str:
        return f"E({self.a},{self.b})"


OMEGA = EisensteinInt(0, 1)
UNITS = tuple(EisensteinInt(a, b) for a, b in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)))


def eis_mul(x: EisensteinInt, y: EisensteinInt) -> EisensteinInt:
    return x * y


def eis_divrem(x: EisensteinInt, y: EisensteinInt) -> tuple[EisensteinInt, EisensteinInt]:
    """x = q*y + r with N(r) < N(y), by rounding x*conj(y)/N(y) coordinatewise."""
    x, y = EisensteinInt.coerce(x), EisensteinInt.coerce(y)
    n = y.norm()
    if n == 0:
        raise ZeroDivisionError("division by zero in Z[omega]")
    t = x * y.conj()
    q = EisensteinInt(_round_div(t.a, n), _round_div(t.b, n))
    r = x - q * y
    assert r.norm() < n
    return q, r


def eis_divides(d: EisensteinInt, x: EisensteinInt) -> bool:
    if not d:
        return not x
    t = x * d.conj()
    n = d.norm()
    return t.a % n == 0 and t.b % n == 0


# --------------------------------------------------------------------------
# divisors in a ball


def _rho2(rho) -> Fraction:
    return Fraction(rho) ** 2


def divisors_in_ball(ring: str, k, q, rho) -> list:
    """Divisors r of k with |r - q| <= rho.

    For Z the candidates are the integers of the ball intersected with
    |r| <= |k|; for Z[omega] they are the lattice points of the ball with
    N(r) <= N(k).  Unit multiples and negatives are included.
    """
    if rho < 0:
        raise ValueError("rho must be non-negative")
    r2 = _rho2(rho)
    if ring == "Z":
        k, q = int(k), int(q)
        if k == 0:
            raise ValueError("k must be nonzero")
        lo = max(-abs(k), math.ceil(q - Fraction(rho)))
        hi = min(abs(k), math.floor(q + Fraction(rho)))
        return [r for r in range(lo, hi + 1) if r != 0 and k % r == 0]
    if ring in ("Zomega", "Z[omega]"):
        k, q = EisensteinInt.coerce(k), EisensteinInt.coerce(q)
        if not k:
            raise ValueError("k must be nonzero")
        nk = k.norm()
        out = []
        # lattice points with |r - q| <= rho: in coordinates r - q = (x, y),
        # |x + y omega|^2 = x^2 - xy + y^2 <= rho^2 forces |y| <= 2 rho / sqrt(3)
        ymax = math.isqrt(int(4 * r2 / 3)) + 1
        for y in range(-ymax, ymax + 1):
            # x^2 - x y + y^2 - rho^2 <= 0
            disc = 4 * r2 - 3 * y * y
            if disc < 0:
                continue
            s = math.isqrt(int(disc)) + 1
            for x in range((y - s) // 2 - 1, (y + s) // 2 + 2):
                if x * x - x * y + y * y > r2:
                    continue
                r = EisensteinInt(q.a + x, q.b + y)
                if r and r.norm() <= nk and eis_divides(r, k):
                    out.append(r)
        return sorted(out)
    raise ValueError(f"unknown ring {ring!r}")


def all_divisors_Z(k: int) -> list[int]:
    """Every divisor of k (both signs) by trial division up to sqrt|k|."""
    n = abs(int(k))
    pos = set()
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            pos.update((d, n // d))
    return sorted([-d for d in pos] + list(pos))


def all_divisors_Zomega(k: EisensteinInt) -> list[EisensteinInt]:
    """Every divisor of k in Z[omega]: scan all lattice points with N(r) <= N(k)."""
    k = EisensteinInt.coerce(k)
    nk = k.norm()
    bmax = math.isqrt(4 * nk // 3) + 1
    b = np.arange(-bmax, bmax + 1, dtype=np.int64)
    amax = bmax + math.isqrt(nk) + 1
    a = np.arange(-amax, amax + 1, dtype=np.int64)
    A, B = np.meshgrid(a, b, indexing="ij")
    A, B = A.ravel(), B.ravel()
    N = A * A - A * B + B * B
    m = (N > 0) & (N <= nk)
    A, B, N = A[m], B[m], N[m]
    # k * conj(r) with conj(r) = (A - B) - B omega
    ca, cb = A - B, -B
    ta = k.a * ca - k.b * cb
    tb = k.a * cb + k.b * ca - k.b * cb
    ok = (ta % N == 0) & (tb % N == 0)
    return sorted(EisensteinInt(int(x), int(y)) for x, y in zip(A[ok], B[ok]))


def naive_divisors_in_ball(ring: str, k, q, rho) -> list:
    """Oracle: all divisors first, then the distance filter."""
    r2 = _rho2(rho)
    if ring == "Z":
        return [r for r in all_divisors_Z(k) if (r - int(q)) ** 2 <= r2]
    q = EisensteinInt.coerce(q)
    return [r for r in all_divisors_Zomega(k) if (r - q).norm() <= r2]


# --------------------------------------------------------------------------
# the quadratic system


@dataclass(frozen=True)
class SystemSpec:
    """s_a a + s_b b + s_c c = c1 together with -s_a a^2 - s_b b^2 - s_c c^2 = c2.

    The quadratic signs are derived from the linear ones, so the opposite-sign
    rule holds by construction.  Shells are N_j <= |x| < 2 N_j.
    """

    signs: tuple[int, int, int]
    c1: int
    c2: int
    N1: int
    N2: int
    N3: int

    def __post_init__(self):
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if min(self.N1, self.N2, self.N3) < 1:
            raise ValueError("shell sizes must be >= 1")

    @property
    def pattern(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)

    def shells(self):
        return [shell(N) for N in (self.N1, self.N2, self.N3)]

    def constants_of(self, a: int, b: int, c: int) -> tuple[int, int]:
        sa, sb, sc = self.signs
        return sa * a + sb * b + sc * c, -(sa * a * a + sb * b * b + sc * c * c)

    def has_pairing(self, a: int, b: int, c: int) -> bool:
        sa, sb, sc = self.signs
        v = (a, b, c)
        s = (sa, sb, sc)
        return any(v[i] == v[j] and s[i] != s[j] for i in range(3) for j in range(i + 1, 3))


def shell(N: int) -> np.ndarray:
    pos = np.arange(N, 2 * N, dtype=np.int64)
    return np.concatenate([-pos[::-1], pos])


def _pairing_mask(signs, a, b, c):
    sa, sb, sc = signs
    m = np.zeros(np.broadcast(a, b, c).shape, dtype=bool)
    if sa != sb:
        m |= a == b
    if sa != sc:
        m |= a == c
    if sb != sc:
        m |= b == c
    return m


def count_system_solutions(spec: SystemSpec, with_witnesses: bool = True):
    """Exact count of no-pairing solutions in the shells.

    Loops over a and solves the remaining 2x2 system for (b, c) exactly:
    equal signs give b, c as the roots of a monic quadratic, opposite signs
    give b - c and b + c directly.
    """
    sa, sb, sc = spec.signs
    A = shell(spec.N1)
    m = spec.c1 - sa * A            # sb b + sc c
    P = -spec.c2 - sa * A * A       # sb b^2 + sc c^2
    cand_a, cand_b, cand_c = [], [], []
    if sb == sc:
        S, Q = sb * m, sb * P       # b + c, b^2 + c^2
        disc = 2 * Q - S * S        # (b - c)^2
        ok = disc >= 0
        r = np.zeros_like(disc)
        r[ok] = np.array([math.isqrt(int(x)) for x in disc[ok]], dtype=np.int64)
        ok &= r * r == disc
        ok &= (S + r) % 2 == 0
        for sign in (1, -1):
            sel = ok if sign == 1 else ok & (r != 0)
            b = (S + sign * r) // 2
            c = S - b
            cand_a.append(A[sel]), cand_b.append(b[sel]), cand_c.append(c[sel])
    else:
        D, E = sb * m, sb * P       # b - c and b^2 - c^2
        ok = D != 0                 # D = 0 forces b = c, an opposite-sign pairing
        Dn = np.where(ok, D, 1)
        ok &= E % Dn == 0
        T = E // Dn                 # b + c
        ok &= (D + T) % 2 == 0
        b = (D + T) // 2
        c = T - b
        cand_a.append(A[ok]), cand_b.append(b[ok]), cand_c.append(c[ok])
    a, b, c = (np.concatenate(x) for x in (cand_a, cand_b, cand_c))
    keep = ((np.abs(b) >= spec.N2) & (np.abs(b) < 2 * spec.N2)
            & (np.abs(c) >= spec.N3) & (np.abs(c) < 2 * spec.N3))
    keep &= ~_pairing_mask(spec.signs, a, b, c)
    a, b, c = a[keep], b[keep], c[keep]
    order = np.lexsort((c, b, a))
    wit = [(int(a[i]), int(b[i]), int(c[i])) for i in order] if with_witnesses else []
    return int(a.size), wit


def count_system_pairs(spec: SystemSpec) -> int:
    """Oracle: loop over (a, b) and solve the linear equation for c."""
    sa, sb, sc = spec.signs
    A, B, _ = spec.shells()
    a = A[:, None]
    b = B[None, :]
    c = sc * (spec.c1 - sa * a - sb * b)
    a, b, c = np.broadcast_arrays(a, b, c)
    ac = np.abs(c)
    ok = (ac >= spec.N3) & (ac < 2 * spec.N3)
    ok &= -(sa * a * a + sb * b * b + sc * c * c) == spec.c2
    ok &= ~_pairing_mask(spec.signs, a, b, c)
    return int(np.sum(ok))


def count_system_bruteforce(spec: SystemSpec) -> int:
    """Triple loop oracle for small shells."""
    n = 0
    for a, b, c in product(*[s.tolist() for s in spec.shells()]):
        if spec.constants_of(a, b, c) == (spec.c1, spec.c2) and not spec.has_pairing(a, b, c):
            n += 1
    return n


def reduce_case(spec: SystemSpec) -> tuple[str, tuple[int, int, int], int]:
    """Relabel a sign pattern into one of the three canonical cases.

    Returns (case, permutation, overall sign) such that, after permuting the
    variables and flipping all signs if needed, the linear equation reads
    b + c - a (case a), a + b - c (case b) or a + b + c (case c).
    """
    s = spec.signs
    pos = [i for i in range(3) if s[i] > 0]
    neg = [i for i in range(3) if s[i] < 0]
    flip = 1
    if len(neg) > len(pos):
        pos, neg, flip = neg, pos, -1
    if len(neg) == 0:
        return "c", (0, 1, 2), flip
    p0, p1 = pos
    return "a", (neg[0], p0, p1), flip


def check_identities(spec: SystemSpec, witnesses) -> dict:
    """Verify the three factorization identities on solution witnesses.

    Returns per-identity [checked, failed] counts.  For a + b + c = ell the
    checked identity is (u - omega v)(u - omega^2 v) = u^2 + uv + v^2 with
    2(u^2 + uv + v^2) = 9(a^2 + b^2 + c^2) - 3 ell^2; the variant without the
    factor 2 is counted separately under "c_unscaled".
    """
    case, perm, flip = reduce_case(spec)
    res = {"a": [0, 0], "b": [0, 0], "c": [0, 0], "c_unscaled": [0, 0]}
    for w in witnesses:
        x = [w[i] for i in perm]
        if case == "a":
            # one minus sign: read it as b + c - a = ell with a the negative variable,
            # and again as a + b - c = ell with c the negative variable
            a, b, c = x
            ell = b + c - a
            lhs = 2 * (ell - b) * (ell - c)
            rhs = ell * ell - (b * b + c * c - a * a)
            res["a"][0] += 1
            res["a"][1] += lhs != rhs
            a2, b2, c2 = b, c, a
            ell2 = a2 + b2 - c2
            Delta = ell2 * ell2 - (a2 * a2 + b2 * b2 - c2 * c2)
            res["b"][0] += 1
            res["b"][1] += 2 * (b2 - c2) * (ell2 - b2) != Delta
        else:
            a, b, c = x
            ell = a + b + c
            u, v = 3 * a - ell, 3 * b - ell
            f1 = EisensteinInt(u, -v)          # u - omega v
            f2 = EisensteinInt(u + v, v)       # u - omega^2 v
            prod = f1 * f2
            norm_form = u * u + u * v + v * v
            target = 9 * (a * a + b * b + c * c) - 3 * ell * ell
            res["c"][0] += 1
            res["c"][1] += not (prod == EisensteinInt(norm_form, 0) and 2 * norm_form == target)
            # the same identity without the factor 2, as it is usually quoted
            res["c_unscaled"][0] += 1
            res["c_unscaled"][1] += norm_form != target
    return res


def case_a_divisor_count(spec: SystemSpec) -> int:
    """Count case-(a) solutions through divisor pairs of Delta/2.

    With b + c - a = ell and b^2 + c^2 - a^2 fixed, 2(ell-b)(ell-c) = Delta.
    Each divisor d of Delta/2 fixes ell - b = d and ell - c = Delta/(2d).
    """
    case, perm, flip = reduce_case(spec)
    if case != "a":
        raise ValueError("divisor route implemented for the b + c - a pattern")
    ell = flip * spec.c1
    # quadratic constant of b^2 + c^2 - a^2 in the relabelled variables
    Q = flip * spec.c2 * -1
    Delta = ell * ell - Q
    if Delta == 0 or Delta % 2:
        return 0
    Ns = [(spec.N1, spec.N2, spec.N3)[i] for i in perm]
    n = 0
    for d in divisors_in_ball("Z", Delta // 2, ell, 4 * max(Ns) + abs(ell)):
        b = ell - d
        c = ell - (Delta // 2) // d
        a = b + c - ell
        vals = (a, b, c)
        if all(N <= abs(v) < 2 * N for v, N in zip(vals, Ns)) and a != b and a != c:
            n += 1
    return n


def growth_fit(counts) -> float:
    """Least-squares slope of log(count) against log(N)."""
    pts = [(float(N), float(c)) for N, c in counts]
    if len(pts) < 4:
        raise ValueError("growth_fit needs at least 4 scales")
    if any(c <= 0 or N <= 0 for N, c in pts):
        raise ValueError("growth_fit needs positive scales and counts")
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def max_count_ensemble(N: int, signs, samples: int, rng: np.random.Generator) -> tuple[int, SystemSpec]:
    """Largest no-pairing count over systems whose constants come from random shell points."""
    best, best_spec = 0, None
    sh = shell(N)
    for _ in range(samples):
        a, b, c = (int(x) for x in rng.choice(sh, 3))
        probe = SystemSpec(tuple(signs), 0, 0, N, N, N)
        if probe.has_pairing(a, b, c):
            continue
        c1, c2 = probe.constants_of(a, b, c)
        spec = SystemSpec(tuple(signs), c1, c2, N, N, N)
        n, _ = count_system_solutions(spec, with_witnesses=False)
        if n > best or best_spec is None:
            best, best_spec = n, spec
    return best, best_spec


def systems_csv_rows(specs_counts) -> list[str]:
    rows = ["N1,N2,N3,sign_pattern,const1,const2,count"]
    for spec, n in specs_counts:
        rows.append(f"{spec.N1},{spec.N2},{spec.N3},{spec.pattern},{spec.c1},{spec.c2},{n}")
    return rows
