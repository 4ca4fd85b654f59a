"""Truncated Fourier representation of periodic fields on the torus.

Conventions used throughout the package:

* space transform   u^(k)  = (1/2pi) int_T e^{-ikx} u(x) dx
* time transform    f^(xi) = (1/2pi) int_R e^{-i xi t} f(t) dt
* free flow         e^{it d_xx} multiplies mode k by e^{-ik^2 t}
* twisted variable  lambda = xi + k^2, so  F~(k, lambda) = F^(k, lambda - k^2)

A free solution phi(t) e^{it d_xx} u0 therefore has the twisted profile
phi^(lambda) u0^(k), the same for every mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import czt


class AliasingError(ValueError):
    """Raised when a physical grid is too coarse for the modes it must hold."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Modes k = -n_max..n_max of a periodic complex function."""

    n_max: int
    modes: np.ndarray

    def __post_init__(self):
        modes = _frozen(self.modes)
        if self.n_max < 0 or modes.shape != (2 * self.n_max + 1,):
            raise ValueError(
                f"expected {2 * self.n_max + 1} modes for n_max={self.n_max}, got {modes.shape}"
            )
        object.__setattr__(self, "modes", modes)

    @classmethod
    def zeros(cls, n_max: int) -> "SpectralField":
        return cls(n_max, np.zeros(2 * n_max + 1, dtype=complex))

    @classmethod
    def from_dict(cls, n_max: int, amplitudes: dict) -> "SpectralField":
        m = np.zeros(2 * n_max + 1, dtype=complex)
        for k, a in amplitudes.items():
            if abs(k) > n_max:
                raise ValueError(f"mode {k} outside [-{n_max}, {n_max}]")
            m[k + n_max] = a
        return cls(n_max, m)

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.n_max:
            return 0j
        return complex(self.modes[k + self.n_max])

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _same_n(self, other)
        return SpectralField(self.n_max, self.modes + other.modes)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _same_n(self, other)
        return SpectralField(self.n_max, self.modes - other.modes)

    def __mul__(self, c) -> "SpectralField":
        return SpectralField(self.n_max, self.modes * complex(c))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.n_max, -self.modes)

    def resized(self, n_new: int) -> "SpectralField":
        """Zero-pad or truncate to a new radius."""
        out = np.zeros(2 * n_new + 1, dtype=complex)
        m = min(n_new, self.n_max)
        out[n_new - m : n_new + m + 1] = self.modes[self.n_max - m : self.n_max + m + 1]
        return SpectralField(n_new, out)

    def l2(self) -> float:
        """(1/2pi int |u|^2)^{1/2}, i.e. the l^2 norm of the modes."""
        return float(np.sqrt(np.sum(np.abs(self.modes) ** 2)))

    def allclose(self, other: "SpectralField", atol: float = 0.0, rtol: float = 1e-12) -> bool:
        return self.n_max == other.n_max and np.allclose(self.modes, other.modes, atol=atol, rtol=rtol)


def _same_n(a: SpectralField, b: SpectralField) -> None:
    if a.n_max != b.n_max:
        raise ValueError(f"n_max mismatch: {a.n_max} vs {b.n_max}")


def forward_transform(samples) -> SpectralField:
    """Modes of samples taken on x_j = 2 pi j / L, j = 0..L-1.

    The radius is the largest n with 2n + 2 <= L, so the Nyquist mode of an
    even grid is never reported.
    """
    u = np.asarray(samples, dtype=complex)
    if u.ndim != 1 or u.size == 0:
        raise ValueError("forward_transform needs a non-empty 1-D sample array")
    L = u.size
    if L < 2:
        raise ValueError("grid length must be at least 2")
    n = (L - 2) // 2
    c = np.fft.fft(u) / L
    ks = np.arange(-n, n + 1)
    return SpectralField(n, c[ks % L])


def inverse_transform(f: SpectralField, grid_size: int) -> np.ndarray:
    """Samples of sum_k f^(k) e^{ikx} on a uniform grid of ``grid_size`` points."""
    M = int(grid_size)
    if M < 2 * f.n_max + 2:
        raise AliasingError(
            f"grid of {M} points cannot hold modes up to {f.n_max} (need >= {2 * f.n_max + 2})"
        )
    c = np.zeros(M, dtype=complex)
    c[f.ks % M] = f.modes
    return np.fft.ifft(c) * M


def grid_points(M: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(M) / M


def project(f: SpectralField) -> tuple[complex, SpectralField]:
    """Split into the mean P_0 f and the mean-free remainder."""
    mean = f[0]
    m = np.array(f.modes)
    m[f.n_max] = 0.0
    return mean, SpectralField(f.n_max, m)


def antiderivative_mean_free(f: SpectralField) -> SpectralField:
    """Mean-zero antiderivative of the mean-free part: mode k -> f^(k)/(ik)."""
    ks = f.ks
    out = np.zeros_like(f.modes)
    nz = ks != 0
    out[nz] = f.modes[nz] / (1j * ks[nz])
    return SpectralField(f.n_max, out)


def derivative(f: SpectralField) -> SpectralField:
    return SpectralField(f.n_max, 1j * f.ks * f.modes)


def linear_flow(f: SpectralField, t: float) -> SpectralField:
    """Apply e^{it d_xx}: mode k picks up e^{-ik^2 t}."""
    ks = f.ks
    return SpectralField(f.n_max, f.modes * np.exp(-1j * ks * ks * float(t)))


# --------------------------------------------------------------------------
# spacetime fields


@dataclass(frozen=True)
class LambdaGrid:
    """Uniform grid lo, lo + spacing, ..., hi for the modulation variable."""

    lo: float
    hi: float
    spacing: float

    @classmethod
    def symmetric(cls, extent: float = 4096.0, spacing: float = 0.25) -> "LambdaGrid":
        return cls(-float(extent), float(extent), float(spacing))

    def __post_init__(self):
        if not (self.spacing > 0 and self.hi > self.lo):
            raise ValueError("lambda grid needs hi > lo and a positive spacing")

    @property
    def size(self) -> int:
        return int(round((self.hi - self.lo) / self.spacing)) + 1

    @property
    def values(self) -> np.ndarray:
        return self.lo + self.spacing * np.arange(self.size)


@dataclass(frozen=True, eq=False)
class TwistedRep:
    """F~(k, lambda) sampled on a uniform lambda grid; ``values`` has shape (2n+1, n_lambda)."""

    lam: np.ndarray
    values: np.ndarray
    tolerance: float = 0.0

    @property
    def spacing(self) -> float:
        return float(self.lam[1] - self.lam[0])


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Spectral field sampled on a uniform time grid.

    ``modes`` has shape (n_t, 2n+1).  Either or both of the physical-time and
    twisted representations may be present.
    """

    n_max: int
    times: np.ndarray | None
    modes: np.ndarray | None
    twisted: TwistedRep | None = field(default=None)

    def __post_init__(self):
        if self.modes is None and self.twisted is None:
            raise ValueError("a spacetime field needs at least one representation")
        if self.modes is not None:
            t = np.array(self.times, dtype=float)
            m = _frozen(self.modes)
            if m.ndim != 2 or m.shape != (t.size, 2 * self.n_max + 1):
                raise ValueError(f"modes shape {m.shape} does not match times/n_max")
            if t.size >= 2:
                d = np.diff(t)
                if np.any(d <= 0):
                    raise ValueError("time grid must be strictly increasing")
                if np.max(np.abs(d - d[0])) > 1e-9 * max(1.0, abs(d[0])):
                    raise ValueError("time grid must be uniform")
            t.setflags(write=False)
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "modes", m)

    @property
    def representation(self) -> str:
        return "physical" if self.modes is not None else "twisted"

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def nt(self) -> int:
        return int(self.times.size)

    def slice(self, i: int) -> SpectralField:
        return SpectralField(self.n_max, self.modes[i])

    def at(self, t: float, atol: float = 1e-12) -> SpectralField:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > atol + 1e-9 * abs(t):
            raise ValueError(f"t={t} is not a grid point")
        return self.slice(i)

    def with_modes(self, modes: np.ndarray) -> "SpaceTimeField":
        return SpaceTimeField(self.n_max, self.times, modes)

    def with_twisted(self, rep: TwistedRep) -> "SpaceTimeField":
        return SpaceTimeField(self.n_max, self.times, self.modes, rep)

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        _same_grid(self, other)
        return self.with_modes(self.modes + other.modes)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        _same_grid(self, other)
        return self.with_modes(self.modes - other.modes)

    def __mul__(self, c) -> "SpaceTimeField":
        return self.with_modes(self.modes * complex(c))

    __rmul__ = __mul__

    def time_multiply(self, g: np.ndarray) -> "SpaceTimeField":
        """Pointwise-in-time multiplication by a scalar function sampled on the grid."""
        return self.with_modes(self.modes * np.asarray(g)[:, None])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.modes))) if self.modes.size else 0.0

    @classmethod
    def zeros_like(cls, other: "SpaceTimeField") -> "SpaceTimeField":
        return cls(other.n_max, other.times, np.zeros_like(other.modes))

    @classmethod
    def from_slices(cls, times, slices: list[SpectralField]) -> "SpaceTimeField":
        n = slices[0].n_max
        return cls(n, np.asarray(times, float), np.stack([s.modes for s in slices]))


def _same_grid(a: SpaceTimeField, b: SpaceTimeField) -> None:
    if a.n_max != b.n_max or a.times.shape != b.times.shape or not np.allclose(a.times, b.times):
        raise ValueError("spacetime fields live on different grids")


def time_grid(t_start: float, t_end: float, dt: float) -> np.ndarray:
    n = int(round((t_end - t_start) / dt))
    if n < 1 or abs(t_start + n * dt - t_end) > 1e-9 * max(1.0, abs(t_end)):
        raise ValueError("dt must divide the time interval")
    return t_start + dt * np.arange(n + 1)


def free_evolution(u0: SpectralField, times) -> SpaceTimeField:
    t = np.asarray(times, float)
    k2 = (u0.ks**2)[None, :]
    return SpaceTimeField(u0.n_max, t, u0.modes[None, :] * np.exp(-1j * k2 * t[:, None]))


def _uniform_sum(x: np.ndarray, x0: float, dx: float, y0: float, dy: float, m: int, sign: int) -> np.ndarray:
    """sum_j x[..., j] exp(sign i (x0 + j dx)(y0 + n dy)) for n = 0..m-1, via chirp-z."""
    j = np.arange(x.shape[-1])
    pre = x * np.exp(sign * 1j * j * dx * y0)
    w = np.exp(sign * 1j * dx * dy)
    out = czt(pre, m=m, w=w, a=1.0, axis=-1)
    n = np.arange(m)
    return out * np.exp(sign * 1j * x0 * (y0 + n * dy))


def twist(F: SpaceTimeField, grid: LambdaGrid, support_tol: float = 1e-10) -> SpaceTimeField:
    """Attach the twisted representation F~(k, lambda) on ``grid``.

    Each mode trace is moved to the interaction picture (times e^{ik^2 t})
    and Fourier transformed in time by the composite trapezoid rule, which
    is spectrally accurate for smooth compactly supported traces.
    """
    if F.modes is None:
        raise ValueError("twist needs the physical-time representation")
    t = F.times
    if t.size < 3:
        raise ValueError("time grid too short to twist")
    dt = F.dt
    duration = t[-1] - t[0]
    if grid.spacing > np.pi / duration:
        raise ValueError(
            f"lambda spacing {grid.spacing} does not resolve a support of length {duration}"
            f" (need <= {np.pi / duration:.4g})"
        )
    if max(abs(grid.lo), abs(grid.hi)) >= 2.0 * np.pi / dt:
        raise ValueError(
            f"lambda extent reaches the alias period 2pi/dt = {2 * np.pi / dt:.4g} of the time grid"
        )
    scale = np.max(np.abs(F.modes)) if F.modes.size else 0.0
    edge = max(np.max(np.abs(F.modes[0])), np.max(np.abs(F.modes[-1])))
    if scale > 0 and edge > support_tol * scale:
        raise ValueError("field is not compactly supported inside the time grid; apply a cutoff first")
    k2 = (F.ks**2).astype(float)
    G = (F.modes * np.exp(1j * t[:, None] * k2[None, :])).T
    w = np.full(t.size, dt)
    w[0] = w[-1] = dt / 2
    vals = _uniform_sum(G * w, t[0], dt, grid.lo, grid.spacing, grid.size, -1) / (2 * np.pi)
    lam = grid.values
    tol = float(np.max(np.abs(vals[:, [0, -1]]))) if vals.size else 0.0
    return F.with_twisted(TwistedRep(lam, vals, tol))


def untwist(F: SpaceTimeField, times) -> SpaceTimeField:
    """Rebuild physical-time samples from the twisted representation.

    F(t, k) = e^{-ik^2 t} int e^{i lambda t} F~(k, lambda) d lambda, trapezoid in lambda.
    """
    if F.twisted is None:
        raise ValueError("untwist needs a twisted representation")
    rep = F.twisted
    lam = rep.lam
    dl = rep.spacing
    w = np.full(lam.size, dl)
    w[0] = w[-1] = dl / 2
    t = np.asarray(times, float)
    dt = t[1] - t[0]
    G = _uniform_sum(rep.values * w, lam[0], dl, t[0], dt, t.size, +1)
    k2 = (F.ks**2).astype(float)
    modes = (G * np.exp(-1j * k2[:, None] * t[None, :])).T
    return SpaceTimeField(F.n_max, t, modes, rep)


# --------------------------------------------------------------------------
# text serialization


def dump_field(f: SpectralField) -> str:
    from ._util import fmt

    lines = [f"dnls-field v1 n_max={f.n_max}"]
    for k, a in zip(f.ks, f.modes):
        lines.append(f"{k} {fmt(a.real)} {fmt(a.imag)}")
    return "\n".join(lines) + "\n"


def load_field(text: str) -> SpectralField:
    rows = [r for r in text.splitlines() if r.strip() and not r.startswith("#")]
    head = rows[0].split()
    if head[:2] != ["dnls-field", "v1"]:
        raise ValueError("not a dnls-field v1 file")
    n = int(head[2].split("=")[1])
    m = np.zeros(2 * n + 1, dtype=complex)
    for r in rows[1 : 2 * n + 2]:
        k, re, im = r.split()
        m[int(k) + n] = complex(float(re), float(im))
    return SpectralField(n, m)


def dump_spacetime(F: SpaceTimeField) -> str:
    from ._util import fmt

    t = F.times
    lines = [f"dnls-field v1 n_max={F.n_max} t_start={fmt(t[0])} t_end={fmt(t[-1])} dt={fmt(F.dt)}"]
    for i, ti in enumerate(t):
        lines.append(f"t {fmt(ti)}")
        for k, a in zip(F.ks, F.modes[i]):
            lines.append(f"{k} {fmt(a.real)} {fmt(a.imag)}")
    return "\n".join(lines) + "\n"


def load_spacetime(text: str) -> SpaceTimeField:
    rows = [r for r in text.splitlines() if r.strip() and not r.startswith("#")]
    head = dict(tok.split("=") for tok in rows[0].split()[2:])
    n = int(head["n_max"])
    times, blocks, cur = [], [], None
    for r in rows[1:]:
        parts = r.split()
        if parts[0] == "t":
            times.append(float(parts[1]))
            cur = np.zeros(2 * n + 1, dtype=complex)
            blocks.append(cur)
        else:
            cur[int(parts[0]) + n] = complex(float(parts[1]), float(parts[2]))
    return SpaceTimeField(n, np.array(times), np.stack(blocks))
