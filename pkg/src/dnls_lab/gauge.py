"""The gauge transform v = G1 G0 u and its inverse.

G0 multiplies by exp(-i G) with G the mean-zero antiderivative of the
mean-free part of |u|^2; G1 translates x by 2 mu t with mu = P0 |u(0)|^2.
Products are formed on a physical grid of at least 4 (2 n + 1) points and
truncated back to n modes; the discarded high-mode energy is reported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .norms import fl_norm
from .spectral_core import SpaceTimeField, SpectralField


def _grid(n: int) -> int:
    M = 1
    while M < 4 * (2 * n + 1):
        M *= 2
    return M


def _to_phys(modes: np.ndarray, n: int, M: int) -> np.ndarray:
    c = np.zeros(modes.shape[:-1] + (M,), dtype=complex)
    c[..., np.arange(-n, n + 1) % M] = modes
    return np.fft.ifft(c, axis=-1) * M


def _phase_field(u: np.ndarray, M: int) -> tuple[np.ndarray, np.ndarray]:
    """G on the grid and its modes, from physical samples u (last axis)."""
    dens = np.fft.fft(np.abs(u) ** 2, axis=-1) / M
    kk = np.fft.fftfreq(M, 1.0 / M)
    Gm = np.zeros_like(dens)
    nz = kk != 0
    Gm[..., nz] = dens[..., nz] / (1j * kk[nz])
    G = np.real(np.fft.ifft(Gm, axis=-1) * M)
    return G, Gm


def _multiply(modes: np.ndarray, n: int, sign: int):
    """Modes of exp(sign i G[u]) u truncated to n, plus the relative discarded energy."""
    M = _grid(n)
    u = _to_phys(modes, n, M)
    G, _ = _phase_field(u, M)
    full = np.fft.fft(np.exp(sign * 1j * G) * u, axis=-1) / M
    kept = full[..., np.arange(-n, n + 1) % M]
    tot = np.sum(np.abs(full) ** 2, axis=-1)
    lost = tot - np.sum(np.abs(kept) ** 2, axis=-1)
    rel = np.where(tot > 0, np.maximum(lost, 0.0) / np.where(tot > 0, tot, 1.0), 0.0)
    return kept, rel


@dataclass(frozen=True)
class GaugeRecord:
    mu: float
    G: SpaceTimeField | SpectralField
    mean_drift: float
    dealias_residual: float

    def sidecar(self) -> str:
        return json.dumps({"mu": self.mu, "mean_drift": self.mean_drift,
                           "dealias_residual": self.dealias_residual}, sort_keys=True)


def phase_record(u: SpectralField) -> SpectralField:
    """Modes of G = d_x^{-1} P_{!=0} |u|^2 up to |k| <= 2n."""
    n = u.n_max
    M = _grid(n)
    _, Gm = _phase_field(_to_phys(u.modes, n, M), M)
    ks = np.arange(-2 * n, 2 * n + 1)
    return SpectralField(2 * n, Gm[ks % M])


def gauge_data(u0: SpectralField) -> SpectralField:
    """exp(-i d_x^{-1} P_{!=0} |u0|^2) u0, truncated to the input radius."""
    kept, _ = _multiply(u0.modes, u0.n_max, -1)
    return SpectralField(u0.n_max, kept)


def _shift(modes: np.ndarray, times: np.ndarray, mu: float, sign: int, n: int) -> np.ndarray:
    ks = np.arange(-n, n + 1)
    return modes * np.exp(sign * 2j * mu * np.outer(times, ks))


def gauge_forward(u: SpaceTimeField, return_record: bool = False):
    """Slice by slice: exp(-iG) u, then translate x by 2 mu t with mu frozen at t = 0."""
    if u.modes is None:
        raise ValueError("gauge_forward needs the physical-time representation")
    n = u.n_max
    i0 = int(np.argmin(np.abs(u.times)))
    mu = float(np.sum(np.abs(u.modes[i0]) ** 2))
    kept, rel = _multiply(u.modes, n, -1)
    v = _shift(kept, u.times, mu, -1, n)
    out = SpaceTimeField(n, u.times, v)
    if not return_record:
        return out
    inst = np.sum(np.abs(u.modes) ** 2, axis=1)
    rec = GaugeRecord(mu, out, float(np.max(np.abs(inst - mu))), float(np.max(rel)))
    return out, rec


def gauge_inverse(v: SpaceTimeField, return_record: bool = False):
    """Undo the translation (mu = P0 |v(0)|^2), then multiply by exp(+iG[v0])."""
    if v.modes is None:
        raise ValueError("gauge_inverse needs the physical-time representation")
    n = v.n_max
    i0 = int(np.argmin(np.abs(v.times)))
    mu = float(np.sum(np.abs(v.modes[i0]) ** 2))
    v0 = _shift(v.modes, v.times, mu, +1, n)
    kept, rel = _multiply(v0, n, +1)
    out = SpaceTimeField(n, v.times, kept)
    if not return_record:
        return out
    inst = np.sum(np.abs(v.modes) ** 2, axis=1)
    rec = GaugeRecord(mu, out, float(np.max(np.abs(inst - mu))), float(np.max(rel)))
    return out, rec


def roundtrip_error(u: SpaceTimeField) -> float:
    """Max over slices of the relative l2 error of G^{-1} G u."""
    back = gauge_inverse(gauge_forward(u))
    num = np.sqrt(np.sum(np.abs(back.modes - u.modes) ** 2, axis=1))
    den = np.sqrt(np.sum(np.abs(u.modes) ** 2, axis=1))
    return float(np.max(num / np.where(den > 0, den, 1.0)))


def bounded_set_constant(fields: list[SpectralField], p0: float) -> tuple[float, float]:
    """(max input H^{1/2}_{p0} norm, max gauged-output norm) over a corpus of data."""
    a = max(fl_norm(f, 0.5, p0) for f in fields)
    c = max(fl_norm(gauge_data(f), 0.5, p0) for f in fields)
    return a, c
