"""The smooth time cutoff phi and the auxiliary profile eta.

phi is 1 on [-1, 1], 0 outside [-2, 2], glued with the standard
exp(-1/x) construction.  Its Fourier transform and the Hilbert transform
of that transform are both expressed through

    Z(x) = int_1^2 phi'(t) e^{ixt} dt,

namely phi^(x) = -Im Z(x) / (pi x) and (H phi^)(x) = (1 + Re Z(x)) / x.
Z is tabulated once by FFT and interpolated; for |x| < 1 the transforms
are evaluated by direct quadrature instead, to avoid the cancellation.

eta^ is a combination of two Gaussians alpha (g(xi - 1/2) - g(xi - 3/2)),
g(x) = exp(-x^2/a^2), with alpha chosen so that H eta^(1) = 1.  Its Hilbert
transform is closed-form through the Dawson function; the coefficient is
solved from a principal-value quadrature and the closed form is kept as
the independent residual check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import dawsn

from .quadrature import panels, pv_integral

Z_STEP = 1.0 / 1024
Z_FFT = 2**20
Z_CUT = 3000.0
SMALL = 1.0
ETA_EXCISIONS = (0.02, 0.01, 0.005, 0.0025)


def glue(x):
    """Smooth step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 1, 1.0, 0.0)
    m = (x > 0) & (x < 1)
    xm = x[m]
    with np.errstate(over="ignore"):
        out[m] = 1.0 / (1.0 + np.exp(1.0 / xm - 1.0 / (1.0 - xm)))
    return out


def glue_prime(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = (x > 0) & (x < 1)
    xm = x[m]
    s = glue(xm)
    out[m] = s * (1 - s) * (1 / xm**2 + 1 / (1 - xm) ** 2)
    return out


def phi(t):
    return 1.0 - glue(np.abs(np.asarray(t, dtype=float)) - 1.0)


def phi_prime(t):
    t = np.asarray(t, dtype=float)
    return -np.sign(t) * glue_prime(np.abs(t) - 1.0)


@lru_cache(maxsize=1)
def _z_table():
    j = np.arange(int(round(1 / Z_STEP)) + 1)
    f = phi_prime(1.0 + j * Z_STEP)
    # sum_j f_j e^{i x t_j} on x_m = 2 pi m / (N dt); t_j = 1 + j dt
    S = np.fft.ifft(f, Z_FFT) * Z_FFT
    m_max = int(Z_CUT * Z_FFT * Z_STEP / (2 * np.pi)) + 8
    x = 2 * np.pi * np.arange(m_max) / (Z_FFT * Z_STEP)
    Z = Z_STEP * np.exp(1j * x) * S[:m_max]
    sp = CubicSpline(x, Z)
    # knots are uniform, so segments are found by index arithmetic
    return float(x[1] - x[0]), np.ascontiguousarray(sp.c)


@lru_cache(maxsize=1)
def _small_nodes():
    return panels(np.linspace(1.0, 2.0, 5), 32)


def _direct(x):
    """phi^ and H phi^ by quadrature on [0, 2] (used for |x| < SMALL)."""
    t, w = _small_nodes()
    ph = phi(t) * w
    xt = np.outer(x, t)
    # int_0^1 cos(xt) = sin x / x, int_0^1 sin(xt) = (1 - cos x) / x
    with np.errstate(invalid="ignore", divide="ignore"):
        c0 = np.where(x == 0, 1.0, np.sin(x) / np.where(x == 0, 1, x))
        s0 = np.where(x == 0, 0.0, (1 - np.cos(x)) / np.where(x == 0, 1, x))
    fh = (c0 + np.cos(xt) @ ph) / np.pi
    hf = s0 + np.sin(xt) @ ph
    return fh, hf


def _Z(x):
    h, c = _z_table()
    ax = np.abs(x)
    inside = ax <= Z_CUT
    i = np.minimum((np.where(inside, ax, 0.0) / h).astype(np.intp), c.shape[1] - 1)
    u = np.where(inside, ax, 0.0) - i * h
    z = ((c[0, i] * u + c[1, i]) * u + c[2, i]) * u + c[3, i]
    z = np.where(inside, z, 0.0)
    return np.where(x < 0, np.conj(z), z)


@dataclass(frozen=True)
class CutoffProfile:
    """phi(t / T) together with the transforms of phi (at scale T = 1)."""

    T: float = 1.0

    def __call__(self, t):
        return phi(np.asarray(t, dtype=float) / self.T)

    @staticmethod
    def hat_unit(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        out = np.empty(x.size)
        small = np.abs(x) < SMALL
        if small.any():
            out[small] = _direct(x[small])[0]
        big = ~small
        if big.any():
            xb = x[big]
            out[big] = -np.imag(_Z(xb)) / (np.pi * xb)
        return out.reshape(shape)

    @staticmethod
    def hilbert_hat_unit(x):
        x = np.asarray(x, dtype=float)
        shape = x.shape
        x = x.ravel()
        out = np.empty(x.size)
        small = np.abs(x) < SMALL
        if small.any():
            out[small] = _direct(x[small])[1]
        big = ~small
        if big.any():
            xb = x[big]
            out[big] = (1 + np.real(_Z(xb))) / xb
        return out.reshape(shape)

    def hat(self, xi):
        """Fourier transform of t -> phi(t / T), i.e. T phi^(T xi)."""
        return self.T * self.hat_unit(self.T * np.asarray(xi, dtype=float))

    def hilbert_hat(self, xi):
        # H commutes with dilations, so H[T phi^(T .)](xi) = T (H phi^)(T xi).
        return self.T * self.hilbert_hat_unit(self.T * np.asarray(xi, dtype=float))


PHI = CutoffProfile(1.0)


# ---------------------------------------------------------------- eta

@dataclass(frozen=True)
class EtaProfile:
    """eta^(xi) = sum_j coef_j exp(-((xi - c_j) / a)^2); eta is its inverse transform."""

    coefs: tuple
    centers: tuple = (0.5, 1.5)
    width: float = 0.5
    residuals: dict = field(default_factory=dict, compare=False)

    def hat(self, xi):
        xi = np.asarray(xi, dtype=float)
        a = self.width
        return sum(c * np.exp(-((xi - m) / a) ** 2) for c, m in zip(self.coefs, self.centers))

    def hilbert_hat(self, xi):
        # H exp(-(x/a)^2) = 2 sqrt(pi) D(x / a) with D the Dawson function
        xi = np.asarray(xi, dtype=float)
        a = self.width
        return sum(c * 2 * np.sqrt(np.pi) * dawsn((xi - m) / a) for c, m in zip(self.coefs, self.centers))

    def __call__(self, t):
        """eta(t) = int eta^(xi) e^{i xi t} d xi."""
        t = np.asarray(t, dtype=float)
        a = self.width
        env = a * np.sqrt(np.pi) * np.exp(-(a * t) ** 2 / 4)
        return sum(c * np.exp(1j * m * t) for c, m in zip(self.coefs, self.centers)) * env

    def support_radius(self, eps: float = 1e-17) -> float:
        """|t| beyond which |eta(t)| < eps."""
        a = self.width
        scale = a * np.sqrt(np.pi) * sum(abs(c) for c in self.coefs)
        return 2.0 / a * np.sqrt(max(np.log(scale / eps), 0.0))


def _gauss(m, a):
    return lambda x: np.exp(-((x - m) / a) ** 2)


@lru_cache(maxsize=4)
def build_eta(centers: tuple = (0.5, 1.5), width: float = 0.5) -> EtaProfile:
    """Solve eta^(1) = 0 and H eta^(1) = 1 for the two Gaussian coefficients.

    The Hilbert transforms at 1 come from principal-value quadrature; the
    Dawson closed form is only used afterwards to report residuals.
    """
    g1 = [_gauss(m, width)(1.0) for m in centers]
    h1 = [-pv_integral(_gauss(m, width), 1.0, M=12.0, hs=ETA_EXCISIONS, tol=1e-11)[0] for m in centers]
    # H f(x) = PV int f(y)/(x - y) dy = -PV int f(y)/(y - x) dy
    A = np.array([g1, h1], dtype=float)
    if abs(np.linalg.det(A)) < 1e-12:
        raise ArithmeticError("eta system is singular for these centres")
    coefs = np.linalg.solve(A, np.array([0.0, 1.0]))
    prof = EtaProfile(tuple(float(c) for c in coefs), tuple(centers), width)
    res = {
        "eta_hat_at_1": float(abs(prof.hat(1.0))),
        "H_eta_hat_at_1": float(abs(prof.hilbert_hat(1.0) - 1.0)),
    }
    object.__setattr__(prof, "residuals", res)
    return prof
