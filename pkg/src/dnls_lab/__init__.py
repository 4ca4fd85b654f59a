"""Numerical laboratory for the periodic derivative nonlinear Schrodinger equation.

Modules, bottom-up: spectral_core (fields and twisted transforms), norms
(Fourier-Lebesgue and X^{s,b}_{p,q}), solver (direct integration), gauge,
interactions (frequency classes and multilinear terms), duhamel (kernels
and the eta splitting), paracontrolled (the fixed-point layer),
number_theory (divisor counting), probes (empirical operator constants)
and cli.
"""

from ._util import TOOL_VERSION as __version__

__all__ = ["__version__"]
