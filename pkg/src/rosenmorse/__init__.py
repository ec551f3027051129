"""Scattering off the Rosen-Morse barrier V(x) = U0 / cosh^2(beta x).

Modules
-------
special    Gauss hypergeometric function and log-gamma.
model      Exact wavefunctions, transmission (exact-WKB formula and the
           connection-formula oracle), phase shift, S-matrix pole condition.
rootfind   Argument-principle zero search and Breit-Wigner fitting.
numerics   Transfer-matrix oracle and the complex-scaled Hamiltonian.
spectral   Green function and completeness relations.
cli        ``python -m rosenmorse``.
"""

from .model import PotentialParams, SpectralClass, SpectralPoint, ScatteringAmplitudes
from .numerics import GridSpec, ScalingAngle
from .rootfind import SearchBox

__all__ = [
    "PotentialParams",
    "SpectralClass",
    "SpectralPoint",
    "ScatteringAmplitudes",
    "GridSpec",
    "ScalingAngle",
    "SearchBox",
]
__version__ = "0.1.0"
