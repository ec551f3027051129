"""Exception hierarchy shared by all modules.

Every numerical failure carries the name of the operation that raised it so
the command-line front end can report it verbatim.
"""

from __future__ import annotations


class RosenMorseError(Exception):
    """Base class for all errors raised by this package."""

    operation: str = "unknown"

    def __init__(self, message: str, operation: str | None = None):
        super().__init__(message)
        if operation is not None:
            self.operation = operation


# special
class PoleAtNonPositiveInteger(RosenMorseError, ValueError):
    operation = "ln_gamma"


class NoConvergence(RosenMorseError):
    operation = "gauss_2f1"


class DegenerateParameters(RosenMorseError):
    operation = "gauss_2f1"


# model
class DegeneratePoint(RosenMorseError, ValueError):
    operation = "xi_tilde"


class HypergeometricFailure(RosenMorseError):
    operation = "wavefunction"


# rootfind
class BoundaryZero(RosenMorseError):
    operation = "winding_number"


class MaxDepthExceeded(RosenMorseError):
    operation = "find_zeros"


class NewtonStall(RosenMorseError):
    operation = "find_zeros"


class FitDiverged(RosenMorseError):
    operation = "breit_wigner_fit"


# numerics
class NotConverged(RosenMorseError):
    operation = "transfer_matrix_transmission"


class ScaledSingularity(RosenMorseError, ValueError):
    operation = "csm_hamiltonian"


class NoConvergenceQR(RosenMorseError):
    operation = "eig_complex"


# spectral
class WronskianVanishes(RosenMorseError):
    operation = "green_function"


class QuadratureNotConverged(RosenMorseError):
    operation = "completeness_check"


class DefectiveSpectrum(RosenMorseError):
    operation = "csm_completeness_check"


class NotYetUncovered(RosenMorseError, ValueError):
    operation = "resonance_norm"
