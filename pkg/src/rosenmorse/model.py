"""
Rosen-Morse (Poschl-Teller) barrier V(x) = U0 / cosh^2(beta x)
================================================================

Closed-form solutions in terms of 2F1, the exact transmission and reflection
amplitudes obtained from the z -> 1-z connection formula, the exact-WKB
transmission formula built from the ratio A of two 2F1 values, and the
pole condition 1/T(k) = 0 continued to complex wavenumber.

Conventions
-----------
- xi = tanh(beta x), z = (1 - xi)/2, kappa = i k / beta.
- The outgoing solution u(x) = 4^{kappa/2} (1 - xi^2)^{-kappa/2}
  F(-kappa - s, -kappa + s + 1; 1 - kappa; z) tends to exp(ikx) as x -> +inf.
- As x -> -inf, u(x) -> exp(ikx)/T + (R/T) exp(-ikx).
- U0 > 0 is a barrier, U0 < 0 a well, U0 = 0 the free particle.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, loggamma

from . import special
from .errors import (
    DegenerateParameters,
    DegeneratePoint,
    HypergeometricFailure,
    NoConvergence,
)


@dataclass(frozen=True)
class PotentialParams:
    U0: float = 2.0
    beta: float = 1.0
    mass: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("beta", "mass", "hbar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if not np.isfinite(self.U0):
            raise ValueError("U0 must be finite")

    @property
    def coupling(self) -> float:
        """Dimensionless strength 8 m U0 / (beta hbar)^2."""
        return 8.0 * self.mass * self.U0 / (self.beta * self.hbar) ** 2

    def potential(self, x):
        return self.U0 / np.cosh(self.beta * np.asarray(x)) ** 2

    def energy(self, k):
        return self.hbar**2 * np.asarray(k) ** 2 / (2.0 * self.mass)

    def wavenumber(self, E):
        """k = sqrt(2 m E)/hbar on the physical sheet, Im k >= 0."""
        k = np.sqrt(2.0 * self.mass * np.asarray(E, dtype=complex)) / self.hbar
        return np.where(k.imag < 0, -k, k) if k.ndim else (-k if k.imag < 0 else k)


class SpectralClass(enum.Enum):
    BOUND = "Bound"
    RESONANCE = "Resonance"
    CONTINUUM = "Continuum"
    ROTATED_CONTINUUM = "RotatedContinuum"
    UNCLASSIFIED = "Unclassified"


@dataclass(frozen=True)
class SpectralPoint:
    energy: complex
    wavenumber: complex
    kind: SpectralClass

    def __post_init__(self):
        k = complex(self.wavenumber)
        if self.kind is SpectralClass.BOUND and not (
            k.imag > 0 and abs(k.real) <= 1e-8 * abs(k)
        ):
            raise ValueError(f"bound state needs k on the positive imaginary axis, got {k}")
        if self.kind is SpectralClass.RESONANCE and not (k.imag < 0 and k.real > 0):
            raise ValueError(f"resonance needs Re k > 0, Im k < 0, got {k}")

    @classmethod
    def from_wavenumber(cls, params: PotentialParams, k, kind=None) -> "SpectralPoint":
        k = complex(k)
        if kind is None:
            kind = classify_wavenumber(k)
        energy = complex(params.energy(k))
        if kind is SpectralClass.BOUND:
            k = complex(0.0, k.imag)
            energy = complex(params.energy(k).real, 0.0)
        return cls(energy, k, kind)

    @classmethod
    def from_energy(cls, params: PotentialParams, E, kind: SpectralClass) -> "SpectralPoint":
        """Map an energy to the k-plane: resonances use the principal root."""
        E = complex(E)
        if kind is SpectralClass.RESONANCE:
            k = cmath.sqrt(2.0 * params.mass * E) / params.hbar
        else:
            k = complex(params.wavenumber(E))
        return cls.from_wavenumber(params, k, kind)


def classify_wavenumber(k, tol: float = 1e-8) -> SpectralClass:
    """Quadrant of an S-matrix pole in the k-plane."""
    k = complex(k)
    if abs(k.real) <= tol * max(abs(k), 1.0) and k.imag > 0:
        return SpectralClass.BOUND
    if k.real > 0 and k.imag < 0:
        return SpectralClass.RESONANCE
    if k.real > 0 and abs(k.imag) <= tol * abs(k):
        return SpectralClass.CONTINUUM
    return SpectralClass.UNCLASSIFIED


@dataclass(frozen=True)
class ScatteringAmplitudes:
    k: float
    T: complex
    R: complex

    @property
    def unitarity(self) -> float:
        return abs(self.T) ** 2 + abs(self.R) ** 2


@dataclass(frozen=True)
class WkbTransmissionParts:
    xi_tilde: complex
    A: complex
    T: complex
    sqrt_A: complex


def s_parameter(params: PotentialParams) -> complex:
    """s = (-1 + sqrt(1 - 8 m U0/(beta hbar)^2)) / 2 with Im sqrt >= 0."""
    root = cmath.sqrt(complex(1.0 - params.coupling, 0.0))
    return 0.5 * (-1.0 + root)


def _kappa(params, k):
    return 1j * np.asarray(k, dtype=complex) / params.beta


def _coordinates(params, x):
    """(xi, z, 1-z, sech^2) evaluated without cancellation at large |x|."""
    bx = params.beta * np.asarray(x, dtype=float)
    xi = np.tanh(bx)
    z = expit(-2.0 * bx)
    w = expit(2.0 * bx)
    sech2 = 4.0 * z * w
    return xi, z, w, sech2


def _branch_value(a, b, c, nu, z, w, derivative):
    """z**nu F(a,b;c;z) and its z-derivative on arrays sorted into z<=1/2, z>1/2."""
    val = np.empty(z.shape, dtype=complex)
    der = np.empty(z.shape, dtype=complex)
    left = z <= 0.5
    right = ~left
    if left.any():
        zl = z[left]
        f = special.hyp2f1_series(a, b, c, zl)
        val[left] = zl**nu * f
        if derivative:
            fp = special.hyp2f1_derivative(a, b, c, zl) if a * b != 0 else 0.0
            der[left] = nu * zl ** (nu - 1) * f + zl**nu * fp if nu != 0 else fp
    if right.any():
        zr, wr = z[right], w[right]
        g1 = special._gamma_ratio((c, c - a - b), (c - a, c - b))
        g2 = special._gamma_ratio((c, a + b - c), (a, b))
        f = np.zeros(zr.shape, dtype=complex)
        fp = np.zeros(zr.shape, dtype=complex)
        sigma = c - a - b
        if g1 != 0:
            f += g1 * special.hyp2f1_series(a, b, a + b - c + 1, wr)
            if derivative:
                d = a * b / (a + b - c + 1) * special.hyp2f1_series(a + 1, b + 1, a + b - c + 2, wr)
                fp -= g1 * d
        if g2 != 0:
            h = special.hyp2f1_series(c - a, c - b, sigma + 1, wr)
            f += g2 * wr**sigma * h
            if derivative:
                hp = (c - a) * (c - b) / (sigma + 1) * special.hyp2f1_series(
                    c - a + 1, c - b + 1, sigma + 2, wr
                )
                fp -= g2 * (sigma * wr ** (sigma - 1) * h + wr**sigma * hp)
        val[right] = zr**nu * f
        if derivative:
            der[right] = (nu * zr ** (nu - 1) * f if nu != 0 else 0.0) + zr**nu * fp
    return val, der


def _check_connection(kappa):
    if special._near_integer(kappa, tol=1e-12):
        raise DegenerateParameters(
            f"kappa = {kappa} is an integer; connection in 1-z is singular",
            operation="wavefunction",
        )


def _solutions(params, k, x, which, derivative=False):
    """The c1 (outgoing, "out") or c2 (incoming, "in") term of the 2F1 wavefunction."""
    k = complex(k)
    kappa = complex(_kappa(params, k))
    s = s_parameter(params)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    xi, z, w, sech2 = _coordinates(params, x)
    if which == "out":
        a, b, c, nu = -kappa - s, -kappa + s + 1.0, 1.0 - kappa, 0.0
    else:
        a, b, c, nu = s + 1.0, -s, 1.0 + kappa, kappa
    if (z > 0.5).any():
        _check_connection(kappa)
    try:
        g, gp = _branch_value(a, b, c, nu, z, w, derivative)
    except (NoConvergence, DegenerateParameters) as exc:
        raise HypergeometricFailure(str(exc), operation="wavefunction") from exc
    pref = sech2 ** (-kappa / 2.0)
    val = pref * g
    if not derivative:
        return val[0] if scalar else val
    beta = params.beta
    der = pref * (kappa * beta * xi * g - 0.5 * beta * sech2 * gp)
    if scalar:
        return val[0], der[0]
    return val, der


def wavefunction(params: PotentialParams, E, c1, c2, x):
    """General solution c1 * outgoing + c2 * incoming, vectorised over x.

    The first solution behaves as 4^{-kappa/2} exp(ikx) as x -> +inf, the
    second is its incoming partner; k = sqrt(2 m E)/hbar with Im k >= 0.
    """
    E = complex(E)
    if E == 0:
        raise ValueError("E must be nonzero")
    k = complex(params.wavenumber(E))
    out = 0
    if c1 != 0:
        out = out + c1 * _solutions(params, k, x, "out")
    if c2 != 0:
        out = out + c2 * _solutions(params, k, x, "in")
    if np.isscalar(out) and out == 0:
        return np.zeros(np.shape(x), dtype=complex) if np.ndim(x) else 0j
    return out


def transmitted_normalisation(params: PotentialParams, k) -> complex:
    """c1 = 4^{ik/(2 beta)} so that the outgoing solution tends to exp(ikx)."""
    return complex(np.exp(complex(_kappa(params, k)) / 2.0 * np.log(4.0)))


def outgoing_wave(params: PotentialParams, k, x, derivative=False):
    """Solution normalised to exp(ikx) at x -> +inf, for complex k."""
    c1 = transmitted_normalisation(params, k)
    res = _solutions(params, k, x, "out", derivative)
    if derivative:
        return c1 * res[0], c1 * res[1]
    return c1 * res


def xi_tilde(params: PotentialParams, E) -> complex:
    """tanh(arccosh(sqrt(U0/E))) with principal branches throughout.

    Real E > U0 sits on the arccosh cut; the signed zero of the imaginary
    part of E (default +0) selects the side, giving Im xi_tilde > 0.
    """
    E = complex(E)
    if E == 0:
        raise ValueError("E must be nonzero")
    if params.U0 == 0 or abs(E - params.U0) <= 1e-14 * abs(params.U0):
        raise DegeneratePoint(f"E = U0 = {params.U0} gives xi_tilde = 0")
    u = np.sqrt(complex(params.U0) / E)
    return complex(np.tanh(np.arccosh(u)))


def transmission_wkb(params: PotentialParams, E, previous_sqrt_A=None) -> WkbTransmissionParts:
    """T from 1/T = 1/sqrt(A) - sqrt(A) with A the squared 2F1 ratio.

    ``previous_sqrt_A`` (from the preceding point of a sweep) selects the
    sign of sqrt(A) closest to it; without it the principal root is used.
    For U0 = 0 the formula has no limit (xi_tilde -> i inf); the free
    particle value T = 1 is returned with xi_tilde, A and sqrt(A) as NaN.
    """
    E = complex(E)
    if E == 0:
        raise ValueError("E must be nonzero")
    if params.U0 == 0:
        nan = complex("nan")
        return WkbTransmissionParts(nan, nan, 1.0 + 0j, nan)
    xt = xi_tilde(params, E)
    kappa = complex(_kappa(params, params.wavenumber(E)))
    s = s_parameter(params)
    a, b, c = -kappa - s, -kappa + s + 1.0, 1.0 - kappa
    try:
        num = special.gauss_2f1(special.HypergeometricArgs(a, b, c, (1.0 - xt) / 2.0))
        den = special.gauss_2f1(special.HypergeometricArgs(a, b, c, (1.0 + xt) / 2.0))
    except (NoConvergence, DegenerateParameters) as exc:
        raise HypergeometricFailure(str(exc), operation="transmission_wkb") from exc
    A = (num / den) ** 2
    root = cmath.sqrt(A)
    if previous_sqrt_A is not None and abs(-root - previous_sqrt_A) < abs(root - previous_sqrt_A):
        root = -root
    inv = 1.0 / root - root
    if inv == 0:
        raise DegeneratePoint("A = 1: the WKB transmission formula diverges")
    return WkbTransmissionParts(xt, A, 1.0 / inv, root)


def transmission_wkb_sweep(params: PotentialParams, energies):
    """WKB parts along an energy sweep with continuous sqrt(A).

    Returns (parts, flips) where ``flips[i]`` is True when continuity chose
    the non-principal root at point i.  The tracked branch restarts at the
    principal root when the sweep crosses E = U0.
    """
    parts, flips = [], []
    prev = None
    prev_side = None
    for E in energies:
        side = np.real(E) < params.U0
        if side != prev_side:
            prev = None
        p = transmission_wkb(params, E, previous_sqrt_A=prev)
        flips.append(bool(p.sqrt_A == -cmath.sqrt(p.A) and p.sqrt_A != 0))
        parts.append(p)
        prev, prev_side = p.sqrt_A, side
    return parts, flips


def _gamma_weights(params, k):
    """1/T and R/T from the 1-z connection formula, vectorised over k."""
    kappa = _kappa(params, k)
    if params.U0 == 0:
        # the Gamma ratios cancel identically: no potential, no reflection
        return np.ones_like(kappa), np.zeros_like(kappa)
    s = s_parameter(params)
    inv_t = np.exp(loggamma(1.0 - kappa) + loggamma(-kappa)) * _rgamma(-kappa - s) * _rgamma(
        1.0 - kappa + s
    )
    r_over_t = np.exp(loggamma(1.0 - kappa) + loggamma(kappa)) * _rgamma(1.0 + s) * _rgamma(-s)
    return inv_t, r_over_t


def _rgamma(z):
    z = np.asarray(z, dtype=complex)
    out = np.exp(-loggamma(z))
    pole = (np.abs(z.imag) <= 1e-14) & (z.real <= 1e-14) & (np.abs(z.real - np.round(z.real)) <= 1e-14)
    return np.where(pole, 0.0, out)


def transmission_connection(params: PotentialParams, E: float) -> ScatteringAmplitudes:
    """Exact (T, R) at real E > 0 from the normalised transmitted wave."""
    E = float(E)
    if not E > 0:
        raise ValueError("transmission_connection needs E > 0")
    if params.U0 != 0 and abs(E - params.U0) <= 1e-14 * abs(params.U0):
        raise DegeneratePoint("E = U0", operation="transmission_connection")
    k = float(params.wavenumber(E).real)
    inv_t, r_over_t = _gamma_weights(params, k)
    T = complex(1.0 / inv_t)
    return ScatteringAmplitudes(k, T, complex(r_over_t) * T)


def siegert_condition(params: PotentialParams, k):
    """1/T(k) continued to complex k; its zeros are the S-matrix poles.

    Vectorised over ``k``.
    """
    k = np.asarray(k, dtype=complex)
    inv_t, _ = _gamma_weights(params, k)
    return complex(inv_t) if inv_t.ndim == 0 else inv_t


def phase_shift(params: PotentialParams, E: float, previous: float | None = None) -> float:
    """arg T, shifted by a multiple of 2 pi to lie within pi of ``previous``."""
    delta = cmath.phase(transmission_connection(params, E).T)
    if previous is not None:
        delta += 2.0 * np.pi * np.round((previous - delta) / (2.0 * np.pi))
    return float(delta)


def phase_shift_sweep(params: PotentialParams, energies) -> np.ndarray:
    """Continuous phase shift along an increasing-E sweep."""
    out = []
    prev = None
    for E in energies:
        prev = phase_shift(params, E, prev)
        out.append(prev)
    return np.array(out)


def bound_state_wavenumbers(params: PotentialParams) -> list[complex]:
    """Bound-state poles k_n = i beta (s - n), 0 <= n < s, for a well (real s)."""
    s = s_parameter(params)
    if params.U0 >= 0 or abs(s.imag) > 0:
        return []
    out = []
    n = 0
    while s.real - n > 1e-12:
        out.append(1j * params.beta * (s.real - n))
        n += 1
    return out
