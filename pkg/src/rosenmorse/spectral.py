"""Resolvent, spectral measure and completeness.

Conventions used throughout:

* G solves (E - H) G = delta, so G = (2m/hbar^2) u_L(x<) u_R(x>) / W with
  W = u_L u_R' - u_L' u_R, u_R ~ exp(ikx) at +inf and u_L(x) = u_R(-x).
* The Jost function is F_k = 1/T(k); the continuum weight is |T|^2.
* Scattering states are normalised to <psi_k|psi_k'> = 2 pi delta(k - k'),
  so the continuum integral carries dk / 2 pi and runs over the left- and
  right-incident channel.
* CSM eigenvectors are c-normalised (sum v_i^2 = 1, no conjugation).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson, trapezoid

from . import special
from .errors import (
    DefectiveSpectrum,
    NotYetUncovered,
    QuadratureNotConverged,
    WronskianVanishes,
)
from .model import (
    PotentialParams,
    SpectralClass,
    SpectralPoint,
    _kappa,
    bound_state_wavenumbers,
    outgoing_wave,
    s_parameter,
    transmission_connection,
)
from .numerics import (
    CsmSpectrum,
    GridSpec,
    ScalingAngle,
    c_normalize,
    classify_spectrum,
    csm_spectrum,
)

WRONSKIAN_TOL = 1e-10
QUADRATURE_TOL = 1e-4
GAP_TOL = 1e-8


@dataclass(frozen=True)
class GaussianTest:
    """exp(-(x - center)^2 / (2 width^2)), treated as zero beyond ``support`` widths."""

    center: float = 0.0
    width: float = 0.3
    support: float = 6.0

    def __call__(self, x):
        return np.exp(-0.5 * ((np.asarray(x) - self.center) / self.width) ** 2)

    def second_derivative(self, x):
        u = (np.asarray(x) - self.center) / self.width
        return (u**2 - 1.0) / self.width**2 * np.exp(-0.5 * u**2)

    @property
    def interval(self):
        r = self.support * self.width
        return self.center - r, self.center + r


@dataclass
class SpectralMeasure:
    bound_terms: list
    continuum_density: object
    resonance_terms: list
    theta: float = 0.0
    excluded: list = field(default_factory=list)


@dataclass
class CompletenessReport:
    cutoff_k: float
    test_function_errors: list
    matrix_residual: float | None = None
    included_resonances: list = field(default_factory=list)


# -- Green function ----------------------------------------------------------


def green_function(params: PotentialParams, E, x, x2, k=None):
    """Outgoing resolvent kernel G(E; x, x2) with (E - H) G = delta.

    ``k`` overrides the physical-sheet wavenumber sqrt(2mE)/hbar (Im k >= 0),
    which lets the kernel be continued to resonance wavenumbers.
    """
    if k is None:
        E = complex(E)
        if E == 0:
            raise ValueError("E = 0 is the continuum threshold")
        k = complex(params.wavenumber(E))
    k = complex(k)
    u0, du0 = outgoing_wave(params, k, 0.0, derivative=True)
    W = 2.0 * u0 * du0
    scale = abs(k) * abs(u0) ** 2 + abs(du0) ** 2 / abs(k)
    if abs(W) <= WRONSKIAN_TOL * scale:
        raise WronskianVanishes(f"Wronskian vanishes at k = {k}: E is a pole of the resolvent")
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    lo, hi = np.broadcast_arrays(np.minimum(x, x2), np.maximum(x, x2))
    shape = lo.shape
    uL = outgoing_wave(params, k, -lo.ravel())
    uR = outgoing_wave(params, k, hi.ravel())
    G = 2.0 * params.mass / params.hbar**2 * np.asarray(uL * uR).reshape(shape) / W
    return complex(G) if G.ndim == 0 else G


def jost_normalization(params: PotentialParams, k) -> float:
    """1/|F_k|^2 = |T(k)|^2, the continuum weight at real k > 0."""
    k = float(k)
    if not k > 0:
        raise ValueError("jost_normalization needs k > 0")
    E = float(params.energy(k))
    return abs(transmission_connection(params, E).T) ** 2


# -- unscaled completeness ---------------------------------------------------


def _scattering_states(params, k, x):
    """Left- and right-incident states psi_L(k, x), psi_R(k, x) = psi_L(k, -x).

    Only x >= 0 evaluations of the outgoing solution are used:
    for x < 0, psi_L(k, x) = conj(u(k, -x)) + R u(k, -x) with u = outgoing_wave.
    """
    amp = transmission_connection(params, float(params.energy(k)))
    ax = np.abs(x)
    u = outgoing_wave(params, k, ax)
    right = amp.T * u
    left = np.conj(u) + amp.R * u
    psi_L = np.where(x >= 0, right, left)
    psi_R = np.where(x >= 0, left, right)
    return psi_L, psi_R


def _bound_states(params, x):
    """Normalised real bound-state wavefunctions on x (parity (-1)^n)."""
    states = []
    for n, kb in enumerate(bound_state_wavenumbers(params)):
        decay = kb.imag
        y = np.linspace(0.0, 40.0 / decay, 4001)
        u = outgoing_wave(params, kb, y).real
        norm = 2.0 * simpson(u**2, x=y)
        psi = outgoing_wave(params, kb, np.abs(x)).real * (np.sign(x) if n % 2 else 1.0)
        states.append((float(params.energy(kb).real), psi / np.sqrt(norm)))
    return states


def _reconstruct(params, test, k_cutoff, n_k):
    a, b = test.interval
    xs = np.linspace(a, b, 241)
    g = test(xs)
    ks = np.linspace(0.0, k_cutoff, n_k)
    ks[0] = 1e-9 * k_cutoff  # the k = 0 limit; T(0) = 0 unless reflectionless
    integrand = np.empty((n_k, xs.size), dtype=complex)
    for i, k in enumerate(ks):
        if params.U0 != 0 and abs(params.energy(k) - params.U0) <= 1e-13 * abs(params.U0):
            k = k * (1 + 1e-9)
        psi_L, psi_R = _scattering_states(params, k, xs)
        cL = trapezoid(np.conj(psi_L) * g, x=xs)
        cR = trapezoid(np.conj(psi_R) * g, x=xs)
        integrand[i] = (psi_L * cL + psi_R * cR) / (2.0 * np.pi)
    bound = np.zeros(xs.size)
    for _, psi in _bound_states(params, xs):
        bound = bound + psi * trapezoid(psi * g, x=xs)
    rec_t = bound + trapezoid(integrand, x=ks, axis=0)
    rec_s = bound + simpson(integrand, x=ks, axis=0)
    return g, rec_t, rec_s


def completeness_check(params: PotentialParams, grid: GridSpec, k_cutoff: float, tests) -> CompletenessReport:
    """Sup-norm error of the bound + two-channel continuum reconstruction.

    Each test function's reconstruction is evaluated on its own support.
    The k integral uses a grid of spacing about 0.01 and is accepted when
    the trapezoid and Simpson rules agree to 1e-4.
    """
    if not k_cutoff > 0:
        raise ValueError("k_cutoff must be positive")
    errors = []
    for test in tests:
        a, b = test.interval
        if a <= grid.x_min or b >= grid.x_max:
            raise ValueError("test function support must lie inside the grid")
        n_k = 2 * int(np.ceil(k_cutoff / 0.02)) + 1
        g, rec_t, rec_s = _reconstruct(params, test, k_cutoff, n_k)
        gap = np.abs(rec_t - rec_s).max()
        if gap > QUADRATURE_TOL:
            raise QuadratureNotConverged(
                f"trapezoid and Simpson differ by {gap:.3g} at k_cutoff = {k_cutoff}"
            )
        errors.append(float(np.abs(rec_s - g).max()))
    return CompletenessReport(float(k_cutoff), errors)


# -- complex scaling ---------------------------------------------------------


def support_function(theta: float, energy) -> float:
    """f(theta) = 1 before the rotated contour reaches the pole, 0 after."""
    return 1.0 if theta < 0.5 * abs(np.angle(complex(energy))) else 0.0


def _ray_outgoing(params, k, r):
    """Outgoing solution exp(ikr) (1 + e^{-2 beta r})^kappa F(a,b;c;z) at complex r.

    Only valid where |z| = |1/(1 + e^{2 beta r})| is inside the series disc.
    """
    kappa = complex(_kappa(params, k))
    s = s_parameter(params)
    e = np.exp(-2.0 * params.beta * r)
    z = e / (1.0 + e)
    f = special.hyp2f1_series(-kappa - s, -kappa + s + 1.0, 1.0 - kappa, z)
    return np.exp(1j * k * r) * (1.0 + e) ** kappa * f


def _siegert_norm(params, k, theta, grid, vector, window=(4.0, 8.0)):
    """N^2 of one eigenvector, normalised so psi(r) -> exp(ikr) on the ray."""
    v = c_normalize(np.asarray(vector).reshape(-1, 1))[:, 0]
    h = grid.spacing
    phi = v / np.sqrt(h)
    x = grid.points
    sel = (x >= window[0] / params.beta) & (x <= window[1] / params.beta)
    if sel.sum() < 4:
        raise ValueError("grid does not resolve the asymptotic fitting window")
    ref = _ray_outgoing(params, k, x[sel] * np.exp(1j * theta))
    C = np.vdot(ref, phi[sel]) / np.vdot(ref, ref)
    return complex(np.exp(1j * theta) / C**2)


def resonance_norm(params: PotentialParams, resonance: SpectralPoint, angle: ScalingAngle,
                   grid: GridSpec, spectrum: CsmSpectrum | None = None) -> complex:
    """c-product norm N^2 = int psi(r)^2 dr along r = x e^{i theta}.

    psi is the CSM eigenvector rescaled to the Siegert normalisation
    psi ~ exp(ikr) at large positive r; N^2 is then theta-independent.
    """
    E = complex(resonance.energy)
    if resonance.kind is SpectralClass.RESONANCE and 2.0 * angle.theta <= abs(np.angle(E)):
        raise NotYetUncovered(
            f"2 theta = {2 * angle.theta:.3g} does not exceed |arg E| = {abs(np.angle(E)):.3g}"
        )
    if spectrum is None:
        spectrum = csm_spectrum(params, angle, grid)
    i = int(np.argmin(np.abs(spectrum.eigenvalues - E)))
    k = complex(resonance.wavenumber)
    return _siegert_norm(params, k, angle.theta, grid, spectrum.eigenvectors[:, i])


def csm_spectral_assembly(spectrum: CsmSpectrum, theta: ScalingAngle, poles=None) -> SpectralMeasure:
    """Bound, continuum and resonance terms of the CSM spectral measure.

    Candidate resonances are the spectrum's Resonance eigenvalues, or the
    complex energies in ``poles`` when given.  A candidate enters with
    weight 1 - f(theta), i.e. once theta > theta_R = |arg E| / 2.
    """
    params, grid = spectrum.params, spectrum.grid
    th = theta.theta
    bound = []
    for i in spectrum.indices(SpectralClass.BOUND):
        E = complex(spectrum.eigenvalues[i])
        k = 1j * np.sqrt(-2.0 * params.mass * E.real) / params.hbar
        N2 = _siegert_norm(params, k, spectrum.theta, grid, spectrum.eigenvectors[:, i])
        bound.append((E.real, abs(N2)))
    if poles is None:
        candidates = [complex(spectrum.eigenvalues[i]) for i in spectrum.indices(SpectralClass.RESONANCE)]
    else:
        candidates = [complex(E) for E in poles]
    included, excluded = [], []
    for E in candidates:
        theta_R = 0.5 * abs(np.angle(E))
        if 1.0 - support_function(th, E) == 0.0:
            excluded.append(E)
            continue
        N2 = complex("nan")
        if spectrum.eigenvectors is not None and spectrum.eigenvalues.size:
            i = int(np.argmin(np.abs(spectrum.eigenvalues - E)))
            if abs(spectrum.eigenvalues[i] - E) <= 1e-3 * abs(E) + 1e-6:
                k = np.sqrt(2.0 * params.mass * E) / params.hbar
                N2 = _siegert_norm(params, k, spectrum.theta, grid, spectrum.eigenvectors[:, i])
        included.append((E, N2, theta_R))
    density = lambda k: jost_normalization(params, k)  # noqa: E731
    return SpectralMeasure(bound, density, included, th, excluded)


def discrete_completeness_residual(vectors) -> float:
    """max |V V^T - I| for c-normalised columns of ``vectors``."""
    V = np.asarray(vectors, dtype=complex)
    sq = np.sum(V * V, axis=0)
    if np.any(np.abs(sq) <= GAP_TOL):
        raise DefectiveSpectrum("an eigenvector is self-orthogonal (c-norm ~ 0)")
    V = V / np.sqrt(sq)
    return float(np.abs(V @ V.T - np.eye(V.shape[0])).max())


def matrix_completeness_residual(matrix) -> float:
    """Eigen-decompose a diagonalisable matrix and return the c-completeness residual."""
    M = np.asarray(matrix, dtype=complex)
    w, v = np.linalg.eig(M)
    _check_gap(w)
    return discrete_completeness_residual(v)


def _check_gap(w):
    if w.size < 2:
        return
    d = np.abs(w[:, None] - w[None, :])
    d[np.diag_indices_from(d)] = np.inf
    gap = d.min()
    if gap <= GAP_TOL:
        raise DefectiveSpectrum(f"minimum eigenvalue gap {gap:.3g} <= {GAP_TOL:g}")


def csm_completeness_check(params: PotentialParams, angle: ScalingAngle, grid: GridSpec,
                           companion: float | None = None) -> CompletenessReport:
    """Discrete bound + continuum + resonance completeness on the CSM basis.

    ``included_resonances`` lists the eigenvalue indices classified as
    Resonance against a companion angle (theta + 0.1 by default).
    """
    spec = csm_spectrum(params, angle, grid)
    _check_gap(spec.eigenvalues)
    residual = discrete_completeness_residual(spec.eigenvectors)
    if companion is None:
        companion = angle.theta + 0.1 if angle.theta + 0.1 < angle.theta_max else angle.theta - 0.1
    other = csm_spectrum(params, ScalingAngle(companion, angle.theta_max), grid)
    classified = classify_spectrum(spec, other)
    included = [int(i) for i in classified.indices(SpectralClass.RESONANCE)]
    return CompletenessReport(0.0, [], residual, included)
