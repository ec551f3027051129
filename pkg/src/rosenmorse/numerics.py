"""
Grid-based oracles
==================

- ``transfer_matrix_transmission``: piecewise-constant slabs, exact slab
  propagators, Richardson-extrapolated in the slab width.
- ``integrate_schrodinger``: adaptive ODE integration of the 1D equation.
- ``csm_hamiltonian``: uniformly complex-scaled Hamiltonian
  H_theta = -exp(-2i theta) (hbar^2/2m) d^2/dx^2 + V(x exp(i theta)) on a
  sine-basis DVR of a Dirichlet box.  The matrix is complex symmetric.
- ``classify_spectrum``: theta-invariant eigenvalues are bound or resonant,
  the rest is tested against the rotated continuum ray arg E = -2 theta.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NoConvergenceQR, NotConverged, ScaledSingularity
from .model import PotentialParams, ScatteringAmplitudes, SpectralClass

MATCH_RTOL = 1e-3
MATCH_ATOL = 1e-6
RAY_TOL = 0.05  # rad, membership of the rotated continuum


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -14.0
    x_max: float = 14.0
    n_points: int = 400

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("x_min < x_max required")
        if self.n_points < 8:
            raise ValueError("n_points >= 8 required")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def spacing(self) -> float:
        return self.length / (self.n_points + 1)

    @property
    def points(self) -> np.ndarray:
        """Interior DVR points (the walls carry psi = 0)."""
        return self.x_min + self.spacing * np.arange(1, self.n_points + 1)

    def check_flat(self, params: PotentialParams, minimum: float = 10.0):
        if params.beta * min(-self.x_min, self.x_max) < minimum:
            raise ValueError(
                f"grid must extend to beta|x| >= {minimum} on both sides for asymptotic flatness"
            )

    def refined(self, factor: float = 2.0) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, int(round(self.n_points * factor)))


@dataclass(frozen=True)
class ScalingAngle:
    theta: float
    theta_max: float = np.pi / 4

    def __post_init__(self):
        if not 0 < self.theta_max < np.pi / 2:
            raise ValueError("theta_max must lie in (0, pi/2)")
        if not 0 <= self.theta < self.theta_max:
            raise ValueError(f"theta = {self.theta} outside [0, {self.theta_max})")


@dataclass
class CsmSpectrum:
    theta: float
    eigenvalues: np.ndarray
    classes: list
    residual_norm: float
    eigenvectors: np.ndarray | None = None
    params: PotentialParams | None = None
    grid: GridSpec | None = None
    matched: dict = field(default_factory=dict)

    def indices(self, kind: SpectralClass) -> np.ndarray:
        return np.array([i for i, c in enumerate(self.classes) if c is kind], dtype=int)

    def of_class(self, kind: SpectralClass) -> np.ndarray:
        return self.eigenvalues[self.indices(kind)]


# -- transfer matrix ---------------------------------------------------------


def _slab_product(q, h):
    """Ordered product M_{n-1} ... M_0 of slab propagators for (psi, psi')."""
    qh = q * h
    c = np.cos(qh)
    sinc = np.sinc(qh / np.pi) * h  # sin(qh)/q, finite at q = 0
    M = np.empty(q.shape + (2, 2), dtype=complex)
    M[..., 0, 0] = c
    M[..., 0, 1] = sinc
    M[..., 1, 0] = -(q**2) * sinc
    M[..., 1, 1] = c
    ident = np.broadcast_to(np.eye(2, dtype=complex), M[:, :1].shape)
    while M.shape[1] > 1:
        if M.shape[1] % 2:
            M = np.concatenate([M, ident], axis=1)
        M = M[:, 1::2] @ M[:, 0::2]
    return M[:, 0]


def _transfer_raw(potential, E, grid_x, n, mass, hbar):
    x_min, x_max = grid_x
    h = (x_max - x_min) / n
    xm = x_min + (np.arange(n) + 0.5) * h
    V = np.asarray(potential(xm), dtype=float)
    k = np.sqrt(2.0 * mass * E) / hbar
    q = np.sqrt(2.0 * mass * (E[:, None] - V[None, :]).astype(complex)) / hbar
    P = _slab_product(q, h)
    ea, eb = np.exp(1j * k * x_min), np.exp(-1j * k * x_min)
    inc = np.stack([ea, 1j * k * ea], -1)
    ref = np.stack([eb, -1j * k * eb], -1)
    Pi = np.einsum("eij,ej->ei", P, inc)
    Pr = np.einsum("eij,ej->ei", P, ref)
    # right end must be purely outgoing: psi' = ik psi
    R = -(Pi[:, 1] - 1j * k * Pi[:, 0]) / (Pr[:, 1] - 1j * k * Pr[:, 0])
    T = (Pi[:, 0] + R * Pr[:, 0]) * np.exp(-1j * k * x_max)
    return T, R


def transfer_matrix_transmission(potential, params, E, grid: GridSpec, tol: float = 1e-6):
    """(T, R) for incidence from the left through ``potential`` on the grid.

    ``params`` only needs ``mass`` and ``hbar``.  The grid is cut into
    ``grid.n_points`` slabs.  The slab-width error is O(h^2); estimates at
    n/2, n and 2n slabs are combined pairwise by Richardson extrapolation and
    the two extrapolants must agree to ``tol``.  Scalar E returns one
    ScatteringAmplitudes, an array returns a list.
    """
    mass, hbar = params.mass, params.hbar
    scalar = np.ndim(E) == 0
    E = np.atleast_1d(np.asarray(E, dtype=float))
    if np.any(E <= 0):
        raise ValueError("transfer_matrix_transmission needs E > 0")
    ends = np.abs(np.asarray(potential(np.array([grid.x_min, grid.x_max])), dtype=float))
    if ends.max() >= 1e-9 * E.min():
        raise ValueError("potential is not negligible at the grid ends")
    n = grid.n_points
    span = (grid.x_min, grid.x_max)
    est = [_transfer_raw(potential, E, span, m, mass, hbar) for m in (n // 2, n, 2 * n)]
    T_lo = (4 * est[1][0] - est[0][0]) / 3
    R_lo = (4 * est[1][1] - est[0][1]) / 3
    T_hi = (4 * est[2][0] - est[1][0]) / 3
    R_hi = (4 * est[2][1] - est[1][1]) / 3
    diff = max(np.abs(T_hi - T_lo).max(), np.abs(R_hi - R_lo).max())
    if diff > tol:
        raise NotConverged(f"Richardson estimates differ by {diff:.3g} > {tol:.3g}")
    k = np.sqrt(2.0 * mass * E) / hbar
    out = [ScatteringAmplitudes(float(kk), complex(t), complex(r)) for kk, t, r in zip(k, T_hi, R_hi)]
    return out[0] if scalar else out


def integrate_schrodinger(potential, E, x_span, psi0, dpsi0, x_eval=None, mass=1.0, hbar=1.0,
                          rtol=1e-12, atol=1e-14):
    """Integrate psi'' = (2m/hbar^2)(V - E) psi from x_span[0] to x_span[1].

    Returns (x, psi, dpsi).
    """
    E = complex(E)
    coef = 2.0 * mass / hbar**2

    def rhs(x, y):
        psi = y[0] + 1j * y[1]
        dpsi = y[2] + 1j * y[3]
        d2 = coef * (potential(x) - E) * psi
        return [dpsi.real, dpsi.imag, d2.real, d2.imag]

    y0 = [complex(psi0).real, complex(psi0).imag, complex(dpsi0).real, complex(dpsi0).imag]
    sol = solve_ivp(rhs, x_span, y0, method="DOP853", t_eval=x_eval, rtol=rtol, atol=atol)
    if not sol.success:
        raise NotConverged(sol.message, operation="integrate_schrodinger")
    return sol.t, sol.y[0] + 1j * sol.y[1], sol.y[2] + 1j * sol.y[3]


# -- complex scaling ---------------------------------------------------------


def _sine_kinetic(grid: GridSpec, mass: float, hbar: float) -> np.ndarray:
    n = grid.n_points
    j = np.arange(1, n + 1)
    S = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(j, j) * np.pi / (n + 1))
    levels = hbar**2 / (2.0 * mass) * (j * np.pi / grid.length) ** 2
    T = (S * levels) @ S
    return 0.5 * (T + T.T)


def box_levels(grid: GridSpec, mass: float = 1.0, hbar: float = 1.0) -> np.ndarray:
    """Particle-in-a-box energies of the Dirichlet box spanned by the grid."""
    j = np.arange(1, grid.n_points + 1)
    return hbar**2 / (2.0 * mass) * (j * np.pi / grid.length) ** 2


def scaled_potential(params: PotentialParams, theta: float, x):
    return params.U0 / np.cosh(params.beta * np.asarray(x) * np.exp(1j * theta)) ** 2


def check_scaled_ray(params: PotentialParams, angle: ScalingAngle, grid: GridSpec) -> float:
    """Distance from the scaled grid ray to the nearest pole of the scaled potential.

    The poles sit at beta x e^{i theta} = i pi (n + 1/2).  Raises
    ScaledSingularity below 0.1.  Returns inf for the free particle.
    """
    if params.U0 == 0:
        return float("inf")
    ray = params.beta * grid.points * np.exp(1j * angle.theta)
    n_max = int(params.beta * max(abs(grid.x_min), abs(grid.x_max)) / np.pi) + 2
    poles = 1j * np.pi * (np.arange(n_max) + 0.5)
    poles = np.concatenate([poles, -poles])
    dist = float(np.abs(ray[:, None] - poles[None, :]).min())
    if dist < 0.1:
        raise ScaledSingularity(
            f"scaled ray passes within {dist:.3g} of a pole of the scaled potential"
        )
    return dist


def csm_hamiltonian(params: PotentialParams, angle: ScalingAngle, grid: GridSpec) -> np.ndarray:
    """Complex-symmetric DVR matrix of the uniformly scaled Hamiltonian.

    Raises ScaledSingularity when the scaled ray passes within 0.1 of a
    zero of cosh (see ``check_scaled_ray``).
    """
    theta = angle.theta
    check_scaled_ray(params, angle, grid)
    ray = params.beta * grid.points * np.exp(1j * theta)
    H = np.exp(-2j * theta) * _sine_kinetic(grid, params.mass, params.hbar)
    H[np.diag_indices_from(H)] += params.U0 / np.cosh(ray) ** 2
    return H


def eig_complex(matrix, tol: float = 1e-9):
    """All eigenpairs of a general complex matrix with a residual check.

    Eigenvectors are returned with unit 2-norm columns; ``residual_norm`` is
    max_i ||M v_i - lambda_i v_i|| / ||M||_2.
    """
    M = np.asarray(matrix, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("eig_complex needs a square matrix")
    if M.shape[0] > 2000:
        raise ValueError("dimension above 2000 is not supported")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        w, v = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceQR(str(exc)) from exc
    v = v / np.linalg.norm(v, axis=0)
    norm = np.linalg.norm(M, 2) if M.size else 0.0
    if norm == 0:
        return w, v, 0.0
    residual = float(np.linalg.norm(M @ v - v * w, axis=0).max() / norm)
    if residual > tol:
        raise NoConvergenceQR(f"eigenpair residual {residual:.3g} exceeds {tol:.3g}")
    return w, v, residual


def csm_spectrum(params: PotentialParams, angle: ScalingAngle, grid: GridSpec) -> CsmSpectrum:
    """Unclassified eigen-decomposition of the scaled Hamiltonian."""
    H = csm_hamiltonian(params, angle, grid)
    w, v, res = eig_complex(H)
    order = np.lexsort((w.imag, w.real))
    w, v = w[order], v[:, order]
    return CsmSpectrum(
        angle.theta, w, [SpectralClass.UNCLASSIFIED] * len(w), res, v, params, grid
    )


def on_rotated_ray(E, theta: float, tol: float = RAY_TOL) -> bool:
    return abs(np.angle(E) + 2.0 * theta) <= tol


def classify_spectrum(spec_a: CsmSpectrum, spec_b: CsmSpectrum) -> CsmSpectrum:
    """Classify ``spec_a`` using a second angle ``spec_b``.

    Eigenvalues reproduced at the other angle within 1e-3|E| + 1e-6 are
    Bound (Im E ~ 0, Re E < 0) or Resonance (Im E < 0).  Unmatched ones near
    arg E = -2 theta are the rotated continuum (``ROTATED_CONTINUUM``); everything
    else stays UNCLASSIFIED.
    """
    if spec_a.theta == spec_b.theta:
        raise ValueError("classification needs two distinct angles")
    wa, wb = spec_a.eigenvalues, spec_b.eigenvalues
    classes = []
    matched = {}
    for i, E in enumerate(wa):
        j = int(np.argmin(np.abs(wb - E)))
        tol = MATCH_RTOL * abs(E) + MATCH_ATOL
        kind = SpectralClass.UNCLASSIFIED
        if abs(wb[j] - E) <= tol:
            if abs(E.imag) <= tol and E.real < 0:
                kind = SpectralClass.BOUND
            elif E.imag < -tol:
                kind = SpectralClass.RESONANCE
            if kind is not SpectralClass.UNCLASSIFIED:
                matched[i] = complex(wb[j])
        if kind is SpectralClass.UNCLASSIFIED and on_rotated_ray(E, spec_a.theta):
            kind = SpectralClass.ROTATED_CONTINUUM
        classes.append(kind)
    return CsmSpectrum(
        spec_a.theta,
        wa,
        classes,
        spec_a.residual_norm,
        spec_a.eigenvectors,
        spec_a.params,
        spec_a.grid,
        matched,
    )


def continuum_angular_deviation(spectrum: CsmSpectrum, band=None) -> np.ndarray:
    """|arg E + 2 theta| over rotated-continuum eigenvalues in a |E| band.

    The default band is [lowest continuum |E|, 10% of the largest box level],
    where the DVR resolves the kinetic energy well.
    """
    cont = spectrum.of_class(SpectralClass.ROTATED_CONTINUUM)
    if cont.size == 0:
        return cont.real
    if band is None:
        top = box_levels(spectrum.grid, spectrum.params.mass, spectrum.params.hbar).max()
        band = (np.abs(cont).min(), 0.1 * top)
    sel = (np.abs(cont) >= band[0]) & (np.abs(cont) <= band[1])
    return np.abs(np.angle(cont[sel]) + 2.0 * spectrum.theta)


def c_normalize(vectors: np.ndarray) -> np.ndarray:
    """Scale columns so that sum_i v_i^2 = 1 (no complex conjugation)."""
    return vectors / np.sqrt(np.sum(vectors * vectors, axis=0))


def outer_mass(vector: np.ndarray, fraction: float = 0.2) -> float:
    """sum |v_i|^2 over the outermost ``fraction`` of grid points (both ends)."""
    v = c_normalize(np.asarray(vector).reshape(-1, 1))[:, 0]
    n = v.size
    m = int(round(fraction * n / 2))
    return float(np.sum(np.abs(v[:m]) ** 2) + np.sum(np.abs(v[n - m:]) ** 2))
