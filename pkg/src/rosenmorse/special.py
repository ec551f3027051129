"""
Complex log-gamma and Gauss hypergeometric function
====================================================

``gauss_2f1`` evaluates 2F1(a, b; c; z) for complex a, b, c and any complex z
on the principal branch (cut along [1, inf)).  The evaluation region is chosen
from the modulus of the transformed argument:

- direct Maclaurin series in z,
- Pfaff transformation to z/(z-1),
- two-term connection formula in 1-z,
- two-term connection formula in 1/z,
- power-series continuation of the hypergeometric ODE along a ray from the
  origin, for the band around exp(+-i pi/3) where all four maps above have
  modulus close to one.

Connection formulas whose Gamma weights are singular (c-a-b or a-b within
``DEGENERACY_TOL`` of an integer) are replaced by the ODE continuation.
Within 0.02 of z = 1, or beyond |z| = 1e4, they are evaluated at parameters
shifted by +-i*eps and +-2i*eps, averaged and Richardson-extrapolated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .errors import DegenerateParameters, NoConvergence, PoleAtNonPositiveInteger

# Largest transformed-argument modulus accepted for a series region.
SERIES_RADIUS = 0.75
DEGENERACY_TOL = 1e-9
DEGENERACY_SHIFT = 1e-4
POLE_TOL = 1e-14
CANCELLATION_LIMIT = 10.0
# Alternative representations tried under cancellation may converge more slowly.
ALT_RADIUS = 0.9
# Degenerate connection regions fall back to the ODE continuation between these.
CONTINUATION_MIN_DISTANCE = 0.02
CONTINUATION_MAX_MODULUS = 1e4
# Continuation rays closer than this to z = 1 detour around it.
DETOUR_DISTANCE = 0.3


@dataclass(frozen=True)
class AccuracyBudget:
    rel_tol: float = 1e-12
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_BUDGET = AccuracyBudget()


def _nonpositive_integer(z, tol: float = POLE_TOL) -> bool:
    z = complex(z)
    if abs(z.imag) > tol or z.real > tol:
        return False
    return abs(z.real - round(z.real)) <= tol


def _near_integer(z, tol: float = DEGENERACY_TOL) -> bool:
    z = complex(z)
    return abs(z.imag) <= tol and abs(z.real - round(z.real)) <= tol


@dataclass(frozen=True)
class HypergeometricArgs:
    """Parameters of 2F1(a, b; c; z); ``c`` may not be a non-positive integer."""

    a: complex
    b: complex
    c: complex
    z: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "z"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if _nonpositive_integer(self.c):
            raise PoleAtNonPositiveInteger(
                f"c = {self.c} is a non-positive integer", operation="gauss_2f1"
            )


def ln_gamma(z) -> complex:
    """Principal branch of log Gamma(z).

    Raises PoleAtNonPositiveInteger at z in {0, -1, -2, ...}.
    """
    if _nonpositive_integer(z):
        raise PoleAtNonPositiveInteger(f"Gamma has a pole at z = {z}")
    return complex(loggamma(complex(z)))


def rgamma(z) -> complex:
    """1/Gamma(z), zero at the poles of Gamma."""
    if _nonpositive_integer(z):
        return 0j
    return complex(np.exp(-loggamma(complex(z))))


def _gamma_ratio(num, den) -> complex:
    """prod Gamma(num) / prod Gamma(den); zero if a denominator sits on a pole."""
    if any(_nonpositive_integer(d) for d in den):
        return 0j
    log = sum(ln_gamma(n) for n in num) - sum(ln_gamma(d) for d in den)
    return complex(np.exp(log))


def _polynomial_degree(a, b):
    """Degree of the terminating series, or None if 2F1 does not terminate."""
    degs = [-round(complex(p).real) for p in (a, b) if _nonpositive_integer(p)]
    return min(degs) if degs else None


def hyp2f1_series(a, b, c, z, budget: AccuracyBudget = DEFAULT_BUDGET):
    """Maclaurin series of 2F1, vectorised over ``z``.

    Only meaningful for |z| < 1.  Terms are accumulated until two consecutive
    terms fall below rel_tol relative to the partial sum and the term ratio
    has dropped below one.
    """
    a, b, c = complex(a), complex(b), complex(c)
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    total = np.ones_like(z)
    term = np.ones_like(z)
    stop = 0.1 * budget.rel_tol
    small_prev = np.zeros(z.shape, dtype=bool)
    done = np.zeros(z.shape, dtype=bool)
    for n in range(budget.max_terms):
        ratio = (a + n) * (b + n) / ((c + n) * (n + 1))
        if ratio == 0:
            done[:] = True
            break
        term = term * (ratio * z)
        total = total + term
        if not np.isfinite(total).all():
            break
        small = np.abs(term) <= stop * np.abs(total)
        shrinking = abs(ratio) * np.abs(z) < 1.0
        done |= small & small_prev & shrinking
        small_prev = small
        if done.all():
            break
    if not done.all():
        raise NoConvergence(
            f"2F1 series did not converge within {budget.max_terms} terms "
            f"(a={a}, b={b}, c={c}, max |z|={np.abs(z).max():.3g})"
        )
    return complex(total[0]) if scalar else total


def _symmetric_shift(func, shift):
    """func at zero shift from the +-i eps and +-2i eps averages.

    Each average has an even error series in eps; Richardson removes the
    eps^2 term, leaving O(eps^4) against an O(1/eps) rounding loss.
    """
    eps = 1j * DEGENERACY_SHIFT * shift
    avg1 = 0.5 * (func(eps) + func(-eps))
    avg2 = 0.5 * (func(2 * eps) + func(-2 * eps))
    return (4.0 * avg1 - avg2) / 3.0


def hyp2f1_near_one(a, b, c, z, budget: AccuracyBudget = DEFAULT_BUDGET):
    """2F1 through the two-term connection formula in 1-z (vectorised).

    The returned value is the principal branch for |arg(1-z)| < pi.
    """
    a, b, c = complex(a), complex(b), complex(c)
    if _near_integer(c - a - b):
        return _symmetric_shift(
            lambda e: _near_one_regular(a, b, c + e, z, budget), 1.0
        )
    return _near_one_regular(a, b, c, z, budget)


def _near_one_regular(a, b, c, z, budget, with_cond=False):
    if _nonpositive_integer(c - a - b) or _nonpositive_integer(a + b - c):
        raise DegenerateParameters(
            f"c-a-b = {c - a - b} is an integer; connection in 1-z is singular"
        )
    z = np.asarray(z, dtype=complex)
    w = 1.0 - z
    g1 = _gamma_ratio((c, c - a - b), (c - a, c - b))
    g2 = _gamma_ratio((c, a + b - c), (a, b))
    t1 = np.zeros(np.shape(w), dtype=complex)
    t2 = np.zeros(np.shape(w), dtype=complex)
    if g1 != 0:
        t1 = g1 * hyp2f1_series(a, b, a + b - c + 1, w, budget)
    if g2 != 0:
        t2 = g2 * w ** (c - a - b) * hyp2f1_series(c - a, c - b, c - a - b + 1, w, budget)
    out = t1 + t2
    if out.ndim == 0:
        out = complex(out)
    if with_cond:
        return out, _cancellation(t1, t2, out)
    return out


def _cancellation(t1, t2, total):
    return float(np.max((np.abs(t1) + np.abs(t2)) / np.maximum(np.abs(total), 1e-300)))


def _inverse_z(a, b, c, z, budget):
    if _near_integer(a - b):
        return _symmetric_shift(lambda e: _inverse_z_regular(a + e, b, c, z, budget), 1.0)
    return _inverse_z_regular(a, b, c, z, budget)


def _inverse_z_regular(a, b, c, z, budget, with_cond=False):
    if _near_integer(a - b, tol=POLE_TOL):
        raise DegenerateParameters(f"a-b = {a - b} is an integer; connection in 1/z is singular")
    mz = -z
    u = 1.0 / z
    t1 = t2 = 0j
    g1 = _gamma_ratio((c, b - a), (b, c - a))
    if g1 != 0:
        t1 = g1 * mz ** (-a) * hyp2f1_series(a, a - c + 1, a - b + 1, u, budget)
    g2 = _gamma_ratio((c, a - b), (a, c - b))
    if g2 != 0:
        t2 = g2 * mz ** (-b) * hyp2f1_series(b, b - c + 1, b - a + 1, u, budget)
    out = t1 + t2
    if with_cond:
        return out, _cancellation(t1, t2, out)
    return out


def _pfaff(a, b, c, z, budget):
    w = z / (z - 1.0)
    return (1.0 - z) ** (-a) * hyp2f1_series(a, c - b, c, w, budget)


def _taylor_step(a, b, c, z0, f, df, h, budget):
    """Advance (F, F') from z0 to z0 + h by re-expanding the ODE about z0."""
    p0 = z0 * (1.0 - z0)
    p1 = 1.0 - 2.0 * z0
    q0 = c - (a + b + 1.0) * z0
    c_prev, c_cur = f, df  # c_n, c_{n+1}
    val = f + df * h
    der = df
    hn = h  # h**(n+1)
    stop = 0.1 * budget.rel_tol
    small_prev = False
    for n in range(budget.max_terms):
        c_next = -((p1 * n + q0) * (n + 1) * c_cur - (n + a) * (n + b) * c_prev) / (
            p0 * (n + 2) * (n + 1)
        )
        t_der = (n + 2) * c_next * hn
        t_val = c_next * hn * h
        val += t_val
        der += t_der
        small = abs(t_val) <= stop * abs(val) and abs(t_der) <= stop * abs(der)
        if small and small_prev:
            return val, der
        small_prev = small
        c_prev, c_cur = c_cur, c_next
        hn = hn * h
    raise NoConvergence("ODE continuation step did not converge")


def _ray_distance_to_one(z):
    """Distance from the branch point 1 to the segment [0, z]."""
    t = min(max((z.conjugate() * 1.0).real / abs(z) ** 2, 0.0), 1.0)
    return abs(1.0 - t * z)


def _continuation_path(z):
    """Waypoints from 0.4 z/|z| to z, detouring around z = 1 when the ray comes close.

    The detour passes 1 -+ 0.5i on the side of the cut that z lies on
    (real z > 1 counts as the lower side, as in the connection formulas).
    """
    start = 0.4 * z / abs(z)
    if _ray_distance_to_one(z) >= DETOUR_DISTANCE or abs(z) <= 1.0:
        return start, [z]
    side = 1.0 if z.imag > 0 else -1.0
    return start, [1.0 + 0.5j * side, z]


def _taylor_continuation(a, b, c, z, budget):
    z0, targets = _continuation_path(z)
    f = hyp2f1_series(a, b, c, z0, budget)
    df = a * b / c * hyp2f1_series(a + 1, b + 1, c + 1, z0, budget)
    for target in targets:
        for _ in range(10_000):
            remaining = target - z0
            if abs(remaining) <= 1e-15 * abs(target):
                z0 = target
                break
            rho = min(abs(z0), abs(1.0 - z0))
            h = remaining
            if abs(h) > 0.5 * rho:
                h = remaining / abs(remaining) * 0.5 * rho
            f, df = _taylor_step(a, b, c, z0, f, df, h, budget)
            z0 = z0 + h
        else:
            raise NoConvergence("ODE continuation path did not reach the target")
    return f


def _polynomial(a, b, c, z, degree):
    total = 1 + 0j
    term = 1 + 0j
    for n in range(degree):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
    return total


def _region_candidates(args: HypergeometricArgs):
    a, b, c, z = args.a, args.b, args.c, args.z
    cands = [("series", abs(z), False)]
    if z.real < 0.5:
        cands.append(("pfaff", abs(z / (z - 1.0)), False))
    cands.append(("one_minus_z", abs(1.0 - z), _near_integer(c - a - b)))
    cands.append(("inverse_z", 1.0 / abs(z), _near_integer(a - b)))
    return cands


def select_region(args: HypergeometricArgs) -> str:
    """Name of the evaluation region ``gauss_2f1`` uses for ``args``.

    Non-degenerate regions are preferred; a degenerate connection formula is
    used only when it is the sole region with modulus <= SERIES_RADIUS.
    """
    if args.z == 0:
        return "series"
    cands = _region_candidates(args)
    clean = [(rho, name) for name, rho, deg in cands if not deg and rho <= SERIES_RADIUS]
    if clean:
        return min(clean)[1]
    dirty = [(rho, name) for name, rho, deg in cands if deg and rho <= SERIES_RADIUS]
    if dirty:
        return min(dirty)[1]
    return "continuation"


def _connection_with_cond(region, a, b, c, z, budget):
    if region == "one_minus_z":
        return _near_one_regular(a, b, c, z, budget, with_cond=True)
    if region == "inverse_z":
        return _inverse_z_regular(a, b, c, z, budget, with_cond=True)
    # 1/(1-z): Pfaff map followed by the 1/w connection formula
    w = z / (z - 1.0)
    val, cond = _inverse_z_regular(a, c - b, c, w, budget, with_cond=True)
    return (1.0 - z) ** (-a) * val, cond


def gauss_2f1(args: HypergeometricArgs, budget: AccuracyBudget = DEFAULT_BUDGET) -> complex:
    """Principal-branch value of 2F1(a, b; c; z), see the module docstring.

    When a two-term connection formula loses more than ``CANCELLATION_LIMIT``
    to cancellation between its terms, the other well-conditioned
    representations are tried and the least cancelling one is kept.
    """
    a, b, c, z = args.a, args.b, args.c, args.z
    if z == 0:
        return 1 + 0j
    degree = _polynomial_degree(a, b)
    if degree is not None:
        return _polynomial(a, b, c, z, degree)
    if z == 1:
        if (c - a - b).real > 0:
            return _gamma_ratio((c, c - a - b), (c - a, c - b))
        raise NoConvergence("2F1 diverges at z = 1 for Re(c-a-b) <= 0")
    region = select_region(args)
    if region == "series":
        return hyp2f1_series(a, b, c, z, budget)
    if region == "pfaff":
        return _pfaff(a, b, c, z, budget)
    if region == "continuation":
        return _taylor_continuation(a, b, c, z, budget)
    degenerate = _near_integer(c - a - b) if region == "one_minus_z" else _near_integer(a - b)
    if degenerate:
        # The ODE continuation has no integer degeneracy; the +-i eps average
        # is kept for points too close to z = 1 or infinity for it.
        if abs(1.0 - z) > CONTINUATION_MIN_DISTANCE and (
            region == "one_minus_z" or abs(z) < CONTINUATION_MAX_MODULUS
        ):
            return _taylor_continuation(a, b, c, z, budget)
        if region == "one_minus_z":
            return hyp2f1_near_one(a, b, c, z, budget)
        return _inverse_z(a, b, c, z, budget)
    val, cond = _connection_with_cond(region, a, b, c, z, budget)
    if cond <= CANCELLATION_LIMIT:
        return val
    best = (cond, val)
    alternatives = []
    if abs(1.0 - z) <= ALT_RADIUS and region != "one_minus_z" and not _near_integer(c - a - b):
        alternatives.append("one_minus_z")
    if abs(z) >= 1.0 / ALT_RADIUS and region != "inverse_z" and not _near_integer(a - b):
        alternatives.append("inverse_z")
    if abs(1.0 - 1.0 / z) <= ALT_RADIUS and not _near_integer(a - c + b):
        alternatives.append("inverse_one_minus_z")
    for alt in alternatives:
        try:
            v, cnd = _connection_with_cond(alt, a, b, c, z, budget)
        except (NoConvergence, DegenerateParameters):
            continue
        if cnd < best[0]:
            best = (cnd, v)
    if best[0] > CANCELLATION_LIMIT and abs(z - 1.0) > 0.05:
        return _taylor_continuation(a, b, c, z, budget)
    return best[1]


def hyp2f1(a, b, c, z, budget: AccuracyBudget = DEFAULT_BUDGET):
    """Convenience wrapper over ``gauss_2f1`` accepting scalar or array ``z``.

    Arrays are split into a vectorised series block (|z| <= 1/2), a
    vectorised 1-z block (|1-z| <= 1/2) and a scalar remainder.
    """
    zarr = np.asarray(z, dtype=complex)
    if zarr.ndim == 0:
        return gauss_2f1(HypergeometricArgs(a, b, c, complex(zarr)), budget)
    HypergeometricArgs(a, b, c, 0)  # validate c
    out = np.empty(zarr.shape, dtype=complex)
    flat = zarr.ravel()
    res = out.ravel()
    near0 = np.abs(flat) <= 0.5
    near1 = ~near0 & (np.abs(1.0 - flat) <= 0.5)
    if _polynomial_degree(a, b) is not None:
        near0[:] = False
        near1[:] = False
    if near0.any():
        res[near0] = hyp2f1_series(a, b, c, flat[near0], budget)
    if near1.any():
        res[near1] = hyp2f1_near_one(a, b, c, flat[near1], budget)
    for i in np.flatnonzero(~(near0 | near1)):
        res[i] = gauss_2f1(HypergeometricArgs(a, b, c, flat[i]), budget)
    return res.reshape(zarr.shape)


def hyp2f1_derivative(a, b, c, z, budget: AccuracyBudget = DEFAULT_BUDGET):
    """d/dz 2F1(a, b; c; z) = (ab/c) 2F1(a+1, b+1; c+1; z)."""
    a, b, c = complex(a), complex(b), complex(c)
    if a * b == 0:
        return np.zeros_like(np.asarray(z, dtype=complex)) if np.ndim(z) else 0j
    return a * b / c * hyp2f1(a + 1, b + 1, c + 1, z, budget)
