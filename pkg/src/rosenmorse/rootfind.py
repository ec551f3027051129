"""Zeros of analytic functions in rectangles, and Breit-Wigner fitting.

``f`` is always a black box that accepts a complex ndarray and returns an
array of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryZero, FitDiverged, MaxDepthExceeded, NewtonStall

MAX_BOUNDARY_SAMPLES = 1 << 16
SPLIT_FRACTIONS = (0.5, 0.4671, 0.5329, 0.4317, 0.5683)


@dataclass(frozen=True)
class SearchBox:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    max_depth: int = 12
    boundary_samples: int = 256

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("SearchBox needs re_min < re_max and im_min < im_max")
        if self.max_depth < 1 or self.boundary_samples < 4:
            raise ValueError("max_depth >= 1 and boundary_samples >= 4 required")

    @property
    def scale(self) -> float:
        return max(self.re_max - self.re_min, self.im_max - self.im_min)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z) -> bool:
        z = complex(z)
        return self.re_min < z.real < self.re_max and self.im_min < z.imag < self.im_max

    def boundary(self, n: int) -> np.ndarray:
        """n points counter-clockwise, spaced proportionally to edge length."""
        w = self.re_max - self.re_min
        h = self.im_max - self.im_min
        t = np.arange(n) * (2 * (w + h) / n)
        out = np.empty(n, dtype=complex)
        e1 = t < w
        e2 = (t >= w) & (t < w + h)
        e3 = (t >= w + h) & (t < 2 * w + h)
        e4 = t >= 2 * w + h
        out[e1] = complex(self.re_min, self.im_min) + t[e1]
        out[e2] = complex(self.re_max, self.im_min) + 1j * (t[e2] - w)
        out[e3] = complex(self.re_max, self.im_max) - (t[e3] - w - h)
        out[e4] = complex(self.re_min, self.im_max) - 1j * (t[e4] - 2 * w - h)
        return out

    def split(self, fx: float = 0.5, fy: float = 0.5):
        xm = self.re_min + fx * (self.re_max - self.re_min)
        ym = self.im_min + fy * (self.im_max - self.im_min)
        kw = dict(max_depth=self.max_depth, boundary_samples=self.boundary_samples)
        return [
            SearchBox(self.re_min, xm, self.im_min, ym, **kw),
            SearchBox(xm, self.re_max, self.im_min, ym, **kw),
            SearchBox(xm, self.re_max, ym, self.im_max, **kw),
            SearchBox(self.re_min, xm, ym, self.im_max, **kw),
        ]


@dataclass(frozen=True)
class LocatedZero:
    location: complex
    multiplicity: int
    residual: float


def _winding(f, box: SearchBox):
    """Winding number and boundary scale max|f| on the box boundary."""
    n = box.boundary_samples
    while True:
        z = box.boundary(n)
        vals = np.asarray(f(z), dtype=complex)
        mags = np.abs(vals)
        scale = mags.max()
        if not np.isfinite(scale) or mags.min() <= 1e-12 * scale:
            raise BoundaryZero(f"f (nearly) vanishes or is singular on the boundary of {box}")
        phase = np.angle(vals)
        steps = np.diff(np.concatenate([phase, phase[:1]]))
        steps = (steps + np.pi) % (2 * np.pi) - np.pi
        if np.abs(steps).max() <= np.pi / 2 or n >= MAX_BOUNDARY_SAMPLES:
            return int(round(steps.sum() / (2 * np.pi))), float(scale)
        n *= 2


def winding_number(f, box: SearchBox) -> int:
    """Zeros minus poles of ``f`` inside ``box`` by phase accumulation."""
    return _winding(f, box)[0]


def _newton(f, z0, multiplicity, target, step):
    """Newton (modified for multiplicity) with central-difference derivative.

    Once |f| <= target the iteration keeps polishing while |f| still drops.
    """
    z = complex(z0)
    fz = complex(f(np.array([z]))[0])
    best = abs(fz)
    stall = 0
    polish = 0
    for _ in range(500):
        if abs(fz) <= target:
            polish += 1
            if polish > 8 or fz == 0:
                break
        fp = complex((f(np.array([z + step]))[0] - f(np.array([z - step]))[0]) / (2 * step))
        if fp == 0 or not np.isfinite(fp):
            break
        dz = multiplicity * fz / fp
        improved = False
        for _ in range(30):
            f_new = complex(f(np.array([z - dz]))[0])
            if np.isfinite(f_new) and abs(f_new) < abs(fz):
                improved = True
                break
            dz *= 0.5
        if not improved:
            break
        z, fz = z - dz, f_new
        if abs(fz) < 0.999 * best:
            best, stall = abs(fz), 0
        else:
            stall += 1
            if stall >= 50:
                break
        if abs(dz) <= 4e-16 * max(abs(z), 1.0):
            break
    if abs(fz) <= target:
        return z, abs(fz)
    raise NewtonStall(f"Newton iteration stalled near {z} (|f| = {abs(fz):.3g})")


def _zero_mean(f, box, multiplicity, n=4096):
    """Mean location of the zeros inside ``box`` from (1/2 pi i) \\oint z f'/f dz."""
    z = box.boundary(n)
    logf = np.log(np.asarray(f(z), dtype=complex))
    # d log f along the closed path, with unwrapped imaginary part
    dl = np.diff(np.concatenate([logf, logf[:1]]))
    dl = dl.real + 1j * ((dl.imag + np.pi) % (2 * np.pi) - np.pi)
    zm = 0.5 * (z + np.roll(z, -1))
    return complex(np.sum(zm * dl) / (2j * np.pi) / multiplicity)


def find_zeros(f, box: SearchBox) -> list[LocatedZero]:
    """All zeros of ``f`` in ``box`` by recursive quadrisection + Newton."""
    count, scale = _winding(f, box)
    if count < 0:
        raise ValueError("f has more poles than zeros in the box; search 1/f or shrink the box")
    found: list[LocatedZero] = []
    _search(f, box, count, scale, 0, found, box.scale)
    found.sort(key=lambda r: (round(r.location.real, 10), round(r.location.imag, 10)))
    return found


def _search(f, box, count, scale, depth, found, root_scale):
    if count == 0:
        return
    if count == 1 or depth >= box.max_depth:
        # a cluster that survives max_depth splits is treated as one multiple zero
        start = _zero_mean(f, box, count)
        if not box.contains(start):
            start = box.center
        try:
            z, res = _newton(f, start, count, 1e-9 * scale, 1e-7 * root_scale)
        except NewtonStall:
            if count > 1:
                raise MaxDepthExceeded(
                    f"{count} zeros unresolved at depth {depth} in {box}"
                ) from None
            raise
        if not box.contains(z):
            z, res = _newton(f, box.center, count, 1e-9 * scale, 1e-7 * root_scale)
        for other in found:
            if abs(other.location - z) < 1e-8 * root_scale:
                return
        found.append(LocatedZero(z, count, res))
        return
    for fx in SPLIT_FRACTIONS:
        for fy in SPLIT_FRACTIONS:
            children = box.split(fx, fy)
            try:
                windings = [_winding(f, ch) for ch in children]
            except BoundaryZero:
                continue
            if sum(w for w, _ in windings) != count:
                continue
            for ch, (w, sc) in zip(children, windings):
                _search(f, ch, w, sc, depth + 1, found, root_scale)
            return
    raise MaxDepthExceeded(f"could not split {box} without hitting a zero")


def breit_wigner(E, E_R, gamma, amplitude, background):
    half = 0.5 * gamma
    return background + amplitude * half**2 / ((np.asarray(E) - E_R) ** 2 + half**2)


def _moment_guess(E, y):
    base = np.median(np.concatenate([y[:2], y[-2:]]))
    w = y - base
    if np.abs(w).max() == 0:
        raise FitDiverged("no resonant structure: data are constant")
    sign = np.sign(w[np.argmax(np.abs(w))])
    wp = np.clip(sign * w, 0, None)
    E_R = float(np.sum(E * wp) / np.sum(wp))
    amp = float(sign * wp.max())
    # full width at half maximum of the positive part
    above = E[wp >= 0.5 * wp.max()]
    gamma = float(max(above.max() - above.min(), np.min(np.diff(np.sort(E)))))
    return np.array([E_R, gamma, amp, base])


def breit_wigner_fit(points, seed: int | None = None, max_iter: int = 200):
    """Gauss-Newton fit of background + a (G/2)^2 / ((E-E_R)^2 + (G/2)^2).

    Returns (E_R, Gamma, background).  With ``seed`` the moment initializer
    is jittered for up to eight restarts when the first start diverges.
    """
    pts = sorted((float(e), float(v)) for e, v in points)
    if len(pts) < 5:
        raise ValueError("breit_wigner_fit needs at least 5 points")
    E = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.any(np.diff(E) == 0):
        raise ValueError("energies must be distinct")
    p0 = _moment_guess(E, y)
    starts = [p0]
    if seed is not None:
        rng = np.random.default_rng(seed)
        for _ in range(8):
            starts.append(p0 * (1 + 0.2 * rng.standard_normal(4)))
    last = None
    for start in starts:
        try:
            p = _gauss_newton(E, y, start, max_iter)
        except FitDiverged as exc:
            last = exc
            continue
        return float(p[0]), float(abs(p[1])), float(p[3])
    raise last


def _gauss_newton(E, y, p, max_iter):
    p = np.array(p, dtype=float)
    span = E.max() - E.min()
    for _ in range(max_iter):
        r = y - breit_wigner(E, *p)
        E_R, g, a, _ = p
        half = 0.5 * g
        d = (E - E_R) ** 2 + half**2
        L = half**2 / d
        J = np.empty((E.size, 4))
        J[:, 0] = a * L * 2 * (E - E_R) / d
        J[:, 1] = a * (half / d - half**3 / d**2)
        J[:, 2] = L
        J[:, 3] = 1.0
        if np.linalg.matrix_rank(J) < 4:
            raise FitDiverged("Jacobian is rank deficient")
        step, *_ = np.linalg.lstsq(J, r, rcond=None)
        cost = r @ r
        t = 1.0
        while t > 1e-10:
            trial = p + t * step
            rt = y - breit_wigner(E, *trial)
            if rt @ rt <= cost:
                break
            t *= 0.5
        else:
            break
        p = trial
        if not np.all(np.isfinite(p)) or abs(p[1]) > 1e3 * span:
            raise FitDiverged("width diverged")
        if np.abs(t * step).max() <= 1e-14 * (1 + np.abs(p).max()):
            break
    if abs(p[1]) == 0 or abs(p[1]) > 1e3 * span:
        raise FitDiverged("width unbounded")
    return p


def resonance_window(pole_energy, n: int = 41, half_widths: float = 1.0, floor: float = 0.05):
    """n real energies spanning Re E -+ half_widths * Gamma around a pole, clipped at ``floor``."""
    E = complex(pole_energy)
    gamma = -2.0 * E.imag
    if gamma <= 0:
        raise ValueError("pole must lie below the real energy axis")
    lo = max(floor, E.real - half_widths * gamma)
    return np.linspace(lo, E.real + half_widths * gamma, n)
