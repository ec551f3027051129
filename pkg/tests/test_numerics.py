import numpy as np
import pytest

from rosenmorse import model, numerics
from rosenmorse.errors import NoConvergenceQR, NotConverged, ScaledSingularity
from rosenmorse.model import PotentialParams, SpectralClass
from rosenmorse.numerics import (
    GridSpec,
    ScalingAngle,
    classify_spectrum,
    csm_hamiltonian,
    csm_spectrum,
    eig_complex,
    transfer_matrix_transmission,
)
from rosenmorse.rootfind import SearchBox, find_zeros

GRID = GridSpec(-14, 14, 400)


@pytest.fixture(scope="module")
def barrier_spectra(barrier):
    return {th: csm_spectrum(barrier, ScalingAngle(th), GRID) for th in (0.5, 0.6, 0.7)}


def test_types_validate(barrier):
    with pytest.raises(ValueError):
        GridSpec(1, 0, 100)
    with pytest.raises(ValueError):
        GridSpec(0, 1, 4)
    with pytest.raises(ValueError):
        GridSpec(-5, 5, 100).check_flat(barrier)
    with pytest.raises(ValueError):
        ScalingAngle(0.8)
    with pytest.raises(ValueError):
        ScalingAngle(0.1, theta_max=1.6)
    assert GRID.points.size == 400 and GRID.points[0] > GRID.x_min


def test_transfer_free_particle(free):
    amp = transfer_matrix_transmission(free.potential, free, 1.3, GridSpec(-5, 5, 64))
    assert abs(amp.T - 1) < 1e-12 and abs(amp.R) < 1e-12


def test_transfer_square_barrier(free):
    V0, a = 1.5, 2.0
    pot = lambda x: np.where(np.abs(x) < a / 2, V0, 0.0)  # noqa: E731
    for E in (0.7, 2.5):
        k = np.sqrt(2 * E)
        q = np.sqrt(2 * (E - V0) + 0j)
        T = np.exp(-1j * k * a) / (np.cos(q * a) - 1j * (q * q + k * k) / (2 * q * k) * np.sin(q * a))
        amp = transfer_matrix_transmission(pot, free, E, GridSpec(-2, 2, 4096))
        assert abs(amp.T - T) < 1e-8


def test_transfer_not_converged(barrier):
    with pytest.raises(NotConverged):
        transfer_matrix_transmission(barrier.potential, barrier, 1.0, GridSpec(-14, 14, 16))
    with pytest.raises(ValueError):
        transfer_matrix_transmission(barrier.potential, barrier, 1.0, GridSpec(-3, 3, 256))


def test_transfer_against_ode_integrator(barrier):
    E = 1.0
    k = np.sqrt(2 * E)
    x0, x1 = 14.0, -14.0
    # integrate the transmitted wave e^{ikx} leftwards and read off 1/T
    _, psi, dpsi = numerics.integrate_schrodinger(barrier.potential, E, (x0, x1),
                                                 np.exp(1j * k * x0), 1j * k * np.exp(1j * k * x0))
    a = 0.5 * (psi[-1] + dpsi[-1] / (1j * k)) * np.exp(-1j * k * x1)
    amp = transfer_matrix_transmission(barrier.potential, barrier, E, GridSpec(-14, 14, 8192))
    assert abs(1 / a - amp.T) < 1e-8


def test_hamiltonian_structure(barrier, well, free):
    H = csm_hamiltonian(barrier, ScalingAngle(0.5), GRID)
    assert np.abs(H - H.T).max() <= 1e-13
    Hw = csm_hamiltonian(well, ScalingAngle(0.0), GRID)
    assert np.abs(Hw.imag).max() == 0
    assert np.abs(np.linalg.eigvals(Hw).imag).max() < 1e-9
    th = 0.4
    w = np.sort_complex(np.linalg.eigvals(csm_hamiltonian(free, ScalingAngle(th), GRID)) * np.exp(2j * th))
    assert np.allclose(w.real, numerics.box_levels(GRID), rtol=1e-10)
    assert np.abs(w.imag).max() < 1e-8 * numerics.box_levels(GRID).max()


def test_scaled_singularity_guard(barrier):
    # rotating by nearly pi/2 puts the ray on the poles of sech^2 at i pi/2
    with pytest.raises(ScaledSingularity):
        csm_hamiltonian(barrier, ScalingAngle(1.55, theta_max=1.56), GridSpec(-14, 14, 801))
    assert numerics.check_scaled_ray(barrier, ScalingAngle(0.7), GRID) > 1.0


def test_eig_complex_trivial():
    w, v, res = eig_complex(np.array([[0, 1], [1, 0]]))
    assert sorted(w.real) == pytest.approx([-1, 1]) and res < 1e-15
    d = np.diag([3.0, -1.0, 2j])
    w, v, _ = eig_complex(d)
    assert np.allclose(w, np.diag(d))
    assert np.allclose(np.abs(v), np.eye(3))
    with pytest.raises(ValueError):
        eig_complex(np.ones((2, 3)))
    with pytest.raises(ValueError):
        eig_complex(np.array([[np.nan]]))


def _cofactor_det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    return sum((-1) ** j * M[0][j] * _cofactor_det([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(n))


def test_eig_complex_characteristic_polynomial():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    w, _, res = eig_complex(A)
    assert res <= 1e-9

    def charpoly(z):
        z = np.atleast_1d(z)
        out = []
        for zz in z:
            M = [[(zz if i == j else 0) - A[i, j] for j in range(5)] for i in range(5)]
            out.append(_cofactor_det(M))
        return np.array(out)

    r = 1.2 * np.abs(w).max()
    roots = [z.location for z in find_zeros(charpoly, SearchBox(-r, r * 1.01, -r * 0.99, r))]
    assert len(roots) == 5
    for lam in w:
        assert min(abs(np.array(roots) - lam)) < 1e-8


def test_eig_residual_contract(barrier_spectra):
    for spec in barrier_spectra.values():
        assert spec.residual_norm <= 1e-9


def test_classify_free(free):
    a = csm_spectrum(free, ScalingAngle(0.4), GRID)
    b = csm_spectrum(free, ScalingAngle(0.5), GRID)
    c = classify_spectrum(a, b)
    assert all(k is SpectralClass.ROTATED_CONTINUUM for k in c.classes)
    with pytest.raises(ValueError):
        classify_spectrum(a, a)


def test_classify_well(well):
    grid = GridSpec(-20, 20, 600)
    a = csm_spectrum(well, ScalingAngle(0.5), grid)
    b = csm_spectrum(well, ScalingAngle(0.6), grid)
    c = classify_spectrum(a, b)
    bound = c.of_class(SpectralClass.BOUND)
    assert bound.size == 2
    for i in c.indices(SpectralClass.BOUND):
        assert abs(c.eigenvalues[i] - c.matched[i]) < 1e-6
    exact = sorted(well.energy(k).real for k in model.bound_state_wavenumbers(well))
    assert np.abs(np.sort(bound.real) - exact).max() < 1e-6


def test_barrier_resonance(barrier, barrier_spectra):
    c = classify_spectrum(barrier_spectra[0.5], barrier_spectra[0.7])
    res = c.of_class(SpectralClass.RESONANCE)
    assert res.size >= 1
    lowest = res[np.argmin(res.real)]
    c7 = classify_spectrum(barrier_spectra[0.7], barrier_spectra[0.5])
    lowest7 = min(c7.of_class(SpectralClass.RESONANCE), key=lambda e: e.real)
    assert abs(lowest - lowest7) < 1e-4
    k_star = np.sqrt(15) / 2 - 0.5j
    assert abs(lowest - barrier.energy(k_star)) < 1e-3


def test_spectrum_fixture_cross_validated_at_600(barrier, barrier_spectra):
    fine = csm_spectrum(barrier, ScalingAngle(0.5), GridSpec(-14, 14, 600))
    E400 = barrier_spectra[0.5].eigenvalues
    E_exact = complex(barrier.energy(np.sqrt(15) / 2 - 0.5j))
    e400 = E400[np.argmin(np.abs(E400 - E_exact))]
    e600 = fine.eigenvalues[np.argmin(np.abs(fine.eigenvalues - E_exact))]
    assert abs(e400 - e600) < 1e-6


def test_abc_properties(barrier_spectra):
    thetas = (0.5, 0.6, 0.7)
    for i, th in enumerate(thetas):
        c = classify_spectrum(barrier_spectra[th], barrier_spectra[thetas[(i + 1) % 3]])
        dev = numerics.continuum_angular_deviation(c)
        assert dev.size > 100 and np.median(dev) <= 0.02
        for j in c.indices(SpectralClass.RESONANCE):
            assert numerics.outer_mass(c.eigenvectors[:, j]) < 1e-4


def test_eig_dimension_cap():
    with pytest.raises(ValueError):
        eig_complex(np.eye(2001))


def test_no_convergence_contract():
    # a Jordan block perturbed at machine precision has ill-conditioned eigenvectors
    J = np.eye(60, k=1) + 1e-300 * np.eye(60, k=-59)
    try:
        eig_complex(J, tol=1e-30)
    except NoConvergenceQR:
        pass
    else:
        pytest.fail("residual check did not trip")
