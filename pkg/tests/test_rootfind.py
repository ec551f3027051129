import numpy as np
import pytest

from conftest import cval
from rosenmorse import model
from rosenmorse.errors import BoundaryZero, FitDiverged
from rosenmorse.numerics import GridSpec, ScalingAngle, classify_spectrum, csm_spectrum
from rosenmorse.model import SpectralClass
from rosenmorse.rootfind import (
    SearchBox,
    breit_wigner,
    breit_wigner_fit,
    find_zeros,
    resonance_window,
    winding_number,
)


def test_box_validation():
    with pytest.raises(ValueError):
        SearchBox(1, 0, 0, 1)
    with pytest.raises(ValueError):
        SearchBox(0, 1, 0, 1, max_depth=0)
    b = SearchBox(-1, 1, -2, 2)
    assert b.scale == 4 and b.center == 0
    assert abs(sum(b2.scale for b2 in b.split()) - 8) < 1e-14


def test_winding_trivial():
    assert winding_number(lambda z: z**2 + 1, SearchBox(-2, 2, -2, 2)) == 2
    assert winding_number(lambda z: 1 / z, SearchBox(-1, 1, -1, 1)) == -1
    # the zero sits on the first boundary sample (the lower-left corner)
    with pytest.raises(BoundaryZero):
        winding_number(lambda z: z + 1j, SearchBox(0, 1, -1, 1))
    with pytest.raises(BoundaryZero), np.errstate(divide="ignore", invalid="ignore"):
        winding_number(lambda z: 1 / z, SearchBox(0, 1, -1, 1, boundary_samples=600))


def test_winding_additivity():
    f = lambda z: (z - 0.3 - 0.2j) * (z + 0.6 - 0.7j) * (z - 0.9j)  # noqa: E731
    box = SearchBox(-1, 1, -1, 1)
    assert winding_number(f, box) == sum(winding_number(f, b) for b in box.split(0.4671, 0.5329))


def test_sin_zeros():
    zeros = find_zeros(np.sin, SearchBox(-7, 7, -1, 1))
    locs = np.array([z.location for z in zeros])
    assert np.allclose(locs, np.pi * np.arange(-2, 3), atol=1e-10, rtol=0)
    assert all(z.multiplicity == 1 for z in zeros)


def test_triple_zero():
    zeros = find_zeros(lambda z: (z - (1 - 1j)) ** 3, SearchBox(0, 2, -2, 0.5))
    assert len(zeros) == 1 and zeros[0].multiplicity == 3
    assert abs(zeros[0].location - (1 - 1j)) < 1e-5


def test_multiplicity_sum_polynomial():
    roots = [0.2 + 0.1j, -0.5 - 0.4j, 0.7 - 0.6j, 0.7 - 0.6j]
    f = lambda z: np.prod([z - r for r in roots], axis=0)  # noqa: E731
    box = SearchBox(-1, 1, -1, 1)
    zeros = find_zeros(f, box)
    assert sum(z.multiplicity for z in zeros) == winding_number(f, box) == 4
    for z in zeros:
        assert box.contains(z.location)


def test_barrier_poles_match_csm(oracle, barrier):
    # 1/T is singular at k = 0, -i, -2i, ..., so the box edges stay off Re k = 0 and Im k = 0
    f = lambda k: model.siegert_condition(barrier, k)  # noqa: E731
    box = SearchBox(0.1, 4, -2.9, -0.05)
    zeros = find_zeros(f, box)
    ref = [cval(c["k"]) for c in oracle["poles"] if c["U0"] == 2]
    got = np.array([z.location for z in zeros])
    assert len(got) == winding_number(f, box) == 3
    for r in ref:
        assert min(abs(got - r)) < 1e-9
    assert all(model.classify_wavenumber(k) is SpectralClass.RESONANCE for k in got)
    # all three are uncovered once 2 theta > |arg E_2| = 1.83
    grid = GridSpec(-14, 14, 400)
    spec = classify_spectrum(csm_spectrum(barrier, ScalingAngle(1.1, 1.3), grid),
                             csm_spectrum(barrier, ScalingAngle(1.0, 1.3), grid))
    res = spec.of_class(SpectralClass.RESONANCE)
    for k in got:
        E = barrier.energy(k)
        assert np.min(np.abs(res - E)) < 1e-3


def test_well_poles_match_csm_bound_states(well):
    f = lambda k: model.siegert_condition(well, k)  # noqa: E731
    zeros = find_zeros(f, SearchBox(-0.5, 0.5, 0.2, 2.0))
    ks = sorted(z.location.imag for z in zeros)
    assert np.allclose(ks, [(np.sqrt(17) - 3) / 2, (np.sqrt(17) - 1) / 2], atol=1e-10)
    grid = GridSpec(-20, 20, 600)
    spec = classify_spectrum(csm_spectrum(well, ScalingAngle(0.5), grid),
                             csm_spectrum(well, ScalingAngle(0.6), grid))
    bound = np.sort(spec.of_class(SpectralClass.BOUND).real)
    energies = np.sort([well.energy(1j * k).real for k in ks])
    assert np.abs(bound - energies).max() < 1e-6


def test_breit_wigner_synthetic():
    Es = np.linspace(3.0, 5.0, 21)
    y = breit_wigner(Es, 4.0, 0.5, 1.0, 0.0)
    E_R, G, bg = breit_wigner_fit(list(zip(Es, y)))
    assert abs(E_R - 4) < 1e-8 and abs(G - 0.5) < 1e-8 and abs(bg) < 1e-8


def test_breit_wigner_noisy_seeded():
    rng = np.random.default_rng(3)
    Es = np.linspace(0, 4, 60)
    y = breit_wigner(Es, 2.2, 0.8, -0.6, 1.0) + 1e-3 * rng.standard_normal(Es.size)
    a = breit_wigner_fit(list(zip(Es, y)), seed=5)
    b = breit_wigner_fit(list(zip(Es, y)), seed=5)
    assert a == b
    assert abs(a[0] - 2.2) < 0.01 and abs(a[1] - 0.8) < 0.02


def test_breit_wigner_degenerate():
    with pytest.raises(FitDiverged):
        breit_wigner_fit([(e, 1.0) for e in np.linspace(0, 1, 10)])
    with pytest.raises(ValueError):
        breit_wigner_fit([(0, 1), (1, 2)])


def test_resonance_window():
    Es = resonance_window(1.75 - 0.968j, n=11)
    assert Es.size == 11 and Es[0] == pytest.approx(0.05) and Es[-1] == pytest.approx(1.75 + 1.936)
    with pytest.raises(ValueError):
        resonance_window(1.0 + 0.1j)
