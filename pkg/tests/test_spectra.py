import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kerrjc import ModelParams, ParameterError, build_hamiltonian, cpb_optimal_detunings
from kerrjc.spectra import (
    SINGLE_EXCITATION_BASIS,
    TWO_PHOTON_BASIS,
    single_excitation_levels,
    single_excitation_matrix,
    two_photon_anharmonicity,
    two_photon_eigenvalues,
)

S2 = math.sqrt(2)


def test_uncoupled_levels():
    r = two_photon_eigenvalues(0.0, 3.0, omega_ref=5.0)
    assert np.allclose(r.levels, [10, 10, 10, 16, 16])
    assert r.reference_energy == 10.0


@given(st.floats(0, 50), st.floats(-100, 100))
def test_linear_two_photon_spectrum(g, w):
    r = two_photon_eigenvalues(g, 0.0, omega_ref=w)
    assert np.allclose(r.relative, [-2 * g, -S2 * g, 0, S2 * g, 2 * g], atol=1e-10)
    assert np.allclose(r.relative, -r.relative[::-1], atol=1e-10)


def test_kerr_breaks_symmetry():
    rel = two_photon_eigenvalues(10.0, 8.0).relative
    assert np.max(np.abs(rel + rel[::-1])) > 0


def test_no_level_at_bare_kerr_energy():
    levels = two_photon_eigenvalues(10.0, 8.0).relative
    assert np.min(np.abs(levels - 16.0)) > 1.0


@given(st.floats(0, 20), st.floats(0, 20), st.floats(-10, 10))
def test_matches_full_hamiltonian(g, chi, w):
    h = build_hamiltonian(ModelParams(delta=w, g=g, chi=chi, omega_drv=0.0, n_cut=3))
    block = np.linalg.eigvalsh(h.restrict(TWO_PHOTON_BASIS))
    assert np.allclose(block, two_photon_eigenvalues(g, chi, omega_ref=w).levels, atol=1e-10)


def test_levels_sorted_and_labeled():
    r = two_photon_eigenvalues(1.33, 8.0)
    assert np.all(np.diff(r.levels) >= 0)
    assert r.basis_labels == ("|2,0,g>", "|1,1,g>", "|0,2,g>", "|1,0,e>", "|0,1,e>")


def test_single_excitation_reduces_to_jc():
    assert np.allclose(single_excitation_levels(2.0, 0.0).relative, [-S2 * 2, 0, S2 * 2])


@pytest.mark.parametrize("g", [0.1, 1.0, 7.0])
def test_mode_coupling_middle_level(g):
    assert -3.0 in single_excitation_levels(g, 3.0, omega_ref=0.0).levels


def test_large_j_expansion():
    top = single_excitation_levels(1.0, 100.0).levels[-1]
    assert top == pytest.approx(100.02, abs=1e-3)


def test_single_excitation_random_against_diagonalization():
    rng = np.random.default_rng(5)
    for _ in range(100):
        g, j, w = rng.uniform(0, 10), rng.uniform(-10, 10), rng.uniform(-5, 5)
        exact = single_excitation_levels(g, j, w).levels
        assert np.allclose(exact, np.linalg.eigvalsh(single_excitation_matrix(g, j, w)), atol=1e-12)


@given(st.floats(0, 10), st.floats(-10, 10), st.floats(-5, 5))
def test_single_excitation_matches_hamiltonian(g, j, w):
    h = build_hamiltonian(ModelParams(delta=w, g=g, omega_drv=0.0, j_coupling=j, n_cut=2))
    block = np.linalg.eigvalsh(h.restrict(SINGLE_EXCITATION_BASIS))
    assert np.allclose(block, single_excitation_levels(g, j, w).levels, atol=1e-10)


def test_cpb_detunings():
    assert cpb_optimal_detunings(1.0) == pytest.approx((-1.41421, 0, 1.41421), abs=1e-5)
    assert cpb_optimal_detunings(0.0) == (0.0,)
    assert cpb_optimal_detunings(10.0) == pytest.approx((-14.1421, 0, 14.1421), abs=1e-4)
    with pytest.raises(ParameterError):
        cpb_optimal_detunings(-1.0)


def test_anharmonicity_grows_with_kerr():
    chis = np.linspace(0, 12, 121)
    gaps = np.array([two_photon_anharmonicity(10.0, c) for c in chis])
    assert np.all(gaps != 0)
    assert np.all(np.diff(gaps) > 0)
