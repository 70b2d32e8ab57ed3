import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import PAPER, solve
from kerrjc import (
    ConvergenceError,
    DensityMatrix,
    IntegrationError,
    ModelParams,
    NoUniqueSteadyStateError,
    Operator,
    Slot,
    SpaceLayout,
    UndefinedCorrelationError,
    build_hamiltonian,
    collapse_operators,
    evolve,
    g2_zero,
    liouvillian,
    mean_photon,
    photon_distribution,
    poisson_deviation,
    steady_state,
)
from kerrjc.analytic import analytic_g2, steady_amplitudes
from kerrjc.dynamics import Tolerances, steady_state_residual, unvectorize, vectorize
from kerrjc.hilbert import embed

COHERENT = PAPER.replace(g=0.0, chi=0.0, n_cut=10)


def diagonal_state(layout, cw_probs):
    m = np.zeros((layout.total_dim,) * 2)
    for k, p in enumerate(cw_probs):
        i = layout.index(k, 0, 0)
        m[i, i] = p
    return DensityMatrix(layout, m)


def test_vectorization_is_column_stacking():
    m = np.arange(9).reshape(3, 3)
    assert list(vectorize(m)[:3]) == [0, 3, 6]
    assert np.array_equal(unvectorize(vectorize(m), 3), m)


def test_liouvillian_matches_direct_formula():
    p = PAPER.replace(n_cut=3, j_coupling=0.4)
    lv = liouvillian(build_hamiltonian(p), collapse_operators(p))
    rng = np.random.default_rng(3)
    x = rng.normal(size=(18, 18)) + 1j * rng.normal(size=(18, 18))
    h = build_hamiltonian(p).matrix
    expected = -1j * (h @ x - x @ h)
    for op, r in collapse_operators(p):
        c = op.matrix
        cd = c.conj().T
        expected += r / 2 * (2 * c @ x @ cd - cd @ c @ x - x @ cd @ c)
    assert np.allclose(lv.apply(x), expected, atol=1e-12)


def test_zero_generator():
    lay = SpaceLayout(2)
    lv = liouvillian(Operator.zeros(lay), [])
    assert lv.matrix.nnz == 0
    assert not lv.dissipative


def test_trace_preservation(paper_params):
    lv = liouvillian(build_hamiltonian(paper_params), collapse_operators(paper_params))
    assert lv.trace_preservation_error() <= 1e-10


def test_cavity_decay_rate():
    # undriven cavity: d<n>/dt = -kappa <n>
    p = ModelParams(g=0, chi=0, omega_drv=0, kappa=0.7, n_cut=4)
    lv = liouvillian(build_hamiltonian(p), collapse_operators(p))
    rho0 = DensityMatrix.basis(p.layout, 2, 0, 0)
    for t in (0.5, 1.0, 3.0):
        rho = evolve(rho0, lv, t, 0.005)
        assert mean_photon(rho) == pytest.approx(2 * math.exp(-0.7 * t), rel=1e-9)


def test_negative_rate_rejected():
    p = ModelParams(n_cut=2)
    with pytest.raises(ValueError):
        liouvillian(build_hamiltonian(p), [(collapse_operators(p)[0][0], -1.0)])


def test_undriven_steady_state_is_vacuum():
    p = PAPER.replace(omega_drv=0.0)
    rho = solve(p)
    assert np.allclose(rho.matrix, DensityMatrix.vacuum(p.layout).matrix, atol=1e-14)


def test_coherent_state_oracle():
    rho = solve(COHERENT)
    # alpha = -Omega / (Delta - i kappa/2), so <n> = 0.01 / 0.25
    assert mean_photon(rho) == pytest.approx(0.04, abs=1e-10)
    assert g2_zero(rho) == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3))
def test_coherent_state_any_detuning(delta):
    rho = solve(COHERENT.replace(delta=delta))
    assert g2_zero(rho) == pytest.approx(1.0, abs=1e-6)
    assert photon_distribution(rho, Slot.CCW)[0] == pytest.approx(1.0, abs=1e-10)
    assert mean_photon(rho) == pytest.approx(0.01 / (delta**2 + 0.25), rel=1e-8)


def test_coherent_photon_distribution():
    rho = solve(COHERENT)
    p = photon_distribution(rho)
    m = np.arange(p.size)
    poisson = np.exp(-0.04) * 0.04**m / np.array([math.factorial(k) for k in m])
    assert np.allclose(p, poisson, atol=1e-12)
    dev = poisson_deviation(p, 0.04)
    assert np.allclose(dev.ratio[:5], 1.0, atol=1e-8)


def test_paper_state_invariants(paper_state, paper_params):
    lv = liouvillian(build_hamiltonian(paper_params), collapse_operators(paper_params))
    assert steady_state_residual(lv, paper_state) <= 1e-10
    assert abs(paper_state.trace - 1) <= 1e-10
    assert paper_state.hermiticity_error() <= 1e-10
    assert paper_state.min_eigenvalue() >= -1e-8
    assert photon_distribution(paper_state).sum() == pytest.approx(1.0, abs=1e-10)


def test_sparse_and_dense_agree(paper_params):
    a = solve(paper_params)
    b = solve(paper_params, method="dense")
    assert np.max(np.abs(a.matrix - b.matrix)) < 1e-12


def test_analytic_cross_check(paper_state):
    ana = analytic_g2(steady_amplitudes(PAPER)).approximate
    num = g2_zero(paper_state)
    assert abs(num - ana) / num <= 0.10


def test_truncation_convergence():
    lo = g2_zero(solve(PAPER))
    hi = g2_zero(solve(PAPER.replace(n_cut=6)))
    assert abs(lo - hi) / hi < 1e-3


def test_regression_value(paper_state):
    assert g2_zero(paper_state) == pytest.approx(0.01590684766778305, rel=1e-9)


def test_no_dissipation_is_singular():
    p = PAPER.replace(n_cut=2)
    lv = liouvillian(build_hamiltonian(p), [])
    with pytest.raises(NoUniqueSteadyStateError):
        steady_state(lv)


def test_residual_tolerance_enforced(paper_params):
    lv = liouvillian(build_hamiltonian(paper_params), collapse_operators(paper_params))
    with pytest.raises(ConvergenceError) as info:
        steady_state(lv, Tolerances(residual=1e-30))
    assert info.value.residual > 1e-30


def test_evolve_frozen_dynamics():
    lay = SpaceLayout(2)
    rho0 = DensityMatrix.basis(lay, 1, 0, 1)
    lv = liouvillian(Operator.zeros(lay), [])
    assert np.array_equal(evolve(rho0, lv, 1.0, 0.1).matrix, rho0.matrix)


def test_evolve_dark_vacuum():
    p = PAPER.replace(omega_drv=0.0, n_cut=3)
    lv = liouvillian(build_hamiltonian(p), collapse_operators(p))
    rho0 = DensityMatrix.vacuum(p.layout)
    assert np.allclose(evolve(rho0, lv, 2.0, 0.01).matrix, rho0.matrix, atol=1e-15)


def test_evolve_reaches_steady_state(paper_params, paper_state):
    lv = liouvillian(build_hamiltonian(paper_params), collapse_operators(paper_params))
    rho = evolve(DensityMatrix.vacuum(paper_params.layout), lv, 50.0, 0.01)
    assert np.max(np.abs(rho.matrix - paper_state.matrix)) <= 1e-6


def test_evolve_unstable_step():
    p = PAPER.replace(n_cut=3)
    lv = liouvillian(build_hamiltonian(p), collapse_operators(p))
    with pytest.raises(IntegrationError):
        evolve(DensityMatrix.basis(p.layout, 2, 0, 0), lv, 50.0, 2.0)


def test_g2_fock_state():
    lay = SpaceLayout(4)
    assert g2_zero(DensityMatrix.basis(lay, 1, 0, 0)) == 0.0


def test_g2_diagonal_marginal():
    rho = diagonal_state(SpaceLayout(4), [0.5, 0.3, 0.2])
    assert mean_photon(rho) == pytest.approx(0.7)
    assert g2_zero(rho) == pytest.approx(0.4 / 0.49)


def test_g2_undefined_for_vacuum():
    with pytest.raises(UndefinedCorrelationError):
        g2_zero(DensityMatrix.vacuum(SpaceLayout(3)))


def test_mean_photon_fock():
    lay = SpaceLayout(4)
    assert mean_photon(DensityMatrix.vacuum(lay)) == 0
    assert mean_photon(DensityMatrix.basis(lay, 2, 0, 0)) == pytest.approx(2)
    assert mean_photon(DensityMatrix.basis(lay, 2, 0, 0), Slot.CCW) == 0


def test_ccw_mode_statistics():
    lay = SpaceLayout(4)
    rho = DensityMatrix.basis(lay, 0, 2, 1)
    assert g2_zero(rho, Slot.CCW) == pytest.approx(0.5)
    assert list(photon_distribution(rho, Slot.CCW)) == [0, 0, 1, 0]


def test_atom_is_not_a_mode():
    with pytest.raises(ValueError):
        g2_zero(DensityMatrix.basis(SpaceLayout(2), 1, 0, 0), Slot.ATOM)


def test_g2_phase_and_relabeling_invariance(paper_state):
    base = g2_zero(paper_state)
    assert g2_zero(DensityMatrix(paper_state.layout, paper_state.matrix * 1.0)) == base
    # swap atom labels with a unitary on the untraced atom
    flip = embed(np.array([[0, 1], [1, 0]]), Slot.ATOM, paper_state.layout).matrix
    phase = embed(np.diag(np.exp(1j * np.arange(5))), Slot.CCW, paper_state.layout).matrix
    u = flip @ phase
    rotated = DensityMatrix(paper_state.layout, u @ paper_state.matrix @ u.conj().T)
    assert g2_zero(rotated) == pytest.approx(base, rel=1e-12)


def test_poisson_identity():
    m = 0.3
    ref = poisson_deviation(np.ones(6), m).reference
    dev = poisson_deviation(ref, m)
    assert np.allclose(dev.ratio, 1.0)
    assert np.allclose(dev.deviation, 0.0)


def test_poisson_needs_positive_mean():
    with pytest.raises(UndefinedCorrelationError):
        poisson_deviation([1.0, 0.0], 0.0)


def test_density_matrix_validation():
    lay = SpaceLayout(2)
    bad = DensityMatrix(lay, 2 * DensityMatrix.vacuum(lay).matrix)
    with pytest.raises(ConvergenceError):
        bad.validate()


@settings(max_examples=15, deadline=None)
@given(
    st.floats(-4, 4),
    st.floats(0, 3),
    st.floats(0, 10),
    st.floats(0.02, 0.3),
    st.floats(0.2, 2),
    st.floats(-3, 3),
)
def test_steady_state_invariants_random(delta, g, chi, omega, gamma, j):
    p = ModelParams(delta=delta, g=g, chi=chi, omega_drv=omega, gamma=gamma, j_coupling=j, n_cut=4)
    lv = liouvillian(build_hamiltonian(p), collapse_operators(p))
    rho = steady_state(lv)
    assert steady_state_residual(lv, rho) <= 1e-10
    assert abs(rho.trace - 1) <= 1e-10
    assert rho.min_eigenvalue() >= -1e-8
    assert g2_zero(rho) >= 0
