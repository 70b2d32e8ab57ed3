import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kerrjc import (
    ModelParams,
    ParameterError,
    build_effective_hamiltonian,
    build_hamiltonian,
    collapse_operators,
)
from kerrjc.model import total_excitation
from kerrjc.spectra import TWO_PHOTON_BASIS, two_photon_matrix

finite = st.floats(-10, 10, allow_nan=False)
rate = st.floats(0, 10, allow_nan=False)


def h(**kw):
    return build_hamiltonian(ModelParams(**kw))


def elem(op, bra, ket):
    lay = op.layout
    return op.matrix[lay.index(*bra), lay.index(*ket)]


def test_detuning_term():
    op = h(delta=1, g=0, chi=0, omega_drv=0)
    assert elem(op, (1, 0, 0), (1, 0, 0)) == 1


def test_two_photon_diagonal():
    op = h(delta=0.7, chi=3.0)
    assert elem(op, (2, 0, 0), (2, 0, 0)) == pytest.approx(2 * 0.7 + 2 * 3.0)


def test_two_photon_coupling():
    op = h(g=1.33)
    assert elem(op, (2, 0, 0), (1, 0, 1)) == pytest.approx(math.sqrt(2) * 1.33)


def test_drive_only_on_cw():
    op = h(g=0, chi=0, omega_drv=0.3)
    assert elem(op, (1, 0, 0), (0, 0, 0)) == pytest.approx(0.3)
    assert elem(op, (0, 1, 0), (0, 0, 0)) == 0


def test_mode_coupling_term():
    op = h(g=0, chi=0, omega_drv=0, j_coupling=3.0)
    assert elem(op, (1, 0, 0), (0, 1, 0)) == pytest.approx(3.0)


@given(finite, rate, rate, rate, finite)
def test_hamiltonian_exactly_hermitian(delta, g, chi, omega, j):
    op = h(delta=delta, g=g, chi=chi, omega_drv=omega, j_coupling=j, n_cut=3)
    assert op.hermiticity_error() == 0.0


@given(finite, rate, rate)
def test_two_photon_block(delta, g, chi):
    op = h(delta=delta, g=g, chi=chi, omega_drv=0)
    expected = two_photon_matrix(g, chi, omega_ref=delta)
    assert np.allclose(op.restrict(TWO_PHOTON_BASIS), expected, atol=1e-12, rtol=0)


@given(finite, rate, rate, finite)
def test_excitation_number_conserved_without_drive(delta, g, chi, j):
    op = h(delta=delta, g=g, chi=chi, omega_drv=0, j_coupling=j, n_cut=3)
    n = total_excitation(op.layout)
    assert np.max(np.abs(op.commutator(n).matrix)) < 1e-12


def test_drive_breaks_excitation_number():
    op = h(omega_drv=0.1, n_cut=3)
    assert np.max(np.abs(op.commutator(total_excitation(op.layout)).matrix)) > 0.05


@given(finite, finite, finite)
def test_detuning_shift_is_excitation_number(d1, d2, j):
    a = h(delta=d1, j_coupling=j, n_cut=3)
    b = h(delta=d2, j_coupling=j, n_cut=3)
    shift = (a - b).matrix - (d1 - d2) * total_excitation(a.layout).matrix
    assert np.max(np.abs(shift)) < 1e-12


def test_effective_hamiltonian_pure_decay():
    p = ModelParams(g=0, chi=0, omega_drv=0)
    heff = build_effective_hamiltonian(p)
    n = total_excitation(p.layout).matrix
    assert np.allclose(heff.matrix, -0.5j * n)


def test_effective_hamiltonian_decay_entry():
    heff = build_effective_hamiltonian(ModelParams(kappa=1.7))
    assert elem(heff, (1, 0, 0), (1, 0, 0)).imag == pytest.approx(-0.85)


@given(finite, rate, rate, st.floats(0.1, 5), rate)
def test_effective_hamiltonian_decomposition(delta, g, chi, kappa, gamma):
    p = ModelParams(delta=delta, g=g, chi=chi, kappa=kappa, gamma=gamma, n_cut=3)
    heff = build_effective_hamiltonian(p)
    assert np.array_equal(heff.hermitian_part().matrix, build_hamiltonian(p).matrix)
    assert np.linalg.eigvalsh(heff.antihermitian_part().matrix).max() <= 1e-12


def test_collapse_channels():
    p = ModelParams(gamma=0)
    ch = collapse_operators(p)
    assert [r for _, r in ch] == [1.0, 1.0, 0.0]
    vac = p.layout.ket(0, 0, 0)
    for op, _ in ch:
        assert not np.any(op.matrix @ vac)


@pytest.mark.parametrize(
    "bad",
    [
        {"kappa": 0},
        {"kappa": -1},
        {"g": -0.1},
        {"chi": -1},
        {"omega_drv": -1},
        {"gamma": -1},
        {"n_cut": 1},
        {"n_cut": 2.5},
        {"delta": math.inf},
        {"g": math.nan},
    ],
)
def test_invalid_params(bad):
    with pytest.raises(ParameterError):
        ModelParams(**bad)


def test_negative_mode_coupling_allowed():
    assert ModelParams(j_coupling=-2).j_coupling == -2


def test_mapping_round_trip():
    p = ModelParams(delta=0.5, g=2, chi=3, omega_drv=0.2, kappa=1, gamma=0.5, j_coupling=3, n_cut=6)
    m = p.to_mapping()
    assert set(m) == {"delta", "g", "chi", "omega", "kappa", "gamma", "j", "n_cut"}
    assert ModelParams.from_mapping(m) == p


def test_mapping_rejects_unknown_key():
    with pytest.raises(ParameterError):
        ModelParams.from_mapping({"detuning": 1})
