import pytest

from kerrjc import ModelParams, build_hamiltonian, collapse_operators, liouvillian, steady_state

# g=1.33, chi=8, Omega=0.1, gamma=kappa=1
PAPER = ModelParams()


def solve(params, **kw):
    return steady_state(liouvillian(build_hamiltonian(params), collapse_operators(params)), **kw)


@pytest.fixture(scope="session")
def paper_params():
    return PAPER


@pytest.fixture(scope="session")
def paper_state():
    return solve(PAPER)
