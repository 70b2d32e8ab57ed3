"""Bimodal Jaynes-Cummings model with Kerr nonlinearity: steady-state photon
statistics, weak-drive amplitudes, dressed-state spectra and parameter sweeps."""

from ._version import __version__
from .analytic import (
    AmplitudeSet,
    analytic_g2,
    closed_form_amplitudes,
    effective_hamiltonian_ode_residual,
    steady_amplitudes,
    strong_coupling_limits,
)
from .dynamics import (
    DensityMatrix,
    Superoperator,
    Tolerances,
    evolve,
    g2_zero,
    liouvillian,
    mean_photon,
    photon_distribution,
    poisson_deviation,
    steady_state,
)
from .checks import CheckResult, run_checks
from .errors import *  # noqa: F401,F403
from .hilbert import Operator, Slot, SpaceLayout, atom_lowering, embed, fock_annihilation
from .model import (
    ModelParams,
    build_effective_hamiltonian,
    build_hamiltonian,
    collapse_operators,
)
from .spectra import (
    SpectrumResult,
    cpb_optimal_detunings,
    single_excitation_levels,
    two_photon_eigenvalues,
)
from .sweep import Axis, SweepSpec, SweepTable, extract_contour, find_minima, run_sweep
