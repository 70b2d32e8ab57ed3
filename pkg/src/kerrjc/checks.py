"""End-to-end oracle and invariant checks behind ``kerrjc check``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .analytic import (
    UNKNOWNS,
    analytic_g2,
    closed_form_amplitudes,
    effective_hamiltonian_ode_residual,
    linear_residual,
    require_weak_drive_regime,
    steady_amplitudes,
)
from .dynamics import (
    DEFAULT_TOLERANCES,
    DensityMatrix,
    Tolerances,
    evolve,
    g2_zero,
    liouvillian,
    mean_photon,
    steady_state,
    steady_state_residual,
)
from .errors import KerrJCError
from .hilbert import Slot
from .model import ModelParams, build_hamiltonian, collapse_operators
from .spectra import (
    single_excitation_levels,
    single_excitation_matrix,
    two_photon_eigenvalues,
)

# n_cut used by the coherent-state oracle; 5 levels leave a 2.5e-5 truncation error at <n> = 0.04
ORACLE_N_CUT = 10
CLOSED_FORM_REL_TOL = 1e-8
CROSS_CHECK_REL_TOL = 0.10
EVOLVE_TOL = 1e-6
CONVERGENCE_REL_TOL = 1e-3
SPECTRUM_TOL = 1e-10
GRID_POINTS = 100


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.name:<28} value={self.value:.3e}  limit={self.threshold:.1e}  {self.detail}"


def _solve(params: ModelParams, tol: Tolerances):
    lv = liouvillian(build_hamiltonian(params), collapse_operators(params))
    return lv, steady_state(lv, tol)


def check_coherent_state(params: ModelParams, tol: Tolerances) -> list[CheckResult]:
    p = params.replace(g=0.0, chi=0.0, j_coupling=0.0, n_cut=max(params.n_cut, ORACLE_N_CUT))
    _, rho = _solve(p, tol)
    g2 = g2_zero(rho, Slot.CW)
    # driven damped oscillator: alpha = -Omega / (Delta - i kappa/2)
    expected_n = p.omega_drv**2 / (p.delta**2 + p.kappa**2 / 4)
    n_err = abs(mean_photon(rho, Slot.CW) - expected_n)
    return [
        CheckResult("coherent_state_g2", abs(g2 - 1) <= 1e-8, abs(g2 - 1), 1e-8),
        CheckResult("coherent_state_mean", n_err <= 1e-8, n_err, 1e-8, f"<n>={expected_n:.6g}"),
    ]


def check_steady_state(params: ModelParams, tol: Tolerances) -> list[CheckResult]:
    lv, rho = _solve(params, tol)
    res = steady_state_residual(lv, rho)
    tr = abs(rho.trace - 1)
    herm = rho.hermiticity_error()
    lam = rho.min_eigenvalue()
    tp = lv.trace_preservation_error()
    return [
        CheckResult("steady_state_residual", res <= tol.residual, res, tol.residual),
        CheckResult("trace", tr <= tol.trace, tr, tol.trace),
        CheckResult("hermiticity", herm <= tol.hermiticity, herm, tol.hermiticity),
        CheckResult("positivity", lam >= -tol.positivity, max(0.0, -lam), tol.positivity),
        CheckResult("trace_preservation", tp <= 1e-10, tp, 1e-10),
    ]


def check_evolve(params: ModelParams, tol: Tolerances) -> list[CheckResult]:
    lv, rho_ss = _solve(params, tol)
    rho_t = evolve(DensityMatrix.vacuum(params.layout), lv, 50.0 / params.kappa, 0.01, tol)
    err = float(np.max(np.abs(rho_t.matrix - rho_ss.matrix)))
    return [CheckResult("evolve_vs_steady_state", err <= EVOLVE_TOL, err, EVOLVE_TOL, "t=50/kappa")]


def check_truncation(params: ModelParams, tol: Tolerances) -> list[CheckResult]:
    _, lo = _solve(params, tol)
    _, hi = _solve(params.replace(n_cut=params.n_cut + 1), tol)
    g_lo, g_hi = g2_zero(lo), g2_zero(hi)
    rel = abs(g_lo - g_hi) / abs(g_hi)
    return [
        CheckResult(
            "truncation_convergence",
            rel < CONVERGENCE_REL_TOL,
            rel,
            CONVERGENCE_REL_TOL,
            f"n_cut {params.n_cut}->{params.n_cut + 1}: g2 {g_lo:.6g} vs {g_hi:.6g}",
        )
    ]


def random_analytic_grid(params: ModelParams, n: int = GRID_POINTS, seed: int = 7):
    """Randomized (Delta, g, chi) points with gamma = kappa = 1 at the configured drive."""
    rng = np.random.default_rng(seed)
    base = params.replace(kappa=1.0, gamma=1.0, j_coupling=0.0)
    for _ in range(n):
        yield base.replace(
            delta=float(rng.uniform(-4, 4)),
            g=float(rng.uniform(0.1, 3.0)),
            chi=float(rng.uniform(0, 10)),
        )


def closed_form_disagreement(params: ModelParams) -> float:
    """Largest entry-wise relative difference between closed forms and the linear solve."""
    ls = steady_amplitudes(params)
    cf = closed_form_amplitudes(params)
    worst = 0.0
    for k in UNKNOWNS:
        a, b = getattr(ls, k), getattr(cf, k)
        worst = max(worst, abs(a - b) / abs(a))
    return worst


def check_analytic(params: ModelParams, tol: Tolerances) -> list[CheckResult]:
    require_weak_drive_regime(params)
    amps = steady_amplitudes(params)
    lin = linear_residual(amps, params)
    ode = effective_hamiltonian_ode_residual(amps, params)
    worst = max(closed_form_disagreement(p) for p in random_analytic_grid(params))
    return [
        CheckResult("amplitude_linear_residual", lin <= 1e-10, lin, 1e-10),
        CheckResult("amplitude_ode_residual", ode <= 1e-10, ode, 1e-10),
        CheckResult(
            "closed_form_vs_linear_solve",
            worst <= CLOSED_FORM_REL_TOL,
            worst,
            CLOSED_FORM_REL_TOL,
            f"{GRID_POINTS} random points",
        ),
    ]


def check_cross(params: ModelParams, tol: Tolerances) -> list[CheckResult]:
    require_weak_drive_regime(params)
    _, rho = _solve(params, tol)
    num = g2_zero(rho)
    ana = analytic_g2(steady_amplitudes(params)).approximate
    rel = abs(num - ana) / num if num > 0 else math.inf
    return [
        CheckResult(
            "analytic_vs_numeric_g2",
            rel <= CROSS_CHECK_REL_TOL,
            rel,
            CROSS_CHECK_REL_TOL,
            f"numeric {num:.5g}, analytic {ana:.5g}",
        )
    ]


def check_spectra(params: ModelParams, tol: Tolerances) -> list[CheckResult]:
    g = params.g
    s2 = math.sqrt(2.0)
    expected = np.array([-2 * g, -s2 * g, 0.0, s2 * g, 2 * g])
    got = two_photon_eigenvalues(g, 0.0).relative
    err2 = float(np.max(np.abs(got - expected)))
    exact = single_excitation_levels(g, params.j_coupling).levels
    diag = np.linalg.eigvalsh(single_excitation_matrix(g, params.j_coupling))
    err1 = float(np.max(np.abs(exact - diag)))
    return [
        CheckResult("two_photon_spectrum_chi0", err2 <= SPECTRUM_TOL, err2, SPECTRUM_TOL),
        CheckResult("single_excitation_levels", err1 <= 1e-12, err1, 1e-12),
    ]


def run_checks(
    params: ModelParams,
    method: str = "both",
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> list[CheckResult]:
    """Run the suite; analytic checks raise UnsupportedRegimeError outside gamma = kappa."""
    groups: list[tuple[str, Callable]] = []
    if method in ("analytic", "both"):
        require_weak_drive_regime(params)
        groups.append(("analytic", check_analytic))
    if method in ("numeric", "both"):
        groups += [
            ("coherent", check_coherent_state),
            ("steady_state", check_steady_state),
            ("evolve", check_evolve),
            ("truncation", check_truncation),
        ]
    if method == "both":
        groups.append(("cross", check_cross))
    groups.append(("spectra", check_spectra))

    results: list[CheckResult] = []
    for name, fn in groups:
        try:
            results.extend(fn(params, tol))
        except KerrJCError as exc:
            results.append(CheckResult(name, False, math.nan, math.nan, f"{type(exc).__name__}: {exc}"))
    return results
