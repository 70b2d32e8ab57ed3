"""Weak-drive probability-amplitude solution of the bimodal Kerr JC model.

With at most two excitations and gamma = kappa, the steady amplitudes obey an
8x8 linear system (C00g fixed to 1). That linear solve is the reference; the
closed-form expressions are kept as an independent check of it.

Closed-form sign convention
---------------------------
The literal closed forms, evaluated at Kerr strength ``chi``, solve the
amplitude system with Kerr shift ``-chi`` on the two-photon states. For the
Hamiltonian with ``+chi a†a†aa`` they must be evaluated at ``-chi``.
``closed_form_amplitudes`` does this by default; pass ``as_printed=True`` for
the literal evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    ClosedFormSingularityError,
    SingularSystemError,
    UndefinedCorrelationError,
    UnsupportedRegimeError,
)
from .model import ModelParams

SQRT2 = math.sqrt(2.0)

# unknowns of the linear system, in solve order
UNKNOWNS = ("c10g", "c01g", "c00e", "c20g", "c02g", "c11g", "c10e", "c01e")
FIRST_ORDER = ("c10g", "c01g", "c00e")
SECOND_ORDER = ("c20g", "c02g", "c11g", "c10e", "c01e")

LINEAR_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class AmplitudeSet:
    c00g: complex
    c10g: complex
    c01g: complex
    c00e: complex
    c20g: complex
    c02g: complex
    c11g: complex
    c10e: complex
    c01e: complex
    delta_tilde: complex
    aux: dict = field(default_factory=dict, compare=False)

    def vector(self) -> np.ndarray:
        """The eight non-ground amplitudes in ``UNKNOWNS`` order."""
        return np.array([getattr(self, k) for k in UNKNOWNS], dtype=complex)

    def population(self, name: str) -> float:
        return abs(getattr(self, name)) ** 2

    @property
    def p1(self) -> float:
        return self.population("c10g")

    @property
    def p2(self) -> float:
        return self.population("c20g")

    @property
    def mean_photon_cw(self) -> float:
        return (
            self.population("c10g")
            + self.population("c10e")
            + self.population("c11g")
            + 2.0 * self.population("c20g")
        )


def require_weak_drive_regime(params: ModelParams) -> None:
    if not math.isclose(params.gamma, params.kappa, rel_tol=1e-12, abs_tol=0.0):
        raise UnsupportedRegimeError(
            f"the amplitude solution requires gamma == kappa (got gamma={params.gamma}, "
            f"kappa={params.kappa}); use the numerical master-equation solver instead"
        )
    if params.g <= 0:
        raise UnsupportedRegimeError("the amplitude solution requires g > 0")
    if params.omega_drv <= 0:
        raise UnsupportedRegimeError("the amplitude solution requires Omega > 0")
    if params.j_coupling != 0:
        raise UnsupportedRegimeError(
            "the amplitude solution does not cover inter-mode coupling J != 0"
        )


def delta_tilde(params: ModelParams) -> complex:
    return complex(params.delta, -0.5 * params.kappa)


def amplitude_system(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Matrix ``M`` and vector ``b`` with ``M @ x = b`` for ``x`` in UNKNOWNS order.

    The singly-excited doubles |1,0,e> and |0,1,e> carry detuning 2*dt, the
    value that follows from H_eff with gamma = kappa.
    """
    dt = delta_tilde(params)
    g, chi, w = params.g, params.chi, params.omega_drv
    m = np.zeros((8, 8), dtype=complex)
    b = np.zeros(8, dtype=complex)
    i10g, i01g, i00e, i20g, i02g, i11g, i10e, i01e = range(8)

    m[0, [i10g, i00e]] = dt, g
    b[0] = -w
    m[1, [i01g, i00e]] = dt, g
    m[2, [i10g, i01g, i00e]] = g, g, dt
    m[3, [i10g, i20g, i10e]] = SQRT2 * w, 2 * (dt + chi), SQRT2 * g
    m[4, [i02g, i01e]] = 2 * (dt + chi), SQRT2 * g
    m[5, [i01g, i11g, i10e, i01e]] = w, 2 * dt, g, g
    m[6, [i00e, i20g, i11g, i10e]] = w, SQRT2 * g, g, 2 * dt
    m[7, [i02g, i11g, i01e]] = SQRT2 * g, g, 2 * dt
    return m, b


def _aux(dt: complex, g: float, chi: float) -> dict[str, complex]:
    """A, B, Q, D, F exactly as they appear in the closed forms."""
    a = 2 * (dt - chi)
    q = 2 * (g**2 - 2 * dt * (dt - chi))
    d = q * (dt**2 - 2 * g**2) - 2 * dt * (dt * q / g**2 + (dt - chi)) * (2 * dt**2 - g**2)
    f = dt * q * (dt**2 - 2 * g**2) * (2 * (dt - chi) + dt * q / g**2)
    out = {"A": a, "Q": q, "D": d, "F": f}
    out["B"] = 2 * dt - 2 * g**2 / a if a != 0 else complex("nan")
    return out


def linear_residual(amps: AmplitudeSet, params: ModelParams) -> float:
    m, b = amplitude_system(params)
    return float(np.max(np.abs(m @ amps.vector() - b)))


def steady_amplitudes(params: ModelParams) -> AmplitudeSet:
    """Solve the weak-drive amplitude system with C00g = 1."""
    require_weak_drive_regime(params)
    m, b = amplitude_system(params)
    try:
        x = np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"amplitude system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("amplitude system produced non-finite amplitudes")
    dt = delta_tilde(params)
    amps = AmplitudeSet(1.0 + 0j, *x, delta_tilde=dt, aux=_aux(dt, params.g, -params.chi))
    res = float(np.max(np.abs(m @ x - b)))
    if res > LINEAR_RESIDUAL_TOL:
        raise SingularSystemError(f"amplitude system residual {res:.3e} exceeds tolerance")
    return amps


def _guard(name: str, value: complex) -> None:
    if value == 0 or not np.isfinite(value):
        raise ClosedFormSingularityError(f"closed form singular: {name} = {value}")


def _closed_forms(dt: complex, g: float, chi: float, w: float) -> dict[str, complex]:
    aux = _aux(dt, g, chi)
    a, b, d, f = aux["A"], aux["B"], aux["D"], aux["F"]
    c11_den = 2 * dt**3 - 2 * dt * g**2 - 2 * dt**2 * chi + g**2 * chi
    for name, value in (("A", a), ("B", b), ("F", f), ("C11g denominator", c11_den)):
        _guard(name, value)

    lev = dt**2 - 2 * g**2
    c00e = g * w / lev
    c01g = -(g**2) * w / (dt * lev)
    c10g = -w * (dt**2 - g**2) / (dt * lev)
    c20g = SQRT2 * w**2 / 2 * d / f
    c11g = g**2 * w**2 / (2 * dt * lev) * (4 * dt**2 - 3 * dt * chi - 2 * g**2) / c11_den
    c10e = -(g * c11g + w * (c00e - 2 * g / a * c10g)) / b
    c01e = -g / b * c11g
    c02g = -SQRT2 * g / a * c01e
    if not np.all(np.isfinite([c20g, c11g, c10e, c01e, c02g])):
        raise ClosedFormSingularityError("closed form produced non-finite amplitudes")
    return {
        "c10g": c10g, "c01g": c01g, "c00e": c00e, "c20g": c20g, "c02g": c02g,
        "c11g": c11g, "c10e": c10e, "c01e": c01e, "aux": aux,
    }


def closed_form_amplitudes(params: ModelParams, as_printed: bool = False) -> AmplitudeSet:
    """Explicit closed-form amplitudes.

    By default the Kerr strength enters with the sign that matches
    :func:`build_hamiltonian` (see module docstring); ``as_printed=True``
    evaluates the literal expressions at ``+chi``.
    """
    require_weak_drive_regime(params)
    dt = delta_tilde(params)
    chi = params.chi if as_printed else -params.chi
    forms = _closed_forms(dt, params.g, chi, params.omega_drv)
    aux = forms.pop("aux")
    return AmplitudeSet(1.0 + 0j, delta_tilde=dt, aux=aux, **forms)


class AnalyticG2(NamedTuple):
    approximate: float
    full: float


def analytic_g2(amps: AmplitudeSet) -> AnalyticG2:
    """g2(0) from the amplitudes: ``2|C20g|^2 / |C10g|^4`` plus the un-approximated form."""
    p10 = amps.population("c10g")
    if p10 == 0.0:
        raise UndefinedCorrelationError("|C10g| = 0; analytic g2 undefined")
    num = 2.0 * amps.population("c20g")
    full_den = (p10 + amps.population("c10e") + amps.population("c11g")) ** 2
    return AnalyticG2(num / p10**2, num / full_den)


class StrongCouplingLimits(NamedTuple):
    p01g: float
    p10g: float
    p11g: float
    p20g: float


def strong_coupling_limits(params: ModelParams) -> StrongCouplingLimits:
    """Large-g populations at resonance; independent of g."""
    w2 = params.omega_drv**2
    k2 = params.kappa**2
    p1 = w2 / k2
    p11 = w2**2 / (k2 * (params.chi**2 + k2))
    return StrongCouplingLimits(p1, p1, p11, 0.5 * p11)


def strong_coupling_g2(params: ModelParams) -> float:
    """kappa^2 / (chi^2 + kappa^2), the large-g resonant g2 implied by the limits."""
    lim = strong_coupling_limits(params)
    return 2.0 * lim.p20g / lim.p10g**2


def effective_hamiltonian_ode_residual(amps: AmplitudeSet, params: ModelParams) -> float:
    """Largest right-hand side of the amplitude ODEs at the given amplitudes.

    Uses the general detunings Delta_1 = Delta - i kappa/2, Delta_e = Delta -
    i gamma/2, Delta_2 = 2 Delta - i(gamma + kappa)/2 and C00g held fixed, so
    it is a fixed-point test independent of how ``amps`` were obtained.
    """
    if not math.isclose(params.gamma, params.kappa, rel_tol=1e-12, abs_tol=0.0):
        raise UnsupportedRegimeError("ODE residual check requires gamma == kappa")
    d, g, chi, w = params.delta, params.g, params.chi, params.omega_drv
    d1 = complex(d, -params.kappa / 2)
    de = complex(d, -params.gamma / 2)
    d2 = complex(2 * d, -(params.gamma + params.kappa) / 2)
    c = amps
    rhs = [
        w * c.c00g + d1 * c.c10g + g * c.c00e,
        d1 * c.c01g + g * c.c00e,
        g * c.c10g + g * c.c01g + de * c.c00e,
        SQRT2 * w * c.c10g + 2 * (d1 + chi) * c.c20g + SQRT2 * g * c.c10e,
        2 * (d1 + chi) * c.c02g + SQRT2 * g * c.c01e,
        w * c.c01g + 2 * d1 * c.c11g + g * c.c10e + g * c.c01e,
        w * c.c00e + SQRT2 * g * c.c20g + g * c.c11g + d2 * c.c10e,
        SQRT2 * g * c.c02g + g * c.c11g + d2 * c.c01e,
    ]
    return float(max(abs(x) for x in rhs))
