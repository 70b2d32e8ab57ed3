"""Rotating-frame Hamiltonian, effective non-Hermitian Hamiltonian and decay channels."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Mapping

from .errors import ParameterError
from .hilbert import Operator, SpaceLayout, mode_operators

# flat config key -> ModelParams field
CONFIG_KEYS = {
    "delta": "delta",
    "g": "g",
    "chi": "chi",
    "omega": "omega_drv",
    "kappa": "kappa",
    "gamma": "gamma",
    "j": "j_coupling",
    "n_cut": "n_cut",
}
FLOAT_FIELDS = ("delta", "g", "chi", "omega_drv", "kappa", "gamma", "j_coupling")


@dataclass(frozen=True)
class ModelParams:
    """Physical rates (in units of kappa by convention) and the Fock truncation.

    The defaults are the Fig. 5 working point: g = 1.33, chi = 8, Omega = 0.1,
    gamma = kappa = 1, resonant drive, no inter-mode coupling.
    """

    delta: float = 0.0
    g: float = 1.33
    chi: float = 8.0
    omega_drv: float = 0.1
    kappa: float = 1.0
    gamma: float = 1.0
    j_coupling: float = 0.0
    n_cut: int = 5

    def __post_init__(self):
        for name in FLOAT_FIELDS:
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ParameterError(f"{name} must be a real number, got {value!r}") from None
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be > 0, got {self.kappa}")
        for name in ("g", "chi", "omega_drv", "gamma"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if isinstance(self.n_cut, bool) or int(self.n_cut) != self.n_cut or self.n_cut < 2:
            raise ParameterError(f"n_cut must be an integer >= 2, got {self.n_cut!r}")
        object.__setattr__(self, "n_cut", int(self.n_cut))

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(self.n_cut)

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ModelParams":
        """Build from flat config keys (delta, g, chi, omega, kappa, gamma, j, n_cut)."""
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ParameterError(f"unknown model keys: {sorted(unknown)}")
        return cls(**{CONFIG_KEYS[k]: v for k, v in data.items()})

    def to_mapping(self) -> dict[str, Any]:
        return {k: getattr(self, field) for k, field in CONFIG_KEYS.items()}


def build_hamiltonian(params: ModelParams) -> Operator:
    """Rotating-frame Hamiltonian with cavity-atom resonance and optional mode coupling J."""
    ops = mode_operators(params.layout)
    a1, a2, sm = ops.a1, ops.a2, ops.sm
    a1d, a2d, sp = a1.dag(), a2.dag(), sm.dag()

    h = params.delta * (a1d @ a1 + a2d @ a2 + sp @ sm)
    h = h + params.chi * (a1d @ a1d @ a1 @ a1 + a2d @ a2d @ a2 @ a2)
    h = h + params.g * (a1d @ sm + a1 @ sp + a2d @ sm + a2 @ sp)
    h = h + params.omega_drv * (a1d + a1)
    h = h + params.j_coupling * (a1d @ a2 + a2d @ a1)
    # remove rounding asymmetry so hermiticity holds exactly
    return h.hermitian_part()


def build_effective_hamiltonian(params: ModelParams) -> Operator:
    """H - i(kappa/2)(a1†a1 + a2†a2) - i(gamma/2) sigma+ sigma-."""
    ops = mode_operators(params.layout)
    loss = 0.5 * params.kappa * (ops.a1.dag() @ ops.a1 + ops.a2.dag() @ ops.a2)
    loss = loss + 0.5 * params.gamma * (ops.sm.dag() @ ops.sm)
    return build_hamiltonian(params) - 1j * loss


def collapse_operators(params: ModelParams) -> list[tuple[Operator, float]]:
    """Decay channels ``[(a1, kappa), (a2, kappa), (sigma_-, gamma)]``; a zero rate is kept."""
    ops = mode_operators(params.layout)
    return [(ops.a1, params.kappa), (ops.a2, params.kappa), (ops.sm, params.gamma)]


def total_excitation(layout: SpaceLayout) -> Operator:
    ops = mode_operators(layout)
    return ops.a1.dag() @ ops.a1 + ops.a2.dag() @ ops.a2 + ops.sm.dag() @ ops.sm
