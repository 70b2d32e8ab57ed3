"""Dressed-state spectra in the one- and two-excitation subspaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SQRT2 = math.sqrt(2.0)

TWO_PHOTON_BASIS = ((2, 0, 0), (1, 1, 0), (0, 2, 0), (1, 0, 1), (0, 1, 1))
SINGLE_EXCITATION_BASIS = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def _label(state: tuple[int, int, int]) -> str:
    m, n, s = state
    return f"|{m},{n},{'ge'[s]}>"


@dataclass(frozen=True)
class SpectrumResult:
    levels: np.ndarray
    basis_labels: tuple[str, ...]
    reference_energy: float

    @property
    def relative(self) -> np.ndarray:
        return self.levels - self.reference_energy


def two_photon_matrix(g: float, chi: float, omega_ref: float = 0.0) -> np.ndarray:
    """Hamiltonian block on {|2,0,g>, |1,1,g>, |0,2,g>, |1,0,e>, |0,1,e>}."""
    w2 = 2.0 * omega_ref
    s = SQRT2 * g
    return np.array(
        [
            [w2 + 2 * chi, 0, 0, s, 0],
            [0, w2, 0, g, g],
            [0, 0, w2 + 2 * chi, 0, s],
            [s, g, 0, w2, 0],
            [0, g, s, 0, w2],
        ],
        dtype=float,
    )


def two_photon_eigenvalues(g: float, chi: float, omega_ref: float = 0.0) -> SpectrumResult:
    # shift applied after diagonalizing so a large omega_ref costs no precision
    levels = np.linalg.eigvalsh(two_photon_matrix(g, chi)) + 2.0 * omega_ref
    return SpectrumResult(
        np.sort(levels), tuple(map(_label, TWO_PHOTON_BASIS)), 2.0 * omega_ref
    )


def single_excitation_matrix(g: float, j: float, omega_ref: float = 0.0) -> np.ndarray:
    """Hamiltonian block on {|1,0,g>, |0,1,g>, |0,0,e>} with mode coupling J."""
    w = omega_ref
    return np.array([[w, j, g], [j, w, g], [g, g, w]], dtype=float)


def single_excitation_levels(g: float, j: float, omega_ref: float = 0.0) -> SpectrumResult:
    """E- , E0 = w - J, E+ with E± = w + (J ± sqrt(J² + 8g²)) / 2, sorted ascending."""
    root = math.sqrt(j * j + 8.0 * g * g)
    rel = np.array([(j - root) / 2.0, -j, (j + root) / 2.0])
    return SpectrumResult(
        np.sort(rel) + omega_ref, tuple(map(_label, SINGLE_EXCITATION_BASIS)), omega_ref
    )


def cpb_optimal_detunings(g: float) -> tuple[float, ...]:
    """Resonant and ±sqrt(2) g detunings; a single zero when g = 0."""
    if g < 0:
        raise ParameterError(f"g must be >= 0, got {g}")
    if g == 0:
        return (0.0,)
    return (-SQRT2 * g, 0.0, SQRT2 * g)


def two_photon_anharmonicity(g: float, chi: float) -> float:
    """Lowest two-photon level minus twice the lowest single-excitation level (J = 0)."""
    e2 = two_photon_eigenvalues(g, chi).levels[0]
    e1 = single_excitation_levels(g, 0.0).levels[0]
    return float(e2 - 2.0 * e1)
