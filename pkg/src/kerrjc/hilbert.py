"""Truncated Fock-space and two-level-atom operators on CW ⊗ CCW ⊗ atom.

Basis ordering is fixed: ``index = (m * n_cut + n) * 2 + s`` where ``m`` is
the CW photon number, ``n`` the CCW photon number and ``s`` the atomic state
(0 = ground, 1 = excited). The atom index runs fastest.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidDimensionError, LayoutError


class Slot(enum.Enum):
    CW = 0
    CCW = 1
    ATOM = 2


ATOM_DIM = 2
GROUND, EXCITED = 0, 1


@dataclass(frozen=True)
class SpaceLayout:
    n_cut: int
    atom_dim: int = ATOM_DIM

    def __post_init__(self):
        if isinstance(self.n_cut, bool) or int(self.n_cut) != self.n_cut or self.n_cut < 2:
            raise InvalidDimensionError(f"n_cut must be an integer >= 2, got {self.n_cut!r}")
        if self.atom_dim != ATOM_DIM:
            raise InvalidDimensionError("atom_dim is fixed at 2")
        object.__setattr__(self, "n_cut", int(self.n_cut))

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n_cut, self.n_cut, self.atom_dim)

    @property
    def total_dim(self) -> int:
        return self.n_cut * self.n_cut * self.atom_dim

    def slot_dim(self, slot: Slot) -> int:
        return self.dims[slot.value]

    def index(self, m: int, n: int, s: int) -> int:
        if not (0 <= m < self.n_cut and 0 <= n < self.n_cut and s in (GROUND, EXCITED)):
            raise LayoutError(f"state |{m},{n},{s}> outside layout with n_cut={self.n_cut}")
        return (m * self.n_cut + n) * self.atom_dim + s

    def label(self, index: int) -> tuple[int, int, int]:
        rest, s = divmod(index, self.atom_dim)
        m, n = divmod(rest, self.n_cut)
        return m, n, s

    def ket(self, m: int, n: int, s: int) -> np.ndarray:
        v = np.zeros(self.total_dim, dtype=complex)
        v[self.index(m, n, s)] = 1.0
        return v


class Operator:
    """Immutable complex matrix on the composite space of a :class:`SpaceLayout`."""

    __slots__ = ("layout", "matrix")

    def __init__(self, layout: SpaceLayout, matrix):
        m = np.array(matrix, dtype=complex)
        if m.shape != (layout.total_dim, layout.total_dim):
            raise LayoutError(
                f"matrix shape {m.shape} does not match layout dimension {layout.total_dim}"
            )
        m.setflags(write=False)
        object.__setattr__(self, "layout", layout)
        object.__setattr__(self, "matrix", m)

    def __setattr__(self, name, value):
        raise AttributeError("Operator is immutable")

    @classmethod
    def zeros(cls, layout: SpaceLayout) -> "Operator":
        return cls(layout, np.zeros((layout.total_dim, layout.total_dim)))

    @classmethod
    def identity(cls, layout: SpaceLayout) -> "Operator":
        return cls(layout, np.eye(layout.total_dim))

    def _check(self, other: "Operator") -> None:
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout} vs {other.layout}")

    def __add__(self, other):
        self._check(other)
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.layout, self.matrix - other.matrix)

    def __neg__(self):
        return Operator(self.layout, -self.matrix)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            raise TypeError("use @ for operator products")
        return Operator(self.layout, complex(scalar) * self.matrix)

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return Operator(self.layout, self.matrix @ other.matrix)

    def dag(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T)

    def commutator(self, other: "Operator") -> "Operator":
        return self @ other - other @ self

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return self.hermiticity_error() <= atol

    def hermitian_part(self) -> "Operator":
        return Operator(self.layout, 0.5 * (self.matrix + self.matrix.conj().T))

    def antihermitian_part(self) -> "Operator":
        """Return ``(O - O†) / 2i`` so that ``O = herm + 1j * antiherm``."""
        return Operator(self.layout, (self.matrix - self.matrix.conj().T) / 2j)

    def restrict(self, states: Sequence[tuple[int, int, int]]) -> np.ndarray:
        """Matrix elements between the listed basis states ``(m, n, s)``."""
        idx = [self.layout.index(*st) for st in states]
        return np.array(self.matrix[np.ix_(idx, idx)])

    def __repr__(self):
        return f"Operator(n_cut={self.layout.n_cut}, dim={self.layout.total_dim})"


def fock_annihilation(dim: int) -> np.ndarray:
    """Single-mode annihilation operator with ``<k-1|a|k> = sqrt(k)``."""
    if isinstance(dim, bool) or int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Fock dimension must be an integer >= 2, got {dim!r}")
    return np.diag(np.sqrt(np.arange(1, int(dim), dtype=float)), k=1).astype(complex)


def atom_lowering() -> np.ndarray:
    """sigma_minus in the (g, e) ordering: only ``<g|sigma_-|e> = 1``."""
    sm = np.zeros((2, 2), dtype=complex)
    sm[GROUND, EXCITED] = 1.0
    return sm


def embed(op, slot: Slot, layout: SpaceLayout) -> Operator:
    """Lift a single-subsystem matrix onto the composite space."""
    op = np.asarray(op, dtype=complex)
    d = layout.slot_dim(slot)
    if op.shape != (d, d):
        raise LayoutError(f"{slot.name} operator must be {d}x{d}, got {op.shape}")
    factors = [np.eye(k, dtype=complex) for k in layout.dims]
    factors[slot.value] = op
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return Operator(layout, out)


@dataclass(frozen=True)
class ModeOperators:
    """The embedded ladder operators a1, a2, sigma_- for one layout."""

    layout: SpaceLayout
    a1: Operator
    a2: Operator
    sm: Operator

    def annihilator(self, mode: Slot) -> Operator:
        if mode is Slot.CW:
            return self.a1
        if mode is Slot.CCW:
            return self.a2
        raise LayoutError(f"{mode} is not a cavity mode")


@functools.lru_cache(maxsize=16)
def mode_operators(layout: SpaceLayout) -> ModeOperators:
    a = fock_annihilation(layout.n_cut)
    return ModeOperators(
        layout,
        embed(a, Slot.CW, layout),
        embed(a, Slot.CCW, layout),
        embed(atom_lowering(), Slot.ATOM, layout),
    )


def basis_states(layout: SpaceLayout) -> Iterable[tuple[int, int, int]]:
    return (layout.label(i) for i in range(layout.total_dim))
