"""Lindblad generator, steady states, time evolution and photon statistics.

Density matrices are vectorized by column stacking, so that
``vec(A X B) = (B^T ⊗ A) vec(X)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .errors import (
    ConvergenceError,
    IntegrationError,
    LayoutError,
    NoUniqueSteadyStateError,
    ParameterError,
    UndefinedCorrelationError,
)
from .hilbert import Operator, Slot, SpaceLayout, mode_operators


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-10
    trace: float = 1e-10
    hermiticity: float = 1e-10
    positivity: float = 1e-8
    integration: float = 1e-8

    @classmethod
    def from_mapping(cls, data) -> "Tolerances":
        unknown = set(data) - {f.name for f in cls.__dataclass_fields__.values()}
        if unknown:
            raise ParameterError(f"unknown tolerance keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


DEFAULT_TOLERANCES = Tolerances()

# below this mean photon number g2 is treated as undefined
REFINEMENT_STEPS = 2
MIN_MEAN_PHOTON = 1e-24


def vectorize(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).reshape(-1, order="F")


def unvectorize(vec: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec).reshape(dim, dim, order="F")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    layout: SpaceLayout
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = self.layout.total_dim
        if m.shape != (d, d):
            raise LayoutError(f"density matrix must be {d}x{d}, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_ket(cls, layout: SpaceLayout, ket) -> "DensityMatrix":
        psi = np.asarray(ket, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(layout, np.outer(psi, psi.conj()))

    @classmethod
    def basis(cls, layout: SpaceLayout, m: int, n: int, s: int) -> "DensityMatrix":
        return cls.from_ket(layout, layout.ket(m, n, s))

    @classmethod
    def vacuum(cls, layout: SpaceLayout) -> "DensityMatrix":
        return cls.basis(layout, 0, 0, 0)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def expect(self, op: Operator) -> complex:
        if op.layout != self.layout:
            raise LayoutError("operator and state layouts differ")
        # Tr(rho O) without forming the product
        return complex(np.sum(self.matrix.T * op.matrix))

    def validate(self, tol: Tolerances = DEFAULT_TOLERANCES) -> None:
        """Raise ConvergenceError if trace, hermiticity or positivity is violated."""
        dev = abs(self.trace - 1.0)
        if dev > tol.trace:
            raise ConvergenceError("density matrix trace deviates from 1", dev)
        herm = self.hermiticity_error()
        if herm > tol.hermiticity:
            raise ConvergenceError("density matrix is not Hermitian", herm)
        lam = self.min_eigenvalue()
        if lam < -tol.positivity:
            raise ConvergenceError("density matrix has a negative eigenvalue", -lam)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Sparse Liouvillian acting on column-stacked density matrices."""

    layout: SpaceLayout
    matrix: sps.csr_matrix
    dissipative: bool = field(default=True)

    def apply(self, rho: DensityMatrix | np.ndarray) -> np.ndarray:
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        return unvectorize(self.matrix @ vectorize(m), self.layout.total_dim)

    def trace_preservation_error(self) -> float:
        """max |L^† vec(I)|; zero for a trace-preserving generator."""
        ident = vectorize(np.eye(self.layout.total_dim, dtype=complex))
        return float(np.max(np.abs(self.matrix.conj().T @ ident), initial=0.0))


def liouvillian(h: Operator, channels: Sequence[tuple[Operator, float]]) -> Superoperator:
    """L[rho] = -i[H, rho] + sum rate/2 (2 o rho o† - o†o rho - rho o†o)."""
    layout = h.layout
    d = layout.total_dim
    eye = sps.identity(d, dtype=complex, format="csr")
    hs = sps.csr_matrix(h.matrix)
    gen = -1j * (sps.kron(eye, hs) - sps.kron(hs.T, eye))
    dissipative = False
    for op, rate in channels:
        if op.layout != layout:
            raise LayoutError("collapse operator layout differs from Hamiltonian layout")
        rate = float(rate)
        if not math.isfinite(rate) or rate < 0:
            raise ParameterError(f"decay rates must be finite and >= 0, got {rate}")
        if rate == 0.0:
            continue
        dissipative = True
        c = sps.csr_matrix(op.matrix)
        cdc = (c.conj().T @ c).tocsr()
        gen = gen + (0.5 * rate) * (
            2.0 * sps.kron(c.conj(), c) - sps.kron(eye, cdc) - sps.kron(cdc.T, eye)
        )
    gen = sps.csr_matrix(gen)
    gen.eliminate_zeros()
    return Superoperator(layout, gen, dissipative)


def _trace_row(d: int) -> np.ndarray:
    return vectorize(np.eye(d, dtype=complex))


def steady_state(
    lv: Superoperator,
    tol: Tolerances = DEFAULT_TOLERANCES,
    method: str = "sparse",
) -> DensityMatrix:
    """Null vector of ``lv`` by replacing the first row with the trace constraint.

    ``method`` selects a sparse LU (default) or a dense LAPACK solve of the
    same bordered system.
    """
    if not lv.dissipative:
        raise NoUniqueSteadyStateError("generator has no decay channel with positive rate")
    d = lv.layout.total_dim
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        if method == "sparse":
            system = sps.vstack(
                [sps.csr_matrix(_trace_row(d)[None, :]), lv.matrix[1:]], format="csc"
            )
            lu = spla.splu(system)
            x = lu.solve(rhs)
            # refinement recovers the tiny multi-photon populations that g2 depends on
            for _ in range(REFINEMENT_STEPS):
                x = x + lu.solve(rhs - system @ x)
        elif method == "dense":
            system = lv.matrix.toarray()
            system[0, :] = _trace_row(d)
            x = np.linalg.solve(system, rhs)
        else:
            raise ValueError(f"unknown steady-state method {method!r}")
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        raise NoUniqueSteadyStateError(f"steady-state system is singular: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NoUniqueSteadyStateError("steady-state solve produced non-finite entries")

    rho = unvectorize(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    residual = float(np.max(np.abs(lv.matrix @ vectorize(rho))))
    if residual > tol.residual:
        raise ConvergenceError("steady state does not annihilate the generator", residual)
    state = DensityMatrix(lv.layout, rho)
    state.validate(tol)
    return state


def steady_state_residual(lv: Superoperator, rho: DensityMatrix) -> float:
    return float(np.max(np.abs(lv.matrix @ vectorize(rho.matrix))))


def evolve(
    rho0: DensityMatrix,
    lv: Superoperator,
    t_final: float,
    dt: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> DensityMatrix:
    """Fixed-step RK4 on the vectorized master equation.

    The step is shrunk slightly so that an integer number of steps lands
    exactly on ``t_final``.
    """
    if not dt > 0:
        raise ParameterError(f"dt must be > 0, got {dt}")
    if t_final < dt:
        raise ParameterError(f"t_final ({t_final}) must be >= dt ({dt})")
    if rho0.layout != lv.layout:
        raise LayoutError("initial state and generator layouts differ")
    steps = int(math.ceil(t_final / dt - 1e-12))
    h = t_final / steps
    d = lv.layout.total_dim
    gen = lv.matrix
    v = vectorize(rho0.matrix).copy()
    tr0 = np.trace(rho0.matrix)
    diag = np.arange(d) * (d + 1)
    for _ in range(steps):
        k1 = gen @ v
        k2 = gen @ (v + 0.5 * h * k1)
        k3 = gen @ (v + 0.5 * h * k2)
        k4 = gen @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(v[diag].sum() - tr0)
        if not drift <= tol.integration:
            raise IntegrationError(
                f"trace drift {drift:.3e} exceeds {tol.integration:.1e}; reduce dt"
            )
        m = unvectorize(v, d)
        herm = float(np.max(np.abs(m - m.conj().T)))
        if not herm <= tol.integration:
            raise IntegrationError(
                f"hermiticity error {herm:.3e} exceeds {tol.integration:.1e}; reduce dt"
            )
    return DensityMatrix(lv.layout, unvectorize(v, d))


def _mode_ops(layout: SpaceLayout, mode: Slot) -> Operator:
    if mode not in (Slot.CW, Slot.CCW):
        raise LayoutError(f"{mode} is not a cavity mode")
    return mode_operators(layout).annihilator(mode)


def mean_photon(rho: DensityMatrix, mode: Slot = Slot.CW) -> float:
    a = _mode_ops(rho.layout, mode)
    return max(0.0, rho.expect(a.dag() @ a).real)


def g2_zero(rho: DensityMatrix, mode: Slot = Slot.CW) -> float:
    """Equal-time second-order correlation Tr(rho a†²a²) / Tr(rho a†a)²."""
    a = _mode_ops(rho.layout, mode)
    ad = a.dag()
    n1 = rho.expect(ad @ a).real
    if n1 <= MIN_MEAN_PHOTON:
        raise UndefinedCorrelationError(f"mean photon number {n1:.3e} is zero; g2 undefined")
    n2 = rho.expect(ad @ ad @ a @ a).real
    return max(0.0, n2) / n1**2


def photon_distribution(rho: DensityMatrix, mode: Slot = Slot.CW) -> np.ndarray:
    """Marginal photon-number distribution P(0..n_cut-1) of one cavity mode."""
    if mode not in (Slot.CW, Slot.CCW):
        raise LayoutError(f"{mode} is not a cavity mode")
    pops = np.real(np.diag(rho.matrix)).reshape(rho.layout.dims)
    axes = (1, 2) if mode is Slot.CW else (0, 2)
    return np.clip(pops.sum(axis=axes), 0.0, None)


def poisson_reference(mean: float, size: int) -> np.ndarray:
    m = np.arange(size)
    logp = m * math.log(mean) - mean - np.array([math.lgamma(k + 1) for k in m])
    return np.exp(logp)


class PoissonComparison(NamedTuple):
    ratio: np.ndarray
    deviation: np.ndarray
    reference: np.ndarray


def poisson_deviation(p, mean: float) -> PoissonComparison:
    """Compare a photon distribution with the Poisson law of the same mean.

    Returns ``P(m)/Pois(m)`` together with the relative deviation
    ``ratio - 1`` and the Poisson reference itself.
    """
    if not mean > 0:
        raise UndefinedCorrelationError(f"Poisson comparison needs mean > 0, got {mean}")
    p = np.asarray(p, dtype=float)
    ref = poisson_reference(mean, p.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = p / ref
    return PoissonComparison(ratio, ratio - 1.0, ref)
