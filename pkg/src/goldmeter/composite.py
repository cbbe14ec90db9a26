"""Direct-sum composite of the meter system and the sectored condensate.

The composite state is a direct sum over superselection sectors: each
sector carries the condensate amplitude A(sector) times a meter amplitude
vector. The measurement coupling is of von Neumann type, meter variable
times coarse velocity, strong enough that both free Hamiltonians are
dropped. Its only effect is then a sector-dependent diagonal phase: after
time t the meter amplitude at eigenvalue M_n in a sector of velocity v is
multiplied by exp(i * coupling * v * t * M_n / hbar). Because the phase
grows with the sector velocity, tracing over the sectors suppresses the
off-diagonal meter coherences: the characteristic function of the sector
velocity distribution, evaluated at the eigenvalue gap, is exactly the
off-diagonal suppression factor.

Two equivalent bookkeepings of the same amplitudes are supported. The lab
frame labels sectors by (Q, velocity) of the collective coordinate; the
rearranged frame transfers the displacement to the background coordinate
system, labelling sectors by (0, -velocity). Switching frames changes
labels only, never amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import ContractViolationError
from .sectors import SectorGrid
from .statespace import TOL_NORM, MeterBasis, MeterState, _readonly_array


class Frame(Enum):
    LAB = "lab"
    REARRANGED = "rearranged"


@dataclass(frozen=True)
class InteractionConfig:
    """Strength and units of the meter-velocity coupling.

    ``neglect_kinetic`` must stay True: the free Hamiltonians of meter and
    condensate are not implemented, only the coupling phase.
    """

    coupling: float = 1.0
    hbar: float = 1.0
    neglect_kinetic: bool = True

    def __post_init__(self):
        if self.coupling <= 0.0:
            raise ValueError("coupling must be positive")
        if self.hbar <= 0.0:
            raise ValueError("hbar must be positive")
        if not self.neglect_kinetic:
            raise ValueError(
                "free-Hamiltonian evolution is not implemented; "
                "neglect_kinetic must be True"
            )


@dataclass(frozen=True, eq=False)
class ReducedMeterDensity:
    """Meter density matrix after tracing out the condensate sectors."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _readonly_array(self.matrix, complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ContractViolationError("density matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > TOL_NORM:
            raise ContractViolationError("density matrix must have unit trace")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise ContractViolationError("density matrix must be positive semidefinite")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()


@dataclass(frozen=True, eq=False)
class CompositeState:
    """Sectors x meter amplitudes with accumulated interaction phases.

    ``blocks[iq, iv, n]`` is the meter amplitude at eigenvalue index n in
    sector (iq, iv); the condensate amplitude lives in ``grid``. ``time``
    counts elapsed interaction time; ``phase_time`` is the accumulated
    coupling * time / hbar prefactor of the phases (equal to ``time`` for
    unit coupling). There is no storage for cross-sector amplitudes: the
    direct-sum (superselected) structure is enforced by the representation.
    """

    grid: SectorGrid
    basis: MeterBasis
    blocks: np.ndarray
    time: float = 0.0
    phase_time: float = 0.0
    frame: Frame = Frame.LAB

    def __post_init__(self):
        b = _readonly_array(self.blocks, complex)
        expected = (self.grid.spec.n_q, self.grid.spec.n_v, self.basis.dim)
        if b.shape != expected:
            raise ValueError(f"blocks shape {b.shape} != (n_q, n_v, dim) = {expected}")
        object.__setattr__(self, "blocks", b)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def total_squared_norm(self) -> float:
        block_norms = np.sum(np.abs(self.blocks) ** 2, axis=2)
        return float(np.sum(self.grid.sector_weights * block_norms))

    def is_normalized(self, tol: float = TOL_NORM) -> bool:
        return abs(self.total_squared_norm() - 1.0) < tol

    def meter_block(self, iq: int, iv: int) -> MeterState:
        return MeterState(self.blocks[iq, iv].copy(), self.basis)

    def sector_velocity(self, iv: int) -> float:
        """Velocity label of compartment iv in the current frame."""
        v = float(self.grid.spec.v_centers()[iv])
        return v if self.frame is Frame.LAB else -v

    def sector_position(self, iq: int) -> float:
        """Position label of compartment iq in the current frame."""
        if self.frame is Frame.REARRANGED:
            return 0.0
        return float(self.grid.spec.q_centers()[iq])

    @cached_property
    def reduced_density(self) -> ReducedMeterDensity:
        return reduce_to_meter(self)


def prepare_product_state(psi0: MeterState, grid: SectorGrid) -> CompositeState:
    """Factorized initial condition: the same meter state in every sector."""
    if not psi0.is_normalized():
        raise ContractViolationError("initial meter state must be normalized")
    if not grid.is_normalized():
        raise ContractViolationError("sector grid must be normalized")
    blocks = np.broadcast_to(
        psi0.amplitudes, (grid.spec.n_q, grid.spec.n_v, psi0.dim)
    ).copy()
    return CompositeState(grid=grid, basis=psi0.basis, blocks=blocks)


def evolve(state: CompositeState, dt: float, cfg: InteractionConfig) -> CompositeState:
    """Advance the coupling phases by dt.

    Sector weights are constants of motion; only the meter phases move, by
    coupling * v * dt * M_n / hbar per sector. Phases add across calls, so
    evolving by t1 then t2 equals evolving by t1 + t2.
    """
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    if state.frame is not Frame.LAB:
        raise ContractViolationError("evolution is defined on the lab frame")
    scale = cfg.coupling * dt / cfg.hbar
    theta = scale * np.outer(state.grid.spec.v_centers(), state.basis.eigenvalue_array)
    blocks = state.blocks * np.exp(1j * theta)[None, :, :]
    return CompositeState(
        grid=state.grid,
        basis=state.basis,
        blocks=blocks,
        time=state.time + dt,
        phase_time=state.phase_time + scale,
        frame=Frame.LAB,
    )


def to_rearranged_frame(state: CompositeState) -> CompositeState:
    """Relabel sectors as (position 0, velocity -v); amplitudes unchanged.

    Idempotent: a state already in the rearranged frame is returned as is.
    """
    if state.frame is Frame.REARRANGED:
        return state
    return replace(state, frame=Frame.REARRANGED)


def to_lab_frame(state: CompositeState) -> CompositeState:
    """Inverse of ``to_rearranged_frame``; amplitudes unchanged."""
    if state.frame is Frame.LAB:
        return state
    return replace(state, frame=Frame.LAB)


def reduce_to_meter(state: CompositeState) -> ReducedMeterDensity:
    """Trace out the sectors: rho_mn = sum_s |A_s|^2 b_m(s) conj(b_n(s))."""
    w = state.grid.sector_weights.reshape(-1)
    b = state.blocks.reshape(-1, state.dim)
    rho = np.einsum("s,sm,sn->mn", w, b, b.conj())
    return ReducedMeterDensity(rho)


def offdiagonal_suppression(state: CompositeState, m: int, n: int) -> complex:
    """Characteristic function of the sector displacements at one meter gap.

    Returns sum_s |A_s|^2 exp(i * delta(s) * (M_m - M_n) / hbar) with
    delta(s)/hbar = v_s * phase_time, i.e. the factor by which the meter
    coherence between eigenvalue indices m and n has been suppressed. For a
    product initial state with nonzero amplitudes c it equals
    rho_mn / (c_m conj(c_n)).
    """
    if m == n:
        raise ValueError("off-diagonal suppression needs two distinct indices")
    gap = state.basis.eigenvalues[m] - state.basis.eigenvalues[n]
    v = state.grid.spec.v_centers()
    phases = np.exp(1j * state.phase_time * gap * v)
    w_v = state.grid.sector_weights.sum(axis=0)
    return complex(np.sum(w_v * phases))
