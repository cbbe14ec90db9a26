"""Dense complex state vectors of the meter system and diagonal unitaries.

Everything here works in the eigenbasis of the measured meter variable:
states are small complex amplitude vectors, and the only unitaries needed
by the rest of the package are diagonal phase rotations in that basis.
Conventions: hbar = 1, double precision throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ContractViolationError, DimensionError

TOL_NORM = 1e-10


def _readonly_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MeterBasis:
    """Eigenbasis of the meter variable: strictly increasing real eigenvalues."""

    eigenvalues: tuple[float, ...]
    labels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        eig = tuple(float(m) for m in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", eig)
        if len(eig) < 1:
            raise ValueError("meter basis needs at least one eigenvalue")
        if any(b <= a for a, b in zip(eig, eig[1:])):
            raise ValueError("meter eigenvalues must be strictly increasing")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != len(eig):
                raise ValueError("one label per eigenvalue required")
            object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def eigenvalue_array(self) -> np.ndarray:
        return np.array(self.eigenvalues, dtype=float)


@dataclass(frozen=True, eq=False)
class MeterState:
    """Complex amplitude vector of the meter system in its eigenbasis.

    Immutable after construction; the amplitude array is stored read-only.
    """

    amplitudes: np.ndarray
    basis: MeterBasis

    def __post_init__(self):
        amps = _readonly_array(self.amplitudes, complex)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a flat vector")
        if amps.shape[0] != self.basis.dim:
            raise DimensionError(
                f"{amps.shape[0]} amplitudes for a dim-{self.basis.dim} basis"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def squared_norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def is_normalized(self, tol: float = TOL_NORM) -> bool:
        return abs(self.squared_norm() - 1.0) < tol

    def normalized(self) -> "MeterState":
        norm = np.sqrt(self.squared_norm())
        if norm == 0.0:
            raise ContractViolationError("cannot normalize the zero vector")
        return MeterState(self.amplitudes / norm, self.basis)


@dataclass(frozen=True, eq=False)
class DiagonalUnitary:
    """Phase rotation diag(exp(i * phases)) in the meter eigenbasis."""

    phases: np.ndarray

    def __post_init__(self):
        ph = _readonly_array(self.phases, float)
        if ph.ndim != 1:
            raise ValueError("phases must be a flat vector")
        object.__setattr__(self, "phases", ph)

    @property
    def dim(self) -> int:
        return self.phases.shape[0]


def _require_shared_basis(a: MeterState, b: MeterState) -> None:
    if a.basis != b.basis:
        raise DimensionError("states do not share a meter basis")


def inner_product(a: MeterState, b: MeterState) -> complex:
    """Hermitian inner product <a|b>, conjugate-linear in the first slot."""
    _require_shared_basis(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_diagonal_unitary(u: DiagonalUnitary, s: MeterState) -> MeterState:
    """Apply diag(exp(i * phases)) to a state; norm is preserved."""
    if u.dim != s.dim:
        raise DimensionError(f"unitary dim {u.dim} != state dim {s.dim}")
    return MeterState(np.exp(1j * u.phases) * s.amplitudes, s.basis)


def global_phase_equivalent(
    a: MeterState, b: MeterState, tol: float = 1e-9, tol_norm: float = TOL_NORM
) -> bool:
    """True iff a and b differ by at most an overall phase factor.

    Operationally: |<a|b>| >= 1 - tol for normalized inputs.
    """
    if not a.is_normalized(tol_norm) or not b.is_normalized(tol_norm):
        raise ContractViolationError("global-phase comparison needs normalized states")
    return abs(inner_product(a, b)) >= 1.0 - tol


def meter_state(amplitudes: Sequence[complex], basis: MeterBasis) -> MeterState:
    """Convenience constructor that normalizes the given amplitudes."""
    return MeterState(np.asarray(amplitudes, dtype=complex), basis).normalized()
