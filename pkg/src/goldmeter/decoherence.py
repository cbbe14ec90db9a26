"""Superselected observables and the operational decoherence criterion.

Observables compatible with the sector superselection rule are block
diagonal: one copy of a meter-space Hermitian operator per sector, never
mixing sectors. For such a family, meter interference of a composite state
is invisible in statistical data once the total interference term of every
observable is far below its uncertainty width. That ratio test, evaluated
against a threshold R, is the verdict that gates event reading.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import inf
from typing import Optional, Sequence

import numpy as np

from .composite import CompositeState
from .errors import ContractViolationError, DimensionError
from .statespace import MeterBasis, _readonly_array


@dataclass(frozen=True, eq=False)
class SuperselectedObservable:
    """Block-diagonal observable: a meter operator repeated over sectors.

    ``sector_support`` restricts the direct sum to a subset of sectors
    given as (iq, iv) pairs; None means every sector contributes. Mixing of
    distinct sectors is unrepresentable by construction.
    """

    label: str
    meter_op: np.ndarray
    sector_support: Optional[frozenset[tuple[int, int]]] = None

    def __post_init__(self):
        op = _readonly_array(self.meter_op, complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError("meter operator must be square")
        if np.max(np.abs(op - op.conj().T)) > 1e-12:
            raise ContractViolationError(f"observable {self.label!r} is not Hermitian")
        object.__setattr__(self, "meter_op", op)
        if self.sector_support is not None:
            object.__setattr__(
                self,
                "sector_support",
                frozenset((int(a), int(b)) for a, b in self.sector_support),
            )

    @property
    def dim(self) -> int:
        return self.meter_op.shape[0]

    def squared(self) -> "SuperselectedObservable":
        return SuperselectedObservable(
            label=f"{self.label}^2",
            meter_op=self.meter_op @ self.meter_op,
            sector_support=self.sector_support,
        )


@dataclass(frozen=True)
class DecoherenceVerdict:
    """Uncertainty width vs total interference for one observable."""

    observable_id: str
    variance: float
    interference: float
    ratio: float
    decohered: bool


def _support_weights(state: CompositeState, obs: SuperselectedObservable) -> np.ndarray:
    """Flat sector weights, zeroed outside the observable's support."""
    w = state.grid.sector_weights
    if obs.sector_support is None:
        return w.reshape(-1)
    mask = np.zeros_like(w)
    for iq, iv in obs.sector_support:
        mask[iq, iv] = 1.0
    return (w * mask).reshape(-1)


def expectation(state: CompositeState, obs: SuperselectedObservable) -> float:
    """<O> = sum over supported sectors of |A_s|^2 <block_s|O_meter|block_s>."""
    if obs.dim != state.dim:
        raise DimensionError(f"observable dim {obs.dim} != state dim {state.dim}")
    w = _support_weights(state, obs)
    b = state.blocks.reshape(-1, state.dim)
    per_sector = np.einsum("sm,mn,sn->s", b.conj(), obs.meter_op, b)
    value = complex(np.sum(w * per_sector))
    if abs(value.imag) > 1e-10:
        raise ContractViolationError(
            f"expectation of {obs.label!r} has imaginary residue {value.imag:g}"
        )
    return value.real


def meter_interference_decomposition(state: CompositeState) -> list[np.ndarray]:
    """Split the composite into its meter-eigenvalue components.

    Component n keeps only meter index n in every sector; the components
    sum back to the original block array exactly.
    """
    comps = []
    for n in range(state.dim):
        comp = np.zeros_like(state.blocks)
        comp[:, :, n] = state.blocks[:, :, n]
        comps.append(comp)
    return comps


def interference_cross_term(
    state: CompositeState, obs: SuperselectedObservable, n: int, m: int
) -> complex:
    """Matrix element of O between meter components n and m of the state."""
    if obs.dim != state.dim:
        raise DimensionError(f"observable dim {obs.dim} != state dim {state.dim}")
    w = _support_weights(state, obs)
    b = state.blocks.reshape(-1, state.dim)
    o_nm = complex(obs.meter_op[n, m])
    return o_nm * complex(np.sum(w * b[:, n].conj() * b[:, m]))


def decoherence_verdict(
    state: CompositeState, obs: SuperselectedObservable, R: float
) -> DecoherenceVerdict:
    """Compare (Delta O)^2 against the squared doubled interference sum.

    Decohered means the interference vanishes exactly or the variance
    exceeds it by at least the factor R.
    """
    if R <= 1.0:
        raise ValueError("threshold R must exceed 1")
    mean = expectation(state, obs)
    mean_sq = expectation(state, obs.squared())
    variance = max(mean_sq - mean * mean, 0.0)

    total = 0.0
    for m in range(state.dim):
        for n in range(m + 1, state.dim):
            total += interference_cross_term(state, obs, n, m).real
    interference = (2.0 * total) ** 2

    if interference == 0.0:
        ratio = inf
        decohered = True
    else:
        ratio = variance / interference
        decohered = ratio >= R
    return DecoherenceVerdict(
        observable_id=obs.label,
        variance=variance,
        interference=interference,
        ratio=ratio,
        decohered=decohered,
    )


def is_classical_mixed(
    state: CompositeState, observables: Sequence[SuperselectedObservable], R: float
) -> bool:
    """True iff the verdict passes for every supplied observable.

    The supplied list stands in for the full superselected family; a
    generator basis of the meter operator space (see ``generator_basis``)
    spans it by linearity.
    """
    if len(observables) == 0:
        raise ValueError("at least one observable is required")
    return all(decoherence_verdict(state, obs, R).decohered for obs in observables)


def generator_basis(basis: MeterBasis) -> list[SuperselectedObservable]:
    """Hermitian generator basis of the meter operator space, dim^2 members.

    Projectors P_k on each eigenvalue plus the real (X) and imaginary (Y)
    pair operators for every index pair, each embedded over all sectors.
    """
    dim = basis.dim
    out = []
    for k in range(dim):
        op = np.zeros((dim, dim), dtype=complex)
        op[k, k] = 1.0
        out.append(SuperselectedObservable(label=f"P{k}", meter_op=op))
    for m in range(dim):
        for n in range(m + 1, dim):
            x = np.zeros((dim, dim), dtype=complex)
            x[m, n] = 1.0
            x[n, m] = 1.0
            out.append(SuperselectedObservable(label=f"X{m}{n}", meter_op=x))
            y = np.zeros((dim, dim), dtype=complex)
            y[m, n] = -1j
            y[n, m] = 1j
            out.append(SuperselectedObservable(label=f"Y{m}{n}", meter_op=y))
    return out
