"""Event reading: from a decohered ensemble to a single meter outcome.

A classical gauge event is one realization of the condensate's velocity
fluctuation over a time increment mu; it imprints a diagonal phase
exp(-i * delta_xi * M_n / hbar) on the meter. Two different events change a
meter state by only a global phase exactly when the state occupies a single
meter eigenvalue; the unit-modulus discrepancy ratio quantifies the failure
for superpositions. Reading is therefore refused on states that still
interfere (the informatical step has no dynamics and cannot remove
interference), and on decohered states it collapses the meter with Born
weights given by the reduced-density diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .composite import CompositeState
from .decoherence import SuperselectedObservable, is_classical_mixed
from .errors import ContractViolationError
from .sectors import event_weights
from .statespace import DiagonalUnitary, MeterBasis, MeterState, apply_diagonal_unitary

# Amplitudes below this are treated as unoccupied when deciding support.
SUPPORT_ATOL = 1e-12


@dataclass(frozen=True)
class GaugeEvent:
    """One classical velocity event: compartment, velocity, and increment."""

    iv: int
    xi_dot: float
    mu: float
    delta_xi: float

    def __post_init__(self):
        if self.delta_xi != self.xi_dot * self.mu:
            raise ValueError("delta_xi must equal xi_dot * mu exactly")

    @classmethod
    def from_velocity(cls, iv: int, xi_dot: float, mu: float) -> "GaugeEvent":
        return cls(iv=iv, xi_dot=xi_dot, mu=mu, delta_xi=xi_dot * mu)


@dataclass(frozen=True)
class ReadingOutcome:
    """Result of one reading attempt on one ensemble copy.

    ``collapsed_index`` is present only when the input was decohered and
    the pipeline ran to completion; ``discrepancy`` is the unit-modulus
    ratio reported for the dominant meter pair.
    """

    event: GaugeEvent
    equivalence_passed: bool
    collapsed_index: Optional[int]
    discrepancy: Optional[complex]


def gauge_phase(event: GaugeEvent, basis: MeterBasis, hbar: float = 1.0) -> DiagonalUnitary:
    """Diagonal phase imprinted by one event: theta_n = -delta_xi * M_n / hbar."""
    return DiagonalUnitary(-event.delta_xi * basis.eigenvalue_array / hbar)


def _discrepancy_ratio(delta_1: float, delta_2: float, gap: float, hbar: float) -> complex:
    return complex(np.exp(-1j * (delta_1 - delta_2) * gap / hbar))


def _dominant_pair(weights: np.ndarray) -> tuple[int, int]:
    """Indices of the two largest weights, returned in ascending index order."""
    a, b = np.argsort(weights)[-2:]
    return (int(a), int(b)) if a < b else (int(b), int(a))


def equivalence_test(
    psi0: MeterState,
    e1: GaugeEvent,
    e2: GaugeEvent,
    tol: float = 1e-9,
    hbar: float = 1.0,
) -> tuple[bool, complex]:
    """Do two gauge events change psi0 by only a global phase?

    True iff psi0 occupies a single meter eigenvalue, or every pairwise
    discrepancy ratio over occupied eigenvalues equals 1 within tol (the
    2-pi resonant edge case). The returned ratio is the one for the two
    largest amplitudes. Testing identical events is vacuous and rejected.
    """
    if not psi0.is_normalized():
        raise ContractViolationError("equivalence test needs a normalized state")
    if e1.delta_xi == e2.delta_xi:
        raise ValueError("events must differ in delta_xi")

    phased_1 = apply_diagonal_unitary(gauge_phase(e1, psi0.basis, hbar), psi0)
    phased_2 = apply_diagonal_unitary(gauge_phase(e2, psi0.basis, hbar), psi0)
    assert phased_1.is_normalized() and phased_2.is_normalized()

    eig = psi0.basis.eigenvalue_array
    support = np.flatnonzero(np.abs(psi0.amplitudes) > SUPPORT_ATOL)
    if support.size <= 1:
        equivalent = True
    else:
        ratios = [
            _discrepancy_ratio(e1.delta_xi, e2.delta_xi, eig[i] - eig[j], hbar)
            for k, i in enumerate(support)
            for j in support[k + 1 :]
        ]
        equivalent = all(abs(r - 1.0) <= tol for r in ratios)

    if psi0.dim < 2:
        reported = complex(1.0)
    else:
        i, j = _dominant_pair(np.abs(psi0.amplitudes))
        reported = _discrepancy_ratio(e1.delta_xi, e2.delta_xi, eig[i] - eig[j], hbar)
    return equivalent, reported


def read_event(
    state: CompositeState,
    observables: Sequence[SuperselectedObservable],
    mu: float,
    R: float,
    rng_seed: Union[int, np.random.Generator],
    classical_mixed: Optional[bool] = None,
    hbar: float = 1.0,
) -> ReadingOutcome:
    """Attempt one event reading on one copy of the composite.

    The decoherence verdict gates the reading: a state that still
    interferes yields a refusal outcome (equivalence_passed False, no
    collapse), which is a physical verdict rather than an error. On a
    decohered state, a velocity event is drawn from the sector weights,
    its gauge phase applied, and the meter collapsed with probabilities
    from the reduced-density diagonal.

    ``classical_mixed`` may carry a precomputed verdict for this exact
    state, so ensembles sharing one deterministic preparation do not
    re-evaluate it per copy. The reading itself advances no dynamics: the
    input state (and its time) is untouched.
    """
    if mu <= 0.0:
        raise ValueError("time increment mu must be positive")
    if classical_mixed is None:
        classical_mixed = is_classical_mixed(state, observables, R)

    rng = (
        np.random.default_rng(rng_seed)
        if isinstance(rng_seed, (int, np.integer))
        else rng_seed
    )
    weights = event_weights(state.grid)
    iv = int(np.searchsorted(weights.cdf, rng.random(), side="right"))
    iv = min(iv, len(weights) - 1)
    # The gauge velocity is the rearranged-frame one: minus the lab velocity.
    xi_dot = -float(state.grid.spec.v_centers()[iv])
    event = GaugeEvent.from_velocity(iv=iv, xi_dot=xi_dot, mu=mu)

    diag = state.reduced_density.diagonal
    if state.dim < 2:
        discrepancy = complex(1.0)
    else:
        i, j = _dominant_pair(diag)
        gap = state.basis.eigenvalues[i] - state.basis.eigenvalues[j]
        # Ratio of this event against the zero-increment reference.
        discrepancy = _discrepancy_ratio(event.delta_xi, 0.0, gap, hbar)

    if not classical_mixed:
        return ReadingOutcome(
            event=event,
            equivalence_passed=False,
            collapsed_index=None,
            discrepancy=discrepancy,
        )

    # The event's gauge phase is diagonal, so it commutes with the collapse
    # projection and shifts only the overall phase of the surviving
    # eigenstate; the collapse law is the bare reduced-density diagonal.
    cdf = np.cumsum(diag)
    cdf[-1] = max(cdf[-1], 1.0)
    n = int(np.searchsorted(cdf, rng.random(), side="right"))
    n = min(n, state.dim - 1)
    # A collapsed eigenstate has single support: its pairwise ratios are vacuous.
    return ReadingOutcome(
        event=event,
        equivalence_passed=True,
        collapsed_index=n,
        discrepancy=complex(1.0),
    )
