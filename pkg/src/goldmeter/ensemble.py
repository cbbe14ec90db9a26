"""Ensembles of system copies and the two-stage measurement pipeline.

A projective measurement is run as two distinct processes with an
inspectable state in between: first the non-selective stage (interaction
phases accumulate until the decoherence verdict passes for a full
generator basis of meter observables), then event reading on each copy.
Copies share the deterministic preparation (grid construction, evolution
and verdicts are seed-free and identical across copies); per-copy
randomness enters only at event reading, through one derived seed per copy
(base_seed + copy index).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from math import inf
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy import stats

from .composite import CompositeState, InteractionConfig, evolve, prepare_product_state
from .decoherence import (
    DecoherenceVerdict,
    SuperselectedObservable,
    decoherence_verdict,
    generator_basis,
    is_classical_mixed,
)
from .errors import StatisticsError
from .eventreading import ReadingOutcome, read_event
from .sectors import AmplitudeProfile, CompartmentSpec, build_grid
from .statespace import MeterState

BORN_SIGNIFICANCE = 0.001
WEIGHT_FLOOR = 1e-6


class Stage(Enum):
    QUANTUM_PURE = "quantum_pure"
    CLASSICAL_MIXED = "classical_mixed"
    CLASSICAL_PURE = "classical_pure"


@dataclass(frozen=True)
class EnsembleSpec:
    """Everything needed to run one measurement pipeline."""

    n_copies: int
    psi0: MeterState
    grid_profile: AmplitudeProfile
    compartments: CompartmentSpec
    interaction: InteractionConfig
    t_decohere: float
    mu: float
    R: float
    base_seed: int

    def __post_init__(self):
        if self.n_copies < 1:
            raise ValueError("n_copies must be >= 1")
        if self.t_decohere < 0.0:
            raise ValueError("t_decohere must be non-negative")
        if self.mu <= 0.0:
            raise ValueError("mu must be positive")
        if self.R <= 1.0:
            raise ValueError("R must exceed 1")


@dataclass(frozen=True)
class VerdictSummary:
    """Aggregate of the decoherence verdicts shared by all copies."""

    n_observables: int
    n_passed: int
    min_ratio: float
    all_passed: bool


@dataclass(frozen=True, eq=False)
class EnsembleReport:
    """Counts, Born comparison, and stage classification for one run."""

    stage: Stage
    counts: dict[int, int]
    frequencies: dict[int, float]
    born_targets: dict[int, float]
    chi_square: Optional[float]
    chi_square_pass: Optional[bool]
    decoherence_verdicts: VerdictSummary
    refused: int
    n_copies: int
    stage_sequence: tuple[Stage, Stage, Stage]
    outcomes: Optional[tuple[ReadingOutcome, ...]] = None


def chi_square_counts(
    counts: np.ndarray, probs: np.ndarray, significance: float = BORN_SIGNIFICANCE
) -> tuple[float, bool]:
    """Pearson chi-square of counts against target probabilities."""
    total = int(counts.sum())
    zero = probs <= 0.0
    if np.any(counts[zero] > 0):
        return inf, False
    keep = ~zero
    expected = probs[keep] * total
    chi2 = float(np.sum((counts[keep] - expected) ** 2 / expected))
    dof = int(keep.sum()) - 1
    if dof <= 0:
        # Single admissible category: only an exact match passes.
        return chi2, chi2 <= 1e-9
    p_value = float(stats.chi2.sf(chi2, dof))
    return chi2, p_value >= significance


def born_statistics(
    outcomes: Sequence[ReadingOutcome],
    targets: Union[Mapping[int, float], Sequence[float]],
) -> tuple[float, bool]:
    """Chi-square of collapsed outcome counts against target probabilities."""
    if isinstance(targets, Mapping):
        indices = sorted(targets)
        probs = np.array([targets[i] for i in indices], dtype=float)
    else:
        probs = np.asarray(targets, dtype=float)
        indices = list(range(len(probs)))
    collapsed = [o.collapsed_index for o in outcomes if o.collapsed_index is not None]
    if not collapsed:
        raise StatisticsError("no collapsed outcomes to test")
    counter = Counter(collapsed)
    counts = np.array([counter.get(i, 0) for i in indices], dtype=float)
    return chi_square_counts(counts, probs)


def _classify_one(
    state: CompositeState,
    observables: Sequence[SuperselectedObservable],
    R: float,
    weight_floor: float,
) -> Stage:
    if not is_classical_mixed(state, observables, R):
        return Stage.QUANTUM_PURE
    diag = state.reduced_density.diagonal
    if float(diag.max()) >= 1.0 - weight_floor:
        return Stage.CLASSICAL_PURE
    if int(np.sum(diag > weight_floor)) > 1:
        return Stage.CLASSICAL_MIXED
    return Stage.CLASSICAL_PURE


def classify_stage(
    states: Sequence[CompositeState],
    observables: Sequence[SuperselectedObservable],
    R: float,
    weight_floor: float = WEIGHT_FLOOR,
) -> Stage:
    """Modal classification of a sample of copies.

    A copy is quantum pure while any verdict fails; otherwise classical,
    and pure or mixed according to whether a single potential outcome
    holds essentially all the weight.
    """
    if len(states) == 0:
        raise ValueError("classification needs at least one state")
    tally = Counter(_classify_one(s, observables, R, weight_floor) for s in states)
    return tally.most_common(1)[0][0]


def _summarize(verdicts: Sequence[DecoherenceVerdict]) -> VerdictSummary:
    ratios = [v.ratio for v in verdicts]
    return VerdictSummary(
        n_observables=len(verdicts),
        n_passed=sum(v.decohered for v in verdicts),
        min_ratio=min(ratios) if ratios else inf,
        all_passed=all(v.decohered for v in verdicts),
    )


def run_pipeline(spec: EnsembleSpec, keep_outcomes: bool = False) -> EnsembleReport:
    """Run prepare -> dephase -> verdict -> per-copy event reading.

    Refusals (reads attempted before the verdict passes) are counted, not
    raised. Identical specs give identical reports; per-copy seeds are
    base_seed + copy index. ``keep_outcomes`` attaches the full per-copy
    outcome tuple to the report (memory grows with n_copies).
    """
    grid = build_grid(spec.compartments, spec.grid_profile)
    state0 = prepare_product_state(spec.psi0, grid)
    observables = generator_basis(spec.psi0.basis)

    stage_initial = _classify_one(state0, observables, spec.R, WEIGHT_FLOOR)
    evolved = evolve(state0, spec.t_decohere, spec.interaction)
    verdicts = [decoherence_verdict(evolved, o, spec.R) for o in observables]
    summary = _summarize(verdicts)
    stage_mid = _classify_one(evolved, observables, spec.R, WEIGHT_FLOOR)

    dim = spec.psi0.dim
    born = evolved.reduced_density.diagonal
    counts = np.zeros(dim, dtype=int)
    refused = 0
    outcomes: list[ReadingOutcome] = []
    for i in range(spec.n_copies):
        out = read_event(
            evolved,
            observables,
            spec.mu,
            spec.R,
            spec.base_seed + i,
            classical_mixed=summary.all_passed,
            hbar=spec.interaction.hbar,
        )
        if out.collapsed_index is None:
            refused += 1
        else:
            counts[out.collapsed_index] += 1
        if keep_outcomes:
            outcomes.append(out)

    n_collapsed = spec.n_copies - refused
    if n_collapsed > 0:
        frequencies = {n: float(counts[n]) / n_collapsed for n in range(dim)}
        chi_square, chi_pass = chi_square_counts(counts.astype(float), born)
        stage_final = Stage.CLASSICAL_PURE
    else:
        # Refusal is all-or-nothing (the verdict is shared), so no collapse
        # means the run never left the quantum stage.
        frequencies = {}
        chi_square, chi_pass = None, None
        stage_final = stage_mid

    return EnsembleReport(
        stage=stage_final,
        counts={n: int(counts[n]) for n in range(dim)},
        frequencies=frequencies,
        born_targets={n: float(born[n]) for n in range(dim)},
        chi_square=chi_square,
        chi_square_pass=chi_pass,
        decoherence_verdicts=summary,
        refused=refused,
        n_copies=spec.n_copies,
        stage_sequence=(stage_initial, stage_mid, stage_final),
        outcomes=tuple(outcomes) if keep_outcomes else None,
    )
