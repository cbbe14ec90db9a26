"""Two-stage projective measurement simulator.

A small meter system couples, von Neumann style, to the coarse-grained
center-of-mass phase space of a condensate. Sector-dependent phases
dephase the meter (non-selective measurement); seeded gauge events then
read one outcome per copy with Born-rule statistics.
"""

from .composite import (
    CompositeState,
    Frame,
    InteractionConfig,
    ReducedMeterDensity,
    evolve,
    offdiagonal_suppression,
    prepare_product_state,
    reduce_to_meter,
    to_lab_frame,
    to_rearranged_frame,
)
from .decoherence import (
    DecoherenceVerdict,
    SuperselectedObservable,
    decoherence_verdict,
    expectation,
    generator_basis,
    interference_cross_term,
    is_classical_mixed,
    meter_interference_decomposition,
)
from .ensemble import (
    EnsembleReport,
    EnsembleSpec,
    Stage,
    VerdictSummary,
    born_statistics,
    chi_square_counts,
    classify_stage,
    run_pipeline,
)
from .errors import (
    ContractViolationError,
    DegenerateProfileError,
    DimensionError,
    GoldmeterError,
    ScenarioError,
    StatisticsError,
)
from .eventreading import (
    GaugeEvent,
    ReadingOutcome,
    equivalence_test,
    gauge_phase,
    read_event,
)
from .scenario import Scenario, load_scenario, parse_scenario, resolved_dict
from .sectors import (
    AmplitudeProfile,
    CommutationReport,
    CompartmentSpec,
    EventWeights,
    GaussianProfile,
    PointProfile,
    SectorGrid,
    SectorLabel,
    TableProfile,
    UniformProfile,
    build_grid,
    event_weights,
    sample_velocity,
    verify_commuting_redefinition,
)
from .serialize import load_state_snapshot, save_state_snapshot
from .statespace import (
    DiagonalUnitary,
    MeterBasis,
    MeterState,
    apply_diagonal_unitary,
    global_phase_equivalent,
    inner_product,
    meter_state,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
