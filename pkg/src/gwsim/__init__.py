"""State-vector simulator for a three-laboratory GHZ experiment with nested
observers, frame-dependent measurement schedules, and single-outcome
interpretation models."""

from .measurement import (
    MeasurementModel,
    Observable,
    custom_model,
    distinguishability_report,
    distribution,
    haar_random_unitary,
    ideal_von_neumann,
    measure,
    outsider_observable,
    door_observable,
    per_site_model,
)
from .models import (
    InterpretationModel,
    RunReport,
    erasure_experiment,
    nonideal_sweep,
    run_model,
)
from .qmath import MixedState, Operator, StateVector
from .scenario import (
    OutcomeAssignment,
    ParityConstraint,
    Schedule,
    build_schedule,
    collect_constraints,
    enumerate_assignments,
    evolve_to,
    order_events,
    standard_frames,
    support_constraint,
)
from .spacetime import (
    Frame,
    GeometrySpec,
    SpacetimePoint,
    boost_for_simultaneity,
    frame_time,
    interval,
    standard_geometry,
    validate_geometry,
)
from .systems import SpinAxis, LabLabel, expand_in_basis, ghz_state, initial_scenario_state, spin_state

__version__ = "0.1.0"

__all__ = [
    "Frame",
    "GeometrySpec",
    "InterpretationModel",
    "LabLabel",
    "MeasurementModel",
    "MixedState",
    "Observable",
    "Operator",
    "OutcomeAssignment",
    "ParityConstraint",
    "RunReport",
    "Schedule",
    "SpacetimePoint",
    "SpinAxis",
    "StateVector",
    "boost_for_simultaneity",
    "build_schedule",
    "collect_constraints",
    "custom_model",
    "distinguishability_report",
    "distribution",
    "door_observable",
    "enumerate_assignments",
    "erasure_experiment",
    "evolve_to",
    "expand_in_basis",
    "frame_time",
    "ghz_state",
    "haar_random_unitary",
    "ideal_von_neumann",
    "initial_scenario_state",
    "interval",
    "measure",
    "nonideal_sweep",
    "order_events",
    "outsider_observable",
    "per_site_model",
    "run_model",
    "spin_state",
    "standard_frames",
    "standard_geometry",
    "support_constraint",
    "validate_geometry",
]
