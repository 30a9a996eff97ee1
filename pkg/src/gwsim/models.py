"""Single-outcome interpretation models as Monte Carlo experiments.

The frame analysis shows no assignment of definite outcomes satisfies all
four parity constraints. These models make that concrete: each posits a
preferred frame in which outcomes actually happen, draws complete outcome
assignments trial by trial, and tallies how the constraints fare.

* ``round_born`` — each round's joint outcome tuple is sampled from the
  Born weights of the unitarily evolved pre-round state in the preferred
  frame; rounds are independent. The preferred frame's own constraints then
  hold in every trial, and the price is paid elsewhere: each constraint
  belonging to another frame is violated in half the trials.
* ``sequential_collapse`` — textbook projective collapse applied event by
  event in the preferred frame's order. Collapse after the friends' round
  destroys the three-way coherence, so even the preferred frame's outsider
  parity fails in half the trials.

Also here: the single-lab erasure experiment (an outsider's measurement can
flip what the lab's record says afterwards) and the sweep re-deriving the
contradiction under random non-ideal measurement devices.

All randomness flows from a master seed through counter-based per-trial
streams, so reports are reproducible and trials are order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurement import (
    MeasurementModel,
    haar_random_unitary,
    ideal_von_neumann,
    measure,
    distribution,
    door_observable,
    outsider_observable,
    per_site_model,
    spin_observable,
)
from .qmath import StateVector, apply_local, layout
from .scenario import (
    OutcomeAssignment,
    ParityConstraint,
    Schedule,
    build_schedule,
    collect_constraints,
    enumerate_assignments,
    evolve_to,
    order_events,
    round_slots,
    standard_frames,
    support_constraint,
)
from .spacetime import Frame
from .systems import SITE_FACTORS, LabLabel, SpinAxis, lab_vector, spin_vector

MODES = ("round_born", "sequential_collapse")


@dataclass(frozen=True)
class InterpretationModel:
    """How single outcomes are supposed to come about: sampling mode plus the
    frame whose ordering is taken as the real one."""

    mode: str
    preferred: Frame

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, split off the master seed."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
    )


@dataclass(frozen=True)
class RunReport:
    """Per-trial assignments and constraint tallies for one model run."""

    mode: str
    trials: int
    seed: int
    constraints: tuple[ParityConstraint, ...]
    preferred_mask: tuple[bool, ...]  # True where the constraint is the preferred frame's
    assignments: tuple[OutcomeAssignment, ...]
    violation_counts: tuple[int, ...]
    nonpreferred_violated_flags: tuple[bool, ...]  # per trial: ≥1 non-preferred violated

    @property
    def trials_violating_nonpreferred(self) -> int:
        return sum(self.nonpreferred_violated_flags)

    def violation_rate(self, index: int) -> float:
        return self.violation_counts[index] / self.trials if self.trials else 0.0


def born_violation_check(assignment: OutcomeAssignment, constraints) -> tuple[bool, ...]:
    """Per-constraint flag: True where the assignment violates it."""
    return tuple(not c.satisfied_by(assignment) for c in constraints)


def _round_born_tables(s: Schedule, preferred: Frame):
    """Per round: outcome slots, label tuples, and Born probabilities."""
    tables = []
    for k, rnd in enumerate(order_events(s, preferred), start=1):
        state = evolve_to(s, preferred, k)
        entries, _ = support_constraint(state, rnd, s.model)
        slots = round_slots(rnd)
        labels = [e.labels for e in entries]
        probs = np.array([e.probability for e in entries])
        tables.append((slots, labels, probs / probs.sum()))
    return tables


def run_model(s: Schedule, m: InterpretationModel, trials: int, seed: int) -> RunReport:
    """Draw ``trials`` complete outcome assignments and tally violations.

    Constraints are those visible from all four standard frames; the
    preferred mask marks the ones derivable in ``m.preferred`` alone.
    """
    if trials < 0:
        raise ValueError(f"trials must be ≥ 0, got {trials}")
    frames = standard_frames(s.geometry)
    constraints = tuple(collect_constraints(s, frames))
    preferred_keys = {
        (c.slots, c.required_product) for c in collect_constraints(s, [m.preferred])
    }
    preferred_mask = tuple(
        (c.slots, c.required_product) in preferred_keys for c in constraints
    )

    if m.mode == "round_born":
        sampler = _round_born_sampler(s, m.preferred)
    else:
        sampler = _sequential_collapse_sampler(s, m.preferred)

    assignments = []
    violation_counts = [0] * len(constraints)
    flags = []
    for trial in range(trials):
        assignment = sampler(trial_rng(seed, trial))
        assignments.append(assignment)
        violated = born_violation_check(assignment, constraints)
        any_nonpreferred = False
        for i, bad in enumerate(violated):
            if bad:
                violation_counts[i] += 1
                if not preferred_mask[i]:
                    any_nonpreferred = True
        flags.append(any_nonpreferred)

    return RunReport(
        mode=m.mode,
        trials=trials,
        seed=seed,
        constraints=constraints,
        preferred_mask=preferred_mask,
        assignments=tuple(assignments),
        violation_counts=tuple(violation_counts),
        nonpreferred_violated_flags=tuple(flags),
    )


def _round_born_sampler(s: Schedule, preferred: Frame):
    tables = _round_born_tables(s, preferred)

    def draw(rng: np.random.Generator) -> OutcomeAssignment:
        values = []
        for slots, labels, probs in tables:
            idx = rng.choice(len(probs), p=probs)
            values.extend(zip(slots, labels[idx]))
        return OutcomeAssignment(tuple(values))

    return draw


def _sequential_collapse_sampler(s: Schedule, preferred: Frame):
    rounds = order_events(s, preferred)
    z_obs = {
        site: spin_observable(SpinAxis.Z, electron)
        for site, (_, electron) in SITE_FACTORS.items()
    }
    x_obs = {site: outsider_observable(s.model, site) for site in SITE_FACTORS}
    initial = evolve_to(s, preferred, 1)

    def draw(rng: np.random.Generator) -> OutcomeAssignment:
        state = initial
        values = []
        for rnd in rounds:
            for ev in rnd:
                if ev.kind == "friend_z":
                    sign, state = measure(z_obs[ev.site], state, rng)
                    state = apply_local(s.model.unitary(ev.site), ev.targets, state)
                else:
                    sign, state = measure(x_obs[ev.site], state, rng)
                values.append((ev.slot, int(round(sign))))
        return OutcomeAssignment(tuple(values))

    return draw


@dataclass(frozen=True)
class ErasureReport:
    """Single-lab run: record a z-up electron, let an outsider measure the
    pair, then open the door and read the record."""

    trials: int
    seed: int
    skip_pair_x: bool
    pair_x_counts: dict
    door_counts: dict
    down_frequency: float
    exact_down_probability: float


def erasure_experiment(trials: int, seed: int, skip_pair_x: bool = False) -> ErasureReport:
    """The record is RecordedUp with certainty — until the outsider measures.

    The electron starts in |+1_z>, so the lab's record after the device runs
    is deterministically RecordedUp. An outsider X-measurement of the pair
    collapses it onto (|+1Z> ± |-1Z>)/√2, either of which shows RecordedDown
    behind the door half the time: the outsider has erased the record.
    """
    model = ideal_von_neumann()
    start = StateVector(
        layout("L", "A"),
        np.kron(lab_vector(LabLabel.READY), spin_vector(SpinAxis.Z, +1)),
    )
    recorded = apply_local(model.unitary("A"), ("L", "A"), start)
    pair_x = outsider_observable(model)
    door = door_observable(model)

    pair_x_counts = {+1: 0, -1: 0}
    door_counts = {+1: 0, -1: 0, 0: 0}
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        state = recorded
        if not skip_pair_x:
            sign, state = measure(pair_x, state, rng)
            pair_x_counts[int(round(sign))] += 1
        outcome, _ = measure(door, state, rng)
        door_counts[int(round(outcome))] += 1

    if skip_pair_x:
        exact_down = distribution(door, recorded).probability(-1.0)
    else:
        exact_down = 0.0
        x_dist = distribution(pair_x, recorded)
        for value, prob in x_dist.as_dict().items():
            if prob < 1e-15:
                continue
            projected = apply_local(pair_x.projector(value), pair_x.targets, recorded)
            post = StateVector(recorded.layout, projected.amplitudes / np.sqrt(prob))
            exact_down += prob * distribution(door, post).probability(-1.0)

    return ErasureReport(
        trials=trials,
        seed=seed,
        skip_pair_x=skip_pair_x,
        pair_x_counts=pair_x_counts,
        door_counts=door_counts,
        down_frequency=door_counts[-1] / trials if trials else 0.0,
        exact_down_probability=float(exact_down),
    )


CANONICAL_CONSTRAINT_KEYS = frozenset(
    {
        (("x_A", "x_B", "x_C"), -1),
        (("x_A", "z_B", "z_C"), +1),
        (("z_A", "x_B", "z_C"), +1),
        (("z_A", "z_B", "x_C"), +1),
    }
)


@dataclass(frozen=True)
class SweepModelResult:
    index: int
    kind: str  # "ideal" | "haar"
    constraints_match: bool
    satisfying_count: int
    support_ok: bool

    @property
    def passed(self) -> bool:
        return self.constraints_match and self.satisfying_count == 0 and self.support_ok


@dataclass(frozen=True)
class SweepReport:
    n_models: int
    seed: int
    results: tuple[SweepModelResult, ...]

    @property
    def n_passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def all_passed(self) -> bool:
        return self.n_passed == self.n_models


def nonideal_sweep(
    n_models: int, seed: int, side: float = 10.0, tau: float = 1.0
) -> SweepReport:
    """Re-derive the contradiction under imperfect measurement devices.

    Model 0 is the ideal baseline; each further model draws an independent
    Haar-random 6-dim unitary per lab. For every model the four collected
    constraints, the empty satisfying set, and the 1/4 support magnitudes of
    each constraint-bearing round must all come out unchanged.
    """
    if n_models < 1:
        raise ValueError(f"need at least one model, got {n_models}")
    results = []
    for index in range(n_models):
        if index == 0:
            model, kind = ideal_von_neumann(), "ideal"
        else:
            rng = trial_rng(seed, index)
            model = per_site_model(*(haar_random_unitary(6, rng) for _ in range(3)))
            kind = "haar"
        schedule = build_schedule(side, tau, model)
        frames = standard_frames(schedule.geometry)

        support_ok = True
        keys = set()
        for frame in frames.values():
            rounds = order_events(schedule, frame)
            for k, rnd in enumerate(rounds, start=1):
                state = evolve_to(schedule, frame, k)
                entries, constraint = support_constraint(state, rnd, schedule.model)
                if constraint is None:
                    continue
                keys.add((constraint.slots, constraint.required_product))
                if any(abs(e.probability - 0.25) > 1e-9 for e in entries):
                    support_ok = False

        constraints_match = keys == set(CANONICAL_CONSTRAINT_KEYS)
        constraints = [ParityConstraint(slots, par) for slots, par in sorted(keys)]
        satisfying = len(enumerate_assignments(constraints)) if constraints else 64
        results.append(
            SweepModelResult(index, kind, constraints_match, satisfying, support_ok)
        )
    return SweepReport(n_models=n_models, seed=seed, results=tuple(results))
