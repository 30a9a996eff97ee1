"""The six-event schedule and its frame-dependent analysis.

Three sealed labs (A, B, C) each measure their electron's z-spin at time t1;
an outsider then measures each whole lab+electron pair in the recorded-X
basis at t2. Cross-lab events are spacelike separated, so inertial frames
disagree on their order. For a given frame, events group into *rounds* of
simultaneous measurements; evolving the initial state unitarily up to a round
and expanding it in that round's outcome basis tells us which outcome tuples
are possible at all (have nonzero Born weight).

Whenever every possible tuple of a round shares a single product parity, the
round yields a ParityConstraint. Collecting these over the rest frame and the
three tilted frames yields four constraints over the six outcome slots that
no assignment of ±1 values satisfies — the frame-by-frame form of the GHZ
contradiction, obtained here by brute force.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .measurement import MeasurementModel
from .qmath import StateVector, apply_local
from .spacetime import (
    Frame,
    GeometrySpec,
    REST_FRAME,
    SpacetimePoint,
    boost_for_simultaneity,
    frame_time,
    point,
    standard_geometry,
    validate_geometry,
)
from .systems import (
    SITE_FACTORS,
    SUPPORT_EPS,
    BasisGroup,
    SpinAxis,
    SupportEntry,
    initial_scenario_state,
    spin_basis,
    support_table,
)

import numpy as np

# Frame times closer than this (scaled by max(1, |t|)) fall in the same round.
ROUND_TOL = 1e-9

# One outcome slot per event: the friend's z-record and the outsider's
# X-outcome at each site.
CANONICAL_SLOTS = ("z_A", "z_B", "z_C", "x_A", "x_B", "x_C")

FRAME_NAMES = ("sigma", "sigma_p", "sigma_pp", "sigma_ppp")


@dataclass(frozen=True)
class MeasurementEvent:
    """One measurement: a friend's z-spin recording or an outsider's
    whole-pair X measurement."""

    id: str
    site: str
    kind: str  # "friend_z" | "outsider_x"
    location: SpacetimePoint

    @property
    def targets(self) -> tuple[str, str]:
        """Factors the event acts on (the lab register and its electron)."""
        return SITE_FACTORS[self.site]

    @property
    def slot(self) -> str:
        prefix = "z" if self.kind == "friend_z" else "x"
        return f"{prefix}_{self.site}"


@dataclass(frozen=True)
class Schedule:
    geometry: GeometrySpec
    events: tuple[MeasurementEvent, ...]
    model: MeasurementModel

    def event(self, event_id: str) -> MeasurementEvent:
        for ev in self.events:
            if ev.id == event_id:
                return ev
        raise KeyError(f"no event {event_id!r}")


def build_schedule(side: float, tau: float, model: MeasurementModel) -> Schedule:
    """Standard arrangement: friends stamped at t1, outsiders at t2.

    The events really occupy the intervals (t0,t1) and (t1,t2); only their
    completion order matters for pre-measurement states, so completion times
    serve as the event times.
    """
    geometry = standard_geometry(side, tau)
    failed = [r.name for r in validate_geometry(geometry) if not r.passed]
    if failed:
        raise ValueError(f"geometry checks failed: {', '.join(failed)}")
    events = []
    for site in "ABC":
        pos = tuple(geometry.position(site))
        events.append(
            MeasurementEvent(f"friend_{site}", site, "friend_z", point(geometry.t1, pos))
        )
        events.append(
            MeasurementEvent(f"outsider_{site}", site, "outsider_x", point(geometry.t2, pos))
        )
    return Schedule(geometry, tuple(events), model)


def standard_frames(geometry: GeometrySpec) -> dict[str, Frame]:
    """The rest frame plus the three frames tilting one lab's inside
    measurement into simultaneity with the start of the other two."""
    frames = {"sigma": REST_FRAME}
    for name, site, others in (
        ("sigma_p", "A", "BC"),
        ("sigma_pp", "B", "AC"),
        ("sigma_ppp", "C", "AB"),
    ):
        frames[name] = boost_for_simultaneity(
            point(geometry.t1, tuple(geometry.position(site))),
            point(geometry.t0, tuple(geometry.position(others[0]))),
            point(geometry.t0, tuple(geometry.position(others[1]))),
        )
    return frames


def order_events(s: Schedule, f: Frame) -> list[tuple[MeasurementEvent, ...]]:
    """Rounds of simultaneous events, ordered by the frame's time coordinate.

    Within a round, events are sorted by id for determinism; a round whose
    events touched overlapping factors would be ill-defined, which valid
    schedules rule out (defensively checked).
    """
    timed = sorted(
        ((frame_time(f, ev.location), ev) for ev in s.events),
        key=lambda te: (te[0], te[1].id),
    )
    rounds: list[list[MeasurementEvent]] = []
    last_t = None
    for t, ev in timed:
        if last_t is not None and abs(t - last_t) <= ROUND_TOL * max(1.0, abs(t)):
            rounds[-1].append(ev)
        else:
            rounds.append([ev])
        last_t = t
    out = []
    for group in rounds:
        used: set[str] = set()
        for ev in group:
            if used & set(ev.targets):
                raise ValueError(
                    f"simultaneous events overlap on factors: {[e.id for e in group]}"
                )
            used |= set(ev.targets)
        out.append(tuple(sorted(group, key=lambda e: e.id)))
    return out


def evolve_to(s: Schedule, f: Frame, round_index: int) -> StateVector:
    """State just before the given (1-based) round in the frame's ordering.

    Purely unitary: friend events of strictly earlier rounds contribute their
    lab-pair unitaries; outsider events contribute nothing (they are the
    measurements whose pre-state this is). Frame changes act as identity on
    amplitudes — the tilted frames can be made arbitrarily slow, and state
    supports are frame-transport invariant either way.
    """
    rounds = order_events(s, f)
    if not 1 <= round_index <= len(rounds):
        raise ValueError(f"round index must be in 1..{len(rounds)}, got {round_index}")
    state = initial_scenario_state()
    for rnd in rounds[: round_index - 1]:
        for ev in rnd:
            if ev.kind == "friend_z":
                state = apply_local(s.model.unitary(ev.site), ev.targets, state)
    return state


@dataclass(frozen=True)
class ParityConstraint:
    """The product of the named slots' outcomes must equal required_product."""

    slots: tuple[str, ...]
    required_product: int

    def __post_init__(self):
        if not self.slots:
            raise ValueError("constraint needs at least one slot")
        if self.required_product not in (+1, -1):
            raise ValueError(f"required product must be ±1, got {self.required_product}")
        object.__setattr__(self, "slots", tuple(sorted(self.slots, key=_slot_key)))

    def satisfied_by(self, assignment: "OutcomeAssignment") -> bool:
        product = 1
        for slot in self.slots:
            product *= assignment.value(slot)
        return product == self.required_product

    def __str__(self):
        return "·".join(self.slots) + f" = {self.required_product:+d}"


def _slot_key(slot: str) -> tuple[str, str]:
    kind, site = slot.split("_")
    return (site, kind)


@dataclass(frozen=True)
class OutcomeAssignment:
    """±1 value per outcome slot (all six slots when produced by a model run)."""

    values: tuple[tuple[str, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "values", tuple(sorted(self.values, key=lambda sv: _slot_key(sv[0])))
        )
        for slot, sign in self.values:
            if sign not in (+1, -1):
                raise ValueError(f"slot {slot}: value must be ±1, got {sign}")

    def value(self, slot: str) -> int:
        for s, v in self.values:
            if s == slot:
                return v
        raise KeyError(f"no slot {slot!r}")

    def as_dict(self) -> dict[str, int]:
        return dict(self.values)


def round_slots(round_events) -> tuple[str, ...]:
    """Outcome slots of a round, in the order support entries label them."""
    return tuple(sorted((ev.slot for ev in round_events), key=_slot_key))


def _event_basis_group(ev: MeasurementEvent, model: MeasurementModel) -> BasisGroup:
    if ev.kind == "friend_z":
        # The friend's record mirrors the electron's z-spin; before the pair
        # unitary runs, that outcome is just the electron's z value.
        return BasisGroup((ev.targets[1],), (+1, -1), spin_basis(SpinAxis.Z))
    if ev.kind == "outsider_x":
        vectors = np.column_stack(
            [model.pair_x_state(ev.site, +1), model.pair_x_state(ev.site, -1)]
        )
        return BasisGroup(ev.targets, (+1, -1), vectors)
    raise ValueError(f"unknown event kind {ev.kind!r}")


def support_constraint(
    state: StateVector,
    round_events,
    model: MeasurementModel,
    eps: float = SUPPORT_EPS,
) -> tuple[list[SupportEntry], ParityConstraint | None]:
    """Possible outcome tuples of a round, and their shared parity if any.

    An outcome tuple is possible iff its term in the round's eigenbasis
    expansion of ``state`` has |coefficient|² above ``eps``. Factors no event
    of the round touches are spectators, summed over. When every surviving
    tuple has the same product of outcomes, that parity is a constraint any
    single-outcome account of the round must obey.
    """
    events = sorted(round_events, key=lambda ev: _slot_key(ev.slot))
    groups = [_event_basis_group(ev, model) for ev in events]
    entries, _residual = support_table(state, groups, eps)
    slots = tuple(ev.slot for ev in events)
    parities = {entry.product for entry in entries}
    constraint = None
    if entries and len(parities) == 1:
        constraint = ParityConstraint(slots, parities.pop())
    return entries, constraint


def collect_constraints(s: Schedule, frames) -> list[ParityConstraint]:
    """Parity constraints from every round of every frame, deduplicated.

    Pass the four standard frames to reproduce the full contradiction; any
    subset yields the constraints visible from those frames alone.
    """
    if isinstance(frames, dict):
        frames = list(frames.values())
    found: dict[tuple, ParityConstraint] = {}
    for frame in frames:
        rounds = order_events(s, frame)
        for k, rnd in enumerate(rounds, start=1):
            state = evolve_to(s, frame, k)
            _, constraint = support_constraint(state, rnd, s.model)
            if constraint is not None:
                found.setdefault((constraint.slots, constraint.required_product), constraint)
    return list(found.values())


def enumerate_assignments(constraints) -> list[OutcomeAssignment]:
    """All assignments of ±1 to the six slots satisfying every constraint."""
    out = []
    for signs in itertools.product((+1, -1), repeat=len(CANONICAL_SLOTS)):
        assignment = OutcomeAssignment(tuple(zip(CANONICAL_SLOTS, signs)))
        if all(c.satisfied_by(assignment) for c in constraints):
            out.append(assignment)
    return out
