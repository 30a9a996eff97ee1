"""Flat-spacetime geometry of the three-laboratory arrangement.

Two spatial dimensions, units with c = 1, metric signature (+,−,−). The labs
sit at the vertices of an equilateral triangle and are treated as pointlike;
each runs a measurement at time t1 (inside) and one at t2 (outside), with
t2 − t1 = t1 − t0 = tau. Keeping tau smaller than the triangle side makes
every cross-lab pair of measurement events spacelike separated, which is what
lets different inertial frames disagree about their order.

Frames are specified by their boost velocity relative to the rest frame of
the labs. ``boost_for_simultaneity`` constructs the frame in which one lab's
measurement is simultaneous with given events at the other two labs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MAX_SPEED = 1.0 - 1e-12
# Two frame times count as simultaneous within this, scaled by max(1, |t|).
SIMULTANEITY_TOL = 1e-12


@dataclass(frozen=True)
class SpacetimePoint:
    """Event location: time and planar position, c = 1."""

    t: float
    x: tuple[float, float]

    def __post_init__(self):
        if not (math.isfinite(self.t) and all(math.isfinite(c) for c in self.x)):
            raise ValueError(f"non-finite spacetime point ({self.t}, {self.x})")

    @property
    def position(self) -> np.ndarray:
        return np.array(self.x, dtype=float)


def point(t: float, x: tuple[float, float]) -> SpacetimePoint:
    return SpacetimePoint(float(t), (float(x[0]), float(x[1])))


@dataclass(frozen=True)
class Frame:
    """Inertial frame, given by its boost velocity relative to the rest frame."""

    velocity: tuple[float, float]

    def __post_init__(self):
        speed = math.hypot(*self.velocity)
        if speed > MAX_SPEED:
            raise ValueError(f"boost speed {speed} is not subluminal")

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)

    @property
    def gamma(self) -> float:
        return 1.0 / math.sqrt(1.0 - self.speed**2)


REST_FRAME = Frame((0.0, 0.0))


@dataclass(frozen=True)
class GeometrySpec:
    """Lab positions and the three epoch times t0 < t1 < t2.

    Deliberately constructible with invalid values; ``validate_geometry``
    reports (rather than throws) which conditions fail.
    """

    x_a: tuple[float, float]
    x_b: tuple[float, float]
    x_c: tuple[float, float]
    t0: float
    t1: float
    t2: float

    def position(self, site: str) -> np.ndarray:
        return np.array({"A": self.x_a, "B": self.x_b, "C": self.x_c}[site], dtype=float)

    @property
    def side(self) -> float:
        return float(np.linalg.norm(self.position("A") - self.position("B")))


def standard_geometry(side: float, tau: float) -> GeometrySpec:
    """Equilateral triangle of the given side, centered at the origin, with
    lab A on the +y axis; epochs 0, tau, 2·tau.

    Requires 0 < tau < side: each epoch must be shorter than the light travel
    time between labs, or cross-lab measurements stop being spacelike.
    """
    if side <= 0:
        raise ValueError(f"side must be positive, got {side}")
    if not 0 < tau < side:
        raise ValueError(f"need 0 < tau < side for spacelike separation, got tau={tau}, side={side}")
    h = side / math.sqrt(3.0)
    return GeometrySpec(
        x_a=(0.0, h),
        x_b=(-side / 2.0, -h / 2.0),
        x_c=(side / 2.0, -h / 2.0),
        t0=0.0,
        t1=tau,
        t2=2.0 * tau,
    )


def interval(p: SpacetimePoint, q: SpacetimePoint) -> float:
    """Invariant interval (Δt)² − ‖Δx‖²; negative means spacelike."""
    dt = p.t - q.t
    dx = p.position - q.position
    return dt * dt - float(dx @ dx)


def frame_time(f: Frame, p: SpacetimePoint) -> float:
    """Time coordinate of the event in the boosted frame: γ(t − v·x)."""
    v = np.array(f.velocity)
    return f.gamma * (p.t - float(v @ p.position))


def boost_point(f: Frame, p: SpacetimePoint) -> SpacetimePoint:
    """Full Lorentz boost of the event into the frame."""
    v = np.array(f.velocity)
    speed2 = float(v @ v)
    x = p.position
    if speed2 == 0.0:
        return p
    v_dot_x = float(v @ x)
    gamma = f.gamma
    x_new = x + ((gamma - 1.0) / speed2) * v_dot_x * v - gamma * p.t * v
    return SpacetimePoint(gamma * (p.t - v_dot_x), (float(x_new[0]), float(x_new[1])))


def simultaneous(f: Frame, p: SpacetimePoint, q: SpacetimePoint) -> bool:
    tp, tq = frame_time(f, p), frame_time(f, q)
    return abs(tp - tq) <= SIMULTANEITY_TOL * max(1.0, abs(tp), abs(tq))


def boost_for_simultaneity(
    p: SpacetimePoint, q: SpacetimePoint, r: SpacetimePoint
) -> Frame:
    """Frame in which p, q and r share one time coordinate.

    Equal frame times γ(t − v·x) reduce to the linear system
    v·(x_p − x_q) = t_p − t_q, v·(x_p − x_r) = t_p − t_r for the boost
    velocity. Raises if no subluminal velocity solves it (e.g. a timelike
    pair among the arguments).
    """
    dx = np.array([p.position - q.position, p.position - r.position])
    dt = np.array([p.t - q.t, p.t - r.t])
    v, *_ = np.linalg.lstsq(dx, dt, rcond=None)
    if not np.allclose(dx @ v, dt, atol=1e-9 * max(1.0, float(np.max(np.abs(dt))))):
        raise ValueError("events admit no common simultaneity plane")
    speed = float(np.linalg.norm(v))
    if speed > MAX_SPEED:
        raise ValueError(f"simultaneity would require speed {speed} ≥ 1")
    frame = Frame((float(v[0]), float(v[1])))
    for other in (q, r):
        if not simultaneous(frame, p, other):
            raise ValueError("solved boost fails the simultaneity check")
    return frame


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def validate_geometry(spec: GeometrySpec) -> list[CheckResult]:
    """Named checks for the arrangement's separation conditions.

    Failures are reported, not raised, so invalid geometries can be examined.
    """
    results = []
    pos = {s: spec.position(s) for s in "ABC"}
    dists = {
        pair: float(np.linalg.norm(pos[pair[0]] - pos[pair[1]]))
        for pair in ("AB", "BC", "CA")
    }
    mean_side = sum(dists.values()) / 3.0
    tol = 1e-9 * max(1.0, mean_side)
    spread = max(dists.values()) - min(dists.values())
    results.append(
        CheckResult(
            "equilateral",
            spread <= tol,
            f"pairwise distances {dists['AB']:.12g}, {dists['BC']:.12g}, {dists['CA']:.12g}",
        )
    )

    early, late = spec.t1 - spec.t0, spec.t2 - spec.t1
    results.append(
        CheckResult(
            "equal_epochs",
            abs(early - late) <= 1e-9 * max(1.0, abs(early)) and early > 0,
            f"t1−t0 = {early:.12g}, t2−t1 = {late:.12g}",
        )
    )

    results.append(
        CheckResult(
            "epoch_shorter_than_separation",
            early < dists["AB"],
            f"t1−t0 = {early:.12g} vs ‖x_A−x_B‖ = {dists['AB']:.12g}",
        )
    )

    # Every measurement event (friend at t1, outsider at t2) at one lab must
    # be spacelike separated from every measurement event at any other lab.
    worst = -math.inf
    worst_pair = ""
    for labs in ("AB", "BC", "CA"):
        for ta in (spec.t1, spec.t2):
            for tb in (spec.t1, spec.t2):
                s = interval(
                    point(ta, tuple(pos[labs[0]])), point(tb, tuple(pos[labs[1]]))
                )
                if s > worst:
                    worst, worst_pair = s, f"({ta:g},{labs[0]})–({tb:g},{labs[1]})"
    results.append(
        CheckResult(
            "cross_lab_spacelike",
            worst < 0,
            f"largest cross-lab interval {worst:.12g} at {worst_pair}",
        )
    )
    return results
