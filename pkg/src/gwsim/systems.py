"""Catalog of named physical states and basis expansions.

Spin eigenstates per axis, the 3-level laboratory register states, the
three-electron GHZ state, and support extraction (which outcome tuples carry
nonzero weight) for product-basis expansions.

Phase conventions, fixed once and verified against a symbolic oracle in the
test suite:

    |+1_z> = (1, 0)            |-1_z> = (0, 1)
    |±1_x> = (|+1_z> ± |-1_z>)/√2
    |±1_y> = (|+1_z> ∓ i|-1_z>)/√2

The y convention carries the flipped sign on purpose: it is the one for which
the GHZ state's x-basis support is the odd-parity (product −1) set while every
mixed x/z expansion is even-parity, which is the correlation structure the
whole scenario is built on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qmath import (
    BasisGroup,
    StateVector,
    grouped_amplitudes,
    layout,
    permute_factors,
    tensor,
)

SQRT_HALF = np.sqrt(0.5)

# |amplitude|² below this is treated as an impossible outcome (support cutoff).
SUPPORT_EPS = 1e-9

LAB_FACTORS = ("L", "M", "N")
ELECTRON_FACTORS = ("A", "B", "C")
# Each site pairs one lab register with the electron it measures.
SITE_FACTORS = {"A": ("L", "A"), "B": ("M", "B"), "C": ("N", "C")}


class SpinAxis(Enum):
    X = "x"
    Y = "y"
    Z = "z"


class LabLabel(Enum):
    READY = 0
    RECORDED_UP = 1
    RECORDED_DOWN = 2


_SPIN_VECTORS = {
    (SpinAxis.Z, +1): np.array([1.0, 0.0], dtype=complex),
    (SpinAxis.Z, -1): np.array([0.0, 1.0], dtype=complex),
    (SpinAxis.X, +1): np.array([SQRT_HALF, SQRT_HALF], dtype=complex),
    (SpinAxis.X, -1): np.array([SQRT_HALF, -SQRT_HALF], dtype=complex),
    (SpinAxis.Y, +1): np.array([SQRT_HALF, -1j * SQRT_HALF], dtype=complex),
    (SpinAxis.Y, -1): np.array([SQRT_HALF, 1j * SQRT_HALF], dtype=complex),
}


def spin_vector(axis: SpinAxis, sign: int) -> np.ndarray:
    """Raw length-2 amplitude vector of a spin eigenstate."""
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    return _SPIN_VECTORS[(axis, sign)].copy()


def spin_state(axis: SpinAxis, sign: int, factor: str = "A") -> StateVector:
    """Spin eigenstate of one electron factor."""
    return StateVector(layout(factor), spin_vector(axis, sign))


def spin_basis(axis: SpinAxis) -> np.ndarray:
    """2x2 matrix with the +1 and -1 eigenvectors of ``axis`` as columns."""
    return np.column_stack([spin_vector(axis, +1), spin_vector(axis, -1)])


def lab_vector(label: LabLabel) -> np.ndarray:
    vec = np.zeros(3, dtype=complex)
    vec[label.value] = 1.0
    return vec


def lab_state(label: LabLabel, factor: str = "L") -> StateVector:
    """Basis state of one 3-level laboratory register."""
    return StateVector(layout(factor), lab_vector(label))


def ghz_state() -> StateVector:
    """Three-electron GHZ state √½(|+1_y>^⊗3 − i|-1_y>^⊗3) on factors A, B, C."""
    yp = spin_vector(SpinAxis.Y, +1)
    ym = spin_vector(SpinAxis.Y, -1)
    amps = SQRT_HALF * (
        np.kron(np.kron(yp, yp), yp) - 1j * np.kron(np.kron(ym, ym), ym)
    )
    return StateVector(layout("A", "B", "C"), amps)


def initial_scenario_state() -> StateVector:
    """All three labs ready, electrons in the GHZ state, canonical factor order."""
    labs = tensor(
        tensor(lab_state(LabLabel.READY, "L"), lab_state(LabLabel.READY, "M")),
        lab_state(LabLabel.READY, "N"),
    )
    return permute_factors(tensor(labs, ghz_state()), ("L", "A", "M", "B", "N", "C"))


# A BasisSpec maps each measured factor (or factor group) to the basis it is
# expanded in: factor name -> SpinAxis for electrons, or a prebuilt BasisGroup
# for anything else (e.g. the joint lab+electron bases from the measurement
# module).
BasisSpec = dict


@dataclass(frozen=True)
class SupportEntry:
    """One surviving term of an expansion: outcome labels and its coefficient."""

    labels: tuple[int, ...]
    amplitude: complex

    @property
    def probability(self) -> float:
        return abs(self.amplitude) ** 2

    @property
    def product(self) -> int:
        out = 1
        for s in self.labels:
            out *= s
        return out


def _groups_from_spec(state: StateVector, spec: BasisSpec) -> list[BasisGroup]:
    groups: list[BasisGroup] = []
    for key, basis in spec.items():
        if isinstance(basis, BasisGroup):
            groups.append(basis)
        elif isinstance(basis, SpinAxis):
            groups.append(BasisGroup((key,), (+1, -1), spin_basis(basis)))
        else:
            raise TypeError(f"basis for {key!r} must be a SpinAxis or BasisGroup, got {basis!r}")
    return groups


def support_table(
    state: StateVector, groups, eps: float = SUPPORT_EPS
) -> tuple[list[SupportEntry], float]:
    """Support entries over the groups' joint labels, plus leftover weight.

    Factors not covered by any group are spectators: each entry's probability
    is summed over them, and its amplitude is the honest complex coefficient
    when there are no spectators, else √probability with the (ill-defined)
    phase dropped. The residual is the weight outside the labeled subspaces;
    probabilities plus residual always sum to 1 for a normalized state.
    """
    groups = list(groups)
    amps, spec_dim = grouped_amplitudes(state, groups)
    label_sets = [g.labels for g in groups]
    entries: list[SupportEntry] = []
    total = 0.0
    for idx in itertools.product(*(range(len(ls)) for ls in label_sets)):
        if spec_dim == 1:
            amplitude = complex(amps[idx + (0,)])
            prob = abs(amplitude) ** 2
        else:
            prob = float(np.sum(np.abs(amps[idx]) ** 2))
            amplitude = complex(np.sqrt(prob))
        total += prob
        if prob > eps:
            labels = tuple(ls[i] for ls, i in zip(label_sets, idx))
            entries.append(SupportEntry(labels, amplitude))
    return entries, 1.0 - total


def expand_in_basis(state: StateVector, spec: BasisSpec, eps: float = SUPPORT_EPS):
    """Expand ``state`` in the product basis given by ``spec``.

    ``spec`` must cover every factor of the state; amplitudes are then exact
    inner products against the product basis. Entries below the support cutoff
    are dropped (but still counted in the completeness sum, which tests check).
    """
    groups = _groups_from_spec(state, spec)
    covered = {n for g in groups for n in g.factors}
    missing = set(state.layout.names) - covered
    if missing:
        raise ValueError(f"basis spec does not cover factors {sorted(missing)}")
    entries, _residual = support_table(state, groups, eps)
    return entries


def axis_spec(state: StateVector, axes) -> BasisSpec:
    """Convenience: one spin axis per factor, in the state's factor order."""
    axes = list(axes)
    if len(axes) != len(state.layout.names):
        raise ValueError(f"need {len(state.layout.names)} axes, got {len(axes)}")
    return {name: ax for name, ax in zip(state.layout.names, axes)}
