"""Dense complex linear algebra over a fixed tensor-factor layout.

Every state in the simulator is a normalized complex vector over an ordered
list of named factors (three 3-level laboratory registers L, M, N and three
spin-1/2 electrons A, B, C). All values are immutable after construction and
all operations are pure functions, so everything here is safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod

import numpy as np

# Known factor names and their Hilbert-space dimensions. Labs are 3-level
# (ready / recorded-up / recorded-down), electrons are spin-1/2.
FACTOR_DIMS = {"L": 3, "M": 3, "N": 3, "A": 2, "B": 2, "C": 2}

# One canonical factor order for the full six-system scenario; all basis-index
# arithmetic is row-major over this order.
CANONICAL_ORDER = ("L", "A", "M", "B", "N", "C")

UNITARY_TOL = 1e-10
NORM_TOL = 1e-10


class LayoutError(ValueError):
    """Raised for malformed layouts or operations across mismatched layouts."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FactorLayout:
    """Ordered list of named tensor factors."""

    names: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise LayoutError(f"duplicate factor names in {self.names}")
        for name in self.names:
            if name not in FACTOR_DIMS:
                raise LayoutError(f"unknown factor {name!r}; expected one of {sorted(FACTOR_DIMS)}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(FACTOR_DIMS[n] for n in self.names)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise LayoutError(f"factor {name!r} not in layout {self.names}") from None

    def axes(self, names) -> tuple[int, ...]:
        return tuple(self.axis(n) for n in names)

    def concat(self, other: "FactorLayout") -> "FactorLayout":
        overlap = set(self.names) & set(other.names)
        if overlap:
            raise LayoutError(f"duplicate factor name {sorted(overlap)} in tensor product")
        return FactorLayout(self.names + other.names)


def layout(*names: str) -> FactorLayout:
    return FactorLayout(tuple(names))


CANONICAL_LAYOUT = layout(*CANONICAL_ORDER)


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector over a factor layout (row-major basis order)."""

    layout: FactorLayout
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.dim:
            raise LayoutError(
                f"amplitude length {amps.size} does not match layout dimension {self.layout.dim}"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("non-finite amplitude")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def dim(self) -> int:
        return self.layout.dim

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor (read-only view)."""
        return self.amplitudes.reshape(self.layout.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class Operator:
    """Dense square matrix acting on the listed factors (row-major)."""

    matrix: np.ndarray = field(repr=False)
    layout: FactorLayout | None = None

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"operator matrix must be square, got shape {mat.shape}")
        if self.layout is not None and self.layout.dim != mat.shape[0]:
            raise LayoutError(
                f"matrix dimension {mat.shape[0]} does not match layout dimension {self.layout.dim}"
            )
        object.__setattr__(self, "matrix", _readonly(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.layout)


@dataclass(frozen=True)
class MixedState:
    """Explicit weighted ensemble of pure states (all on one layout)."""

    components: tuple[tuple[float, StateVector], ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixed state needs at least one component")
        weights = [w for w, _ in self.components]
        if any(w < -1e-12 or w > 1 + 1e-12 for w in weights):
            raise ValueError(f"weights must lie in [0, 1], got {weights}")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(weights)}")
        layouts = {sv.layout for _, sv in self.components}
        if len(layouts) != 1:
            raise LayoutError("mixed-state components must share one layout")

    @property
    def layout(self) -> FactorLayout:
        return self.components[0][1].layout


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product; the result's layout is the concatenation of the inputs'."""
    return StateVector(a.layout.concat(b.layout), np.kron(a.amplitudes, b.amplitudes))


def inner(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>, conjugate-linear in ``a``."""
    if a.layout != b.layout:
        raise LayoutError(f"layout mismatch: {a.layout.names} vs {b.layout.names}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def apply_local(op: Operator, targets, state: StateVector) -> StateVector:
    """Apply ``op`` on the named target factors, identity elsewhere.

    ``targets`` is an ordered list of factor names; ``op`` must act on the
    row-major product space of exactly those factors.
    """
    targets = tuple(targets)
    axes = state.layout.axes(targets)
    target_dim = prod(FACTOR_DIMS[n] for n in targets)
    if op.dim != target_dim:
        raise LayoutError(
            f"operator dimension {op.dim} does not match target dimension {target_dim} for {targets}"
        )
    k = len(axes)
    psi = np.moveaxis(state.tensor_view(), axes, range(k))
    front, rest = psi.shape[:k], psi.shape[k:]
    psi = op.matrix @ psi.reshape(target_dim, -1)
    psi = np.moveaxis(psi.reshape(front + rest), range(k), axes)
    return StateVector(state.layout, psi.reshape(-1))


def permute_factors(state: StateVector, new_order) -> StateVector:
    """Reorder the factor axes; amplitudes are re-indexed accordingly."""
    new_order = tuple(new_order)
    if sorted(new_order) != sorted(state.layout.names):
        raise LayoutError(f"{new_order} is not a permutation of {state.layout.names}")
    perm = state.layout.axes(new_order)
    psi = np.transpose(state.tensor_view(), perm)
    return StateVector(FactorLayout(new_order), psi.reshape(-1))


def check_unitary(op: Operator, tol: float = UNITARY_TOL) -> bool:
    """True iff max |U†U - I| < tol."""
    gram = op.matrix.conj().T @ op.matrix
    return bool(np.max(np.abs(gram - np.eye(op.dim))) < tol)


def reduced_density(state: StateVector, keep) -> np.ndarray:
    """Reduced density matrix over the named factors (traced over the rest)."""
    keep = tuple(keep)
    axes = state.layout.axes(keep)
    keep_dim = prod(FACTOR_DIMS[n] for n in keep)
    psi = np.moveaxis(state.tensor_view(), axes, range(len(axes))).reshape(keep_dim, -1)
    return psi @ psi.conj().T


@dataclass(frozen=True)
class BasisGroup:
    """A labeled orthonormal family of vectors on a group of factors.

    ``vectors`` holds one column per label in the row-major product space of
    ``factors``. The columns need not span the group (a strict subspace models
    measurements whose remaining outcomes never occur); orthonormality is
    enforced at construction.
    """

    factors: tuple[str, ...]
    labels: tuple[int, ...]
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        vecs = np.asarray(self.vectors, dtype=complex)
        dim = prod(FACTOR_DIMS[n] for n in self.factors)
        if vecs.shape != (dim, len(self.labels)):
            raise LayoutError(
                f"expected vectors of shape {(dim, len(self.labels))}, got {vecs.shape}"
            )
        gram = vecs.conj().T @ vecs
        if np.max(np.abs(gram - np.eye(len(self.labels)))) > 1e-9:
            raise ValueError("basis-group columns must be orthonormal")
        object.__setattr__(self, "vectors", _readonly(vecs))


def grouped_amplitudes(state: StateVector, groups) -> tuple[np.ndarray, int]:
    """Contract each group's labeled vectors against the state.

    Returns ``(amps, spectator_dim)`` where ``amps`` has one axis per group
    (indexed by label position) plus a final spectator axis collecting all
    factors not covered by any group. ``|amps[i, j, ..., :]|²`` summed over the
    spectator axis is the Born probability of the joint labeled outcome.
    """
    groups = list(groups)
    covered: list[str] = []
    for g in groups:
        covered.extend(g.factors)
    if len(set(covered)) != len(covered):
        raise LayoutError("basis groups overlap on factors")
    spectators = [n for n in state.layout.names if n not in covered]
    order = tuple(n for g in groups for n in g.factors) + tuple(spectators)
    psi = permute_factors(state, order).amplitudes
    group_dims = [prod(FACTOR_DIMS[n] for n in g.factors) for g in groups]
    spec_dim = prod(FACTOR_DIMS[n] for n in spectators) if spectators else 1
    psi = psi.reshape(tuple(group_dims) + (spec_dim,))
    for i, g in enumerate(groups):
        psi = np.moveaxis(np.tensordot(g.vectors.conj().T, psi, axes=([1], [i])), 0, i)
    return psi, spec_dim
