"""Mixed-radix Hilbert space: pure states over subsystems of unequal dimension.

Flat indexing is row-major with subsystem 0 most significant: the basis ket
|x0 x1 ... x_{n-1}> sits at flat index sum(x_m * stride_m), where stride_m is
the product of the dimensions after position m. Subsystem indices are 0-based
throughout this module.

All values are immutable once constructed and every operation returns new
values, so states and operators are safe to share across threads. The only
stateful object is the caller-supplied random generator.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import backend
from .errors import (
    CapacityLimitError,
    DegenerateStateError,
    DimensionError,
    MeasurementSetError,
)

NORM_TOL = 1e-12        # exact-algebra comparisons
PROB_SUM_TOL = 1e-10    # accumulated probability sums
BRANCH_TOL = 1e-12      # measurement branches below this are impossible
PSD_TOL = 1e-10

DEFAULT_AMPLITUDE_CAP = 100_000_000


def amplitude_cap() -> int:
    """Largest allowed state-vector length; QDC_AMPLITUDE_CAP overrides."""
    raw = os.environ.get("QDC_AMPLITUDE_CAP")
    return int(raw) if raw else DEFAULT_AMPLITUDE_CAP


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered subsystem dimensions; subsystem 0 is the most significant."""

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))
        if not self.dims:
            raise DimensionError("layout needs at least one subsystem")
        if any(d < 2 for d in self.dims):
            raise DimensionError(f"subsystem dimensions must be >= 2, got {self.dims}")
        total = math.prod(self.dims)
        cap = amplitude_cap()
        if total > cap:
            raise CapacityLimitError(
                f"total dimension {total} exceeds the amplitude cap {cap}"
            )

    @cached_property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        strides = []
        acc = 1
        for d in reversed(self.dims):
            strides.append(acc)
            acc *= d
        return tuple(reversed(strides))

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    def flat_index(self, digits: Sequence[int]) -> int:
        """Flat index of the basis ket with the given per-subsystem digits."""
        if len(digits) != len(self.dims):
            raise DimensionError(
                f"ket has {len(digits)} digits for a {len(self.dims)}-subsystem layout"
            )
        flat = 0
        for digit, dim, stride in zip(digits, self.dims, self.strides):
            if not 0 <= digit < dim:
                raise DimensionError(f"ket digit {digit} out of range for dimension {dim}")
            flat += digit * stride
        return flat

    def digits_of(self, flat: int) -> tuple[int, ...]:
        """Per-subsystem digits of a flat basis index."""
        if not 0 <= flat < self.total_dim:
            raise DimensionError(f"flat index {flat} out of range")
        return tuple((flat // s) % d for d, s in zip(self.dims, self.strides))


@dataclass(frozen=True, eq=False)
class MixedRadixState:
    """Unit-norm complex amplitude vector over a :class:`SubsystemLayout`."""

    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1 or amps.shape[0] != self.layout.total_dim:
            raise DimensionError(
                f"amplitude vector of length {amps.shape} does not match "
                f"total dimension {self.layout.total_dim}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise DegenerateStateError(f"state norm {norm} is not 1 within {NORM_TOL}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, digits: Sequence[int]) -> complex:
        """Amplitude of one basis ket, addressed by its digits."""
        return complex(self.amplitudes[self.layout.flat_index(digits)])


@dataclass(frozen=True, eq=False)
class LocalOperator:
    """Square matrix acting on an ordered group of subsystems.

    The matrix row/column basis is ordered with the first listed target most
    significant, mirroring the state's flat-index convention. ``unitary`` and
    ``projector`` flags trigger the corresponding algebraic checks at
    construction time.
    """

    matrix: np.ndarray
    targets: tuple[int, ...]
    unitary: bool = False
    projector: bool = False

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"operator matrix must be square, got {mat.shape}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        dim = mat.shape[0]
        eye = np.eye(dim)
        if self.unitary and np.max(np.abs(mat.conj().T @ mat - eye)) > NORM_TOL:
            raise ValueError("matrix flagged unitary is not unitary within tolerance")
        if self.projector:
            if np.max(np.abs(mat @ mat - mat)) > NORM_TOL:
                raise ValueError("matrix flagged projector is not idempotent")
            if np.max(np.abs(mat - mat.conj().T)) > NORM_TOL:
                raise ValueError("matrix flagged projector is not Hermitian")

    @property
    def arity(self) -> int:
        return self.matrix.shape[0]

    def on(self, *targets: int) -> "LocalOperator":
        """The same operator rebound to different target subsystems."""
        return LocalOperator(self.matrix, targets, unitary=self.unitary, projector=self.projector)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator on a layout."""

    layout: SubsystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=np.complex128)
        d = self.layout.total_dim
        if mat.shape != (d, d):
            raise DimensionError(f"density matrix shape {mat.shape} does not match dimension {d}")
        if np.max(np.abs(mat - mat.conj().T)) > NORM_TOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        if abs(np.trace(mat).real - 1.0) > NORM_TOL:
            raise ValueError(f"density matrix trace {np.trace(mat)} is not 1")
        if float(np.linalg.eigvalsh(mat)[0]) < -PSD_TOL:
            raise ValueError("density matrix has a significantly negative eigenvalue")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)


def superpose(
    layout: SubsystemLayout,
    terms: Iterable[tuple[complex, Sequence[int]]],
) -> MixedRadixState:
    """Normalized superposition sum(c_k |ket_k>); duplicate kets add their coefficients."""
    vec = np.zeros(layout.total_dim, dtype=np.complex128)
    count = 0
    for coeff, ket in terms:
        vec[layout.flat_index(ket)] += coeff
        count += 1
    if count == 0:
        raise DegenerateStateError("superpose needs at least one term")
    norm = float(np.linalg.norm(vec))
    if norm < BRANCH_TOL:
        raise DegenerateStateError("terms cancel to the zero vector")
    return MixedRadixState(layout, vec / norm)


def _check_targets(layout: SubsystemLayout, targets: Sequence[int]) -> None:
    if len(set(targets)) != len(targets):
        raise DimensionError(f"targets must be distinct, got {tuple(targets)}")
    for t in targets:
        if not 0 <= t < layout.n_subsystems:
            raise DimensionError(f"target {t} out of range for {layout.n_subsystems} subsystems")


def apply_local(state: MixedRadixState, op: LocalOperator) -> MixedRadixState:
    """Apply ``op.matrix`` to ``op.targets``, identity elsewhere.

    Returns a new state; the input is unmodified. The result must again be a
    unit-norm state, which every unitary guarantees; applying an operator that
    destroys normalization raises. Measurement handles the non-unitary case.
    """
    _check_targets(state.layout, op.targets)
    arity = math.prod(state.layout.dims[t] for t in op.targets)
    if arity != op.arity:
        raise DimensionError(
            f"operator arity {op.arity} does not match target dimensions product {arity}"
        )
    out = backend.apply_local(state.amplitudes, state.layout.dims, op.targets, op.matrix)
    return MixedRadixState(state.layout, out)


# Projector sets already validated, keyed by member ids. Entries hold strong
# references so the ids stay unique while cached; the protocol only ever
# builds a handful of sets.
_validated_projector_sets: dict[tuple[int, ...], tuple] = {}


def _validate_projector_set(layout: SubsystemLayout, projectors: Sequence[LocalOperator]) -> None:
    key = tuple(id(p) for p in projectors)
    if key in _validated_projector_sets:
        return
    if not projectors:
        raise MeasurementSetError("empty projector set")
    targets = projectors[0].targets
    if any(p.targets != targets for p in projectors):
        raise MeasurementSetError("all projectors in a set must share the same targets")
    _check_targets(layout, targets)
    arity = math.prod(layout.dims[t] for t in targets)
    mats = []
    for p in projectors:
        if p.arity != arity:
            raise MeasurementSetError(
                f"projector arity {p.arity} does not match target dimensions product {arity}"
            )
        mat = np.asarray(p.matrix)
        if np.max(np.abs(mat @ mat - mat)) > NORM_TOL or np.max(np.abs(mat - mat.conj().T)) > NORM_TOL:
            raise MeasurementSetError("set contains a matrix that is not a projector")
        mats.append(mat)
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if np.max(np.abs(mats[i] @ mats[j])) > NORM_TOL:
                raise MeasurementSetError(f"projectors {i} and {j} are not orthogonal")
    if np.max(np.abs(sum(mats) - np.eye(arity))) > NORM_TOL:
        raise MeasurementSetError("projector set is not complete on its target subspace")
    _validated_projector_sets[key] = tuple(projectors)


def measure_projective(
    state: MixedRadixState,
    projectors: Sequence[LocalOperator],
    rng: np.random.Generator,
) -> tuple[int, MixedRadixState, float]:
    """Projective measurement with Born-rule sampling.

    Returns ``(outcome, post_state, probability)`` where ``outcome`` indexes
    into ``projectors`` and ``probability`` is that outcome's Born weight.
    Exactly one uniform draw is consumed from ``rng`` per call, so runs replay
    bit-for-bit from a seed. Branches with probability below ``BRANCH_TOL``
    are treated as impossible and never returned.
    """
    _validate_projector_set(state.layout, projectors)
    vectors = []
    probs = []
    for p in projectors:
        v = backend.apply_local(state.amplitudes, state.layout.dims, p.targets, p.matrix)
        vectors.append(v)
        probs.append(float(np.real(np.vdot(v, v))))
    total = sum(probs)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise MeasurementSetError(f"branch probabilities sum to {total}, not 1")
    live = [k for k, p in enumerate(probs) if p >= BRANCH_TOL]
    draw = float(rng.random()) * sum(probs[k] for k in live)
    outcome = live[-1]
    acc = 0.0
    for k in live:
        acc += probs[k]
        if draw < acc:
            outcome = k
            break
    post = vectors[outcome] / np.sqrt(probs[outcome])
    return outcome, MixedRadixState(state.layout, post), probs[outcome]


def partial_trace(state: MixedRadixState, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density operator on the ``keep`` subsystems, in the given order."""
    keep = tuple(int(k) for k in keep)
    _check_targets(state.layout, keep)
    dims = state.layout.dims
    rest = tuple(i for i in range(len(dims)) if i not in keep)
    tensor = state.amplitudes.reshape(dims)
    moved = np.transpose(tensor, keep + rest)
    keep_dim = math.prod(dims[k] for k in keep)
    stacked = moved.reshape(keep_dim, -1)
    rho = stacked @ stacked.conj().T
    return DensityMatrix(SubsystemLayout(dims[k] for k in keep), rho)


def inner_product(a: MixedRadixState, b: MixedRadixState) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.layout != b.layout:
        raise DimensionError("states live on different layouts")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: MixedRadixState, b: MixedRadixState) -> float:
    """|<a|b>|^2."""
    return abs(inner_product(a, b)) ** 2
