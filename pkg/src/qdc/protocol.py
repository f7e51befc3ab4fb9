"""Dense-coding protocol primitives over a qutrit/qubit entangled channel.

The sender holds N qutrits, each receiver one qubit; the shared channel state
is the two-branch superposition (|0...0> + |1...1>)/sqrt(2). A message is a
cyclic shift a_i in {0,1,2} per qutrit plus one global sign bit b carried by
qutrit 1. Receiver slots are numbered 1..N here; the underlying subsystem
indices (0-based) are qutrit i -> i-1 and qubit i -> N+i-1.

The unitary library and the projector/coherent-basis sets are build-once
shared constants; everything in this module is a pure function over
immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cache
from typing import Iterator, Sequence

import numpy as np

from .errors import ArgumentError, ProtocolViolationError
from .hilbert import (
    LocalOperator,
    MixedRadixState,
    SubsystemLayout,
    apply_local,
    measure_projective,
    superpose,
)

# The six single-qutrit encoding matrices, keyed by (shift a, sign bit b).
# Closed form: U_{a,b}|j> = (-1)^(b * [j == 1]) |(j + a) mod 3>.
_UNITARY_ENTRIES = {
    (0, 0): [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    (0, 1): [[1, 0, 0], [0, -1, 0], [0, 0, 1]],
    (1, 0): [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
    (1, 1): [[0, 0, 1], [1, 0, 0], [0, -1, 0]],
    (2, 0): [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
    (2, 1): [[0, -1, 0], [0, 0, 1], [1, 0, 0]],
}

# Branch kets (|a1 a2 0 0>, |a1+1 a2+1 1 1>) of the 18 two-receiver states,
# keyed by table index k = 1..9 with k - 1 = 3*a2 + a1.
_TABLE_KETS = {
    1: ((0, 0, 0, 0), (1, 1, 1, 1)),
    2: ((1, 0, 0, 0), (2, 1, 1, 1)),
    3: ((2, 0, 0, 0), (0, 1, 1, 1)),
    4: ((0, 1, 0, 0), (1, 2, 1, 1)),
    5: ((1, 1, 0, 0), (2, 2, 1, 1)),
    6: ((2, 1, 0, 0), (0, 2, 1, 1)),
    7: ((0, 2, 0, 0), (1, 0, 1, 1)),
    8: ((1, 2, 0, 0), (2, 0, 1, 1)),
    9: ((2, 2, 0, 0), (0, 0, 1, 1)),
}


@cache
def _unitary_matrix(a: int, b: int) -> np.ndarray:
    mat = np.array(_UNITARY_ENTRIES[(a, b)], dtype=np.complex128)
    # The table is transcribed by hand; cross-check every column against the
    # closed form before anything uses it.
    for j in range(3):
        expected = np.zeros(3, dtype=np.complex128)
        expected[(j + a) % 3] = -1.0 if (b == 1 and j == 1) else 1.0
        if not np.array_equal(mat[:, j], expected):
            raise AssertionError(f"unitary table entry ({a},{b}) column {j} is wrong")
    mat.setflags(write=False)
    return mat


def qutrit_unitary(a: int, b: int) -> LocalOperator:
    """The encoding unitary for shift ``a`` and sign bit ``b``, bound to subsystem 0.

    Use ``.on(target)`` to rebind it to another qutrit.
    """
    if a not in (0, 1, 2) or b not in (0, 1):
        raise ArgumentError(f"shift must be in 0..2 and sign bit in 0..1, got ({a}, {b})")
    return LocalOperator(_unitary_matrix(a, b), targets=(0,), unitary=True)


@dataclass(frozen=True)
class MessageWord:
    """One classical message: a shift per qutrit plus a global sign bit.

    The sign bit rides on qutrit 1 only, so there are exactly 2 * 3**N
    distinct messages for N receivers. The canonical integer index is
    ``sign * 3**N + sum(shifts[i] * 3**i)``.
    """

    shifts: tuple[int, ...]
    sign: int  # 0 -> '+', 1 -> '-'

    def __post_init__(self):
        object.__setattr__(self, "shifts", tuple(int(a) for a in self.shifts))
        if not self.shifts:
            raise ArgumentError("message needs at least one shift")
        if any(a not in (0, 1, 2) for a in self.shifts):
            raise ArgumentError(f"shifts must be in 0..2, got {self.shifts}")
        if self.sign not in (0, 1):
            raise ArgumentError(f"sign bit must be 0 or 1, got {self.sign}")

    @property
    def n_receivers(self) -> int:
        return len(self.shifts)

    @property
    def index(self) -> int:
        n = len(self.shifts)
        return self.sign * 3**n + sum(a * 3**i for i, a in enumerate(self.shifts))

    @property
    def components(self) -> tuple[int, ...]:
        """CLI/wire ordering: (a_1, b, a_2, ..., a_N)."""
        return (self.shifts[0], self.sign) + self.shifts[1:]

    @classmethod
    def from_components(cls, components: Sequence[int]) -> "MessageWord":
        components = tuple(int(c) for c in components)
        if len(components) < 2:
            raise ArgumentError("message components are (a_1, b, a_2, ..., a_N)")
        return cls(shifts=(components[0],) + components[2:], sign=components[1])

    @classmethod
    def from_index(cls, n: int, index: int) -> "MessageWord":
        if n < 1:
            raise ArgumentError("receiver count must be >= 1")
        if not 0 <= index < 2 * 3**n:
            raise ArgumentError(f"message index {index} out of range for {n} receivers")
        sign, rest = divmod(index, 3**n)
        shifts = []
        for _ in range(n):
            rest, digit = divmod(rest, 3)
            shifts.append(digit)
        return cls(shifts=tuple(shifts), sign=sign)


def message_count(n: int) -> int:
    """Number of distinct messages for ``n`` receivers."""
    if n < 1:
        raise ArgumentError("receiver count must be >= 1")
    return 2 * 3**n


def all_messages(n: int) -> Iterator[MessageWord]:
    """All messages for ``n`` receivers, in canonical index order."""
    for index in range(message_count(n)):
        yield MessageWord.from_index(n, index)


def channel_layout(n: int) -> SubsystemLayout:
    """N qutrits followed by N qubits."""
    if n < 1:
        raise ArgumentError("receiver count must be >= 1")
    return SubsystemLayout((3,) * n + (2,) * n)


def channel_state(n: int) -> MixedRadixState:
    """The shared channel state (|0...0> + |1...1>)/sqrt(2) for ``n`` receivers."""
    layout = channel_layout(n)
    width = 2 * n
    return superpose(layout, [(1.0, (0,) * width), (1.0, (1,) * width)])


def encode(state: MixedRadixState, message: MessageWord) -> MixedRadixState:
    """Apply the sender's per-qutrit unitaries for ``message``.

    Qutrit 1 carries the sign bit; every other qutrit gets a plain shift. On
    the channel state this produces
    (|a_1..a_N, 0..0> + (-1)^b |a_1+1..a_N+1, 1..1>)/sqrt(2) (shifts mod 3).
    """
    n = message.n_receivers
    if state.layout != channel_layout(n):
        raise ArgumentError(
            f"state layout {state.layout.dims} does not match a {n}-receiver channel"
        )
    for i, a in enumerate(message.shifts):
        b = message.sign if i == 0 else 0
        state = apply_local(state, qutrit_unitary(a, b).on(i))
    return state


def canonical_state(k: int, sign: int) -> MixedRadixState:
    """Two-receiver state ``k`` in 1..9 with relative sign ``+1`` or ``-1``.

    Built directly from the tabulated branch kets, independently of
    :func:`encode`; the two constructions agreeing is a protocol invariant.
    """
    if k not in _TABLE_KETS:
        raise ArgumentError(f"state index must be in 1..9, got {k}")
    if sign not in (1, -1):
        raise ArgumentError(f"sign must be +1 or -1, got {sign}")
    first, second = _TABLE_KETS[k]
    return superpose(channel_layout(2), [(1.0, first), (float(sign), second)])


def table_order() -> tuple[tuple[int, int], ...]:
    """The fixed (k, sign) ordering of the 18-state table."""
    return tuple((k, sign) for k in range(1, 10) for sign in (1, -1))


def canonical_state_table() -> tuple[tuple[tuple[int, int], MixedRadixState], ...]:
    """All 18 two-receiver states with their (k, sign) labels."""
    return tuple(((k, sign), canonical_state(k, sign)) for k, sign in table_order())


def message_for_state(k: int, sign: int) -> MessageWord:
    """Message that encodes table state (k, sign): a1 = (k-1) % 3, a2 = (k-1) // 3."""
    if k not in _TABLE_KETS or sign not in (1, -1):
        raise ArgumentError(f"bad table label ({k}, {sign})")
    return MessageWord(shifts=((k - 1) % 3, (k - 1) // 3), sign=0 if sign == 1 else 1)


def state_label_for_message(message: MessageWord) -> tuple[int, int]:
    """Inverse of :func:`message_for_state`, for two-receiver messages."""
    if message.n_receivers != 2:
        raise ArgumentError("table labels exist only for two-receiver messages")
    a1, a2 = message.shifts
    return 3 * a2 + a1 + 1, 1 if message.sign == 0 else -1


def _pair_flat(qutrit_digit: int, qubit_digit: int) -> int:
    # Pair basis order: qutrit digit most significant, so |q t> -> 2*q + t.
    return 2 * qutrit_digit + qubit_digit


@dataclass(frozen=True, eq=False)
class PairProjectorSet:
    """The three rank-2 projectors partitioning one qutrit(x)qubit pair.

    Projector a+1 spans {|a,0>, |a+1 mod 3, 1>}, exactly the two pair kets an
    encoded state with local shift a can occupy, so round-1 measurement is
    deterministic and leaves the state untouched.
    """

    matrices: tuple[np.ndarray, np.ndarray, np.ndarray]

    def operators(self, qutrit: int, qubit: int) -> tuple[LocalOperator, ...]:
        """The set bound to concrete (0-based) subsystem indices."""
        return _pair_projector_operators(self, qutrit, qubit)


@cache
def pair_projectors() -> PairProjectorSet:
    mats = []
    for a in range(3):
        mat = np.zeros((6, 6), dtype=np.complex128)
        for idx in (_pair_flat(a, 0), _pair_flat((a + 1) % 3, 1)):
            mat[idx, idx] = 1.0
        mat.setflags(write=False)
        mats.append(mat)
    total = mats[0] + mats[1] + mats[2]
    if not np.array_equal(total, np.eye(6)):
        raise AssertionError("pair projectors do not resolve the identity exactly")
    return PairProjectorSet(matrices=tuple(mats))


@cache
def _pair_projector_operators(
    projset: PairProjectorSet, qutrit: int, qubit: int
) -> tuple[LocalOperator, ...]:
    return tuple(
        LocalOperator(mat, targets=(qutrit, qubit), projector=True) for mat in projset.matrices
    )


@dataclass(frozen=True, eq=False)
class CoherentBasis:
    """Two-vector measurement basis {(|a,0> +- |a+1 mod 3, 1>)/sqrt(2)} on a pair.

    The two vectors span only a 2-dimensional slice of the 6-dimensional pair
    space, so the measurement is modeled with a third outcome projecting onto
    the 4-dimensional complement; in an honest run the complement never fires
    and firing signals a wrong basis choice or a corrupted state.
    """

    shift: int
    plus: np.ndarray
    minus: np.ndarray
    complement: np.ndarray

    def projector_matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return (np.outer(self.plus, self.plus.conj()),
                np.outer(self.minus, self.minus.conj()),
                self.complement)

    def operators(self, qutrit: int, qubit: int) -> tuple[LocalOperator, ...]:
        return _coherent_operators(self, qutrit, qubit)


@cache
def coherent_basis(shift: int) -> CoherentBasis:
    if shift not in (0, 1, 2):
        raise ArgumentError(f"shift must be in 0..2, got {shift}")
    plus = np.zeros(6, dtype=np.complex128)
    minus = np.zeros(6, dtype=np.complex128)
    lo, hi = _pair_flat(shift, 0), _pair_flat((shift + 1) % 3, 1)
    plus[lo] = plus[hi] = 1.0 / np.sqrt(2.0)
    minus[lo], minus[hi] = 1.0 / np.sqrt(2.0), -1.0 / np.sqrt(2.0)
    complement = np.eye(6, dtype=np.complex128)
    complement -= np.outer(plus, plus.conj()) + np.outer(minus, minus.conj())
    for arr in (plus, minus, complement):
        arr.setflags(write=False)
    return CoherentBasis(shift=shift, plus=plus, minus=minus, complement=complement)


@cache
def _coherent_operators(basis: CoherentBasis, qutrit: int, qubit: int) -> tuple[LocalOperator, ...]:
    return tuple(
        LocalOperator(mat, targets=(qutrit, qubit), projector=True)
        for mat in basis.projector_matrices()
    )


def projector_outcome_to_shift(outcome: int) -> int:
    """Local shift revealed by a round-1 click: projector ``k`` means shift ``k - 1``."""
    if outcome not in (1, 2, 3):
        raise ArgumentError(f"projector outcome must be 1, 2 or 3, got {outcome}")
    return outcome - 1


def coherent_measure(
    state: MixedRadixState,
    pair: tuple[int, int],
    shift: int,
    rng: np.random.Generator,
) -> tuple[int, MixedRadixState]:
    """Round-2 measurement of one pair in the coherent basis for ``shift``.

    Returns ``(sigma, post_state)`` with sigma +1 or -1. The shift must equal
    the pair's round-1 result; otherwise the complement outcome has nonzero
    probability and raises :class:`ProtocolViolationError` when it fires.
    """
    ops = coherent_basis(shift).operators(*pair)
    outcome, post, _prob = measure_projective(state, ops, rng)
    if outcome == 2:
        raise ProtocolViolationError(
            f"complement outcome on pair {pair} with shift {shift}: "
            "wrong basis choice or corrupted state"
        )
    return (1 if outcome == 0 else -1), post


def reconstruct_message(
    shifts: Sequence[int], sigmas: Sequence[int]
) -> MessageWord:
    """Combine broadcast results: sign bit b = 0 iff the product of sigmas is +1."""
    if any(s not in (1, -1) for s in sigmas):
        raise ArgumentError(f"sigmas must be +1 or -1, got {tuple(sigmas)}")
    if len(shifts) != len(sigmas):
        raise ArgumentError("need one shift and one sigma per receiver slot")
    parity = 1
    for s in sigmas:
        parity *= s
    return MessageWord(shifts=tuple(shifts), sign=0 if parity == 1 else 1)
