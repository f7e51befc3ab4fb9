"""Quantitative reports: capacity bound, orthonormality, leakage, communication.

Everything here is a pure computation over encoded states (pre-measurement),
so the results do not depend on seeds or measurement order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ArgumentError, DimensionError
from .hilbert import DensityMatrix, MixedRadixState, inner_product, partial_trace
from .protocol import MessageWord, all_messages, channel_state, encode, message_count
from .simulation import LOG2_3, PartyRoster, pair_for_slot, run_protocol

CLASS_TOL = 1e-10  # reduced states closer than this are the same class


def trace_distance(a: DensityMatrix | np.ndarray, b: DensityMatrix | np.ndarray) -> float:
    """Half the trace norm of (a - b): 0 for equal states, 1 for orthogonal supports."""
    mat_a = a.matrix if isinstance(a, DensityMatrix) else np.asarray(a)
    mat_b = b.matrix if isinstance(b, DensityMatrix) else np.asarray(b)
    if mat_a.shape != mat_b.shape:
        raise DimensionError(f"shape mismatch {mat_a.shape} vs {mat_b.shape}")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(mat_a - mat_b))))


@dataclass(frozen=True)
class CapacityReport:
    n: int
    bound_bits: float
    message_count: int
    per_receiver_broadcast_bits: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "bound_bits": self.bound_bits,
            "message_count": self.message_count,
            "per_receiver_broadcast_bits": self.per_receiver_broadcast_bits,
        }


def capacity_bound(n: int) -> CapacityReport:
    """Classical bits per protocol use: 1 + N * log2(3) = log2(2 * 3**N)."""
    if n < 1:
        raise ArgumentError("receiver count must be >= 1")
    count = message_count(n)
    if count <= 1_000_000:
        enumerated = sum(1 for _ in all_messages(n))
        if enumerated != count:
            raise AssertionError(f"message enumeration gave {enumerated}, expected {count}")
    return CapacityReport(
        n=n,
        bound_bits=1.0 + n * LOG2_3,
        message_count=count,
        per_receiver_broadcast_bits=LOG2_3 + 1.0,
    )


@dataclass(frozen=True, eq=False)
class GramReport:
    matrix: np.ndarray
    max_off_diagonal: float
    max_diagonal_deviation: float

    def to_dict(self) -> dict:
        return {
            "size": int(self.matrix.shape[0]),
            "max_off_diagonal": self.max_off_diagonal,
            "max_diagonal_deviation": self.max_diagonal_deviation,
        }


def gram_report(states: Sequence[MixedRadixState]) -> GramReport:
    """Pairwise inner products; an identity Gram matrix means an orthonormal set."""
    if not states:
        raise ArgumentError("need at least one state")
    layout = states[0].layout
    if any(s.layout != layout for s in states):
        raise DimensionError("states live on different layouts")
    size = len(states)
    gram = np.empty((size, size), dtype=np.complex128)
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            gram[i, j] = inner_product(a, b)
    off = gram - np.diag(np.diag(gram))
    return GramReport(
        matrix=gram,
        max_off_diagonal=float(np.max(np.abs(off))) if size > 1 else 0.0,
        max_diagonal_deviation=float(np.max(np.abs(np.diag(gram) - 1.0))),
    )


@dataclass(frozen=True)
class LeakageReport:
    """What one slot's pair reveals about the message before any broadcast."""

    slot: int
    distinguishable_classes: int
    leaked_bits: float
    class_sizes: tuple[int, ...]
    max_within_class_distance: float
    min_across_class_distance: float
    orthogonal_supports: bool

    def to_dict(self) -> dict:
        return {
            "slot": self.slot,
            "distinguishable_classes": self.distinguishable_classes,
            "leaked_bits": self.leaked_bits,
            "class_sizes": list(self.class_sizes),
            "max_within_class_distance": self.max_within_class_distance,
            "min_across_class_distance": self.min_across_class_distance,
            "orthogonal_supports": self.orthogonal_supports,
        }


def receiver_leakage(n: int, slot: int) -> LeakageReport:
    """Partition all messages by the reduced state of ``slot``'s pair.

    A slot's pair density matrix depends only on that slot's own shift, so the
    expected result is three orthogonal classes worth log2(3) bits; the sign
    bit and every other shift stay invisible without collaboration.
    """
    if not 1 <= slot <= n:
        raise ArgumentError(f"slot {slot} out of range 1..{n}")
    chan = channel_state(n)
    pair = pair_for_slot(n, slot)
    reduced = [
        partial_trace(encode(chan, message), pair).matrix for message in all_messages(n)
    ]
    classes: list[list[int]] = []
    representatives: list[np.ndarray] = []
    for i, rho in enumerate(reduced):
        for c, rep in enumerate(representatives):
            if trace_distance(rho, rep) <= CLASS_TOL:
                classes[c].append(i)
                break
        else:
            representatives.append(rho)
            classes.append([i])
    max_within = 0.0
    for members in classes:
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                max_within = max(max_within, trace_distance(reduced[members[i]], reduced[members[j]]))
    min_across = 1.0
    for i in range(len(representatives)):
        for j in range(i + 1, len(representatives)):
            min_across = min(min_across, trace_distance(representatives[i], representatives[j]))
    return LeakageReport(
        slot=slot,
        distinguishable_classes=len(classes),
        leaked_bits=math.log2(len(classes)),
        class_sizes=tuple(len(members) for members in classes),
        max_within_class_distance=max_within,
        min_across_class_distance=min_across if len(classes) > 1 else 1.0,
        orthogonal_supports=len(classes) == 1 or min_across >= 1.0 - CLASS_TOL,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Decoded bits vs broadcast consumption for the two receiver groupings.

    Both gross figures are reported side by side; no netting rule is applied
    because none is defined for this protocol.
    """

    n: int
    decoded_bits: float
    multi_receiver_round1_bits: float
    multi_receiver_round2_bits: float
    multi_receiver_broadcast_bits: float
    single_receiver_broadcast_bits: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "decoded_bits": self.decoded_bits,
            "multi_receiver": {
                "round1_bits_ideal": self.multi_receiver_round1_bits,
                "round2_bits": self.multi_receiver_round2_bits,
                "broadcast_bits_total": self.multi_receiver_broadcast_bits,
                "net_decoded_minus_broadcast": self.decoded_bits
                - self.multi_receiver_broadcast_bits,
            },
            "single_receiver": {
                "broadcast_bits_total": self.single_receiver_broadcast_bits,
                "net_decoded_minus_broadcast": self.decoded_bits
                - self.single_receiver_broadcast_bits,
            },
        }


def communication_comparison(n: int) -> ComparisonReport:
    """Ledger arithmetic from two actual runs: per-slot parties vs one party."""
    if n < 2:
        raise ArgumentError("comparison needs at least two receiver slots")
    message = MessageWord(shifts=(0,) * n, sign=0)
    multi = run_protocol(n, message, seed=0).ledger
    single = run_protocol(n, message, seed=0, roster=PartyRoster.single_party(n)).ledger
    return ComparisonReport(
        n=n,
        decoded_bits=multi.decoded_bits,
        multi_receiver_round1_bits=multi.round1_bits_ideal,
        multi_receiver_round2_bits=multi.round2_bits,
        multi_receiver_broadcast_bits=multi.round1_bits_ideal + multi.round2_bits,
        single_receiver_broadcast_bits=single.round1_bits_ideal + single.round2_bits,
    )
