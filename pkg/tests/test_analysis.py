import math

import numpy as np
import pytest

from qdc.analysis import (
    capacity_bound,
    communication_comparison,
    gram_report,
    receiver_leakage,
    trace_distance,
)
from qdc.errors import ArgumentError, DimensionError
from qdc.hilbert import partial_trace
from qdc.protocol import (
    MessageWord,
    all_messages,
    canonical_state_table,
    channel_state,
    encode,
)
from qdc.simulation import pair_for_slot, run_protocol

import oracles


# ---------------------------------------------------------------------------
# capacity
# ---------------------------------------------------------------------------


def test_capacity_two_receivers():
    report = capacity_bound(2)
    assert report.bound_bits == pytest.approx(math.log2(18), abs=1e-12)
    assert report.bound_bits == pytest.approx(4.169925, abs=5e-7)
    assert report.message_count == 18
    assert report.per_receiver_broadcast_bits == pytest.approx(math.log2(3) + 1, abs=1e-12)


def test_capacity_one_receiver():
    report = capacity_bound(1)
    assert report.bound_bits == pytest.approx(1 + math.log2(3), abs=1e-12)
    assert report.bound_bits == pytest.approx(2.584963, abs=5e-7)


def test_capacity_five_receivers_matches_enumeration():
    report = capacity_bound(5)
    assert report.message_count == 486
    assert report.message_count == sum(1 for _ in all_messages(5))
    assert report.bound_bits == pytest.approx(math.log2(486), abs=1e-12)


def test_capacity_matches_enumerated_count_up_to_eight():
    for n in range(1, 9):
        report = capacity_bound(n)
        assert report.message_count == sum(1 for _ in all_messages(n))
        assert report.bound_bits == pytest.approx(math.log2(report.message_count), abs=1e-12)


def test_capacity_rejects_bad_n():
    with pytest.raises(ArgumentError):
        capacity_bound(0)


# ---------------------------------------------------------------------------
# Gram reports
# ---------------------------------------------------------------------------


def test_gram_of_table_is_identity():
    states = [state for _label, state in canonical_state_table()]
    report = gram_report(states)
    assert report.matrix.shape == (18, 18)
    assert report.max_off_diagonal < 1e-12
    assert report.max_diagonal_deviation < 1e-12


def test_gram_of_single_state():
    report = gram_report([channel_state(1)])
    assert report.matrix.shape == (1, 1)
    assert report.max_off_diagonal == 0.0
    assert report.max_diagonal_deviation < 1e-12


def test_gram_of_sampled_three_receiver_states():
    picker = np.random.default_rng(2)
    indices = sorted(picker.choice(54, size=12, replace=False).tolist())
    chan = channel_state(3)
    states = [encode(chan, MessageWord.from_index(3, i)) for i in indices]
    report = gram_report(states)
    assert report.max_off_diagonal < 1e-12
    assert report.max_diagonal_deviation < 1e-12
    # Independent amplitude dot products.
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            expected = 1.0 if i == j else 0.0
            assert abs(np.vdot(a.amplitudes, b.amplitudes) - expected) < 1e-12


def test_gram_rejects_mixed_layouts():
    with pytest.raises(DimensionError):
        gram_report([channel_state(1), channel_state(2)])
    with pytest.raises(ArgumentError):
        gram_report([])


# ---------------------------------------------------------------------------
# trace distance
# ---------------------------------------------------------------------------


def test_trace_distance_extremes():
    zero = np.diag([1.0, 0.0]).astype(complex)
    one = np.diag([0.0, 1.0]).astype(complex)
    assert trace_distance(zero, zero) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-12)
    mixed = np.eye(2, dtype=complex) / 2
    assert trace_distance(zero, mixed) == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------------------------
# leakage
# ---------------------------------------------------------------------------


def test_leakage_two_receivers_both_slots():
    for slot in (1, 2):
        report = receiver_leakage(2, slot)
        assert report.distinguishable_classes == 3
        assert report.class_sizes == (6, 6, 6)
        assert report.leaked_bits == pytest.approx(math.log2(3), abs=1e-12)
        assert report.max_within_class_distance < 1e-12
        assert report.min_across_class_distance == pytest.approx(1.0, abs=1e-10)
        assert report.orthogonal_supports


def test_leakage_classes_keyed_by_local_shift():
    report = receiver_leakage(2, 1)
    messages = list(all_messages(2))
    chan = channel_state(2)
    reduced = [partial_trace(encode(chan, m), pair_for_slot(2, 1)) for m in messages]
    # Any two messages with the same slot-1 shift give the same reduced state.
    for i, a in enumerate(messages):
        for j, b in enumerate(messages):
            dist = trace_distance(reduced[i], reduced[j])
            if a.shifts[0] == b.shifts[0]:
                assert dist < 1e-12
            else:
                assert dist == pytest.approx(1.0, abs=1e-10)
    assert report.distinguishable_classes == 3


def test_leakage_matches_partial_trace_oracle():
    chan = channel_state(2)
    for message in all_messages(2):
        state = encode(chan, message)
        rho = partial_trace(state, pair_for_slot(2, 1)).matrix
        oracle = oracles.direct_partial_trace(state.layout.dims, state.amplitudes, (0, 2))
        assert np.max(np.abs(rho - oracle)) < 1e-12
        a = message.shifts[0]
        expected = np.zeros((6, 6), dtype=complex)
        expected[2 * a, 2 * a] = 0.5
        hi = 2 * ((a + 1) % 3) + 1
        expected[hi, hi] = 0.5
        assert np.max(np.abs(rho - expected)) < 1e-12


def test_leakage_single_receiver_sees_everything():
    report = receiver_leakage(1, 1)
    assert report.distinguishable_classes == 6
    assert report.leaked_bits == pytest.approx(math.log2(6), abs=1e-12)
    assert report.orthogonal_supports


def test_leakage_is_a_pre_measurement_property():
    # Round-1 measurements leave each pair's reduced state untouched, so the
    # same classes emerge from post-round-1 states of any seeded run.
    from qdc.hilbert import measure_projective
    from qdc.protocol import pair_projectors

    chan = channel_state(2)
    for message in [MessageWord((0, 2), 1), MessageWord((1, 1), 0)]:
        encoded = encode(chan, message)
        before = partial_trace(encoded, pair_for_slot(2, 1)).matrix
        for seed, order in ((0, (1, 2)), (9, (2, 1))):
            state = encoded
            rng = np.random.default_rng(seed)
            for slot in order:
                ops = pair_projectors().operators(*pair_for_slot(2, slot))
                _outcome, state, _prob = measure_projective(state, ops, rng)
            after = partial_trace(state, pair_for_slot(2, 1)).matrix
            assert np.max(np.abs(before - after)) < 1e-12


def test_leakage_validates_slot():
    with pytest.raises(ArgumentError):
        receiver_leakage(2, 0)
    with pytest.raises(ArgumentError):
        receiver_leakage(2, 3)


# ---------------------------------------------------------------------------
# communication comparison
# ---------------------------------------------------------------------------


def test_comparison_two_receivers():
    report = communication_comparison(2)
    assert report.decoded_bits == pytest.approx(math.log2(18), abs=1e-12)
    assert report.multi_receiver_round1_bits == pytest.approx(2 * math.log2(3), abs=1e-12)
    assert report.multi_receiver_round2_bits == 2.0
    assert report.multi_receiver_broadcast_bits == pytest.approx(
        2 * math.log2(3) + 2, abs=1e-12
    )
    assert report.single_receiver_broadcast_bits == 0.0


def test_comparison_three_receivers():
    report = communication_comparison(3)
    assert report.multi_receiver_broadcast_bits == pytest.approx(
        3 * math.log2(3) + 3, abs=1e-12
    )
    assert report.decoded_bits == pytest.approx(1 + 3 * math.log2(3), abs=1e-12)


def test_comparison_matches_actual_ledgers():
    report = communication_comparison(2)
    multi = run_protocol(2, MessageWord((0, 0), 0), seed=0).ledger
    assert report.multi_receiver_broadcast_bits == pytest.approx(
        multi.round1_bits_ideal + multi.round2_bits, abs=1e-15
    )


def test_comparison_needs_two_slots():
    with pytest.raises(ArgumentError):
        communication_comparison(1)
