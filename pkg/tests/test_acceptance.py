"""Acceptance suite: one test per shipping criterion, tolerances pinned.

Each test prints a single PASS line with its measured figure; a failed assert
marks the criterion red. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import math
import time

import numpy as np
import pytest

from qdc.analysis import capacity_bound, gram_report
from qdc.hilbert import (
    LocalOperator,
    MixedRadixState,
    SubsystemLayout,
    apply_local,
    fidelity,
    measure_projective,
)
from qdc.protocol import (
    MessageWord,
    all_messages,
    canonical_state,
    channel_state,
    encode,
    message_count,
    message_for_state,
    pair_projectors,
    table_order,
)
from qdc.simulation import (
    PartyRoster,
    enumerate_sign_branches,
    pair_for_slot,
    replay,
    run_exhaustive,
    run_protocol,
    sign_marginal,
)

import oracles

TOL_EXACT = 1e-12
TOL_SUM = 1e-10


@pytest.fixture(scope="module", autouse=True)
def warm_caches():
    # Build-once tables (unitaries, projectors) are not part of any timed check.
    encode(channel_state(2), MessageWord((0, 0), 0))
    pair_projectors()


@pytest.fixture(scope="module")
def decode_sweep():
    """Criterion 4 workload, shared with criterion 5."""
    start = time.perf_counter()
    summaries = [run_exhaustive(n, 10, time_budget_s=60.0) for n in (1, 2, 3, 4)]
    summaries.append(run_exhaustive(5, 10, sample=200, time_budget_s=60.0))
    elapsed = time.perf_counter() - start
    return summaries, elapsed


def test_criterion_1_state_table_fidelity():
    start = time.perf_counter()
    chan = channel_state(2)
    worst = 0.0
    for k, sign in table_order():
        encoded = encode(chan, message_for_state(k, sign))
        table = canonical_state(k, sign)
        worst = max(worst, float(np.max(np.abs(encoded.amplitudes - table.amplitudes))))
    elapsed = time.perf_counter() - start
    assert worst < TOL_EXACT
    assert elapsed < 0.1
    print(f"\nACCEPTANCE 1 state-table fidelity: PASS (max dev {worst:.2e}, {elapsed * 1e3:.1f} ms)")


def test_criterion_2_orthonormality():
    states = [canonical_state(k, sign) for k, sign in table_order()]
    start = time.perf_counter()
    report = gram_report(states)
    elapsed = time.perf_counter() - start
    deviation = max(report.max_off_diagonal, report.max_diagonal_deviation)
    assert deviation < TOL_EXACT
    assert elapsed < 0.1
    print(f"ACCEPTANCE 2 orthonormality: PASS (max dev {deviation:.2e}, {elapsed * 1e3:.1f} ms)")


def test_criterion_3_non_disturbance():
    chan = channel_state(2)
    projset = pair_projectors()
    worst_prob = 1.0
    worst_fid = 1.0
    for message in all_messages(2):
        encoded = encode(chan, message)
        state = encoded
        rng = np.random.default_rng(0)
        for slot in (1, 2):
            ops = projset.operators(*pair_for_slot(2, slot))
            outcome, state, prob = measure_projective(state, ops, rng)
            assert outcome == message.shifts[slot - 1]
            worst_prob = min(worst_prob, prob)
        worst_fid = min(worst_fid, fidelity(state, encoded))
    assert abs(worst_prob - 1.0) < TOL_EXACT
    assert abs(worst_fid - 1.0) < TOL_EXACT
    print(
        f"ACCEPTANCE 3 non-disturbance: PASS (min prob {worst_prob:.15f}, "
        f"min fidelity {worst_fid:.15f})"
    )


def test_criterion_4_decode_correctness(decode_sweep):
    summaries, elapsed = decode_sweep
    total_runs = sum(s.runs for s in summaries)
    total_ok = sum(s.successes for s in summaries)
    for summary in summaries:
        assert summary.successes == summary.runs, summary.failures[:3]
        assert not summary.failures
    assert summaries[-1].runs >= 200 * 10
    assert total_ok == total_runs
    assert elapsed < 60.0
    print(
        f"ACCEPTANCE 4 decode correctness: PASS ({total_ok}/{total_runs} runs, "
        f"N=1..5, {elapsed:.1f} s)"
    )


def test_criterion_5_sign_parity_law(decode_sweep):
    summaries, _elapsed = decode_sweep
    checked = 0
    for summary in summaries:
        for index, patterns in summary.sigma_pattern_counts.items():
            expected = (-1) ** MessageWord.from_index(summary.n, index).sign
            for pattern, count in patterns.items():
                parity = math.prod(1 if c == "+" else -1 for c in pattern)
                assert parity == expected
                checked += count
    print(f"ACCEPTANCE 5 sign-parity law: PASS (exact in {checked} runs)")


def test_criterion_6_capacity_bound():
    report = capacity_bound(2)
    assert abs(report.bound_bits - math.log2(18)) < TOL_EXACT
    for n in range(1, 9):
        enumerated = sum(1 for _ in all_messages(n))
        assert abs(capacity_bound(n).bound_bits - math.log2(enumerated)) < TOL_EXACT
    print(f"ACCEPTANCE 6 capacity bound: PASS (log2(18) = {report.bound_bits:.12f}, N<=8 checked)")


def test_criterion_7_collaboration_necessity():
    worst = 0.0
    cases = 0
    for n in (2, 3):
        slots = list(range(1, n + 1))
        subsets = [
            tuple(s for s in slots if mask & (1 << (s - 1)))
            for mask in range(1, 2**n - 1)
        ]
        subsets = [s for s in subsets if 0 < len(s) < n]
        for shift_index in range(3**n):
            shifts = tuple((shift_index // 3**i) % 3 for i in range(n))
            marginals = []
            for sign in (0, 1):
                branches = enumerate_sign_branches(n, MessageWord(shifts, sign))
                marginals.append(branches)
            for subset in subsets:
                lo = sign_marginal(marginals[0], subset)
                hi = sign_marginal(marginals[1], subset)
                assert set(lo) == set(hi)
                for key in lo:
                    worst = max(worst, abs(lo[key] - hi[key]))
                cases += 1
    assert worst < TOL_EXACT
    print(
        f"ACCEPTANCE 7 collaboration necessity: PASS ({cases} subset comparisons, "
        f"max deviation {worst:.2e})"
    )


def test_criterion_8_single_receiver_equivalence():
    for n in (1, 2, 3):
        roster = PartyRoster.single_party(n)
        for message in all_messages(n):
            transcript = run_protocol(n, message, seed=1, roster=roster)
            assert transcript.decoded == message
            broadcast = [e for e in transcript.events if e["type"].startswith("broadcast")]
            assert not broadcast
            if n == 2:
                assert abs(transcript.ledger.decoded_bits - math.log2(18)) < TOL_EXACT
    print("ACCEPTANCE 8 single-receiver equivalence: PASS (N=1..3, zero broadcast events)")


def test_criterion_9_kernel_matches_full_embedding():
    rng = np.random.default_rng(2024)
    cases = 0
    worst = 0.0
    while cases < 500:
        length = int(rng.integers(1, 6))
        dims = tuple(int(d) for d in rng.integers(2, 7, size=length))
        if math.prod(dims) > 144:
            continue
        layout = SubsystemLayout(dims)
        n_targets = int(rng.integers(1, min(2, length) + 1))
        targets = tuple(rng.permutation(length)[:n_targets].tolist())
        arity = math.prod(dims[t] for t in targets)
        matrix = oracles.random_unitary(rng, arity)
        state = MixedRadixState(layout, oracles.random_state_vector(rng, layout.total_dim))
        out = apply_local(state, LocalOperator(matrix, targets=targets, unitary=True))
        expected = oracles.embed_full_matrix(dims, targets, matrix) @ state.amplitudes
        worst = max(worst, float(np.max(np.abs(out.amplitudes - expected))))
        assert worst < TOL_EXACT
        cases += 1
    print(f"ACCEPTANCE 9 kernel vs full embedding: PASS ({cases} cases, max dev {worst:.2e})")


def test_criterion_10_replay_determinism():
    configs = []
    for n in (1, 2, 3):
        for index in {0, message_count(n) - 1, 3 % message_count(n)}:
            for seed in (0, 7):
                configs.append((n, MessageWord.from_index(n, index), seed, {}))
    configs.append((2, MessageWord((1, 0), 1), 5, {"roster": PartyRoster.single_party(2)}))
    configs.append((3, MessageWord((2, 0, 1), 1), 5, {"round1_order": (3, 1, 2)}))
    configs.append((2, MessageWord((0, 1), 0), 5, {"abstain_round2": (2,)}))
    configs.append((3, MessageWord((1, 1, 1), 1), 5, {"abstain_round1": (1,), "abstain_round2": (3,)}))
    for n, message, seed, kwargs in configs:
        first = run_protocol(n, message, seed, **kwargs)
        second = run_protocol(n, message, seed, **kwargs)
        assert first.to_json() == second.to_json()
        assert first.events == second.events
        verdict = replay(first)
        assert verdict.match, verdict.detail
    print(f"ACCEPTANCE 10 replay determinism: PASS ({len(configs)} transcripts, bit-for-bit)")
