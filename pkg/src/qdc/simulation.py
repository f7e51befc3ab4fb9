"""Multi-party protocol harness: runs, transcripts, broadcasts, replay.

One run is strictly sequential and fully determined by its seed; the transcript
records every event and is the single source of truth for reproducibility.
Classical communication is an idealized synchronous broadcast, recorded only
when information actually crosses a party boundary (a single party holding all
slots broadcasts nothing). Abstention withholds a slot's round-2 broadcast and
is a legitimate protocol mode, not an error: the result is an undecodable
transcript plus whatever partial information the remaining parties received.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import backend
from .errors import ArgumentError, CapacityLimitError, FormatError
from .hilbert import BRANCH_TOL, measure_projective
from .protocol import (
    MessageWord,
    channel_state,
    coherent_basis,
    coherent_measure,
    encode,
    message_count,
    pair_projectors,
    reconstruct_message,
)

TRANSCRIPT_SCHEMA = "qdc-transcript/1"

LOG2_3 = math.log2(3.0)


def pair_for_slot(n: int, slot: int) -> tuple[int, int]:
    """0-based (qutrit, qubit) subsystem indices owned by 1-based ``slot``."""
    return slot - 1, n + slot - 1


@dataclass(frozen=True)
class PartyRoster:
    """Who plays which role: one sender plus a partition of slots into parties."""

    sender: str
    receivers: tuple[str, ...]
    grouping: tuple[tuple[int, ...], ...]  # grouping[i] = slots owned by receivers[i]

    def __post_init__(self):
        object.__setattr__(self, "receivers", tuple(self.receivers))
        object.__setattr__(
            self, "grouping", tuple(tuple(int(s) for s in group) for group in self.grouping)
        )
        if len(self.receivers) != len(self.grouping):
            raise ArgumentError("need exactly one slot group per receiver party")
        owned = [slot for group in self.grouping for slot in group]
        n = len(owned)
        if sorted(owned) != list(range(1, n + 1)):
            raise ArgumentError(f"grouping {self.grouping} is not a partition of slots 1..{n}")

    @classmethod
    def one_party_per_slot(cls, n: int) -> "PartyRoster":
        return cls(
            sender="sender",
            receivers=tuple(f"receiver{i}" for i in range(1, n + 1)),
            grouping=tuple((i,) for i in range(1, n + 1)),
        )

    @classmethod
    def single_party(cls, n: int) -> "PartyRoster":
        return cls(sender="sender", receivers=("receiver1",), grouping=(tuple(range(1, n + 1)),))

    @property
    def n_slots(self) -> int:
        return sum(len(group) for group in self.grouping)

    def party_of_slot(self, slot: int) -> str:
        for name, group in zip(self.receivers, self.grouping):
            if slot in group:
                return name
        raise ArgumentError(f"slot {slot} not in roster")

    def to_dict(self) -> dict:
        return {
            "sender": self.sender,
            "receivers": list(self.receivers),
            "grouping": [list(group) for group in self.grouping],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PartyRoster":
        return cls(
            sender=data["sender"],
            receivers=tuple(data["receivers"]),
            grouping=tuple(tuple(group) for group in data["grouping"]),
        )


@dataclass(frozen=True)
class CommunicationLedger:
    """Classical-communication accounting for one run.

    Broadcast volume is reported both in ideal information units (log2(3) per
    announced shift) and in a plain 2-bit-per-trit encoding; the decoded-bits
    figure is log2 of the message count.
    """

    qutrits_sent: int
    round1_broadcasts: int
    round2_broadcasts: int
    round1_bits_ideal: float
    round1_bits_binary: float
    round2_bits: float
    decoded_bits: float

    def to_dict(self) -> dict:
        return {
            "qutrits_sent": self.qutrits_sent,
            "round1_broadcasts": self.round1_broadcasts,
            "round2_broadcasts": self.round2_broadcasts,
            "round1_bits_ideal": self.round1_bits_ideal,
            "round1_bits_binary": self.round1_bits_binary,
            "round2_bits": self.round2_bits,
            "decoded_bits": self.decoded_bits,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CommunicationLedger":
        return cls(**data)


@dataclass(frozen=True)
class Transcript:
    """Ordered record of one protocol run; replayable from its own fields."""

    schema_version: str
    n: int
    seed: int
    message: MessageWord
    roster: PartyRoster
    round1_order: tuple[int, ...]
    abstain_round1: tuple[int, ...]
    abstain_round2: tuple[int, ...]
    events: tuple[dict, ...]
    decoded: MessageWord | None
    partial: dict | None
    ledger: CommunicationLedger

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "n": self.n,
            "seed": self.seed,
            "message": _message_dict(self.message),
            "roster": self.roster.to_dict(),
            "round1_order": list(self.round1_order),
            "abstain_round1": list(self.abstain_round1),
            "abstain_round2": list(self.abstain_round2),
            "events": [dict(event) for event in self.events],
            "decoded": _message_dict(self.decoded) if self.decoded else "undecodable",
            "partial": self.partial,
            "ledger": self.ledger.to_dict(),
        }

    def to_json(self) -> str:
        """Canonical JSON: sorted keys, compact separators, UTF-8 safe."""
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_dict(cls, data: dict) -> "Transcript":
        try:
            schema = data["schema_version"]
            if schema != TRANSCRIPT_SCHEMA:
                raise FormatError(f"unknown transcript schema {schema!r}")
            decoded = data["decoded"]
            return cls(
                schema_version=schema,
                n=int(data["n"]),
                seed=int(data["seed"]),
                message=MessageWord.from_components(data["message"]["components"]),
                roster=PartyRoster.from_dict(data["roster"]),
                round1_order=tuple(data["round1_order"]),
                abstain_round1=tuple(data["abstain_round1"]),
                abstain_round2=tuple(data["abstain_round2"]),
                events=tuple(dict(event) for event in data["events"]),
                decoded=(
                    None
                    if decoded == "undecodable"
                    else MessageWord.from_components(decoded["components"])
                ),
                partial=data["partial"],
                ledger=CommunicationLedger.from_dict(data["ledger"]),
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed transcript: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"transcript is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def _message_dict(message: MessageWord) -> dict:
    return {"components": list(message.components), "index": message.index}


def _ledger_for(n: int, round1_broadcasts: int, round2_broadcasts: int) -> CommunicationLedger:
    return CommunicationLedger(
        qutrits_sent=n,
        round1_broadcasts=round1_broadcasts,
        round2_broadcasts=round2_broadcasts,
        round1_bits_ideal=round1_broadcasts * LOG2_3,
        round1_bits_binary=round1_broadcasts * 2.0,
        round2_bits=float(round2_broadcasts),
        decoded_bits=1.0 + n * LOG2_3,
    )


def run_protocol(
    n: int,
    message: MessageWord,
    seed: int,
    roster: PartyRoster | None = None,
    *,
    round1_order: Sequence[int] | None = None,
    abstain_round1: Iterable[int] = (),
    abstain_round2: Iterable[int] = (),
) -> Transcript:
    """Execute one full run: prepare, encode, transfer, two measurement rounds,
    two broadcast rounds, reconstruct.

    ``round1_order`` permutes only the round-1 measurements (round 2 is always
    slot-ascending); outcomes are unaffected because round 1 is deterministic
    and consumes one rng draw per slot regardless of order. Abstaining slots
    still measure but withhold the corresponding broadcast, which makes the
    transcript undecodable when more than one party is involved.
    """
    roster = roster if roster is not None else PartyRoster.one_party_per_slot(n)
    if message.n_receivers != n:
        raise ArgumentError(f"message is for {message.n_receivers} receivers, run is for {n}")
    if roster.n_slots != n:
        raise ArgumentError(f"roster covers {roster.n_slots} slots, run needs {n}")
    order = tuple(round1_order) if round1_order is not None else tuple(range(1, n + 1))
    if sorted(order) != list(range(1, n + 1)):
        raise ArgumentError(f"round1_order {order} is not a permutation of slots 1..{n}")
    abstain1 = tuple(sorted(set(int(s) for s in abstain_round1)))
    abstain2 = tuple(sorted(set(int(s) for s in abstain_round2)))
    for slot in abstain1 + abstain2:
        if not 1 <= slot <= n:
            raise ArgumentError(f"abstaining slot {slot} out of range 1..{n}")

    rng = np.random.default_rng(seed)
    events: list[dict] = []

    for slot in range(1, n + 1):
        events.append(
            {
                "type": "encode",
                "qutrit": slot,
                "shift": message.shifts[slot - 1],
                "sign": message.sign if slot == 1 else 0,
            }
        )
    state = encode(channel_state(n), message)

    for slot in range(1, n + 1):
        events.append(
            {
                "type": "transfer",
                "particle": slot,
                "from": roster.sender,
                "to": roster.party_of_slot(slot),
            }
        )

    projset = pair_projectors()
    shifts: dict[int, int] = {}
    for slot in order:
        ops = projset.operators(*pair_for_slot(n, slot))
        outcome, state, _prob = measure_projective(state, ops, rng)
        shifts[slot] = outcome
        events.append({"type": "round1_outcome", "slot": slot, "projector": outcome + 1})

    multiparty = len(roster.receivers) > 1
    if multiparty:
        for slot in range(1, n + 1):
            if slot not in abstain1:
                events.append({"type": "broadcast1", "slot": slot, "shift": shifts[slot]})

    sigmas: dict[int, int] = {}
    for slot in range(1, n + 1):
        sigma, state = coherent_measure(state, pair_for_slot(n, slot), shifts[slot], rng)
        sigmas[slot] = sigma
        events.append({"type": "round2_outcome", "slot": slot, "sigma": sigma})

    if multiparty:
        for slot in range(1, n + 1):
            if slot not in abstain2:
                events.append({"type": "broadcast2", "slot": slot, "sigma": sigmas[slot]})

    withheld = (set(abstain1) | set(abstain2)) if multiparty else set()
    if withheld:
        received_sigmas = [sigmas[s] for s in range(1, n + 1) if s not in abstain2]
        parity = math.prod(received_sigmas) if received_sigmas else None
        decoded = None
        partial = {
            "known_shifts": [[s, shifts[s]] for s in range(1, n + 1) if s not in abstain1],
            "sigma_parity_received": parity,
        }
    else:
        decoded = reconstruct_message(
            tuple(shifts[s] for s in range(1, n + 1)),
            tuple(sigmas[s] for s in range(1, n + 1)),
        )
        partial = None

    b1 = sum(1 for e in events if e["type"] == "broadcast1")
    b2 = sum(1 for e in events if e["type"] == "broadcast2")
    return Transcript(
        schema_version=TRANSCRIPT_SCHEMA,
        n=n,
        seed=seed,
        message=message,
        roster=roster,
        round1_order=order,
        abstain_round1=abstain1,
        abstain_round2=abstain2,
        events=tuple(events),
        decoded=decoded,
        partial=partial,
        ledger=_ledger_for(n, b1, b2),
    )


def run_with_abstention(
    n: int,
    message: MessageWord,
    seed: int,
    abstaining_slot: int | Iterable[int],
) -> Transcript:
    """Run with one or more slots withholding their round-2 broadcast."""
    slots = (abstaining_slot,) if isinstance(abstaining_slot, int) else tuple(abstaining_slot)
    return run_protocol(n, message, seed, abstain_round2=slots)


@dataclass(frozen=True)
class ReplayVerdict:
    match: bool
    event_index: int | None
    detail: str


def replay(transcript: Transcript) -> ReplayVerdict:
    """Re-execute a transcript from its recorded seed and diff every event."""
    if transcript.schema_version != TRANSCRIPT_SCHEMA:
        raise FormatError(f"unknown transcript schema {transcript.schema_version!r}")
    fresh = run_protocol(
        transcript.n,
        transcript.message,
        transcript.seed,
        transcript.roster,
        round1_order=transcript.round1_order,
        abstain_round1=transcript.abstain_round1,
        abstain_round2=transcript.abstain_round2,
    )
    for i, (recorded, replayed) in enumerate(zip(transcript.events, fresh.events)):
        if recorded != replayed:
            return ReplayVerdict(False, i, f"event {i}: recorded {recorded} != replayed {replayed}")
    if len(transcript.events) != len(fresh.events):
        shorter = min(len(transcript.events), len(fresh.events))
        return ReplayVerdict(
            False, shorter, f"event count {len(transcript.events)} != {len(fresh.events)}"
        )
    if transcript.decoded != fresh.decoded:
        return ReplayVerdict(False, None, "decoded message differs")
    if transcript.partial != fresh.partial:
        return ReplayVerdict(False, None, "partial information differs")
    if transcript.ledger != fresh.ledger:
        return ReplayVerdict(False, None, "ledger differs")
    return ReplayVerdict(True, None, "transcript replays identically")


@dataclass
class ExhaustiveSummary:
    """Aggregate result of a sweep over messages and seeds."""

    n: int
    seeds: int
    sample: int | None
    runs: int
    successes: int
    failures: tuple[str, ...]
    sigma_pattern_counts: dict[int, dict[str, int]]
    elapsed_s: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "seeds": self.seeds,
            "sample": self.sample,
            "runs": self.runs,
            "successes": self.successes,
            "failures": list(self.failures),
            "sigma_pattern_counts": {
                str(idx): counts for idx, counts in sorted(self.sigma_pattern_counts.items())
            },
            "elapsed_s": self.elapsed_s,
        }


def _one_exhaustive_run(n: int, index: int, seed: int) -> tuple[str, bool, bool]:
    """One decode attempt: (sigma pattern, decoded correctly, parity law held)."""
    message = MessageWord.from_index(n, index)
    transcript = run_protocol(n, message, seed)
    sigmas = [e["sigma"] for e in transcript.events if e["type"] == "round2_outcome"]
    pattern = "".join("+" if s == 1 else "-" for s in sigmas)
    decoded_ok = transcript.decoded == message
    parity_ok = math.prod(sigmas) == (1 if message.sign == 0 else -1)
    return pattern, decoded_ok, parity_ok


def run_exhaustive(
    n: int,
    seeds: int,
    *,
    sample: int | None = None,
    time_budget_s: float = 60.0,
    workers: int = 1,
) -> ExhaustiveSummary:
    """Run every message (or a fixed deterministic sample) under several seeds.

    Checks decode correctness and the sign-parity law on every run; raises
    :class:`CapacityLimitError` if the sweep exceeds ``time_budget_s``.
    Independent runs are seed-isolated, so ``workers > 1`` fans them out to a
    process pool; results are reduced in (message, seed) order either way, so
    the summary is identical for any worker count.
    """
    if seeds < 1:
        raise ArgumentError("need at least one seed")
    if workers < 1:
        raise ArgumentError("need at least one worker")
    total = message_count(n)
    if sample is not None and not 1 <= sample <= total:
        raise ArgumentError(f"sample must be in 1..{total}")
    if sample is None:
        indices = list(range(total))
    else:
        picker = np.random.default_rng(12345)
        indices = sorted(picker.choice(total, size=sample, replace=False).tolist())

    start = time.perf_counter()
    tasks = [(index, seed) for index in indices for seed in range(seeds)]
    outcomes: list[tuple[str, bool, bool]] = []
    budget_message = f"exhaustive sweep exceeded the {time_budget_s:.1f}s time budget"
    if workers == 1:
        for index, seed in tasks:
            outcomes.append(_one_exhaustive_run(n, index, seed))
            if time.perf_counter() - start > time_budget_s:
                raise CapacityLimitError(budget_message)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            result_stream = pool.map(
                _one_exhaustive_run,
                (n for _ in tasks),
                (index for index, _ in tasks),
                (seed for _, seed in tasks),
                chunksize=max(1, len(tasks) // (workers * 8)),
            )
            for outcome in result_stream:  # map preserves task order
                outcomes.append(outcome)
                if time.perf_counter() - start > time_budget_s:
                    pool.shutdown(wait=False, cancel_futures=True)
                    raise CapacityLimitError(budget_message)

    failures: list[str] = []
    pattern_counts: dict[int, dict[str, int]] = {}
    runs = successes = 0
    for (index, seed), (pattern, decoded_ok, parity_ok) in zip(tasks, outcomes):
        runs += 1
        pattern_counts.setdefault(index, {}).setdefault(pattern, 0)
        pattern_counts[index][pattern] += 1
        if decoded_ok:
            successes += 1
        else:
            failures.append(f"message {index} seed {seed}: decoded incorrectly")
        if not parity_ok:
            failures.append(f"message {index} seed {seed}: sign-parity law violated")
    return ExhaustiveSummary(
        n=n,
        seeds=seeds,
        sample=sample,
        runs=runs,
        successes=successes,
        failures=tuple(failures),
        sigma_pattern_counts=pattern_counts,
        elapsed_s=time.perf_counter() - start,
    )


def enumerate_sign_branches(
    n: int, message: MessageWord
) -> tuple[tuple[tuple[int, ...], float], ...]:
    """Exact joint distribution of the round-2 signs, by branch enumeration.

    Walks every measurement branch with its Born probability instead of
    sampling, so the returned weights are exact up to float arithmetic. Round
    1 is applied first (it is deterministic and leaves the state unchanged).
    """
    if message.n_receivers != n:
        raise ArgumentError("message does not match the receiver count")
    state = encode(channel_state(n), message)
    dims = state.layout.dims
    amps = state.amplitudes
    projset = pair_projectors()
    for slot in range(1, n + 1):
        op = projset.operators(*pair_for_slot(n, slot))[message.shifts[slot - 1]]
        amps = backend.apply_local(amps, dims, op.targets, op.matrix)
        amps = amps / np.linalg.norm(amps)

    results: list[tuple[tuple[int, ...], float]] = []

    def descend(vec: np.ndarray, slot: int, weight: float, signs: tuple[int, ...]) -> None:
        if slot > n:
            results.append((signs, weight))
            return
        plus_proj, minus_proj, _comp = coherent_basis(
            message.shifts[slot - 1]
        ).projector_matrices()
        pair = pair_for_slot(n, slot)
        for sign, mat in ((1, plus_proj), (-1, minus_proj)):
            branch = backend.apply_local(vec, dims, pair, mat)
            prob = float(np.real(np.vdot(branch, branch)))
            if prob > BRANCH_TOL:
                descend(branch / np.sqrt(prob), slot + 1, weight * prob, signs + (sign,))

    descend(amps, 1, 1.0, ())
    return tuple(results)


def sign_marginal(
    branches: Sequence[tuple[tuple[int, ...], float]], slots: Sequence[int]
) -> dict[tuple[int, ...], float]:
    """Marginal distribution of the signs at the given 1-based slots."""
    out: dict[tuple[int, ...], float] = {}
    for signs, weight in branches:
        key = tuple(signs[s - 1] for s in slots)
        out[key] = out.get(key, 0.0) + weight
    return out
