"""Multi-receiver dense-coding simulator over a qutrit/qubit entangled channel.

A sender shares the two-branch entangled state (|0...0> + |1...1>)/sqrt(2)
with N receivers (N qutrits on the sender side, one qubit per receiver),
encodes one of 2 * 3**N messages with per-qutrit shift unitaries plus a sign
bit, and ships the qutrits out. The receivers decode in two rounds: a
non-disturbing projective measurement that pins down each local shift, then a
coherent-basis measurement whose sign product recovers the global sign bit.
"""

from .backend import available_backends, backend_name
from .errors import (
    ArgumentError,
    CapacityLimitError,
    DegenerateStateError,
    DimensionError,
    FormatError,
    MeasurementSetError,
    ProtocolViolationError,
    QdcError,
)
from .hilbert import (
    DensityMatrix,
    LocalOperator,
    MixedRadixState,
    SubsystemLayout,
    amplitude_cap,
    apply_local,
    fidelity,
    inner_product,
    measure_projective,
    partial_trace,
    superpose,
)
from .protocol import (
    CoherentBasis,
    MessageWord,
    PairProjectorSet,
    all_messages,
    canonical_state,
    canonical_state_table,
    channel_layout,
    channel_state,
    coherent_basis,
    coherent_measure,
    encode,
    message_count,
    message_for_state,
    pair_projectors,
    projector_outcome_to_shift,
    qutrit_unitary,
    reconstruct_message,
    state_label_for_message,
    table_order,
)
from .simulation import (
    CommunicationLedger,
    ExhaustiveSummary,
    PartyRoster,
    ReplayVerdict,
    Transcript,
    enumerate_sign_branches,
    pair_for_slot,
    replay,
    run_exhaustive,
    run_protocol,
    run_with_abstention,
    sign_marginal,
)
from .analysis import (
    CapacityReport,
    ComparisonReport,
    GramReport,
    LeakageReport,
    capacity_bound,
    communication_comparison,
    gram_report,
    receiver_leakage,
    trace_distance,
)

__version__ = "0.1.0"
