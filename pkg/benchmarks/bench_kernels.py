"""Compare the compiled kernel against the pure-Python fallback.

Two views: a microbenchmark of the raw local-operator kernel on
protocol-shaped workloads, and an end-to-end decode sweep with the kernel
swapped underneath the simulator. Run as ``python benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import time

import numpy as np

from qdc import MessageWord, backend_name, run_exhaustive
from qdc import backend
from qdc.backend import available_backends
from qdc.protocol import channel_state, encode, pair_projectors


def time_call(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def micro_cases(n: int):
    """One qutrit unitary and one pair projector on an n-receiver state."""
    state = encode(channel_state(n), MessageWord((1,) * n, 1))
    dims = state.layout.dims
    shift = np.zeros((3, 3), dtype=np.complex128)
    for j in range(3):
        shift[(j + 1) % 3, j] = 1.0
    proj = pair_projectors().matrices[1]
    return [
        (f"3x3 unitary on qutrit 0 of 6^{n}", state.amplitudes, dims, (0,), shift),
        (f"6x6 projector on pair (0,{n}) of 6^{n}", state.amplitudes, dims, (0, n), proj),
    ]


def main() -> None:
    impls = available_backends()
    print(f"selected backend: {backend_name()}; comparing: {', '.join(impls)}")
    print()
    print(f"{'kernel workload':<42} " + " ".join(f"{name:>12}" for name in impls) + "   speedup")
    for n in (3, 4, 5, 6):
        for label, amps, dims, targets, matrix in micro_cases(n):
            times = {}
            for name, impl in impls.items():
                reps = 20 if len(amps) < 100_000 else 5
                times[name] = time_call(impl.apply_local, amps, dims, targets, matrix, repeats=reps)
            row = " ".join(f"{times[name] * 1e6:>10.1f}us" for name in impls)
            speedup = ""
            if "compiled" in times and "python" in times:
                speedup = f"{times['python'] / times['compiled']:>8.1f}x"
            print(f"{label:<42} {row} {speedup}")

    print()
    print("end-to-end: exhaustive decode sweep (all messages, 3 seeds)")
    original = backend.apply_local
    try:
        for name, impl in impls.items():
            backend.apply_local = impl.apply_local
            for n in (2, 3):
                start = time.perf_counter()
                summary = run_exhaustive(n, 3, time_budget_s=600.0)
                elapsed = time.perf_counter() - start
                print(
                    f"  {name:>8}  n={n}: {summary.successes}/{summary.runs} decoded "
                    f"in {elapsed:.3f}s"
                )
    finally:
        backend.apply_local = original


if __name__ == "__main__":
    main()
