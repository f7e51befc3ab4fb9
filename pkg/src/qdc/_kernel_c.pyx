# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled local-operator kernel: the hot loop of the simulator.

Contract matches ``qdc._kernel_py.apply_local``. The state vector is walked
block-by-block over the non-target subsystems; inside each block the matrix
acts on the gathered target amplitudes via precomputed flat offsets. Trailing
non-target subsystems form contiguous runs, swept linearly as streaming
multiply-accumulate passes; zero matrix entries are skipped outright, which
pays off because the protocol's unitaries and projectors have at most a
couple of nonzeros per row.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

# Runs at least this long use the streaming per-entry pass; shorter runs use
# the gather/scatter loop, which touches each output element exactly once.
DEF STREAM_MIN_RUN = 2


def apply_local(amplitudes, dims, targets, matrix):
    """Apply ``matrix`` to the ``targets`` axes of a mixed-radix vector."""
    amps_arr = np.ascontiguousarray(amplitudes, dtype=np.complex128)
    mat_arr = np.ascontiguousarray(matrix, dtype=np.complex128)
    cdef const double complex[::1] av = amps_arr
    cdef const double complex[:, ::1] mv = mat_arr

    cdef Py_ssize_t n = len(dims)
    cdef Py_ssize_t n_targets = len(targets)
    cdef Py_ssize_t total = av.shape[0]
    cdef Py_ssize_t arity = mv.shape[0]

    cdef cnp.ndarray[cnp.int64_t, ndim=1] dims_arr = np.asarray(dims, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] targ_arr = np.asarray(targets, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] strides = np.empty(n, dtype=np.int64)

    cdef Py_ssize_t m
    cdef cnp.int64_t acc = 1
    for m in range(n - 1, -1, -1):
        strides[m] = acc
        acc *= dims_arr[m]

    # Flat offsets of the arity basis states spanned by the targets
    # (first target most significant, matching the matrix basis order).
    cdef cnp.ndarray[cnp.int64_t, ndim=1] offsets = np.zeros(arity, dtype=np.int64)
    cdef Py_ssize_t k, j, rem, t
    for k in range(arity):
        rem = k
        for j in range(n_targets - 1, -1, -1):
            t = targ_arr[j]
            offsets[k] += (rem % dims_arr[t]) * strides[t]
            rem //= dims_arr[t]

    # Trailing non-target subsystems are contiguous in the flat vector; fold
    # them into one linear run swept by the innermost loop.
    target_set = set(int(x) for x in targets)
    cdef Py_ssize_t run_len = 1
    cdef Py_ssize_t first_outer = n
    while first_outer > 0 and (first_outer - 1) not in target_set:
        first_outer -= 1
        run_len *= dims_arr[first_outer]
    outer = [i for i in range(first_outer) if i not in target_set]

    cdef Py_ssize_t n_outer = len(outer)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] outer_dims = np.asarray(
        [dims[i] for i in outer] or [1], dtype=np.int64
    )
    cdef cnp.ndarray[cnp.int64_t, ndim=1] outer_strides = np.asarray(
        [int(strides[i]) for i in outer] or [0], dtype=np.int64
    )
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counter = np.zeros(max(n_outer, 1), dtype=np.int64)

    # Compressed rows: the protocol's unitaries and projectors carry at most a
    # couple of nonzeros per row, so fold the sparsity scan out of the hot loop.
    nnz_count_arr = np.zeros(arity, dtype=np.int64)
    nnz_col_arr = np.zeros(arity * arity, dtype=np.int64)
    nnz_val_arr = np.zeros(arity * arity, dtype=np.complex128)
    cdef cnp.int64_t[::1] nnz_count = nnz_count_arr
    cdef cnp.int64_t[::1] nnz_col = nnz_col_arr
    cdef double complex[::1] nnz_val = nnz_val_arr
    cdef Py_ssize_t ko, ki
    for ko in range(arity):
        for ki in range(arity):
            if mv[ko, ki] != 0:
                nnz_col[ko * arity + nnz_count[ko]] = ki
                nnz_val[ko * arity + nnz_count[ko]] = mv[ko, ki]
                nnz_count[ko] += 1

    out_arr = np.zeros(total, dtype=np.complex128)
    scratch_arr = np.empty(arity, dtype=np.complex128)
    in_off_arr = np.empty(arity, dtype=np.int64)
    cdef double complex[::1] ov = out_arr
    cdef double complex[::1] scratch = scratch_arr
    cdef cnp.int64_t[::1] offs = offsets
    cdef cnp.int64_t[::1] in_off = in_off_arr
    cdef cnp.int64_t[::1] od = outer_dims
    cdef cnp.int64_t[::1] os = outer_strides
    cdef cnp.int64_t[::1] ct = counter

    cdef bint streaming = run_len >= STREAM_MIN_RUN
    cdef Py_ssize_t n_blocks = total // (arity * run_len)
    cdef Py_ssize_t block, r, e, row, out_base, in_base, base = 0
    cdef double complex s, c
    # Only C types from here on; release the GIL so independent protocol runs
    # can execute this kernel concurrently from worker threads.
    with nogil:
        for block in range(n_blocks):
            for ki in range(arity):
                in_off[ki] = base + offs[ki]
            if streaming:
                # One contiguous multiply-accumulate pass per nonzero entry.
                for ko in range(arity):
                    out_base = in_off[ko]
                    row = ko * arity
                    for e in range(nnz_count[ko]):
                        c = nnz_val[row + e]
                        in_base = in_off[nnz_col[row + e]]
                        if e == 0:
                            for r in range(run_len):
                                ov[out_base + r] = c * av[in_base + r]
                        else:
                            for r in range(run_len):
                                ov[out_base + r] = ov[out_base + r] + c * av[in_base + r]
                    # all-zero row: out_arr starts zeroed, nothing to do
            else:
                for r in range(run_len):
                    for ki in range(arity):
                        scratch[ki] = av[in_off[ki] + r]
                    for ko in range(arity):
                        s = 0
                        row = ko * arity
                        for e in range(nnz_count[ko]):
                            s = s + nnz_val[row + e] * scratch[nnz_col[row + e]]
                        ov[in_off[ko] + r] = s
            # Mixed-radix increment over the outer non-target subsystems.
            for j in range(n_outer - 1, -1, -1):
                ct[j] += 1
                base += os[j]
                if ct[j] < od[j]:
                    break
                base -= od[j] * os[j]
                ct[j] = 0
    return out_arr
