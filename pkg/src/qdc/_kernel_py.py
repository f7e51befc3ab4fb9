"""Pure-Python local-operator kernel (numpy fallback).

Same contract as the compiled kernel in ``_kernel_c``: apply a square matrix
to an ordered group of subsystems of a flat mixed-radix state vector, identity
on everything else. Selected by :mod:`qdc.backend` when the extension is not
built.
"""

from __future__ import annotations

import numpy as np


def apply_local(amplitudes, dims, targets, matrix):
    """Apply ``matrix`` to the ``targets`` axes of a mixed-radix vector.

    ``amplitudes`` is the flat coefficient vector over subsystems of sizes
    ``dims`` (subsystem 0 most significant). ``matrix`` is square with side
    equal to the product of the target sizes; its row/column basis is ordered
    with the first listed target most significant. Returns a new flat vector;
    the input is never modified.
    """
    amps = np.asarray(amplitudes, dtype=np.complex128)
    mat = np.asarray(matrix, dtype=np.complex128)
    n_targets = len(targets)
    tensor = amps.reshape(dims)
    moved = np.moveaxis(tensor, targets, range(n_targets))
    head = moved.shape[:n_targets]
    applied = (mat @ moved.reshape(mat.shape[0], -1)).reshape(head + moved.shape[n_targets:])
    out = np.moveaxis(applied, range(n_targets), targets)
    return np.ascontiguousarray(out).reshape(-1)
