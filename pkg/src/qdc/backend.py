"""Kernel selection: compiled extension when built, pure-Python fallback otherwise.

Set ``QDC_BACKEND=python`` or ``QDC_BACKEND=compiled`` before import to force a
choice; forcing the compiled backend when the extension is missing raises.
All state evolution routes through :func:`apply_local`, so callers (and the
benchmark) can also swap implementations by rebinding this module attribute.
"""

from __future__ import annotations

import os

from . import _kernel_py

try:
    from . import _kernel_c
except ImportError:
    _kernel_c = None

_forced = os.environ.get("QDC_BACKEND")
if _forced == "python":
    _impl = _kernel_py
elif _forced == "compiled":
    if _kernel_c is None:
        raise ImportError("QDC_BACKEND=compiled but the compiled kernel is not built")
    _impl = _kernel_c
elif _forced:
    raise ImportError(f"unknown QDC_BACKEND value: {_forced!r}")
else:
    _impl = _kernel_c if _kernel_c is not None else _kernel_py

apply_local = _impl.apply_local


def backend_name() -> str:
    """Name of the kernel implementation selected at import time."""
    return "compiled" if _impl is _kernel_c else "python"


def available_backends() -> dict:
    """Importable kernel modules keyed by name, for tests and benchmarks."""
    impls = {"python": _kernel_py}
    if _kernel_c is not None:
        impls["compiled"] = _kernel_c
    return impls
