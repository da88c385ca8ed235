"""Kernel backend selection.

The sweep engine evaluates currents through one of two interchangeable
kernels: a numba-compiled per-cell loop (fast, default) and a chunked
pure-numpy path.  The environment variable DONORDOT_BACKEND forces the
choice ("numba" or "numpy"); unset or "auto" picks numba when it imports.
Both kernels implement the same model and are cross-checked in the test
suite and in benchmarks/bench_backends.py.
"""

from __future__ import annotations

import os

from ._pack import PackedDevice, pack_device  # noqa: F401  (re-exported)

ENV_VAR = "DONORDOT_BACKEND"
BACKENDS = ("numba", "numpy")


def _numba_available() -> bool:
    try:
        from . import _kernels_numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend(override: str | None = None) -> str:
    """Resolve the backend name from an explicit override or the environment."""
    name = (override or os.environ.get(ENV_VAR, "auto")).strip().lower() or "auto"
    if name == "auto":
        return "numba" if _numba_available() else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS} or 'auto'")
    if name == "numba" and not _numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    return name


def currents_batch(pk: PackedDevice, vs, vd, vg, vb, jobs=None, backend=None):
    """Dispatch a batch current evaluation to the selected kernel."""
    name = active_backend(backend)
    if name == "numba":
        from . import _kernels_numba

        return _kernels_numba.currents_batch(pk, vs, vd, vg, vb, jobs=jobs)
    from . import _kernels_numpy

    return _kernels_numpy.currents_batch(pk, vs, vd, vg, vb, jobs=jobs)
