"""Optional numba acceleration.

Hot loops are written once as plain Python over numpy arrays. When numba is
importable and ``POTSPEC_NUMBA`` is not set to ``0``, they are compiled with
``@njit``; otherwise callers use the vectorized numpy path instead.
"""
from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

NUMBA_AVAILABLE = numba is not None

if NUMBA_AVAILABLE:
    # TBB in this stack is often too old and workqueue is not thread-safe
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "omp"
    prange = numba.prange
else:  # pragma: no cover
    prange = range


def numba_enabled() -> bool:
    """True when compiled kernels should be used (re-read from env each call)."""
    flag = os.environ.get("POTSPEC_NUMBA", "1").strip().lower()
    return NUMBA_AVAILABLE and flag not in ("0", "false", "no", "off")


def max_threads() -> int:
    """Parallelism cap from ``POTSPEC_THREADS`` (default: all cores)."""
    raw = os.environ.get("POTSPEC_THREADS")
    cores = os.cpu_count() or 1
    if not raw:
        return cores
    try:
        return max(1, min(int(raw), cores))
    except ValueError:
        return cores


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if NUMBA_AVAILABLE:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def apply_thread_cap() -> None:
    if NUMBA_AVAILABLE:
        numba.set_num_threads(min(max_threads(), numba.config.NUMBA_NUM_THREADS))
