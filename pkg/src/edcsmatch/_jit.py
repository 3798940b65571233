"""Switch between numba-compiled kernels and their plain-Python bodies.

Set ``EDCSMATCH_DISABLE_JIT=1`` to run every kernel uncompiled. The same
source runs on both paths; only the dispatch differs.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_DISABLED_BY_ENV = os.environ.get("EDCSMATCH_DISABLE_JIT", "").strip().lower() not in ("", "0", "false", "no")
JIT_ENABLED = numba is not None and not JIT_DISABLED_BY_ENV


def njit(fn):
    if JIT_ENABLED:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def py_func(kernel):
    """The uncompiled function behind ``kernel`` (itself if JIT is off)."""
    return getattr(kernel, "py_func", kernel)
