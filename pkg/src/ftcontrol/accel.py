"""Numba dispatch for the hot numeric kernels.

Every kernel in this package is written as a plain numpy function and run
through :func:`maybe_njit`.  By default the kernels are JIT-compiled with
numba; setting the environment variable ``FTCONTROL_PURE_NUMPY=1`` before
import selects the pure-numpy path instead (useful for debugging and for
the kernel benchmark in ``benchmarks/``).
"""

import os

_FLAG = os.environ.get("FTCONTROL_PURE_NUMPY", "0")
_WANT_NUMBA = _FLAG in ("", "0")

if _WANT_NUMBA:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def maybe_njit(func):
    """JIT-compile ``func`` unless the pure-numpy path is selected.

    fastmath stays off: bit-identical reruns are a hard requirement.
    """
    if NUMBA_ENABLED:
        return _njit(cache=True, fastmath=False)(func)
    return func


def python_impl(func):
    """Return the uncompiled implementation of a (possibly jitted) kernel."""
    return getattr(func, "py_func", func)
