"""Compute-backend selection.

Hot kernels (history quadrature, LSTM forward/backward, the recursive
extrapolation driver) exist twice: a numba ``@njit`` implementation and a
pure-numpy one with identical call signatures.  The active backend is
chosen once at import time:

* ``MEMOP_BACKEND=numba`` forces numba (ImportError if unavailable),
* ``MEMOP_BACKEND=numpy`` forces the pure-numpy path,
* unset: numba when importable, numpy otherwise.

``benchmarks/bench_backends.py`` compares the two.
"""

import os

_VALID = ("numba", "numpy")


def _detect():
    choice = os.environ.get("MEMOP_BACKEND", "").strip().lower()
    if choice and choice not in _VALID:
        raise RuntimeError(
            f"MEMOP_BACKEND must be one of {_VALID}, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _detect()


def active_name():
    """Name of the backend selected at import time."""
    return BACKEND


def kernels():
    """The active kernel module (lazy import so numba JIT cost is deferred)."""
    if BACKEND == "numba":
        from .kernels import numba_impl as impl
    else:
        from .kernels import numpy_impl as impl
    return impl
