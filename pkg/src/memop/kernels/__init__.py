"""Hot compute kernels with two interchangeable implementations.

``numba_impl`` carries ``@njit`` kernels; ``numpy_impl`` is the pure-numpy
fallback with identical signatures.  Selection happens in
:mod:`memop.backend` via the ``MEMOP_BACKEND`` environment variable.

Shared conventions:

* LSTM parameters are packed per layer as ``w_x (4H, in)``, ``w_h (4H, H)``
  and ``b (4H,)`` with gate blocks ordered input, forget, cell, output.
* Sequences are row-major float64 ``(T, width)`` arrays in the flattened
  real/imaginary layout of :func:`memop.numerics.flatten_ri`.
* State matrices are complex128 ``(n, n)``; stacks are ``(T, n, n)``.
"""

from ..backend import active_name, kernels

__all__ = ["active_name", "kernels"]
