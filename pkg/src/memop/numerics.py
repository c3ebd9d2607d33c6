"""Complex-matrix helpers, Bessel J1, and composite quadrature weights.

State matrices are plain ``numpy.ndarray`` of dtype complex128 and shape
(n, n) with n in {1, 2}.  Network I/O uses the flattened real layout
produced by :func:`flatten_ri`: all real parts in row-major order followed
by all imaginary parts.
"""

import math

import numpy as np


def _check_square(m, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def mat_mul(a, b):
    """Matrix product of two equal-dimension complex matrices."""
    a = _check_square(a, "a")
    b = _check_square(b, "b")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValueError("non-finite entries in matrix product input")
    return a @ b


def elementwise_cos(m):
    """Complex cosine applied entrywise.

    cos(a + ib) = cos(a)cosh(b) - i sin(a)sinh(b).  Raises OverflowError
    instead of returning Inf when cosh overflows.
    """
    m = np.asarray(m, dtype=np.complex128)
    if not np.isfinite(m).all():
        raise ValueError("non-finite entries in elementwise_cos input")
    out = np.cos(m)
    if not np.isfinite(out).all():
        raise OverflowError(
            "cosh overflow in elementwise_cos (|Im z| too large)"
        )
    return out


def matrix_cos(m):
    """Spectral (matrix-function) cosine of a 1x1 or 2x2 complex matrix.

    For 2x2 input this uses the Cayley-Hamilton closed form
        cos(M) = cos(mu)cos(delta) I - sin(mu) sinc(delta) (M - mu I)
    with mu = tr(M)/2 and delta^2 = ((m00-m11)/2)^2 + m01 m10, which is
    branch-free (cos and sinc are even) and has no degenerate-eigenvalue
    trouble.  Raises OverflowError instead of returning Inf.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape == (1, 1):
        return elementwise_cos(m)
    if m.shape != (2, 2):
        raise ValueError(f"matrix_cos supports 1x1 and 2x2 input, got {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("non-finite entries in matrix_cos input")
    mu = 0.5 * (m[0, 0] + m[1, 1])
    d2 = 0.25 * (m[0, 0] - m[1, 1]) ** 2 + m[0, 1] * m[1, 0]
    delta = np.sqrt(complex(d2))
    if abs(delta) < 1e-6:
        sinc = 1.0 - d2 / 6.0
        cos_d = 1.0 - d2 / 2.0
    else:
        sinc = np.sin(delta) / delta
        cos_d = np.cos(delta)
    out = np.cos(mu) * cos_d * np.eye(2) - np.sin(mu) * sinc * (m - mu * np.eye(2))
    if not np.isfinite(out).all():
        raise OverflowError("cosh overflow in matrix_cos (eigenvalue too large)")
    return out


def matrix_cos_stack(ms):
    """Vectorized :func:`matrix_cos` over a (T, 2, 2) stack (no overflow check)."""
    ms = np.asarray(ms, dtype=np.complex128)
    mu = 0.5 * (ms[:, 0, 0] + ms[:, 1, 1])
    d2 = 0.25 * (ms[:, 0, 0] - ms[:, 1, 1]) ** 2 + ms[:, 0, 1] * ms[:, 1, 0]
    delta = np.sqrt(d2)
    small = np.abs(delta) < 1e-6
    safe = np.where(small, 1.0, delta)
    sinc = np.where(small, 1.0 - d2 / 6.0, np.sin(safe) / safe)
    cos_d = np.where(small, 1.0 - d2 / 2.0, np.cos(safe))
    eye = np.eye(2, dtype=np.complex128)
    diag_part = (np.cos(mu) * cos_d)[:, None, None] * eye
    off = ms - mu[:, None, None] * eye
    return diag_part - (np.sin(mu) * sinc)[:, None, None] * off


def flatten_ri(m):
    """Flatten a complex matrix to (re parts, im parts), row-major."""
    m = np.asarray(m, dtype=np.complex128)
    return np.concatenate([m.real.ravel(), m.imag.ravel()])


def unflatten_ri(v, dim):
    """Inverse of :func:`flatten_ri` for a dim x dim matrix."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != 2 * dim * dim:
        raise ValueError(
            f"expected flat vector of length {2 * dim * dim}, got shape {v.shape}"
        )
    half = dim * dim
    return (v[:half] + 1j * v[half:]).reshape(dim, dim)


def flatten_ri_stack(ms):
    """Vectorized :func:`flatten_ri` over a (T, n, n) stack -> (T, 2n^2)."""
    ms = np.asarray(ms, dtype=np.complex128)
    t = ms.shape[0]
    return np.ascontiguousarray(
        np.concatenate([ms.real.reshape(t, -1), ms.imag.reshape(t, -1)], axis=1)
    )


def unflatten_ri_stack(vs, dim):
    """Vectorized :func:`unflatten_ri`: (T, 2n^2) -> (T, n, n)."""
    vs = np.asarray(vs, dtype=np.float64)
    half = dim * dim
    return (vs[:, :half] + 1j * vs[:, half:]).reshape(-1, dim, dim)


# ---------------------------------------------------------------------------
# Bessel functions of the first kind (integer order)
# ---------------------------------------------------------------------------

_SERIES_CUTOFF = 12.0


def _jn_series(n, x):
    # Ascending series; accurate for x below the cutoff where the largest
    # term stays small enough that cancellation is below ~1e-12.
    half = 0.5 * x
    term = half**n / math.factorial(n)
    total = term
    for k in range(1, 60):
        term *= -(half * half) / (k * (k + n))
        total += term
        if abs(term) < 1e-18 * max(1.0, abs(total)):
            break
    return total


def _jn_miller(n_wanted, x):
    # Backward recurrence, normalized by J0 + 2*sum(J_{2k}) = 1.  Stable
    # for all orders; start high enough that J_start is negligible.
    start = int(x + 18 + 12.0 * x ** 0.4)
    if start % 2 == 1:
        start += 1
    jp = 0.0  # J_{k+1}
    jc = 1e-300  # J_k (arbitrary scale)
    result_raw = 0.0
    norm = 0.0
    for k in range(start, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp = jc
        jc = jm
        if k - 1 == n_wanted:
            result_raw = jc
        if (k - 1) % 2 == 0:
            norm += 2.0 * jc if k - 1 > 0 else jc
        if abs(jc) > 1e250:  # rescale to avoid overflow
            jp /= 1e250
            jc /= 1e250
            result_raw /= 1e250
            norm /= 1e250
    return result_raw / norm


def bessel_jn(n, x):
    """J_n(x) for integer n >= 0 and x >= 0 (series below 12, recurrence above)."""
    if n < 0:
        raise ValueError("order must be non-negative")
    if x < 0:
        raise ValueError("argument must be non-negative")
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    if x < _SERIES_CUTOFF:
        return _jn_series(n, x)
    return _jn_miller(n, x)


def bessel_j1(x):
    """Bessel function of the first kind, order one."""
    return bessel_jn(1, x)


# ---------------------------------------------------------------------------
# Composite quadrature on a uniform grid
# ---------------------------------------------------------------------------


def composite_weights(n_intervals, dt):
    """Weights w such that sum(w[j] f(j dt)) approximates the integral on [0, n dt].

    Composite Simpson for even interval counts; for odd counts the trailing
    three intervals use the 3/8 rule (pure 3/8 when n == 3).  n == 1 falls
    back to the trapezoid rule and n == 0 yields the single weight 0.
    """
    if n_intervals < 0:
        raise ValueError("interval count must be >= 0")
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = n_intervals
    w = np.zeros(n + 1)
    if n == 0:
        return w
    if n == 1:
        w[:] = 0.5 * dt
        return w
    m = n if n % 2 == 0 else n - 3
    if m > 0:
        w[0] += dt / 3.0
        w[m] += dt / 3.0
        w[1:m:2] += 4.0 * dt / 3.0
        w[2:m:2] += 2.0 * dt / 3.0
    if n % 2 == 1:
        w[m] += 3.0 * dt / 8.0
        w[m + 1] += 9.0 * dt / 8.0
        w[m + 2] += 9.0 * dt / 8.0
        w[n] += 3.0 * dt / 8.0
    return w


def simpson_integrate(samples, dt):
    """Integrate uniformly spaced samples (scalars or matrices) over their span."""
    arr = np.asarray(samples)
    if arr.shape[0] == 0:
        raise ValueError("simpson_integrate needs at least one sample")
    w = composite_weights(arr.shape[0] - 1, dt)
    return np.tensordot(w, arr, axes=1)
