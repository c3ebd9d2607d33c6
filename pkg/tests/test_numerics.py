import math

import numpy as np
import pytest

from memop.numerics import (
    bessel_j1,
    bessel_jn,
    composite_weights,
    elementwise_cos,
    flatten_ri,
    mat_mul,
    matrix_cos,
    matrix_cos_stack,
    simpson_integrate,
    unflatten_ri,
)


# -- independent oracles ----------------------------------------------------


def cos_taylor(z, terms=20):
    """Taylor-series complex cosine, independent of the implementation."""
    total = 0.0 + 0.0j
    for k in range(terms):
        total += (-1) ** k * z ** (2 * k) / math.factorial(2 * k)
    return total


def j1_series(x, terms=30):
    """Ascending power series for J1."""
    total = 0.0
    for k in range(terms):
        total += (
            (-1) ** k * (x / 2.0) ** (2 * k + 1)
            / (math.factorial(k) * math.factorial(k + 1))
        )
    return total


def bisect_root(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


# -- mat_mul ------------------------------------------------------------------


def test_mat_mul_identity(rng):
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert np.array_equal(mat_mul(np.eye(2, dtype=complex), m), m)


def test_mat_mul_imaginary_unit_squares_to_minus_identity():
    ii = 1j * np.eye(2)
    assert np.allclose(mat_mul(ii, ii), -np.eye(2), atol=0)


def test_mat_mul_matches_scalar_loop_oracle(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    expect = np.zeros((2, 2), complex)
    for r in range(2):
        for c in range(2):
            for k in range(2):
                expect[r, c] += a[r, k] * b[k, c]
    assert np.allclose(mat_mul(a, b), expect, rtol=1e-15)


def test_mat_mul_rejects_mismatched_dims():
    with pytest.raises(ValueError):
        mat_mul(np.eye(2, dtype=complex), np.eye(3, dtype=complex))


def test_mat_mul_rejects_nonfinite():
    bad = np.array([[np.nan, 0], [0, 0]], complex)
    with pytest.raises(ValueError):
        mat_mul(bad, np.eye(2, dtype=complex))


# -- elementwise_cos ----------------------------------------------------------


def test_cos_of_zero_matrix_is_ones():
    out = elementwise_cos(np.zeros((2, 2), complex))
    assert np.array_equal(out, np.ones((2, 2), complex))


def test_cos_of_quarter_diagonal_matches_series_oracle():
    m = np.diag([-0.25, -0.25]).astype(complex)
    out = elementwise_cos(m)
    expect = cos_taylor(-0.25)
    assert abs(expect - 0.9689124217106447) < 1e-12  # freeze the oracle value
    assert abs(out[0, 0] - expect) < 1e-13
    assert abs(out[1, 1] - expect) < 1e-13
    assert out[0, 1] == 1.0 and out[1, 0] == 1.0


def test_cos_of_imaginary_unit_is_cosh_one():
    out = elementwise_cos(np.array([[1j]]))
    cosh1 = sum(1.0 / math.factorial(2 * k) for k in range(20))
    assert abs(cosh1 - 1.5430806348152437) < 1e-14
    assert abs(out[0, 0] - cosh1) < 1e-13


def test_cos_overflow_raises():
    with pytest.raises(OverflowError):
        elementwise_cos(np.array([[1000j]]))


def test_cos_agrees_with_taylor_inside_disk(rng):
    zs = rng.uniform(-1.4, 1.4, size=(64, 2))
    for re, im in zs:
        z = complex(re, im)
        out = elementwise_cos(np.array([[z]]))[0, 0]
        assert abs(out - cos_taylor(z)) < 1e-12


def matrix_cos_series(m, terms=20):
    term = np.eye(m.shape[0], dtype=complex)
    total = np.eye(m.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ m @ m
        total = total + (-1) ** k * term / math.factorial(2 * k)
    return total


def test_matrix_cos_matches_series_oracle(rng):
    for _ in range(32):
        m = 0.8 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        assert np.abs(matrix_cos(m) - matrix_cos_series(m)).max() < 1e-12


def test_matrix_cos_diagonal_and_degenerate():
    d = np.diag([0.3 + 0.1j, -0.2]).astype(complex)
    expect = np.diag([np.cos(0.3 + 0.1j), np.cos(-0.2)])
    assert np.abs(matrix_cos(d) - expect).max() < 1e-14
    # repeated eigenvalues with a nilpotent part: cos(aI + N) = cos(a)I - sin(a)N
    m = np.array([[0.5, 1.0], [0.0, 0.5]], complex)
    expect = np.cos(0.5) * np.eye(2) - np.sin(0.5) * np.array([[0, 1], [0, 0]])
    assert np.abs(matrix_cos(m) - expect).max() < 1e-13


def test_matrix_cos_scalar_case_and_overflow():
    assert abs(matrix_cos(np.array([[1j]]))[0, 0] - np.cosh(1.0)) < 1e-13
    with pytest.raises(OverflowError):
        matrix_cos(np.array([[2000j, 0], [0, 0]], complex))


def test_matrix_cos_stack_matches_single(rng):
    ms = rng.normal(size=(17, 2, 2)) + 1j * rng.normal(size=(17, 2, 2))
    stack = matrix_cos_stack(ms)
    for j in range(17):
        assert np.abs(stack[j] - matrix_cos(ms[j])).max() < 1e-13


# -- flatten / unflatten -------------------------------------------------------


def test_flatten_scalar_minus_i():
    assert np.array_equal(flatten_ri(np.array([[-1j]])), np.array([0.0, -1.0]))


def test_flatten_initial_condition_layout():
    g0 = 1j * np.eye(2)
    assert np.array_equal(
        flatten_ri(g0), np.array([0, 0, 0, 0, 1, 0, 0, 1], float)
    )


def test_unflatten_examples():
    assert np.array_equal(unflatten_ri(np.array([0.0, -1.0]), 1), np.array([[-1j]]))
    assert np.array_equal(
        unflatten_ri(np.array([1, 0, 0, 1, 0, 0, 0, 0], float), 2),
        np.eye(2, dtype=complex),
    )


def test_flatten_round_trips(rng):
    for dim in (1, 2):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        assert np.array_equal(unflatten_ri(flatten_ri(m), dim), m)
        v = rng.normal(size=2 * dim * dim)
        assert np.array_equal(flatten_ri(unflatten_ri(v, dim)), v)


def test_unflatten_rejects_bad_length():
    with pytest.raises(ValueError):
        unflatten_ri(np.zeros(6), 2)


# -- bessel ---------------------------------------------------------------------


def test_j1_at_zero():
    assert bessel_j1(0.0) == 0.0


def test_j1_matches_series_oracle():
    expect = j1_series(2.0)
    assert abs(expect - 0.5767248077568734) < 1e-15
    assert abs(bessel_j1(2.0) - expect) < 1e-13


def test_j1_first_root():
    root = bisect_root(j1_series, 3.0, 4.5)
    assert abs(root - 3.8317059702075125) < 1e-9
    assert abs(bessel_j1(root)) < 1e-9


def test_j1_rejects_negative():
    with pytest.raises(ValueError):
        bessel_j1(-1.0)


@pytest.mark.parametrize("x", [1.0, 2.0, 5.0, 10.0])
def test_bessel_recurrence(x):
    lhs = bessel_jn(0, x) + bessel_jn(2, x)
    rhs = 2.0 / x * bessel_j1(x)
    assert abs(lhs - rhs) < 1e-10


def test_j1_branches_agree_near_cutoff():
    from memop.numerics import _jn_miller, _jn_series

    for x in (11.0, 11.9, 12.0, 13.0):
        assert abs(_jn_series(1, x) - _jn_miller(1, x)) < 1e-12


# -- composite quadrature ---------------------------------------------------------


def test_simpson_exact_for_quadratic():
    ts = np.linspace(0.0, 1.0, 3)
    val = simpson_integrate((ts**2).reshape(-1, 1, 1), 0.5)
    assert abs(val[0, 0] - 1.0 / 3.0) < 1e-15


def test_simpson_sine():
    # true composite-Simpson error here is 1.08e-8 (theory bound
    # pi * h^4 / 180 = 1.7e-8), so the tolerance sits just above it
    ts = np.linspace(0.0, math.pi, 101)
    val = simpson_integrate(np.sin(ts).reshape(-1, 1, 1), math.pi / 100)
    assert abs(val[0, 0] - 2.0) < 2e-8


def test_simpson_single_sample_is_zero():
    out = simpson_integrate(np.ones((1, 2, 2), complex), 0.1)
    assert np.array_equal(out, np.zeros((2, 2), complex))


def test_simpson_empty_rejected():
    with pytest.raises(ValueError):
        simpson_integrate(np.zeros((0, 1, 1)), 0.1)


@pytest.mark.parametrize("n", [3, 5, 9, 21])
def test_odd_interval_weights_exact_for_cubics(n):
    # Simpson and the 3/8 rule are both exact on cubics, so the composite
    # odd-count rule must integrate t^3 on [0, 1] to round-off.
    dt = 1.0 / n
    ts = np.linspace(0.0, 1.0, n + 1)
    w = composite_weights(n, dt)
    assert abs(np.dot(w, ts**3) - 0.25) < 1e-14
    assert abs(np.sum(w) - 1.0) < 1e-14


def test_trapezoid_fallback_two_samples():
    w = composite_weights(1, 0.5)
    assert np.array_equal(w, np.array([0.25, 0.25]))


def test_simpson_fourth_order_convergence():
    # halving dt shrinks the error by 16 +- 20% on a smooth integrand
    exact = 1.0 - math.cos(1.0)
    errors = []
    for n in (8, 16, 32, 64):
        ts = np.linspace(0.0, 1.0, n + 1)
        val = simpson_integrate(np.sin(ts).reshape(-1, 1, 1), 1.0 / n)
        errors.append(abs(val[0, 0] - exact))
    ratios = [errors[i] / errors[i + 1] for i in range(3)]
    for r in ratios:
        assert 12.8 <= r <= 19.2, ratios
