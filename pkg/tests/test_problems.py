import math

import numpy as np
import pytest

from memop.numerics import elementwise_cos
from memop.problems import (
    DysonParams,
    ProblemSpec,
    ToyParams,
    dyson_analytic,
    dyson_problem,
    kernel_term,
    streaming,
    toy_a_matrix,
    toy_problem,
)

from test_numerics import bisect_root, j1_series


TOY = ToyParams(alpha1=2.0, alpha2=5.0, sigma=2.0, beta=1.0)


def test_toy_params_require_positive_sigma():
    with pytest.raises(ValueError):
        ToyParams(1.0, 1.0, 0.0, 1.0)


def test_dyson_params_require_nonzero_c():
    with pytest.raises(ValueError):
        DysonParams(1.0, 0.0)


def test_spec_requires_exactly_one_block():
    with pytest.raises(ValueError):
        ProblemSpec(kind="toy", dim=2, g0=1j * np.eye(2), toy=TOY,
                    dyson=DysonParams(1.0, 1.0))
    with pytest.raises(ValueError):
        ProblemSpec(kind="toy", dim=2, g0=1j * np.eye(2))


def test_default_initial_conditions():
    assert np.array_equal(toy_problem(TOY).g0, 1j * np.eye(2))
    assert np.array_equal(dyson_problem(DysonParams(-1, 1)).g0, [[-1j]])


def test_toy_streaming_at_gaussian_peak():
    # at t = alpha1 with beta = 1 the (0,0) entry of A is -i * (-1) = i
    a = toy_a_matrix(TOY, TOY.alpha1)
    assert abs(a[0, 0] - 1j) < 1e-15


def test_toy_streaming_far_field_limit():
    t = TOY.alpha1 + 100 * TOY.sigma
    a = toy_a_matrix(TOY, t)
    expect = -1j * np.array([[0, 1], [1, 0]], complex)
    assert np.abs(a - expect).max() < 1e-12


def test_toy_streaming_symmetry_property(rng):
    # A(t) = -i * (real symmetric), so both off-diagonals are exactly -i
    for t in rng.uniform(0, 50, size=16):
        a = toy_a_matrix(TOY, t)
        assert a[0, 1] == -1j and a[1, 0] == -1j
        assert abs(a[0, 0].real) == 0 and abs(a[1, 1].real) == 0


def test_dyson_streaming_example():
    spec = dyson_problem(DysonParams(-1.0, 1.0))
    out = streaming(spec, 0.3, np.array([[-1j]]))
    assert abs(out[0, 0] - 1.0) < 1e-15


def test_streaming_rejects_dim_mismatch():
    spec = dyson_problem(DysonParams(-1.0, 1.0))
    with pytest.raises(ValueError):
        streaming(spec, 0.0, np.eye(2, dtype=complex))


def test_toy_kernel_with_zero_history():
    # cos_m(0) = I; the memory term carries a leading minus
    spec = toy_problem(TOY)
    g_s = np.array([[1.0, 2.0], [3.0, 4.0]], complex)
    out = kernel_term(spec, np.zeros((2, 2), complex), g_s)
    assert np.allclose(out, -g_s, atol=0)


def test_toy_kernel_at_initial_condition():
    # cos_m(0.25 (iI)^2) = cos(-0.25) I, so the integrand is -cos(0.25) g_s
    spec = toy_problem(TOY)
    out = kernel_term(spec, 1j * np.eye(2), np.eye(2, dtype=complex))
    c = elementwise_cos(np.diag([-0.25, -0.25]).astype(complex))[0, 0]
    expect = -np.array([[c, 0.0], [0.0, c]], complex)
    assert np.abs(out - expect).max() < 1e-13


def test_toy_kernel_matches_matrix_cos_series_oracle(rng):
    # 20-term matrix Taylor series as the independent spectral-cosine oracle
    import math

    spec = toy_problem(TOY)
    gh = 0.7 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    g_s = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    arg = 0.25 * (gh @ gh)
    term = np.eye(2, dtype=complex)
    series = np.eye(2, dtype=complex)
    for k in range(1, 20):
        term = term @ arg @ arg
        series = series + (-1) ** k * term / math.factorial(2 * k)
    expect = -(series @ g_s)
    got = kernel_term(spec, gh, g_s)
    assert np.abs(got - expect).max() < 1e-12


def test_dyson_kernel_powers_of_i():
    spec = dyson_problem(DysonParams(-1.0, 1.0))
    out = kernel_term(spec, np.array([[-1j]]), np.array([[-1j]]))
    assert abs(out[0, 0] - 1j) < 1e-15


def test_dyson_analytic_initial_value():
    assert dyson_analytic(DysonParams(-1.0, 1.0), 0.0) == -1j


def test_dyson_analytic_matches_bessel_oracle():
    # -i e^{it} J1(2) = sin(1) J1(2) - i cos(1) J1(2)
    j1_2 = j1_series(2.0)
    expect = complex(math.sin(1.0) * j1_2, -math.cos(1.0) * j1_2)
    got = dyson_analytic(DysonParams(-1.0, 1.0), 1.0)
    assert abs(got - expect) < 1e-12


def test_dyson_analytic_vanishes_at_bessel_root():
    root = bisect_root(j1_series, 3.0, 4.5) / 2.0
    assert abs(root - 1.9158529851037562) < 1e-9
    assert abs(dyson_analytic(DysonParams(-1.0, 1.0), root)) < 1e-9


@pytest.mark.parametrize("h", [-1.0, 3.0, 8.0])
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_dyson_modulus_independent_of_h(h, t):
    base = abs(dyson_analytic(DysonParams(-1.0, 1.0), t))
    assert abs(abs(dyson_analytic(DysonParams(h, 1.0), t)) - base) < 1e-12


def test_dyson_analytic_long_time_decay():
    assert abs(dyson_analytic(DysonParams(-1.0, 1.0), 40.0)) < 0.02


def test_dyson_analytic_rejects_negative_time():
    with pytest.raises(ValueError):
        dyson_analytic(DysonParams(-1.0, 1.0), -0.5)
