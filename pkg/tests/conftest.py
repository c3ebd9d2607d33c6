import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def dyson_spec():
    from memop.problems import DysonParams, dyson_problem

    return dyson_problem(DysonParams(-1.0, 1.0))


@pytest.fixture(scope="session")
def dyson_truth_20(dyson_spec):
    """AB3 reference trajectory on [0, 20] at dt = 0.01 (shared by tests)."""
    from memop.solver import TimeGrid, solve_ab3

    return solve_ab3(dyson_spec, TimeGrid(0.01, 2000))
