"""Reference trajectory generation for the IDE problems.

Both steppers evaluate the memory integral with composite Simpson over the
full recorded history at every step, so the cost of a length-N solve is
O(N^2).  The recorded integral values are exactly the ones the stepper
consumed, which keeps learned targets consistent with the dynamics.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .errors import BlowUpError
from .numerics import flatten_ri_stack
from .problems import ProblemSpec, dyson_analytic, streaming


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    n_steps: int

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")

    @property
    def times(self):
        return self.dt * np.arange(self.n_steps + 1)

    @property
    def horizon(self):
        return self.dt * self.n_steps


@dataclass(eq=False)
class Trajectory:
    spec: ProblemSpec
    grid: TimeGrid
    g: np.ndarray  # (n_steps+1, n, n) complex
    i_int: np.ndarray  # (n_steps+1, n, n) complex
    params_label: dict = field(default_factory=dict)

    def inputs(self):
        """Flattened G sequence fed to the network, shape (T+1, 2n^2)."""
        return flatten_ri_stack(self.g)

    def targets(self):
        """Flattened memory-integral sequence, shape (T+1, 2n^2)."""
        return flatten_ri_stack(self.i_int)

    def prefix(self, n_steps):
        """Restriction to the first ``n_steps`` steps (shares storage)."""
        if n_steps > self.grid.n_steps:
            raise ValueError("prefix longer than trajectory")
        return Trajectory(
            spec=self.spec,
            grid=TimeGrid(self.grid.dt, n_steps),
            g=self.g[: n_steps + 1],
            i_int=self.i_int[: n_steps + 1],
            params_label=self.params_label,
        )


def history_integral(spec, g_samples, step, dt):
    """Memory integral at ``step`` from samples G(0)..G(step dt)."""
    g_samples = np.asarray(g_samples, dtype=np.complex128)
    if step > g_samples.shape[0] - 1 or step < 0:
        raise IndexError(
            f"step {step} out of range for {g_samples.shape[0]} samples"
        )
    return kernels().history_integral_raw(
        spec.kind_id, spec.params_vec, np.ascontiguousarray(g_samples[: step + 1]), dt
    )


def _check_state(g, step):
    if not np.isfinite(g).all():
        raise BlowUpError(step)


def solve_fe(spec, grid):
    """Forward Euler with Simpson history quadrature."""
    impl = kernels()
    kid, pvec = spec.kind_id, spec.params_vec
    n = spec.dim
    big_n = grid.n_steps
    dt = grid.dt
    g = np.empty((big_n + 1, n, n), np.complex128)
    i_arr = np.empty((big_n + 1, n, n), np.complex128)
    g[0] = spec.g0
    for i in range(big_n):
        i_arr[i] = impl.history_integral_raw(kid, pvec, g[: i + 1], dt)
        g[i + 1] = g[i] + dt * (streaming(spec, i * dt, g[i]) + i_arr[i])
        _check_state(g[i + 1], i + 1)
    i_arr[big_n] = impl.history_integral_raw(kid, pvec, g, dt)
    return Trajectory(spec=spec, grid=grid, g=g, i_int=i_arr)


def solve_ab3(spec, grid):
    """Third-order Adams-Bashforth with Simpson history quadrature.

    The first two steps are bootstrapped with an explicit second-order
    predictor-corrector (Heun) whose stages sit on grid points, so the
    history integral needed by each stage is available from the recorded
    samples plus the predicted state.
    """
    if grid.n_steps < 3:
        raise ValueError("AB3 needs at least 3 steps")
    impl = kernels()
    kid, pvec = spec.kind_id, spec.params_vec
    n = spec.dim
    big_n = grid.n_steps
    dt = grid.dt
    g = np.empty((big_n + 1, n, n), np.complex128)
    i_arr = np.empty((big_n + 1, n, n), np.complex128)
    d = np.empty((big_n + 1, n, n), np.complex128)
    g[0] = spec.g0
    i_arr[0] = 0.0
    d[0] = streaming(spec, 0.0, g[0]) + i_arr[0]
    scratch = np.empty((big_n + 1, n, n), np.complex128)
    for i in range(2):  # Heun startup
        t_next = (i + 1) * dt
        g_pred = g[i] + dt * d[i]
        scratch[: i + 1] = g[: i + 1]
        scratch[i + 1] = g_pred
        i_pred = impl.history_integral_raw(kid, pvec, scratch[: i + 2], dt)
        d_pred = streaming(spec, t_next, g_pred) + i_pred
        g[i + 1] = g[i] + 0.5 * dt * (d[i] + d_pred)
        _check_state(g[i + 1], i + 1)
        i_arr[i + 1] = impl.history_integral_raw(kid, pvec, g[: i + 2], dt)
        d[i + 1] = streaming(spec, t_next, g[i + 1]) + i_arr[i + 1]
    for i in range(2, big_n):
        g[i + 1] = g[i] + dt * (23.0 * d[i] - 16.0 * d[i - 1] + 5.0 * d[i - 2]) / 12.0
        _check_state(g[i + 1], i + 1)
        i_arr[i + 1] = impl.history_integral_raw(kid, pvec, g[: i + 2], dt)
        d[i + 1] = streaming(spec, (i + 1) * dt, g[i + 1]) + i_arr[i + 1]
    return Trajectory(spec=spec, grid=grid, g=g, i_int=i_arr)


def solve(spec, grid, method="ab3"):
    if method == "ab3":
        return solve_ab3(spec, grid)
    if method == "fe":
        return solve_fe(spec, grid)
    raise ValueError(f"unknown method {method!r}")


def max_error_vs_analytic(traj):
    """Max pointwise modulus error against the closed-form Dyson solution."""
    spec = traj.spec
    if spec.kind != "dyson":
        raise ValueError("analytic reference exists only for the dyson problem")
    ref = np.array(
        [dyson_analytic(spec.dyson, t) for t in traj.grid.times], np.complex128
    )
    return float(np.abs(traj.g[:, 0, 0] - ref).max())


def convergence_order(spec, method, dts, t_final):
    """Least-squares slope of log(error) vs log(dt) against the Dyson solution."""
    if spec.kind != "dyson":
        raise ValueError("convergence_order needs the dyson problem (analytic reference)")
    if len(dts) < 3:
        raise ValueError("need at least 3 step sizes")
    errs = []
    for dt in dts:
        steps = round(t_final / dt)
        if abs(steps * dt - t_final) > 1e-9 * t_final:
            raise ValueError(f"dt {dt} does not divide t_final {t_final}")
        traj = solve(spec, TimeGrid(dt, steps), method)
        errs.append(max_error_vs_analytic(traj))
    slope = np.polyfit(np.log(np.asarray(dts)), np.log(np.asarray(errs)), 1)[0]
    return float(slope)


def solver_order_probe(dt_ratio_errors):
    """Error-ratio helper used by convergence tests: e(dt)/e(dt/2) list."""
    return [
        dt_ratio_errors[i] / dt_ratio_errors[i + 1]
        for i in range(len(dt_ratio_errors) - 1)
    ]
