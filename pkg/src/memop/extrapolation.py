"""Hybrid extrapolation: ODE stepping with a model-supplied memory integral.

The trained network is first warmed once over the known prefix (producing
its integral estimates there), then every new step feeds the freshly
computed state back through one recurrent advance, so the per-step cost is
constant and the total cost linear in the horizon.  An exact-quadrature
provider with the same interface isolates the stepping machinery from
learning quality in tests.
"""

import time
from dataclasses import dataclass

import numpy as np

from .backend import active_name, kernels
from .errors import ExtrapolationBlowUpError
from .lstm import RnnModel
from .numerics import flatten_ri, flatten_ri_stack, unflatten_ri
from .solver import TimeGrid, solve, solve_ab3
from .problems import streaming

BLOWUP_GUARD = 1.0e6

_STEPPER_IDS = {"fe": 0, "ab3": 1}


@dataclass(eq=False)
class ExtrapolationResult:
    grid: TimeGrid
    g: np.ndarray
    i_hat: np.ndarray
    training_horizon_index: int
    wall_clock_seconds: float


class RnnIntegralProvider:
    """Stateful wrapper: flattens states, advances the recurrent stack."""

    def __init__(self, model):
        self.model = model
        hs = model.hidden_size
        self._state = [np.zeros(hs) for _ in range(4)]

    def warm(self, g_stack):
        """Consume the prefix states; returns integral estimates over it."""
        x = flatten_ri_stack(g_stack)
        out, h0, c0, h1, c1 = kernels().seq_forward_infer(*self.model.packed(), x)
        self._state = [h0, c0, h1, c1]
        dim = g_stack.shape[1]
        return (out[:, : dim * dim] + 1j * out[:, dim * dim :]).reshape(-1, dim, dim)

    def advance(self, g):
        dim = g.shape[0]
        y = kernels().cell_advance(
            *self.model.packed(), flatten_ri(g), *self._state
        )
        return unflatten_ri(y, dim)


class QuadratureOracle:
    """Exact integral provider: full-history Simpson quadrature each step."""

    def __init__(self, spec, dt):
        self.spec = spec
        self.dt = dt
        self._g = []

    def warm(self, g_stack):
        impl = kernels()
        self._g = [g_stack[j].copy() for j in range(g_stack.shape[0])]
        dim = g_stack.shape[1]
        out = np.empty((len(self._g), dim, dim), np.complex128)
        for j in range(len(self._g)):
            out[j] = impl.history_integral_raw(
                self.spec.kind_id, self.spec.params_vec, g_stack[: j + 1], self.dt
            )
        return out

    def advance(self, g):
        self._g.append(np.asarray(g, np.complex128).copy())
        stack = np.asarray(self._g)
        return kernels().history_integral_raw(
            self.spec.kind_id, self.spec.params_vec, stack, self.dt
        )


def _resolve_steps(prefix, t_final):
    dt = prefix.grid.dt
    n_total = round(t_final / dt)
    if abs(n_total * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ValueError(f"t_final {t_final} is not on the dt={dt} grid")
    if n_total < prefix.grid.n_steps:
        raise ValueError("t_final is shorter than the prefix horizon")
    return n_total


def extrapolate(model, prefix, t_final, stepper="ab3"):
    """Extend ``prefix`` to ``t_final`` with the model closing the memory term.

    ``model`` is either an :class:`RnnModel` or any object implementing the
    ``warm(g_stack) / advance(g)`` provider interface.  Raises
    :class:`ExtrapolationBlowUpError` (carrying the partial result) if any
    state entry leaves the +-1e6 guard box.
    """
    if stepper not in _STEPPER_IDS:
        raise ValueError(f"unknown stepper {stepper!r}")
    t_begin = time.perf_counter()
    spec = prefix.spec
    dt = prefix.grid.dt
    k_idx = prefix.grid.n_steps
    n_total = _resolve_steps(prefix, t_final)
    dim = spec.dim

    if isinstance(model, RnnModel):
        if model.input_size != 2 * dim * dim:
            raise ValueError(
                f"model width {model.input_size} does not match problem dim {dim}"
            )
        provider = RnnIntegralProvider(model)
    else:
        provider = model

    g = np.empty((n_total + 1, dim, dim), np.complex128)
    i_hat = np.empty((n_total + 1, dim, dim), np.complex128)
    g[: k_idx + 1] = prefix.g
    i_hat[: k_idx + 1] = provider.warm(prefix.g)

    n_new = n_total - k_idx
    status = 0
    done = 0
    if n_new > 0:
        if stepper == "ab3" and k_idx < 2:
            raise ValueError("ab3 extrapolation needs a prefix of at least 2 steps")
        d_hist = []
        for back in range(3 if stepper == "ab3" else 1):
            j = k_idx - back
            d_hist.append(streaming(spec, j * dt, g[j]) + i_hat[j])
        use_fast = isinstance(model, RnnModel) and active_name() == "numba"
        if use_fast:
            impl = kernels()
            d0 = d_hist[0]
            d1 = d_hist[1] if stepper == "ab3" else d_hist[0]
            d2 = d_hist[2] if stepper == "ab3" else d_hist[0]
            g_new, i_new, status, done = impl.extrap_drive(
                *model.packed(),
                *provider._state,
                spec.kind_id, spec.params_vec, dt, k_idx * dt,
                _STEPPER_IDS[stepper],
                g[k_idx], d0, d1, d2, n_new, BLOWUP_GUARD,
            )
            g[k_idx + 1 :] = g_new
            i_hat[k_idx + 1 :] = i_new
        else:
            cur = g[k_idx]
            for m in range(n_new):
                t_next = (k_idx + m + 1) * dt
                if stepper == "ab3":
                    nxt = cur + dt * (
                        23.0 * d_hist[0] - 16.0 * d_hist[1] + 5.0 * d_hist[2]
                    ) / 12.0
                else:
                    nxt = cur + dt * d_hist[0]
                g[k_idx + 1 + m] = nxt
                bad = ~np.isfinite(nxt) | (np.abs(nxt.real) >= BLOWUP_GUARD) | (
                    np.abs(nxt.imag) >= BLOWUP_GUARD
                )
                if bad.any():
                    status = 1
                    break
                ihat = provider.advance(nxt)
                i_hat[k_idx + 1 + m] = ihat
                d_new = streaming(spec, t_next, nxt) + ihat
                if stepper == "ab3":
                    d_hist = [d_new, d_hist[0], d_hist[1]]
                else:
                    d_hist = [d_new]
                cur = nxt
                done = m + 1

    wall = time.perf_counter() - t_begin
    if status != 0:
        n_ok = k_idx + done
        partial = ExtrapolationResult(
            grid=TimeGrid(dt, n_ok),
            g=g[: n_ok + 1].copy(),
            i_hat=i_hat[: n_ok + 1].copy(),
            training_horizon_index=k_idx,
            wall_clock_seconds=wall,
        )
        raise ExtrapolationBlowUpError(step=n_ok + 1, partial=partial)
    return ExtrapolationResult(
        grid=TimeGrid(dt, n_total),
        g=g,
        i_hat=i_hat,
        training_horizon_index=k_idx,
        wall_clock_seconds=wall,
    )


def runtime_profile(model, spec, horizons, dt, reference="ab3"):
    """Wall-clock of hybrid extrapolation vs a full history-quadrature solve.

    The prefix spans the first horizon, so the first row times the warm
    pass alone.  A warm-up extrapolation and solve run first (excluded) so
    JIT compilation never lands in a timed region.  The reference solver
    defaults to AB3+Simpson; forward Euler has the same O(T^2) cost shape
    but destabilizes on the long-horizon toy dynamics, so it is opt-in.
    """
    horizons = list(horizons)
    if any(b <= a for a, b in zip(horizons, horizons[1:])):
        raise ValueError("horizons must be strictly ascending")
    prefix_steps = round(horizons[0] / dt)
    prefix = solve_ab3(spec, TimeGrid(dt, prefix_steps))

    extrapolate(model, prefix, horizons[0] + 64 * dt)  # warm-up, not timed
    solve(spec, TimeGrid(dt, 64), reference)

    rows = []
    for h in horizons:
        t0 = time.perf_counter()
        extrapolate(model, prefix, h)
        hybrid_s = time.perf_counter() - t0
        t0 = time.perf_counter()
        solve(spec, TimeGrid(dt, round(h / dt)), reference)
        solver_s = time.perf_counter() - t0
        rows.append((float(h), hybrid_s, solver_s))
    return rows
