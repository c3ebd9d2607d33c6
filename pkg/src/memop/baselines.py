"""Comparison methods: direct next-state learning and DMD extrapolation.

The direct baseline reuses the exact network/optimizer stack but predicts
G((i+1)dt) from G(i dt), so parameter counts match and only the learning
target differs.  The DMD baseline fits a best-fit linear advance operator
on time-delay (Hankel) embedded snapshots of the complex state and
extrapolates with its eigen-decomposition.
"""

import time
from dataclasses import dataclass

import numpy as np

from .errors import DmdRankError, ExtrapolationBlowUpError
from .extrapolation import BLOWUP_GUARD, ExtrapolationResult, RnnIntegralProvider
from .numerics import flatten_ri_stack
from .solver import TimeGrid
from .training import train


def train_direct(model, data, cfg):
    """Same architecture/optimizer/schedule, targets shifted to G(t + dt)."""
    return train(model, data, cfg, target="next_state")


def extrapolate_direct(model, prefix, t_final):
    """Recursive next-state prediction; no ODE solver in the loop."""
    t_begin = time.perf_counter()
    dt = prefix.grid.dt
    k_idx = prefix.grid.n_steps
    n_total = round(t_final / dt)
    if abs(n_total * dt - t_final) > 1e-9 * max(1.0, abs(t_final)):
        raise ValueError(f"t_final {t_final} is not on the dt={dt} grid")
    if n_total < k_idx:
        raise ValueError("t_final is shorter than the prefix horizon")
    dim = prefix.spec.dim
    g = np.empty((n_total + 1, dim, dim), np.complex128)
    g[: k_idx + 1] = prefix.g
    provider = model if hasattr(model, "warm") else RnnIntegralProvider(model)
    preds = provider.warm(prefix.g)  # preds[j] estimates G((j+1) dt)
    cur_pred = preds[-1]
    status = 0
    done = 0
    n_new = n_total - k_idx
    for m in range(n_new):
        nxt = cur_pred
        g[k_idx + 1 + m] = nxt
        bad = ~np.isfinite(nxt) | (np.abs(nxt.real) >= BLOWUP_GUARD) | (
            np.abs(nxt.imag) >= BLOWUP_GUARD
        )
        if bad.any():
            status = 1
            break
        done = m + 1
        if m + 1 < n_new:
            cur_pred = provider.advance(nxt)
    wall = time.perf_counter() - t_begin
    if status != 0:
        n_ok = k_idx + done
        partial = ExtrapolationResult(
            grid=TimeGrid(dt, n_ok),
            g=g[: n_ok + 1].copy(),
            i_hat=np.zeros((n_ok + 1, dim, dim), np.complex128),
            training_horizon_index=k_idx,
            wall_clock_seconds=wall,
        )
        raise ExtrapolationBlowUpError(step=n_ok + 1, partial=partial)
    return ExtrapolationResult(
        grid=TimeGrid(dt, n_total),
        g=g,
        i_hat=np.zeros((n_total + 1, dim, dim), np.complex128),
        training_horizon_index=k_idx,
        wall_clock_seconds=wall,
    )


# ---------------------------------------------------------------------------
# Dynamic mode decomposition on delay-embedded complex snapshots
# ---------------------------------------------------------------------------

RANK_THRESHOLD = 1e-10


@dataclass(eq=False)
class DmdModel:
    rank: int
    delay: int
    modes: np.ndarray  # (delay * n^2, rank) complex
    eigenvalues: np.ndarray  # (rank,) complex
    amplitudes: np.ndarray  # (rank,) complex
    dt: float
    dim: int
    n_samples: int  # training sample count; extrapolation starts here


def dmd_fit(g_samples, dt, rank=None, delay=32):
    """Exact DMD of the delay-embedded complex state sequence.

    ``rank=None`` keeps every singular value above 1e-10 relative; asking
    for more than the numerical rank raises :class:`DmdRankError`.
    """
    g_samples = np.asarray(g_samples, np.complex128)
    m_samples, dim = g_samples.shape[0], g_samples.shape[1]
    feats = g_samples.reshape(m_samples, dim * dim)
    if delay < 1:
        raise ValueError("delay must be >= 1")
    n_snap = m_samples - delay + 1
    if n_snap < 2:
        raise ValueError("not enough samples for the requested delay")
    z = np.empty((delay * dim * dim, n_snap), np.complex128)
    for j in range(delay):
        z[j * dim * dim : (j + 1) * dim * dim, :] = feats[j : j + n_snap].T
    x = z[:, :-1]
    y = z[:, 1:]
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    if s[0] == 0.0:
        raise ValueError("zero snapshot matrix")
    nrank = int(np.sum(s > RANK_THRESHOLD * s[0]))
    if rank is None:
        rank = nrank
    elif rank > nrank:
        raise DmdRankError(rank, nrank, s)
    ur = u[:, :rank]
    sr = s[:rank]
    vr = vh[:rank].conj().T
    a_tilde = ur.conj().T @ y @ (vr / sr)
    lam, w = np.linalg.eig(a_tilde)
    modes = y @ (vr / sr) @ w
    amplitudes, *_ = np.linalg.lstsq(modes, z[:, 0], rcond=None)
    return DmdModel(
        rank=int(rank),
        delay=int(delay),
        modes=modes,
        eigenvalues=lam,
        amplitudes=amplitudes,
        dt=float(dt),
        dim=int(dim),
        n_samples=int(m_samples),
    )


def dmd_predict(model, start, count):
    """States g_k for k = start .. start+count-1 from the fitted modes."""
    nn = model.dim * model.dim
    out = np.empty((count, model.dim, model.dim), np.complex128)
    lam_k = model.eigenvalues.astype(np.complex128) ** start
    coeff = model.amplitudes * lam_k
    head = model.modes[:nn]
    for j in range(count):
        out[j] = (head @ coeff).reshape(model.dim, model.dim)
        coeff = coeff * model.eigenvalues
    return out


def dmd_reconstruct(model, count=None):
    """Reproduce the training samples (sanity check of the fit)."""
    if count is None:
        count = model.n_samples
    return dmd_predict(model, 0, count)


def dmd_extrapolate(model, n_future):
    """Continue past the training window for ``n_future`` steps."""
    return dmd_predict(model, model.n_samples, n_future)
