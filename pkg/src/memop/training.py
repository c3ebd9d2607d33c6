"""Dataset construction, training loops, validation, checkpoint state.

Two training modes mirror the data protocols used throughout:

* ``single``: full-sequence gradient per epoch on one trajectory, with a
  time-split validation tail.
* ``multi``: either a shuffled sweep over all mini-batches per epoch
  (``batch_mode="sweep"``) or one random batch drawn with replacement per
  epoch (``batch_mode="resample"``); validation on held-out trajectories.

All randomness is derived from ``default_rng([seed, tag, ...])`` streams so
a resumed run replays the exact batch order of an uninterrupted one.
"""

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import TrainingDivergedError
from .lstm import (
    adam_step,
    clip_gradients,
    cosine_lr,
    forward_outputs,
    grad_sequence,
    init_adam,
    mse_loss,
)
from .problems import DysonParams, ToyParams, dyson_problem, toy_problem
from .solver import TimeGrid, solve_ab3


@dataclass(frozen=True)
class ToyGridSpec:
    alpha_min: int = 1
    alpha_max: int = 20
    sigmas: tuple = (1.0, 2.0, 3.0, 4.0, 5.0)
    beta: float = 1.0


@dataclass(frozen=True)
class DysonRandomSpec:
    h_low: float = 1.0
    h_high: float = 10.0
    c: float = 1.0
    n_samples: int = 2000


@dataclass(frozen=True, eq=False)
class DatasetSpec:
    kind: str  # "toy_grid" | "dyson_random"
    grid: TimeGrid
    seed: int = 0
    toy_grid: ToyGridSpec | None = None
    dyson_random: DysonRandomSpec | None = None

    def __post_init__(self):
        if self.kind == "toy_grid":
            if self.toy_grid is None or self.dyson_random is not None:
                raise ValueError("toy_grid spec requires exactly the toy block")
        elif self.kind == "dyson_random":
            if self.dyson_random is None or self.toy_grid is not None:
                raise ValueError("dyson_random spec requires exactly the dyson block")
        else:
            raise ValueError(f"unknown dataset kind {self.kind!r}")


def dataset_points(ds):
    """Deterministic (label, ProblemSpec) list for a dataset spec.

    Toy grid: alpha lattice row-major, sigma ascending inside each point.
    Dyson: per-draw h sampled from a stream keyed by ``seed ^ index`` so
    points are reproducible independently of worker scheduling.
    """
    points = []
    if ds.kind == "toy_grid":
        tg = ds.toy_grid
        for a1 in range(tg.alpha_min, tg.alpha_max + 1):
            for a2 in range(tg.alpha_min, tg.alpha_max + 1):
                for s in tg.sigmas:
                    label = {
                        "alpha1": float(a1),
                        "alpha2": float(a2),
                        "sigma": float(s),
                        "beta": float(tg.beta),
                    }
                    spec = toy_problem(ToyParams(a1, a2, s, tg.beta))
                    points.append((label, spec))
    else:
        dr = ds.dyson_random
        for i in range(dr.n_samples):
            rng = np.random.default_rng(ds.seed ^ i)
            h = float(rng.uniform(dr.h_low, dr.h_high))
            label = {"h": h, "c": float(dr.c)}
            points.append((label, dyson_problem(DysonParams(h, dr.c))))
    return points


def _solve_point(args):
    label, spec, grid = args
    traj = solve_ab3(spec, grid)
    traj.params_label = label
    return traj


def worker_count(requested=None):
    """Worker cap: explicit argument, else MEMOP_THREADS, else 1."""
    if requested is None:
        requested = int(os.environ.get("MEMOP_THREADS", "1"))
    return max(1, min(requested, os.cpu_count() or 1))


def build_dataset(ds, workers=None):
    """One AB3 ground-truth trajectory per parameter point."""
    points = dataset_points(ds)
    jobs = [(label, spec, ds.grid) for label, spec in points]
    n_workers = worker_count(workers)
    if n_workers <= 1:
        return [_solve_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_solve_point, jobs, chunksize=8))


# ---------------------------------------------------------------------------
# Validation policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeSplit:
    frac: float = 0.8


@dataclass(frozen=True)
class HeldOutTrajectories:
    count: int


def time_split_index(n_steps, frac):
    """Last grid index included in the training window."""
    return int(np.floor(frac * n_steps))


def validate(model, data, policy):
    """Validation MSE under either policy.

    TimeSplit expects a single trajectory (loss on the tail past the split);
    HeldOutTrajectories expects the held-out list (mean full-sequence loss).
    """
    if isinstance(policy, TimeSplit):
        traj = data[0] if isinstance(data, (list, tuple)) else data
        x = traj.inputs()
        y = traj.targets()
        k = time_split_index(traj.grid.n_steps, policy.frac)
        if k + 1 >= x.shape[0]:
            raise ValueError("empty validation slice")
        out, _ = forward_outputs(model, x)
        return mse_loss(out[k + 1 :], y[k + 1 :])
    if isinstance(policy, HeldOutTrajectories):
        trajs = list(data)
        if not trajs:
            raise ValueError("empty validation set")
        losses = []
        for traj in trajs:
            out, _ = forward_outputs(model, traj.inputs())
            losses.append(mse_loss(out, traj.targets()))
        return float(np.mean(losses))
    raise TypeError(f"unknown validation policy {policy!r}")


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    mode: str = "single"  # "single" | "multi"
    epochs: int = 750
    batch_size: int = 128
    batch_mode: str = "sweep"  # "sweep" | "resample"
    batches_per_epoch: int = 1  # resample mode: random batches drawn per epoch
    lr0: float = 0.01
    clip_norm: float = 5.0
    validation: str = "time_split"  # "time_split" | "held_out"
    val_frac: float = 0.8
    val_count: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("single", "multi"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.batch_mode not in ("sweep", "resample"):
            raise ValueError(f"unknown batch_mode {self.batch_mode!r}")
        if self.validation not in ("time_split", "held_out"):
            raise ValueError(f"unknown validation {self.validation!r}")
        if self.batches_per_epoch < 1:
            raise ValueError("batches_per_epoch must be >= 1")


@dataclass
class TrainReport:
    train_loss: np.ndarray
    val_loss: np.ndarray
    lrs: np.ndarray
    wall_clock_seconds: float
    checkpoint_path: str | None = None


def heldout_split(n_trajectories, count, seed):
    """Seeded disjoint train/validation index split (validation last)."""
    if not 0 < count < n_trajectories:
        raise ValueError("held-out count must be in (0, n_trajectories)")
    perm = np.random.default_rng([seed, 1]).permutation(n_trajectories)
    return np.sort(perm[count:]), np.sort(perm[:count])


def sequence_pairs(data, target="integral"):
    """(inputs, targets) arrays per trajectory.

    ``integral``: G(t) -> I(t) over the full grid.
    ``next_state``: G(i dt) -> G((i+1) dt), one step shorter.
    """
    pairs = []
    for traj in data:
        x = traj.inputs()
        if target == "integral":
            pairs.append((x, traj.targets()))
        elif target == "next_state":
            pairs.append((np.ascontiguousarray(x[:-1]), np.ascontiguousarray(x[1:])))
        else:
            raise ValueError(f"unknown target {target!r}")
    return pairs


def _check_finite(value, epoch):
    if not np.isfinite(value):
        raise TrainingDivergedError(epoch)


def train(model, data, cfg, *, opt=None, start_epoch=0, stop_epoch=None,
          history=None, target="integral"):
    """Fit the model in place; returns the per-epoch loss report.

    ``opt``/``start_epoch``/``history`` allow bit-exact resumption from a
    checkpoint: epoch e always draws its batch order from
    ``default_rng([seed, 2, e])`` and its learning rate from the full
    ``cfg.epochs`` cosine schedule, regardless of where the run started or
    stopped.  ``stop_epoch`` interrupts after that epoch (exclusive); the
    report then covers only the completed epochs.
    """
    t_begin = time.perf_counter()
    if opt is None:
        opt = init_adam(model)
    n_epochs = cfg.epochs
    stop = n_epochs if stop_epoch is None else stop_epoch
    if not start_epoch <= stop <= n_epochs:
        raise ValueError("stop_epoch out of range")
    train_losses = np.full(stop, np.nan)
    val_losses = np.full(stop, np.nan)
    lrs = np.full(stop, np.nan)
    if history is not None:
        h_tr, h_val, h_lr = history
        train_losses[: len(h_tr)] = h_tr
        val_losses[: len(h_val)] = h_val
        lrs[: len(h_lr)] = h_lr

    if cfg.mode == "single":
        if len(data) != 1:
            raise ValueError("single mode expects exactly one trajectory")
        if cfg.validation != "time_split":
            raise ValueError("single mode uses time_split validation")
        (x, y), = sequence_pairs(data, target)
        k = time_split_index(x.shape[0] - 1, cfg.val_frac)
        for epoch in range(start_epoch, stop):
            lr = cosine_lr(epoch, n_epochs, cfg.lr0)
            loss_tr, loss_val, grads = grad_sequence(model, x, y, k)
            _check_finite(loss_tr, epoch)
            clip_gradients(grads, cfg.clip_norm)
            adam_step(model, grads, opt, lr)
            train_losses[epoch] = loss_tr
            val_losses[epoch] = loss_val
            lrs[epoch] = lr
    else:
        if cfg.validation != "held_out":
            raise ValueError("multi mode uses held_out validation")
        if cfg.batch_size > len(data):
            raise ValueError("batch size exceeds dataset size")
        train_idx, val_idx = heldout_split(len(data), cfg.val_count, cfg.seed)
        pairs = sequence_pairs(data, target)
        val_pairs = [pairs[i] for i in val_idx]
        for epoch in range(start_epoch, stop):
            lr = cosine_lr(epoch, n_epochs, cfg.lr0)
            rng = np.random.default_rng([cfg.seed, 2, epoch])
            if cfg.batch_mode == "sweep":
                order = train_idx[rng.permutation(len(train_idx))]
                batches = [
                    order[i : i + cfg.batch_size]
                    for i in range(0, len(order), cfg.batch_size)
                ]
            else:
                batches = [
                    rng.choice(train_idx, size=cfg.batch_size, replace=True)
                    for _ in range(cfg.batches_per_epoch)
                ]
            epoch_losses = []
            for batch in batches:
                acc = None
                for idx in batch:
                    x, y = pairs[idx]
                    loss_tr, _, grads = grad_sequence(model, x, y)
                    epoch_losses.append(loss_tr)
                    if acc is None:
                        acc = grads
                    else:
                        for a, g in zip(acc, grads):
                            a += g
                scale = 1.0 / len(batch)
                for a in acc:
                    a *= scale
                clip_gradients(acc, cfg.clip_norm)
                adam_step(model, acc, opt, lr)
            train_losses[epoch] = float(np.mean(epoch_losses))
            _check_finite(train_losses[epoch], epoch)
            vloss = []
            for (xv, yv) in val_pairs:
                out, _ = forward_outputs(model, xv)
                vloss.append(mse_loss(out, yv))
            val_losses[epoch] = float(np.mean(vloss))
            lrs[epoch] = lr

    wall = time.perf_counter() - t_begin
    return TrainReport(
        train_loss=train_losses,
        val_loss=val_losses,
        lrs=lrs,
        wall_clock_seconds=wall,
    )
