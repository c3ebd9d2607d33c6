"""Command-line entry point.

    memop generate|train|extrapolate|benchmark|baseline
          --config <path> [--out <dir>] [--seed <u64>] [--resume <ckpt>]
          [--dump-config]

Exit codes: 0 success, 2 config/validation error, 3 solver blow-up,
4 training NaN, 5 extrapolation blow-up.  ``MEMOP_THREADS`` caps dataset
generation workers; ``MEMOP_BACKEND`` selects the compute backend.
"""

import argparse
import os
import sys

import numpy as np

from . import fileio
from .baselines import dmd_extrapolate, dmd_fit, extrapolate_direct, train_direct
from .config import ConfigError, dump_config, load_config
from .errors import (
    BlowUpError,
    ExtrapolationBlowUpError,
    MemopError,
    TrainingDivergedError,
)
from .extrapolation import extrapolate, runtime_profile
from .lstm import init_adam, init_model
from .problems import (
    DysonParams,
    ToyParams,
    dyson_analytic,
    dyson_problem,
    toy_problem,
)
from .solver import TimeGrid, Trajectory, solve_ab3
from .training import (
    DatasetSpec,
    DysonRandomSpec,
    ToyGridSpec,
    TrainConfig,
    build_dataset,
    train,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER_BLOWUP = 3
EXIT_TRAIN_NAN = 4
EXIT_EXTRAP_BLOWUP = 5

PLOT_TEMPLATE = """\
#!/usr/bin/env python3
# Plot template for memop result CSVs (edit freely).
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "result.csv"
with open(path) as fh:
    rows = list(csv.DictReader(fh))
t = [float(r["t"]) for r in rows]
cols = [c for c in rows[0] if c.startswith("re_G")]
fig, axes = plt.subplots(len(cols), 1, sharex=True, squeeze=False)
for ax, col in zip(axes[:, 0], cols):
    ax.plot(t, [float(r[col]) for r in rows], lw=0.8)
    ax.set_ylabel(col)
axes[-1, 0].set_xlabel("t")
plt.tight_layout()
plt.show()
"""


def _resolve_problem(cfg):
    kind = cfg.get("problem.kind")
    if kind == "toy":
        return toy_problem(
            ToyParams(
                cfg.get("problem.alpha1"),
                cfg.get("problem.alpha2"),
                cfg.get("problem.sigma"),
                cfg.get("problem.beta"),
            )
        )
    return dyson_problem(DysonParams(cfg.get("problem.h"), cfg.get("problem.c")))


def _resolve_grid(cfg):
    return TimeGrid(cfg.get("grid.dt"), cfg.get("grid.n_steps"))


def _resolve_train_config(cfg, seed):
    return TrainConfig(
        mode=cfg.get("train.mode"),
        epochs=cfg.get("train.epochs"),
        batch_size=cfg.get("train.batch_size"),
        batch_mode=cfg.get("train.batch_mode"),
        lr0=cfg.get("train.lr0"),
        clip_norm=cfg.get("train.clip_norm"),
        validation=cfg.get("train.validation"),
        val_frac=cfg.get("train.val_frac"),
        val_count=cfg.get("train.val_count"),
        seed=seed,
    )


def _dataset_dir(cfg, out_dir):
    explicit = cfg.get("paths.dataset")
    return explicit if explicit else os.path.join(out_dir, "dataset")


def _checkpoint_path(cfg, out_dir, resume):
    if resume:
        return resume
    explicit = cfg.get("paths.checkpoint")
    return explicit if explicit else os.path.join(out_dir, "model.ckpt")


def _generate_trajectories(cfg, seed):
    kind = cfg.get("dataset.kind")
    grid = _resolve_grid(cfg)
    if kind == "single":
        spec = _resolve_problem(cfg)
        traj = solve_ab3(spec, grid)
        if spec.kind == "toy":
            p = spec.toy
            traj.params_label = {
                "alpha1": p.alpha1, "alpha2": p.alpha2,
                "sigma": p.sigma, "beta": p.beta,
            }
        else:
            traj.params_label = {"h": spec.dyson.h, "c": spec.dyson.c}
        return cfg.get("problem.kind"), grid, [traj]
    if kind == "toy_grid":
        ds = DatasetSpec(
            kind="toy_grid",
            grid=grid,
            seed=seed,
            toy_grid=ToyGridSpec(
                alpha_min=cfg.get("dataset.alpha_min"),
                alpha_max=cfg.get("dataset.alpha_max"),
                sigmas=cfg.get("dataset.sigmas"),
                beta=cfg.get("dataset.beta"),
            ),
        )
        return "toy", grid, build_dataset(ds)
    ds = DatasetSpec(
        kind="dyson_random",
        grid=grid,
        seed=seed,
        dyson_random=DysonRandomSpec(
            h_low=cfg.get("dataset.h_low"),
            h_high=cfg.get("dataset.h_high"),
            c=cfg.get("dataset.c"),
            n_samples=cfg.get("dataset.n_samples"),
        ),
    )
    return "dyson", grid, build_dataset(ds)


def cmd_generate(cfg, out_dir, seed):
    kind, grid, trajs = _generate_trajectories(cfg, seed)
    ds_dir = _dataset_dir(cfg, out_dir)
    entries = []
    for idx, traj in enumerate(trajs):
        fname = f"traj_{idx:05d}.csv"
        fileio.write_trajectory_csv(
            os.path.join(ds_dir, fname), traj.grid.times, traj.g, traj.i_int
        )
        entries.append((fname, traj.params_label))
    fileio.write_manifest(
        os.path.join(ds_dir, "manifest.txt"), kind, grid, seed, entries
    )
    print(f"wrote {len(trajs)} trajectories to {ds_dir}")
    return EXIT_OK


def _load_dataset(ds_dir):
    meta, entries = fileio.read_manifest(os.path.join(ds_dir, "manifest.txt"))
    kind = meta["problem.kind"]
    grid = TimeGrid(float(meta["grid.dt"]), int(meta["grid.n_steps"]))
    trajs = []
    for fname, label in entries:
        times, g, i_int, _ = fileio.read_trajectory_csv(os.path.join(ds_dir, fname))
        if kind == "toy":
            spec = toy_problem(
                ToyParams(label["alpha1"], label["alpha2"], label["sigma"], label["beta"])
            )
        else:
            spec = dyson_problem(DysonParams(label["h"], label["c"]))
        trajs.append(
            Trajectory(spec=spec, grid=grid, g=g, i_int=i_int, params_label=label)
        )
    return kind, grid, trajs


def cmd_train(cfg, out_dir, seed, resume, target="integral"):
    ds_dir = _dataset_dir(cfg, out_dir)
    if not os.path.exists(os.path.join(ds_dir, "manifest.txt")):
        raise ConfigError(
            f"dataset not found at {ds_dir} (run 'memop generate' first)",
            field="paths.dataset",
        )
    kind, grid, trajs = _load_dataset(ds_dir)
    width = 2 * trajs[0].spec.dim ** 2
    hidden = cfg.get("model.hidden_size")
    if cfg.get("model.num_layers") != 2:
        raise ConfigError("exactly 2 LSTM layers are supported", field="model.num_layers")
    tc = _resolve_train_config(cfg, seed)
    if resume:
        model, opt, meta, epoch_next, history = fileio.load_checkpoint(resume)
        if model.input_size != width:
            raise ConfigError(
                f"checkpoint width {model.input_size} does not match dataset width {width}",
                field="paths.checkpoint",
            )
        report = train(
            model, trajs, tc, opt=opt, start_epoch=epoch_next,
            history=history, target=target,
        )
    else:
        model = init_model(width, hidden, seed)
        if model.input_size != width:
            raise ConfigError("model width mismatch", field="model.hidden_size")
        opt = init_adam(model)
        report = train(model, trajs, tc, opt=opt, target=target)
    ckpt = _checkpoint_path(cfg, out_dir, None)
    meta = {
        "clip_norm": tc.clip_norm,
        "lr0": tc.lr0,
        "epochs_total": tc.epochs,
        "mode": tc.mode,
        "problem_kind": kind,
    }
    fileio.save_checkpoint(
        ckpt, model, opt, meta, tc.epochs,
        (report.train_loss, report.val_loss, report.lrs),
    )
    report.checkpoint_path = ckpt
    report_path = os.path.join(out_dir, "train_report.csv")
    fileio.write_report_csv(report_path, report)
    print(f"final train loss {report.train_loss[-1]:.6e}; checkpoint {ckpt}")
    return EXIT_OK


def _reference_solution(cfg, spec, grid_total):
    mode = cfg.get("extrapolation.reference")
    if mode == "auto":
        mode = "analytic" if spec.kind == "dyson" else "solver"
    if mode == "none":
        return None
    if mode == "analytic":
        if spec.kind != "dyson":
            raise ConfigError(
                "analytic reference exists only for the dyson problem",
                field="extrapolation.reference",
            )
        ref = np.array(
            [dyson_analytic(spec.dyson, t) for t in grid_total.times], np.complex128
        ).reshape(-1, 1, 1)
        return ref
    return solve_ab3(spec, grid_total).g


def _write_extrapolation(out_dir, stem, cfg, spec, result):
    k = result.training_horizon_index
    flags = np.zeros(result.grid.n_steps + 1, int)
    flags[k + 1 :] = 1
    path = os.path.join(out_dir, f"{stem}.csv")
    fileio.write_trajectory_csv(
        path, result.grid.times, result.g, result.i_hat, extrapolated=flags
    )
    print(f"wrote {path}")
    ref = _reference_solution(cfg, spec, result.grid)
    if ref is not None:
        err = np.abs(result.g - ref[: result.grid.n_steps + 1])
        err_path = os.path.join(out_dir, f"{stem}_error.csv")
        fileio.write_error_csv(err_path, result.grid.times, err)
        print(f"wrote {err_path}")
    fileio.atomic_write_text(os.path.join(out_dir, "plot_result.py"), PLOT_TEMPLATE)


def cmd_extrapolate(cfg, out_dir, seed, resume):
    ckpt = _checkpoint_path(cfg, out_dir, resume)
    model, _, _, _, _ = fileio.load_checkpoint(ckpt)
    spec = _resolve_problem(cfg)
    if model.input_size != 2 * spec.dim**2:
        raise ConfigError(
            f"checkpoint width {model.input_size} does not match problem dim {spec.dim}",
            field="paths.checkpoint",
        )
    grid = _resolve_grid(cfg)
    prefix = solve_ab3(spec, grid)
    t_final = cfg.get("extrapolation.t_final")
    stepper = cfg.get("extrapolation.stepper")
    try:
        result = extrapolate(model, prefix, t_final, stepper=stepper)
    except ExtrapolationBlowUpError as exc:
        _write_extrapolation(out_dir, "result_partial", cfg, spec, exc.partial)
        print(f"extrapolation blew up at step {exc.step}; partial output kept")
        return EXIT_EXTRAP_BLOWUP
    _write_extrapolation(out_dir, "result", cfg, spec, result)
    return EXIT_OK


def cmd_benchmark(cfg, out_dir, seed, resume):
    ckpt = _checkpoint_path(cfg, out_dir, resume)
    model, _, _, _, _ = fileio.load_checkpoint(ckpt)
    spec = _resolve_problem(cfg)
    rows = runtime_profile(
        model, spec, cfg.get("benchmark.horizons"), cfg.get("grid.dt")
    )
    path = os.path.join(out_dir, "bench.csv")
    fileio.write_bench_csv(path, rows)
    for (h, hy, so) in rows:
        print(f"T={h:g}: hybrid {hy:.4f}s  solver {so:.4f}s")
    for i in range(1, len(rows)):
        print(
            f"ratio {rows[i - 1][0]:g}->{rows[i][0]:g}: "
            f"hybrid {rows[i][1] / rows[i - 1][1]:.2f}  "
            f"solver {rows[i][2] / rows[i - 1][2]:.2f}"
        )
    print(f"wrote {path}")
    return EXIT_OK


def cmd_baseline(cfg, out_dir, seed, resume):
    mode = cfg.get("baseline.mode")
    spec = _resolve_problem(cfg)
    grid = _resolve_grid(cfg)
    t_final = cfg.get("extrapolation.t_final")
    prefix = solve_ab3(spec, grid)
    if mode == "dmd":
        rank = cfg.get("baseline.dmd_rank") or None
        dmd = dmd_fit(prefix.g, grid.dt, rank=rank, delay=cfg.get("baseline.dmd_delay"))
        n_future = round(t_final / grid.dt) - grid.n_steps
        future = dmd_extrapolate(dmd, n_future)
        n_total = grid.n_steps + n_future
        g = np.concatenate([prefix.g, future], axis=0)
        result_grid = TimeGrid(grid.dt, n_total)
        flags = np.zeros(n_total + 1, int)
        flags[grid.n_steps + 1 :] = 1
        path = os.path.join(out_dir, "baseline_dmd.csv")
        fileio.write_trajectory_csv(
            path, result_grid.times, g,
            np.zeros_like(g), extrapolated=flags,
        )
        fileio.save_dmd(os.path.join(out_dir, "dmd_model.txt"), dmd)
        print(f"wrote {path}")
        return EXIT_OK
    # direct next-state baseline: train on the dataset, then recurse
    ds_dir = _dataset_dir(cfg, out_dir)
    if not os.path.exists(os.path.join(ds_dir, "manifest.txt")):
        raise ConfigError(
            f"dataset not found at {ds_dir} (run 'memop generate' first)",
            field="paths.dataset",
        )
    _, _, trajs = _load_dataset(ds_dir)
    width = 2 * trajs[0].spec.dim ** 2
    model = init_model(width, cfg.get("model.hidden_size"), seed)
    tc = _resolve_train_config(cfg, seed)
    train_direct(model, trajs, tc)
    try:
        result = extrapolate_direct(model, prefix, t_final)
    except ExtrapolationBlowUpError as exc:
        _write_extrapolation(out_dir, "baseline_direct_partial", cfg, spec, exc.partial)
        print(f"direct baseline blew up at step {exc.step}; partial output kept")
        return EXIT_EXTRAP_BLOWUP
    _write_extrapolation(out_dir, "baseline_direct", cfg, spec, result)
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="memop",
        description="Learn IDE memory integrals with an LSTM and extrapolate dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("generate", "train", "extrapolate", "benchmark", "baseline"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--resume", default=None)
        p.add_argument("--dump-config", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.set("seed", args.seed)
        if args.out is not None:
            cfg.set("output_dir", args.out)
        if args.dump_config:
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        seed = cfg.get("seed")
        out_dir = cfg.get("output_dir")
        os.makedirs(out_dir, exist_ok=True)
        if args.command == "generate":
            return cmd_generate(cfg, out_dir, seed)
        if args.command == "train":
            return cmd_train(cfg, out_dir, seed, args.resume)
        if args.command == "extrapolate":
            return cmd_extrapolate(cfg, out_dir, seed, args.resume)
        if args.command == "benchmark":
            return cmd_benchmark(cfg, out_dir, seed, args.resume)
        return cmd_baseline(cfg, out_dir, seed, args.resume)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDivergedError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAIN_NAN
    except ExtrapolationBlowUpError as exc:
        print(f"extrapolation error: {exc}", file=sys.stderr)
        return EXIT_EXTRAP_BLOWUP
    except BlowUpError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER_BLOWUP
    except MemopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
