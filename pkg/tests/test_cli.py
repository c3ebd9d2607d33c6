import os

import numpy as np
import pytest

from memop.cli import main
from memop.fileio import read_trajectory_csv

DYSON_BASE = """
problem.kind = dyson
problem.h = -1.0
problem.c = 1.0
grid.dt = 0.05
grid.n_steps = 60
dataset.kind = single
model.hidden_size = 8
train.mode = single
train.epochs = 4
train.lr0 = 0.01
extrapolation.t_final = 5.0
seed = 7
"""


def write_cfg(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(args):
    return main([str(a) for a in args])


def test_dyson_pipeline_end_to_end(tmp_path):
    cfg = write_cfg(tmp_path, DYSON_BASE)
    out = tmp_path / "run"
    assert run(["generate", "--config", cfg, "--out", out]) == 0
    assert (out / "dataset" / "manifest.txt").exists()
    assert (out / "dataset" / "traj_00000.csv").exists()

    assert run(["train", "--config", cfg, "--out", out]) == 0
    assert (out / "model.ckpt").exists()
    assert (out / "train_report.csv").exists()

    assert run(["extrapolate", "--config", cfg, "--out", out]) == 0
    times, g, _, flags = read_trajectory_csv(out / "result.csv")
    assert len(times) == 101  # 5.0 / 0.05 + 1
    assert flags[:61].sum() == 0 and flags[61:].sum() == 40
    assert (out / "result_error.csv").exists()
    assert (out / "plot_result.py").exists()

    assert run(["baseline", "--config", cfg, "--out", out]) == 0  # dmd default
    assert (out / "baseline_dmd.csv").exists()
    assert (out / "dmd_model.txt").exists()


def test_generate_is_byte_identical_across_reruns(tmp_path):
    cfg = write_cfg(tmp_path, DYSON_BASE)
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert run(["generate", "--config", cfg, "--out", out_a]) == 0
    assert run(["generate", "--config", cfg, "--out", out_b]) == 0
    for name in ("dataset/manifest.txt", "dataset/traj_00000.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_cfg(
        tmp_path,
        """
problem.kind = dyson
problem.h = -1.0
problem.c = 1.0
grid.dt = 0.05
grid.n_steps = 20
dataset.kind = dyson_random
dataset.n_samples = 2
seed = 7
""",
    )
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    out_c = tmp_path / "c"
    run(["generate", "--config", cfg, "--out", out_a])
    run(["generate", "--config", cfg, "--out", out_b, "--seed", "8"])
    run(["generate", "--config", cfg, "--out", out_c, "--seed", "7"])
    a = (out_a / "dataset" / "manifest.txt").read_text()
    b = (out_b / "dataset" / "manifest.txt").read_text()
    c = (out_c / "dataset" / "manifest.txt").read_text()
    assert a != b
    assert a == c


def test_missing_sigma_in_toy_config_is_exit_2(tmp_path, capsys):
    cfg = write_cfg(
        tmp_path,
        """
problem.kind = toy
problem.alpha1 = 10.0
problem.alpha2 = 15.0
problem.beta = 1.0
grid.dt = 0.05
grid.n_steps = 20
dataset.kind = single
seed = 1
""",
    )
    assert run(["generate", "--config", cfg, "--out", tmp_path / "o"]) == 2
    assert "problem.sigma" in capsys.readouterr().err


def test_unknown_key_reports_line(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "problem.kindd = toy\nseed = 1\n")
    assert run(["generate", "--config", cfg, "--out", tmp_path / "o"]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err and "problem.kindd" in err


def test_unknown_baseline_mode_is_exit_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, DYSON_BASE + "baseline.mode = fourier\n")
    assert run(["baseline", "--config", cfg, "--out", tmp_path / "o"]) == 2
    assert "baseline.mode" in capsys.readouterr().err


def test_model_width_mismatch_is_exit_2(tmp_path):
    cfg = write_cfg(tmp_path, DYSON_BASE)
    out = tmp_path / "run"
    assert run(["generate", "--config", cfg, "--out", out]) == 0
    assert run(["train", "--config", cfg, "--out", out]) == 0
    toy_cfg = write_cfg(
        tmp_path,
        """
problem.kind = toy
problem.alpha1 = 1.0
problem.alpha2 = 1.0
problem.sigma = 2.0
problem.beta = 1.0
grid.dt = 0.05
grid.n_steps = 20
extrapolation.t_final = 2.0
seed = 7
""",
        name="toy.cfg",
    )
    code = run([
        "extrapolate", "--config", toy_cfg, "--out", tmp_path / "o2",
        "--resume", out / "model.ckpt",
    ])
    assert code == 2


def test_nan_dataset_aborts_training_exit_4(tmp_path):
    cfg = write_cfg(tmp_path, DYSON_BASE)
    out = tmp_path / "run"
    assert run(["generate", "--config", cfg, "--out", out]) == 0
    traj_path = out / "dataset" / "traj_00000.csv"
    lines = traj_path.read_text().splitlines()
    cols = lines[3].split(",")
    cols[3] = "nan"
    lines[3] = ",".join(cols)
    traj_path.write_text("\n".join(lines) + "\n")
    assert run(["train", "--config", cfg, "--out", out]) == 4


def test_extrapolation_blowup_exit_5_keeps_partial(tmp_path):
    from memop.fileio import save_checkpoint
    from memop.lstm import init_adam, init_model

    cfg = write_cfg(tmp_path, DYSON_BASE)
    out = tmp_path / "run"
    os.makedirs(out, exist_ok=True)
    model = init_model(2, 8, seed=0)
    model.head_b[:] = 1e7
    save_checkpoint(
        out / "model.ckpt", model, init_adam(model), {}, 0,
        (np.array([]),) * 3,
    )
    assert run(["extrapolate", "--config", cfg, "--out", out]) == 5
    assert (out / "result_partial.csv").exists()


def test_dump_config_round_trip(tmp_path, capsys):
    cfg = write_cfg(tmp_path, DYSON_BASE)
    assert run(["generate", "--config", cfg, "--dump-config"]) == 0
    dumped = capsys.readouterr().out
    cfg2 = write_cfg(tmp_path, dumped, name="echo.cfg")
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    assert run(["generate", "--config", cfg, "--out", out_a]) == 0
    assert run(["generate", "--config", cfg2, "--out", out_b]) == 0
    assert (out_a / "dataset" / "traj_00000.csv").read_bytes() == (
        out_b / "dataset" / "traj_00000.csv"
    ).read_bytes()


def test_direct_baseline_subcommand(tmp_path):
    cfg = write_cfg(tmp_path, DYSON_BASE + "baseline.mode = direct\n")
    out = tmp_path / "run"
    assert run(["generate", "--config", cfg, "--out", out]) == 0
    assert run(["baseline", "--config", cfg, "--out", out]) == 0
    assert (out / "baseline_direct.csv").exists()


def test_benchmark_subcommand_small(tmp_path):
    cfg = write_cfg(
        tmp_path,
        DYSON_BASE + "benchmark.horizons = 1.0,2.0\n",
    )
    out = tmp_path / "run"
    assert run(["generate", "--config", cfg, "--out", out]) == 0
    assert run(["train", "--config", cfg, "--out", out]) == 0
    assert run(["benchmark", "--config", cfg, "--out", out]) == 0
    bench = (out / "bench.csv").read_text().splitlines()
    assert bench[0] == "horizon,hybrid_seconds,solver_seconds"
    assert len(bench) == 3


def test_trajectory_csv_reparses_through_package_readers(tmp_path):
    cfg = write_cfg(tmp_path, DYSON_BASE)
    out = tmp_path / "run"
    run(["generate", "--config", cfg, "--out", out])
    times, g, i_int, _ = read_trajectory_csv(out / "dataset" / "traj_00000.csv")
    from memop.problems import DysonParams, dyson_problem
    from memop.solver import TimeGrid, solve_ab3

    truth = solve_ab3(dyson_problem(DysonParams(-1.0, 1.0)), TimeGrid(0.05, 60))
    assert np.array_equal(g, truth.g)
    assert np.array_equal(i_int, truth.i_int)
