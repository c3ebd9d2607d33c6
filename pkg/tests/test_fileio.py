import os

import numpy as np
import pytest

from memop.errors import CheckpointFormatError
from memop.fileio import (
    atomic_write_text,
    load_checkpoint,
    read_manifest,
    read_report_csv,
    read_trajectory_csv,
    save_checkpoint,
    save_dmd,
    write_manifest,
    write_report_csv,
    write_trajectory_csv,
)
from memop.lstm import init_adam, init_model
from memop.solver import TimeGrid
from memop.training import TrainReport


def random_complex(rng, shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_trajectory_csv_round_trip_is_lossless(rng, tmp_path):
    path = tmp_path / "traj.csv"
    n = 7
    times = 0.01 * np.arange(n)
    g = random_complex(rng, (n, 2, 2))
    i_int = random_complex(rng, (n, 2, 2))
    write_trajectory_csv(path, times, g, i_int)
    t2, g2, i2, flags = read_trajectory_csv(path)
    assert np.array_equal(t2, times)
    assert np.array_equal(g2, g)
    assert np.array_equal(i2, i_int)
    assert flags is None


def test_trajectory_csv_with_flag_column(rng, tmp_path):
    path = tmp_path / "res.csv"
    n = 5
    times = 0.5 * np.arange(n)
    g = random_complex(rng, (n, 1, 1))
    i_int = random_complex(rng, (n, 1, 1))
    flags = np.array([0, 0, 0, 1, 1])
    write_trajectory_csv(path, times, g, i_int, extrapolated=flags)
    header = open(path).readline().strip().split(",")
    assert header == ["t", "re_G_00", "im_G_00", "re_I_00", "im_I_00", "extrapolated"]
    _, g2, _, flags2 = read_trajectory_csv(path)
    assert np.array_equal(g2, g)
    assert np.array_equal(flags2, flags)


def test_report_csv_round_trip(tmp_path):
    report = TrainReport(
        train_loss=np.array([0.5, 0.25]),
        val_loss=np.array([0.6, 0.3]),
        lrs=np.array([0.01, 0.005]),
        wall_clock_seconds=1.0,
    )
    path = tmp_path / "report.csv"
    write_report_csv(path, report)
    tr, val, lr = read_report_csv(path)
    assert np.array_equal(tr, report.train_loss)
    assert np.array_equal(val, report.val_loss)
    assert np.array_equal(lr, report.lrs)


def test_manifest_round_trip(tmp_path):
    path = tmp_path / "manifest.txt"
    entries = [
        ("traj_00000.csv", {"alpha1": 1.0, "alpha2": 2.0, "sigma": 1.5, "beta": 1.0}),
        ("traj_00001.csv", {"alpha1": 1.0, "alpha2": 3.0, "sigma": 2.5, "beta": 1.0}),
    ]
    write_manifest(path, "toy", TimeGrid(0.01, 100), 42, entries)
    meta, got = read_manifest(path)
    assert meta["problem.kind"] == "toy"
    assert meta["seed"] == "42"
    assert got == entries


def test_checkpoint_round_trip_bit_exact(rng, tmp_path):
    model = init_model(4, 6, seed=13)
    opt = init_adam(model)
    for m, v in zip(opt.m, opt.v):
        m += rng.normal(size=m.shape)
        v += np.abs(rng.normal(size=v.shape))
    opt.step_count = 17
    history = (
        rng.normal(size=5),
        rng.normal(size=5),
        np.abs(rng.normal(size=5)),
    )
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, opt, {"lr0": 0.01, "clip_norm": 5.0}, 5, history)
    model2, opt2, meta, epoch_next, hist2 = load_checkpoint(path)
    assert epoch_next == 5
    assert meta["lr0"] == "0.01"
    for (_, a), (_, b) in zip(model.param_tensors(), model2.param_tensors()):
        assert np.array_equal(a, b)
    for a, b in zip(opt.m + opt.v, opt2.m + opt2.v):
        assert np.array_equal(a, b)
    assert opt2.step_count == 17
    for a, b in zip(history, hist2):
        assert np.array_equal(a, b)


def test_checkpoint_shape_mismatch_is_structured_error(tmp_path):
    model = init_model(4, 6, seed=13)
    opt = init_adam(model)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, opt, {}, 0, (np.array([]),) * 3)
    text = path.read_text()
    hacked = text.replace("meta.hidden_size = 6", "meta.hidden_size = 8")
    path.write_text(hacked)
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)


def test_checkpoint_truncation_reports_line(tmp_path):
    model = init_model(2, 3, seed=1)
    opt = init_adam(model)
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, model, opt, {}, 0, (np.array([]),) * 3)
    lines = path.read_text().splitlines()
    cut = next(i for i, l in enumerate(lines) if l.startswith("tensor "))
    path.write_text("\n".join(lines[: cut + 1]))
    with pytest.raises(CheckpointFormatError):
        load_checkpoint(path)


def test_checkpoint_bad_magic(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_text("not-a-checkpoint\n")
    with pytest.raises(CheckpointFormatError) as err:
        load_checkpoint(path)
    assert err.value.line == 1


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = tmp_path / "out.txt"
    atomic_write_text(path, "hello\n")
    atomic_write_text(path, "world\n")
    assert path.read_text() == "world\n"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_save_dmd_writes_structured_text(rng, tmp_path):
    from memop.baselines import dmd_fit

    g = np.full((40, 1, 1), 0.5 - 0.5j)
    model = dmd_fit(g, 0.05, delay=3)
    path = tmp_path / "dmd.txt"
    save_dmd(path, model)
    text = path.read_text()
    assert text.startswith("memop-dmd v1")
    assert "eigenvalues" in text and "modes" in text
