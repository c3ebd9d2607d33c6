"""Text file formats: trajectory CSV, dataset manifest, checkpoints, reports.

All floats are written with ``repr`` (shortest round-trip decimal, up to 17
significant digits) so every file re-parses to bit-identical float64
values.  Writes are whole-file atomic (temp file + rename).
"""

import os
import tempfile

import numpy as np

from .errors import CheckpointFormatError
from .lstm import AdamState, LstmLayerParams, RnnModel

CSV_FORMAT_VERSION = 1
CHECKPOINT_MAGIC = "memop-checkpoint v1"
MANIFEST_MAGIC = "memop-dataset v1"
DMD_MAGIC = "memop-dmd v1"


def fmt(x):
    return repr(float(x))


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# Trajectory CSV
# ---------------------------------------------------------------------------


def _component_names(prefix, dim):
    return [f"{prefix}_{r}{c}" for r in range(dim) for c in range(dim)]


def trajectory_header(dim, with_flag=False):
    cols = (
        ["t"]
        + _component_names("re_G", dim)
        + _component_names("im_G", dim)
        + _component_names("re_I", dim)
        + _component_names("im_I", dim)
    )
    if with_flag:
        cols.append("extrapolated")
    return cols


def write_trajectory_csv(path, times, g, i_int, extrapolated=None):
    """One row per grid point; complex blocks split into re/im columns."""
    g = np.asarray(g)
    i_int = np.asarray(i_int)
    dim = g.shape[1]
    with_flag = extrapolated is not None
    lines = [",".join(trajectory_header(dim, with_flag))]
    for row in range(g.shape[0]):
        vals = [fmt(times[row])]
        vals += [fmt(v) for v in g[row].real.ravel()]
        vals += [fmt(v) for v in g[row].imag.ravel()]
        vals += [fmt(v) for v in i_int[row].real.ravel()]
        vals += [fmt(v) for v in i_int[row].imag.ravel()]
        if with_flag:
            vals.append(str(int(extrapolated[row])))
        lines.append(",".join(vals))
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_trajectory_csv(path):
    """Returns (times, g, i_int, extrapolated_or_None)."""
    with open(path) as handle:
        header = handle.readline().strip().split(",")
        data = np.loadtxt(handle, delimiter=",", ndmin=2)
    ncols = len(header)
    with_flag = header[-1] == "extrapolated"
    nblock = (ncols - 1 - int(with_flag)) // 4
    dim = int(round(nblock**0.5))
    if 1 + 4 * dim * dim + int(with_flag) != ncols:
        raise ValueError(f"unexpected trajectory header in {path}")
    times = data[:, 0]
    nn = dim * dim
    re_g = data[:, 1 : 1 + nn]
    im_g = data[:, 1 + nn : 1 + 2 * nn]
    re_i = data[:, 1 + 2 * nn : 1 + 3 * nn]
    im_i = data[:, 1 + 3 * nn : 1 + 4 * nn]
    g = (re_g + 1j * im_g).reshape(-1, dim, dim)
    i_int = (re_i + 1j * im_i).reshape(-1, dim, dim)
    flags = data[:, -1].astype(int) if with_flag else None
    return times, g, i_int, flags


def write_error_csv(path, times, err):
    """Per-component modulus error columns |G_pred - G_true|."""
    err = np.asarray(err)
    dim = err.shape[1]
    lines = [",".join(["t"] + _component_names("err_G", dim))]
    for row in range(err.shape[0]):
        vals = [fmt(times[row])] + [fmt(v) for v in err[row].ravel()]
        lines.append(",".join(vals))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_report_csv(path, report):
    lines = ["epoch,train_loss,val_loss,lr"]
    for e in range(len(report.train_loss)):
        lines.append(
            f"{e},{fmt(report.train_loss[e])},{fmt(report.val_loss[e])},{fmt(report.lrs[e])}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_report_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 1], data[:, 2], data[:, 3]


def write_bench_csv(path, rows):
    lines = ["horizon,hybrid_seconds,solver_seconds"]
    for h, hy, so in rows:
        lines.append(f"{fmt(h)},{fmt(hy)},{fmt(so)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Dataset manifest
# ---------------------------------------------------------------------------


def write_manifest(path, problem_kind, grid, seed, entries):
    """``entries`` is a list of (filename, label-dict) pairs."""
    lines = [
        MANIFEST_MAGIC,
        f"format_version = {CSV_FORMAT_VERSION}",
        f"problem.kind = {problem_kind}",
        f"grid.dt = {fmt(grid.dt)}",
        f"grid.n_steps = {grid.n_steps}",
        f"seed = {seed}",
        f"count = {len(entries)}",
    ]
    for idx, (fname, label) in enumerate(entries):
        lines.append(f"traj.{idx}.file = {fname}")
        for key in sorted(label):
            lines.append(f"traj.{idx}.{key} = {fmt(label[key])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path):
    with open(path) as handle:
        first = handle.readline().rstrip("\n")
        if first != MANIFEST_MAGIC:
            raise CheckpointFormatError(
                f"bad manifest magic {first!r}", line=1
            )
        meta = {}
        entries = {}
        for lineno, raw in enumerate(handle, start=2):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CheckpointFormatError("expected 'key = value'", line=lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key.startswith("traj."):
                _, idx, attr = key.split(".", 2)
                entries.setdefault(int(idx), {})[attr] = value
            else:
                meta[key] = value
    count = int(meta["count"])
    ordered = []
    for idx in range(count):
        entry = entries[idx]
        fname = entry.pop("file")
        label = {k: float(v) for k, v in entry.items()}
        ordered.append((fname, label))
    return meta, ordered


# ---------------------------------------------------------------------------
# Checkpoints (model + optimizer + loss history)
# ---------------------------------------------------------------------------


def _tensor_block(name, arr):
    arr = np.asarray(arr, float)
    shape = " ".join(str(s) for s in arr.shape)
    lines = [f"tensor {name} {shape}"]
    if arr.ndim == 1:
        lines.append(" ".join(fmt(v) for v in arr))
    else:
        for row in arr:
            lines.append(" ".join(fmt(v) for v in row))
    return lines


def save_checkpoint(path, model, opt, meta, epoch_next, history):
    """Serialize the full training state with lossless float text.

    ``meta`` carries schedule/clip/config echoes; ``history`` is the
    (train_loss, val_loss, lr) triple of completed epochs.
    """
    train_hist, val_hist, lr_hist = history
    lines = [CHECKPOINT_MAGIC]
    lines.append(f"meta.input_size = {model.input_size}")
    lines.append(f"meta.hidden_size = {model.hidden_size}")
    lines.append(f"meta.output_size = {model.output_size}")
    lines.append(f"meta.num_layers = {len(model.layers)}")
    lines.append(f"meta.seed = {model.seed}")
    for key in sorted(meta):
        lines.append(f"meta.{key} = {meta[key]}")
    lines.append(f"meta.epoch_next = {epoch_next}")
    lines.append(f"opt.step_count = {opt.step_count}")
    lines.append(f"opt.beta1 = {fmt(opt.beta1)}")
    lines.append(f"opt.beta2 = {fmt(opt.beta2)}")
    lines.append(f"opt.eps = {fmt(opt.eps)}")
    lines.append(f"history.count = {len(train_hist)}")
    for e in range(len(train_hist)):
        lines.append(
            f"history.{e} = {fmt(train_hist[e])} {fmt(val_hist[e])} {fmt(lr_hist[e])}"
        )
    for name, arr in model.param_tensors():
        lines.extend(_tensor_block(name, arr))
    names = [name for name, _ in model.param_tensors()]
    for prefix, stack in (("adam.m", opt.m), ("adam.v", opt.v)):
        for name, arr in zip(names, stack):
            lines.extend(_tensor_block(f"{prefix}.{name}", arr))
    lines.append("end")
    atomic_write_text(path, "\n".join(lines) + "\n")


def _parse_kv(line, lineno):
    if "=" not in line:
        raise CheckpointFormatError("expected 'key = value'", line=lineno)
    key, _, value = line.partition("=")
    return key.strip(), value.strip()


def load_checkpoint(path):
    """Returns (model, opt, meta-dict, epoch_next, history)."""
    with open(path) as handle:
        lines = handle.read().splitlines()
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise CheckpointFormatError("bad checkpoint magic", line=1)
    meta = {}
    opt_meta = {}
    history_rows = {}
    tensors = {}
    i = 1
    n_lines = len(lines)
    while i < n_lines:
        line = lines[i].strip()
        lineno = i + 1
        if not line or line.startswith("#"):
            i += 1
            continue
        if line == "end":
            break
        if line.startswith("tensor "):
            parts = line.split()
            if len(parts) < 3:
                raise CheckpointFormatError("malformed tensor header", line=lineno)
            name = parts[1]
            try:
                shape = tuple(int(p) for p in parts[2:])
            except ValueError:
                raise CheckpointFormatError("bad tensor shape", line=lineno)
            nrows = 1 if len(shape) == 1 else shape[0]
            rows = []
            for r in range(nrows):
                i += 1
                if i >= n_lines:
                    raise CheckpointFormatError(
                        f"truncated tensor {name}", line=lineno
                    )
                try:
                    rows.append([float(v) for v in lines[i].split()])
                except ValueError:
                    raise CheckpointFormatError(
                        f"bad float in tensor {name}", line=i + 1
                    )
            arr = np.array(rows[0]) if len(shape) == 1 else np.array(rows)
            if arr.shape != shape:
                raise CheckpointFormatError(
                    f"tensor {name} has shape {arr.shape}, declared {shape}",
                    line=lineno,
                )
            tensors[name] = arr
            i += 1
            continue
        key, value = _parse_kv(line, lineno)
        if key.startswith("meta."):
            meta[key[5:]] = value
        elif key.startswith("opt."):
            opt_meta[key[4:]] = value
        elif key.startswith("history."):
            tag = key[8:]
            if tag != "count":
                history_rows[int(tag)] = [float(v) for v in value.split()]
        else:
            raise CheckpointFormatError(f"unknown key {key!r}", line=lineno)
        i += 1

    try:
        input_size = int(meta["input_size"])
        hidden = int(meta["hidden_size"])
        output_size = int(meta["output_size"])
        num_layers = int(meta["num_layers"])
        seed = int(meta["seed"])
        epoch_next = int(meta["epoch_next"])
    except KeyError as exc:
        raise CheckpointFormatError(f"missing meta field {exc}")
    if num_layers != 2:
        raise CheckpointFormatError("only 2-layer checkpoints are supported")

    expected_shapes = {
        "lstm0.w_x": (4 * hidden, input_size),
        "lstm0.w_h": (4 * hidden, hidden),
        "lstm0.b": (4 * hidden,),
        "lstm1.w_x": (4 * hidden, hidden),
        "lstm1.w_h": (4 * hidden, hidden),
        "lstm1.b": (4 * hidden,),
        "head.w": (output_size, hidden),
        "head.b": (output_size,),
    }
    for name, shape in expected_shapes.items():
        if name not in tensors:
            raise CheckpointFormatError(f"missing tensor {name}")
        if tensors[name].shape != shape:
            raise CheckpointFormatError(
                f"tensor {name} has shape {tensors[name].shape}, expected {shape}"
            )
    layers = [
        LstmLayerParams(tensors["lstm0.w_x"], tensors["lstm0.w_h"], tensors["lstm0.b"]),
        LstmLayerParams(tensors["lstm1.w_x"], tensors["lstm1.w_h"], tensors["lstm1.b"]),
    ]
    model = RnnModel(
        layers=layers,
        head_w=tensors["head.w"],
        head_b=tensors["head.b"],
        input_size=input_size,
        hidden_size=hidden,
        output_size=output_size,
        seed=seed,
    )
    m_list = []
    v_list = []
    for name in expected_shapes:
        for prefix, target in (("adam.m", m_list), ("adam.v", v_list)):
            full = f"{prefix}.{name}"
            if full not in tensors:
                raise CheckpointFormatError(f"missing tensor {full}")
            if tensors[full].shape != expected_shapes[name]:
                raise CheckpointFormatError(f"tensor {full} shape mismatch")
            target.append(tensors[full])
    opt = AdamState(
        m=m_list,
        v=v_list,
        step_count=int(opt_meta.get("step_count", "0")),
        beta1=float(opt_meta.get("beta1", "0.9")),
        beta2=float(opt_meta.get("beta2", "0.999")),
        eps=float(opt_meta.get("eps", "1e-08")),
    )
    count = len(history_rows)
    train_hist = np.array([history_rows[e][0] for e in range(count)])
    val_hist = np.array([history_rows[e][1] for e in range(count)])
    lr_hist = np.array([history_rows[e][2] for e in range(count)])
    return model, opt, meta, epoch_next, (train_hist, val_hist, lr_hist)


# ---------------------------------------------------------------------------
# DMD model serialization
# ---------------------------------------------------------------------------


def save_dmd(path, model):
    lines = [DMD_MAGIC]
    lines.append(f"rank = {model.rank}")
    lines.append(f"delay = {model.delay}")
    lines.append(f"dim = {model.dim}")
    lines.append(f"n_samples = {model.n_samples}")
    lines.append(f"dt = {fmt(model.dt)}")
    lines.append("eigenvalues")
    for z in model.eigenvalues:
        lines.append(f"{fmt(z.real)} {fmt(z.imag)}")
    lines.append("amplitudes")
    for z in model.amplitudes:
        lines.append(f"{fmt(z.real)} {fmt(z.imag)}")
    lines.append(f"modes {model.modes.shape[0]} {model.modes.shape[1]}")
    for row in model.modes:
        lines.append(" ".join(f"{fmt(z.real)} {fmt(z.imag)}" for z in row))
    lines.append("end")
    atomic_write_text(path, "\n".join(lines) + "\n")
