"""Flat key-value experiment configs with dotted section keys.

Line format: ``section.key = value``; ``#`` starts a comment line; list
values are comma separated.  Problem parameters carry no defaults (a toy
run without ``problem.sigma`` is a hard error); training hyperparameters
default to the standard protocol values.
"""

from dataclasses import dataclass, field

from .errors import ConfigError

_REQUIRED = object()


def _parse_bool(v):
    if v.lower() in ("1", "true", "yes"):
        return True
    if v.lower() in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _parse_float_list(v):
    return tuple(float(p.strip()) for p in v.split(",") if p.strip())


# key -> (parser, default); _REQUIRED means the command must see a value
SCHEMA = {
    "problem.kind": (str, _REQUIRED),
    "problem.alpha1": (float, _REQUIRED),
    "problem.alpha2": (float, _REQUIRED),
    "problem.sigma": (float, _REQUIRED),
    "problem.beta": (float, _REQUIRED),
    "problem.h": (float, _REQUIRED),
    "problem.c": (float, _REQUIRED),
    "grid.dt": (float, 0.01),
    "grid.n_steps": (int, 2000),
    "dataset.kind": (str, "single"),
    "dataset.alpha_min": (int, 1),
    "dataset.alpha_max": (int, 20),
    "dataset.sigmas": (_parse_float_list, (1.0, 2.0, 3.0, 4.0, 5.0)),
    "dataset.beta": (float, 1.0),
    "dataset.n_samples": (int, 2000),
    "dataset.h_low": (float, 1.0),
    "dataset.h_high": (float, 10.0),
    "dataset.c": (float, 1.0),
    "model.hidden_size": (int, 64),
    "model.num_layers": (int, 2),
    "train.mode": (str, "single"),
    "train.epochs": (int, 750),
    "train.batch_size": (int, 128),
    "train.batch_mode": (str, "sweep"),
    "train.lr0": (float, 0.01),
    "train.clip_norm": (float, 5.0),
    "train.validation": (str, "time_split"),
    "train.val_frac": (float, 0.8),
    "train.val_count": (int, 10),
    "extrapolation.t_final": (float, 120.0),
    "extrapolation.stepper": (str, "ab3"),
    "extrapolation.reference": (str, "auto"),
    "benchmark.horizons": (_parse_float_list, (20.0, 40.0, 80.0, 160.0)),
    "baseline.mode": (str, "dmd"),
    "baseline.dmd_rank": (int, 0),
    "baseline.dmd_delay": (int, 32),
    "paths.dataset": (str, ""),
    "paths.checkpoint": (str, ""),
    "output_dir": (str, "memop-out"),
    "seed": (int, _REQUIRED),
}

_ENUMS = {
    "problem.kind": ("toy", "dyson"),
    "dataset.kind": ("single", "toy_grid", "dyson_random"),
    "train.mode": ("single", "multi"),
    "train.batch_mode": ("sweep", "resample"),
    "train.validation": ("time_split", "held_out"),
    "extrapolation.stepper": ("ab3", "fe"),
    "extrapolation.reference": ("auto", "analytic", "solver", "none"),
    "baseline.mode": ("direct", "dmd"),
}


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def get(self, key):
        """Value for ``key``; raises ConfigError if required but unset."""
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}", field=key)
        if key in self.values:
            return self.values[key]
        _, default = SCHEMA[key]
        if default is _REQUIRED:
            raise ConfigError("required value is missing", field=key)
        return default

    def has(self, key):
        return key in self.values or SCHEMA[key][1] is not _REQUIRED

    def set(self, key, value):
        self.values[key] = value


def parse_config(text):
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise ConfigError("unknown config key", line=lineno, field=key)
        parser, _ = SCHEMA[key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise ConfigError(str(exc), line=lineno, field=key)
        if key in _ENUMS and parsed not in _ENUMS[key]:
            raise ConfigError(
                f"value {parsed!r} not in {_ENUMS[key]}", line=lineno, field=key
            )
        cfg.set(key, parsed)
    return cfg


def load_config(path):
    try:
        with open(path) as handle:
            return parse_config(handle.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")


def dump_config(cfg):
    """Echo the effective config (set values plus applicable defaults)."""
    lines = []
    for key in SCHEMA:
        if key in cfg.values:
            value = cfg.values[key]
        elif SCHEMA[key][1] is not _REQUIRED:
            value = SCHEMA[key][1]
        else:
            continue
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
