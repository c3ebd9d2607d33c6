"""Exception types shared across the package."""


class MemopError(Exception):
    """Base class for errors raised by this package."""


class BlowUpError(MemopError):
    """The integrator produced a non-finite (or guard-exceeding) state.

    ``step`` is the index of the first bad grid point.
    """

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"solution blew up at step {step}")


class ExtrapolationBlowUpError(BlowUpError):
    """Blow-up during recursive extrapolation.

    ``partial`` holds the result truncated at the last finite step so it
    can still be inspected or written to disk.
    """

    def __init__(self, step, partial=None):
        super().__init__(step, f"extrapolation blew up at step {step}")
        self.partial = partial


class TrainingDivergedError(MemopError):
    """Training loss became NaN/Inf. ``epoch`` is the offending epoch."""

    def __init__(self, epoch):
        self.epoch = epoch
        super().__init__(f"training loss diverged at epoch {epoch}")


class CheckpointFormatError(MemopError):
    """Malformed checkpoint file; carries a line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(MemopError):
    """Malformed experiment config; carries line/field diagnostics."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class DmdRankError(MemopError):
    """Requested DMD rank exceeds the numerical rank of the data."""

    def __init__(self, requested, numerical_rank, singular_values):
        self.requested = requested
        self.numerical_rank = numerical_rank
        self.singular_values = singular_values
        sv = ", ".join(f"{s:.3e}" for s in singular_values[:12])
        super().__init__(
            f"requested rank {requested} exceeds numerical rank "
            f"{numerical_rank}; singular values: [{sv}]"
        )
