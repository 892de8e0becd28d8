"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class ShapeError(ValueError):
    """Array arguments have incompatible or unexpected shapes."""


class FormatError(ValueError):
    """A file or byte stream does not match the documented layout."""


class NormalizationError(ValueError):
    """Dataset-wide normalization constants cannot be formed (e.g. all-zero data)."""


class CflStabilityError(RuntimeError):
    """Requested time step exceeds the scheme's stability limit."""

    def __init__(self, dt, limit_dt):
        super().__init__(
            f"time step {dt:g} s exceeds the stability limit {limit_dt:g} s"
        )
        self.dt = dt
        self.limit_dt = limit_dt


class NumericalBlowupError(RuntimeError):
    """Non-finite values appeared in a running simulation."""

    def __init__(self, step):
        super().__init__(f"non-finite wavefield values at time step {step}")
        self.step = step


class TrainingDivergenceError(RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, step, loss):
        super().__init__(f"non-finite loss {loss!r} at training step {step}")
        self.step = step
        self.loss = loss
