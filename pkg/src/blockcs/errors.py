"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes are inconsistent with the requested operation."""


class CapacityError(RuntimeError):
    """An enumeration guard was exceeded (combinatorial blow-up)."""


class ParseError(ValueError):
    """A file could not be parsed; carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class SolverError(RuntimeError):
    """An iterative solver failed; carries the iteration number."""

    def __init__(self, message: str, iteration: int | None = None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class TrainingDiverged(RuntimeError):
    """Training hit a non-finite loss; carries diagnostics."""

    def __init__(self, step: int, lr: float, param_norm: float):
        super().__init__(
            f"non-finite loss at step {step} (lr={lr:g}, parameter norm={param_norm:.6g})"
        )
        self.step = step
        self.lr = lr
        self.param_norm = param_norm


class ConfigError(ValueError):
    """A run configuration failed validation."""
