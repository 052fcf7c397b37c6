"""Exception types shared across the package."""


class LionexError(Exception):
    """Base class for all package errors."""


class DimensionError(LionexError, ValueError):
    """Operands have incompatible shapes or lengths."""


class DomainError(LionexError, ValueError):
    """An argument lies outside the operation's valid domain."""


class DegenerateInputError(LionexError, ValueError):
    """Input is structurally valid but degenerate (e.g. all-zero vector)."""


class RankDeficiencyError(LionexError, ValueError):
    """Unpenalized linear system is singular; a positive ridge penalty is required."""


class StructureError(LionexError, ValueError):
    """A model does not have the structure an operation requires."""


class TrainingDivergedError(LionexError, RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"training diverged (non-finite loss) at epoch {epoch}")


class ModelFormatError(LionexError, ValueError):
    """A serialized model file cannot be parsed or fails validation."""


class WorkspaceError(LionexError, ValueError):
    """A workspace is missing artifacts or contains invalid ones."""
