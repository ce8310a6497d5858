"""Exception hierarchy. The CLI maps these onto exit codes."""


class ChfnetError(Exception):
    """Base class for all package errors."""


class ValidationError(ChfnetError, ValueError):
    """Bad input: malformed files, out-of-range queries, shape mismatches."""


class LutFormatError(ValidationError):
    pass


class GridIncompleteError(LutFormatError):
    pass


class OutOfRangeError(ValidationError):
    pass


class TrainingDiverged(ChfnetError, FloatingPointError):
    """Raised when a mini-batch loss becomes non-finite."""

    def __init__(self, epoch, batch, loss):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, batch {batch}")
