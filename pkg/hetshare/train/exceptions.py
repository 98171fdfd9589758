from typing import Sequence


class TrainingAborted(Exception):
    """Raised when training cannot continue, e.g. after a non-finite loss.

    Attributes:
        epoch (int):
            The epoch that failed.
        learning_rate (float):
            The learning rate of the run.
    """

    def __init__(self, epoch: int, learning_rate: float, diagnostic: str, message=None):
        self.epoch = epoch
        self.learning_rate = learning_rate
        self.diagnostic = diagnostic
        if message is None:
            message = f"Training aborted at epoch {epoch} (lr={learning_rate:g}): {diagnostic}"
        super().__init__(message)


class CheckpointError(Exception):
    """Raised when a checkpoint file cannot be decoded."""

    def __init__(self, path, reason: str, message=None):
        self.path = path
        self.reason = reason
        if message is None:
            message = f"Cannot read checkpoint {path}: {reason}."
        super().__init__(message)


class CheckpointMismatch(Exception):
    """Raised when a checkpoint's parameters differ from those a model config requires."""

    def __init__(self, missing: Sequence[str] = (), unexpected: Sequence[str] = (), message=None):
        self.missing = list(missing)
        self.unexpected = list(unexpected)
        if message is None:
            parts = []
            if self.missing:
                parts.append("missing: " + ", ".join(self.missing))
            if self.unexpected:
                parts.append("unexpected: " + ", ".join(self.unexpected))
            message = "Checkpoint does not match the model config; " + "; ".join(parts)
        super().__init__(message)
