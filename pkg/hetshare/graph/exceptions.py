from typing import Optional


class GraphLoadError(Exception):
    """Raised when a graph directory is missing a file or a file cannot be read."""

    def __init__(self, path, message=None):
        self.path = str(path)
        if message is None:
            message = f"Could not load graph file {self.path}: file is missing or unreadable."
        super().__init__(message)


class SchemaError(Exception):
    """Raised when a graph file violates the graph schema.

    Attributes:
        path (str):
            The offending file.
        line (int | None):
            The 1-based line of the offending record, when there is one.
    """

    def __init__(self, path, reason: str, line: Optional[int] = None, message=None):
        self.path = str(path)
        self.line = line
        self.reason = reason
        if message is None:
            where = self.path if line is None else f"{self.path}:{line}"
            message = f"Schema error in {where}: {reason}"
        super().__init__(message)


class SplitError(Exception):
    """Raised when targets cannot be split into train, validation and test sets."""

    def __init__(self, reason: str, message=None):
        if message is None:
            message = f"Cannot split targets: {reason}"
        super().__init__(message)


class SamplingError(Exception):
    """Raised when a training subgraph cannot be sampled."""

    def __init__(self, reason: str, message=None):
        if message is None:
            message = f"Cannot sample subgraph: {reason}"
        super().__init__(message)


class LabelStarvation(SamplingError):
    """Raised when a task has no positive (or no negative) training target to sample."""

    def __init__(self, task_name: str, missing: str = "positive", message=None):
        if message is None:
            message = (
                f"Cannot sample subgraph: task '{task_name}' has no {missing} "
                "training targets (label starvation)."
            )
        super().__init__(missing, message=message)
