from typing import Sequence


class ConfigError(Exception):
    """Raised when a configuration field holds an invalid value.

    Attributes:
        field (str):
            The offending field.
    """

    def __init__(self, field: str, reason: str, message=None):
        self.field = field
        self.reason = reason
        if message is None:
            message = f"Invalid configuration field '{field}': {reason}"
        super().__init__(message)


class ParameterMismatch(Exception):
    """Raised when a parameter set does not match the parameters a config requires."""

    def __init__(self, missing: Sequence[str] = (), unexpected: Sequence[str] = (), message=None):
        self.missing = list(missing)
        self.unexpected = list(unexpected)
        if message is None:
            parts = []
            if self.missing:
                parts.append(f"missing {', '.join(self.missing)}")
            if self.unexpected:
                parts.append(f"unexpected {', '.join(self.unexpected)}")
            message = "Parameters do not match the model config: " + "; ".join(parts) + "."
        super().__init__(message)


class LabelKindMismatch(Exception):
    """Raised when labels do not have the shape their task's kind requires."""

    def __init__(self, task: str, expected: str, message=None):
        if message is None:
            message = f"Labels of task '{task}' do not match its kind: expected {expected}."
        super().__init__(message)
