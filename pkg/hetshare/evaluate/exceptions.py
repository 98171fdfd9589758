class UndefinedMetric(Exception):
    """Raised when a metric has no value on its input, e.g. AUC over one class."""

    def __init__(self, metric: str, reason: str, message=None):
        self.metric = metric
        if message is None:
            message = f"{metric} is undefined: {reason}."
        super().__init__(message)


class EmptyTrace(Exception):
    """Raised when an importance export finds no attention weights to write."""

    def __init__(self, message=None):
        if message is None:
            message = "The attention trace holds no weights; the graph has no targets to explain."
        super().__init__(message)
