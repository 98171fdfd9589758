class ShapeError(Exception):
    """Raised when the operands of an operation do not conform."""

    def __init__(self, op: str, shape_a, shape_b, message=None):
        self.op = op
        self.shapes = (tuple(shape_a), tuple(shape_b))
        if message is None:
            message = f"Shape mismatch in {op}: {tuple(shape_a)} and {tuple(shape_b)}."
        super().__init__(message)


class ContractViolation(Exception):
    """Raised when an operation's precondition does not hold (empty softmax group,
    out-of-range label, ...)."""

    def __init__(self, op: str, reason: str, message=None):
        self.op = op
        if message is None:
            message = f"Precondition of {op} violated: {reason}"
        super().__init__(message)


class OptimizerError(Exception):
    """Raised when an optimizer step meets a non-finite gradient."""

    def __init__(self, path: str, message=None):
        self.path = path
        if message is None:
            message = f"Non-finite gradient for parameter '{path}'; update skipped."
        super().__init__(message)
