class InvalidSignalPlan(Exception):
    """Raised when a task's signal plan names unknown relations or its weights do not sum to 1."""

    def __init__(self, task: int, reason: str, message=None):
        self.task = task
        self.reason = reason
        if message is None:
            message = f"Invalid signal plan for task {task}: {reason}."
        super().__init__(message)
