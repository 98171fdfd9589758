import os
from multiprocessing.pool import ThreadPool
from typing import Callable, List, Optional, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "HETSHARE_THREADS"


class InvalidThreadCount(Exception):
    """Raised when the thread count environment variable is not a positive integer."""

    def __init__(self, value, message=None):
        if message is None:
            message = f"{THREADS_ENV} must be a positive integer, got {value!r}."
        super().__init__(message)


def thread_count(default: int = 1) -> int:
    """Reads the worker thread count from the environment."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return default
    try:
        count = int(raw)
    except ValueError:
        raise InvalidThreadCount(raw)
    if count < 1:
        raise InvalidThreadCount(raw)
    return count


def map_cells(
    function: Callable[[T], R], cells: Sequence[T], workers: Optional[int] = None
) -> List[R]:
    """Applies `function` to every cell, optionally on a thread pool.

    Results keep the order of `cells` whatever the completion order.

    Args:
        function (Callable):
            The work to run per cell.
        cells (Sequence):
            The independent inputs (grid cells, experiment seeds, ...).
        workers (int):
            Optional; Number of threads. Defaults to `thread_count()`.

    Returns:
        The results, aligned with `cells`.
    """
    workers = thread_count() if workers is None else workers
    if workers <= 1 or len(cells) <= 1:
        return [function(cell) for cell in cells]
    pool = ThreadPool(processes=min(workers, len(cells)))
    try:
        return pool.map(function, cells)
    finally:
        pool.close()
        pool.join()
