from .complex_encoder import ComplexEncoder
from .progress import progress
from .logging import setup_logging, LOGGER_NAME
from .threads import thread_count, map_cells, InvalidThreadCount, THREADS_ENV

__all__ = [
    "ComplexEncoder",
    "progress",
    "setup_logging",
    "LOGGER_NAME",
    "thread_count",
    "map_cells",
    "InvalidThreadCount",
    "THREADS_ENV",
]
