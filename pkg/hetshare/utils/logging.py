import logging

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "hetshare"


def setup_logging(verbosity: int = 0) -> logging.Logger:
    """Installs a rich handler on the package logger.

    Library modules only call `logging.getLogger(__name__)`; handlers are
    configured once, by the command-line entry point.

    Args:
        verbosity (int):
            -1 for warnings only, 0 for info, 1 or more for debug.

    Returns:
        The configured package logger.
    """
    if verbosity < 0:
        level = logging.WARNING
    elif verbosity == 0:
        level = logging.INFO
    else:
        level = logging.DEBUG

    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(
        console=Console(stderr=True), show_path=False, rich_tracebacks=False
    )
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    logger.addHandler(handler)
    logger.propagate = False
    return logger
