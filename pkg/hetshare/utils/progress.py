from typing import Any, Iterable, Optional

from rich.progress import track

try:
    from tqdm import tqdm, trange

    TQDM = True

except ModuleNotFoundError:
    TQDM = False


def tqdm_progress(iterable=None, *args, description: Optional[str] = None, **kwargs) -> Any:
    """Wraps a loop with tqdm to output a progress bar."""
    if description is not None:
        kwargs.setdefault("desc", description)
    if isinstance(iterable, range):
        return trange(iterable.start, iterable.stop, iterable.step, *args, **kwargs)
    return tqdm(iterable, *args, **kwargs)


def rich_progress(iterable: Iterable[Any], *args, description: Optional[str] = None, **kwargs):
    """Wraps a loop with a rich progress bar.

    Args:
        iterable (Iterable):
            The iterable to loop over and track the progress of.
        description (str):
            Optional; The label shown next to the bar.
    """
    return track(iterable, description=description or "Working...", transient=True)


def progress(iterable: Iterable[Any], *args, enabled: bool = True, **kwargs):
    """Tracks a loop with a progress bar, or passes it through untouched.

    Args:
        iterable (Iterable):
            The iterable to loop over.
        enabled (bool):
            Optional; When False the iterable is returned as-is. Defaults to True.
    """
    if not enabled:
        return iterable
    if TQDM:
        return tqdm_progress(iterable, *args, **kwargs)
    return rich_progress(iterable, *args, **kwargs)
