from typing import Callable, Optional, Sequence

import numpy as np

from .value import DiffValue


def grad_check(
    f: Callable[..., DiffValue],
    inputs: Sequence[np.ndarray],
    h: float = 1e-5,
    floor: float = 1e-8,
    max_coords: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Compares backward gradients with central finite differences.

    Args:
        f (Callable):
            Maps one DiffValue per input to a scalar DiffValue.
        inputs (Sequence[np.ndarray]):
            The point to check at; matrices, evaluated at their own dtype.
        h (float):
            Optional; The finite-difference step.
        floor (float):
            Optional; Lower bound of the relative error denominator
            `max(|analytic|, |numeric|, floor)`.
        max_coords (int):
            Optional; Checks at most this many randomly chosen coordinates per
            input. All coordinates by default.
        seed (int):
            Optional; Seed of the coordinate choice.

    Returns:
        The maximum relative error over the checked coordinates.
    """
    arrays = [np.array(x, copy=True) for x in inputs]
    values = [DiffValue(x, requires_grad=True, dtype=x.dtype) for x in arrays]
    f(*values).backward()
    analytic = [v.grad.reshape(a.shape) for v, a in zip(values, arrays)]

    def evaluate(points):
        return f(*[DiffValue(p, dtype=p.dtype) for p in points]).item()

    rng = np.random.default_rng(seed)
    worst = 0.0
    for which, array in enumerate(arrays):
        coords = np.arange(array.size)
        if max_coords is not None and array.size > max_coords:
            coords = rng.choice(coords, size=max_coords, replace=False)
        flat = array.reshape(-1)
        for coord in coords:
            original = flat[coord]
            flat[coord] = original + h
            plus = evaluate(arrays)
            flat[coord] = original - h
            minus = evaluate(arrays)
            flat[coord] = original
            numeric = (plus - minus) / (2 * h)
            exact = float(analytic[which].reshape(-1)[coord])
            denominator = max(abs(exact), abs(numeric), floor)
            worst = max(worst, abs(exact - numeric) / denominator)
    return worst
