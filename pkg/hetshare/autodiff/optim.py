from dataclasses import dataclass, field, replace
from typing import Dict, Mapping, Tuple

import numpy as np

from .exceptions import OptimizerError, ShapeError
from .value import DiffValue


@dataclass
class AdamState:
    """Moments and hyperparameters of an Adam optimizer.

    Attributes:
        m (Dict[str, np.ndarray]):
            First moment per parameter path.
        v (Dict[str, np.ndarray]):
            Second moment per parameter path.
        t (int):
            Number of steps taken.
    """

    learning_rate: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Mapping[str, np.ndarray], grads: Mapping[str, np.ndarray], state: AdamState
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """One Adam update with bias correction and decoupled weight decay.

    Weight decay shrinks each parameter by `lr * wd * theta` before the moment
    update; the moments see the raw gradient only.

    Args:
        params (Mapping[str, np.ndarray]):
            Current parameter values by path.
        grads (Mapping[str, np.ndarray]):
            Gradients by path; a path without gradient counts as zero gradient.
        state (AdamState):
            The optimizer state before the step.

    Returns:
        The updated parameters and the new state. Inputs are not modified.

    Raises:
        OptimizerError: A gradient holds a non-finite value; nothing is updated.
        ShapeError: A gradient does not match its parameter's shape.
    """
    for path, grad in grads.items():
        if path in params and np.shape(grad) != np.shape(params[path]):
            raise ShapeError("adam_step", np.shape(params[path]), np.shape(grad))
        if not np.all(np.isfinite(grad)):
            raise OptimizerError(path)

    t = state.t + 1
    lr, wd = state.learning_rate, state.weight_decay
    correction1 = 1 - state.beta1 ** t
    correction2 = 1 - state.beta2 ** t
    new_params, new_m, new_v = {}, {}, {}
    for path, theta in params.items():
        grad = grads.get(path)
        if grad is None:
            grad = np.zeros_like(theta)
        m = state.m.get(path, np.zeros_like(theta))
        v = state.v.get(path, np.zeros_like(theta))
        if wd:
            theta = theta - lr * wd * theta
        m = state.beta1 * m + (1 - state.beta1) * grad
        v = state.beta2 * v + (1 - state.beta2) * grad * grad
        step = lr * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
        new_params[path] = (theta - step).astype(theta.dtype, copy=False)
        new_m[path], new_v[path] = m, v
    return new_params, replace(state, t=t, m=new_m, v=new_v)


class Adam:
    """Adam over a mapping of parameter paths to DiffValues (a ParameterStore).

    Example:
        >>> optimizer = Adam(store, learning_rate=1e-3, weight_decay=1e-4)
        >>> loss.backward()
        >>> optimizer.step()
        >>> store.zero_grad()
    """

    def __init__(
        self,
        params: Mapping[str, DiffValue],
        learning_rate: float = 1e-3,
        weight_decay: float = 0.0,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.state = AdamState(learning_rate, weight_decay, beta1, beta2, eps)

    def step(self):
        values = {path: p.data for path, p in self.params.items()}
        grads = {path: p.grad for path, p in self.params.items()}
        updated, self.state = adam_step(values, grads, self.state)
        for path, data in updated.items():
            self.params[path].data = data
