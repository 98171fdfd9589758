from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

_DTYPE = [np.dtype(np.float32)]


def default_dtype() -> np.dtype:
    """The floating point type new values are created with (float32 unless changed)."""
    return _DTYPE[0]


def set_default_dtype(dtype):
    _DTYPE[0] = np.dtype(dtype)


@contextmanager
def precision(dtype):
    """Temporarily changes the default dtype.

    Example:
        >>> with precision(np.float64):
        ...     x = DiffValue([[1.0, 2.0]])
    """
    previous = default_dtype()
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(previous)


def _as_matrix(data, dtype=None) -> np.ndarray:
    array = np.asarray(data, dtype=dtype or default_dtype())
    if array.ndim == 0:
        return array.reshape(1, 1)
    if array.ndim == 1:
        return array.reshape(1, -1)
    if array.ndim != 2:
        raise ValueError(f"DiffValue holds matrices, got an array of shape {array.shape}.")
    return array


Backward = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class DiffValue:
    """A matrix in a define-by-run computation record.

    Every operation on DiffValues returns a new DiffValue remembering its
    inputs and how to map an output gradient to input gradients. Calling
    `backward` on a scalar result walks the record in reverse topological
    order and adds (`+=`) the gradient of every node into its `grad`, so
    repeated calls without `zero_grad` accumulate.

    Attributes:
        data (np.ndarray):
            The `rows x cols` value.
        requires_grad (bool):
            Whether gradients flow into this value.
        name (str):
            Optional; A label, the parameter path for parameters.
        op (str):
            The producing operation, empty for leaves.
    """

    __slots__ = ("data", "_grad", "requires_grad", "name", "op", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, name: str = None, dtype=None):
        self.data = _as_matrix(data, dtype)
        self._grad = None
        self.requires_grad = requires_grad
        self.name = name
        self.op = ""
        self._parents: Tuple[DiffValue, ...] = ()
        self._backward: Optional[Backward] = None

    @classmethod
    def from_op(
        cls, data: np.ndarray, parents: Sequence[DiffValue], backward: Backward, op: str
    ) -> DiffValue:
        out = cls.__new__(cls)
        out.data = data
        out._grad = None
        out.name = None
        out.op = op
        out.requires_grad = any(p.requires_grad for p in parents)
        if out.requires_grad:
            out._parents = tuple(parents)
            out._backward = backward
        else:
            out._parents = ()
            out._backward = None
        return out

    def __repr__(self):
        label = f" '{self.name}'" if self.name else ""
        origin = f" from {self.op}" if self.op else ""
        return f"DiffValue{label}{self.shape}{origin}"

    @property
    def shape(self) -> Tuple[int, int]:
        return self.data.shape

    @property
    def grad(self) -> np.ndarray:
        if self._grad is None:
            self._grad = np.zeros_like(self.data)
        return self._grad

    @grad.setter
    def grad(self, value):
        self._grad = None if value is None else np.asarray(value, dtype=self.data.dtype)

    def zero_grad(self):
        self._grad = None

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a 1x1 value, got {self.shape}.")
        return float(self.data[0, 0])

    def detach(self) -> DiffValue:
        return DiffValue(self.data, dtype=self.data.dtype)

    def _topological_order(self):
        order, visited = [], set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self, grad=None):
        """Accumulates d(self)/d(node) into the `grad` of every node of the record.

        Args:
            grad (np.ndarray):
                Optional; The seed gradient. Defaults to ones, which requires a
                scalar (1x1) value.
        """
        if grad is None:
            if self.data.size != 1:
                raise ValueError(f"backward() without a seed needs a scalar, got {self.shape}.")
            grad = np.ones_like(self.data)
        if not self.requires_grad:
            return
        pending = {id(self): np.asarray(grad, dtype=self.data.dtype)}
        for node in reversed(self._topological_order()):
            g = pending.pop(id(node), None)
            if g is None:
                continue
            node.grad = node.grad + g
            if node._backward is None:
                continue
            for parent, parent_grad in zip(node._parents, node._backward(g)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = parent_grad

    def __add__(self, other):
        from .ops import add

        return add(self, other)

    def __matmul__(self, other):
        from .ops import matmul

        return matmul(self, other)

    def __mul__(self, other):
        from .ops import scale

        return scale(self, float(other))

    __rmul__ = __mul__

    def __neg__(self):
        from .ops import scale

        return scale(self, -1.0)


def as_value(x, dtype=None) -> DiffValue:
    """Wraps constants as non-differentiable DiffValues; DiffValues pass through."""
    if isinstance(x, DiffValue):
        return x
    return DiffValue(x, dtype=dtype)
