"""Differentiable operations over DiffValues.

Every function returns a new DiffValue and registers the exact backward map
of its output gradient. Segment operations take a `Partition` and use
`np.add.at`, which accumulates in ascending row order.
"""

from typing import Optional, Sequence

import numpy as np

from .exceptions import ContractViolation, ShapeError
from .partition import Partition
from .value import DiffValue, as_value


def _need(value: DiffValue, grad):
    return grad() if value.requires_grad else None


def linear(x: DiffValue, W: DiffValue, b: Optional[DiffValue] = None) -> DiffValue:
    """Computes `xW + b`, broadcasting the `1 x d_out` bias over rows.

    Raises:
        ShapeError: `x` and `W` (or `W` and `b`) do not conform.
    """
    x, W = as_value(x), as_value(W)
    if x.shape[1] != W.shape[0]:
        raise ShapeError("linear", x.shape, W.shape)
    data = x.data @ W.data
    if b is None:

        def backward(g):
            return (_need(x, lambda: g @ W.data.T), _need(W, lambda: x.data.T @ g))

        return DiffValue.from_op(data, (x, W), backward, "linear")

    b = as_value(b)
    if b.shape != (1, W.shape[1]):
        raise ShapeError("linear", W.shape, b.shape)

    def backward_bias(g):
        return (
            _need(x, lambda: g @ W.data.T),
            _need(W, lambda: x.data.T @ g),
            _need(b, lambda: g.sum(axis=0, keepdims=True)),
        )

    return DiffValue.from_op(data + b.data, (x, W, b), backward_bias, "linear")


def matmul(a: DiffValue, b: DiffValue) -> DiffValue:
    return linear(a, b)


def add(a: DiffValue, b: DiffValue) -> DiffValue:
    """Elementwise sum; `b` may also be a single row added to every row of `a`."""
    a, b = as_value(a), as_value(b)
    if a.shape == b.shape:

        def backward(g):
            return g, g

        return DiffValue.from_op(a.data + b.data, (a, b), backward, "add")
    if b.shape == (1, a.shape[1]):

        def backward_row(g):
            return g, _need(b, lambda: g.sum(axis=0, keepdims=True))

        return DiffValue.from_op(a.data + b.data, (a, b), backward_row, "add")
    raise ShapeError("add", a.shape, b.shape)


def scale(x: DiffValue, factor: float) -> DiffValue:
    x = as_value(x)

    def backward(g):
        return (g * factor,)

    return DiffValue.from_op(x.data * factor, (x,), backward, "scale")


def scale_columns(x: DiffValue, v: DiffValue) -> DiffValue:
    """Multiplies every row of `x [n x d]` elementwise by `v [1 x d]`."""
    x, v = as_value(x), as_value(v)
    if v.shape != (1, x.shape[1]):
        raise ShapeError("scale_columns", x.shape, v.shape)

    def backward(g):
        return (
            _need(x, lambda: g * v.data),
            _need(v, lambda: (g * x.data).sum(axis=0, keepdims=True)),
        )

    return DiffValue.from_op(x.data * v.data, (x, v), backward, "scale_columns")


def row_sum(x: DiffValue) -> DiffValue:
    """Sums every row into an `n x 1` column."""
    x = as_value(x)
    cols = x.shape[1]

    def backward(g):
        return (np.repeat(g, cols, axis=1),)

    return DiffValue.from_op(x.data.sum(axis=1, keepdims=True), (x,), backward, "row_sum")


def reshape(x: DiffValue, rows: int, cols: int) -> DiffValue:
    """Row-major reshape."""
    x = as_value(x)
    if rows * cols != x.data.size:
        raise ShapeError("reshape", x.shape, (rows, cols))
    shape = x.shape

    def backward(g):
        return (g.reshape(shape),)

    return DiffValue.from_op(x.data.reshape(rows, cols), (x,), backward, "reshape")


def concat_rows(parts: Sequence[DiffValue]) -> DiffValue:
    """Concatenates row-aligned values side by side, `[n x d_1] ... -> [n x sum d_i]`.

    Raises:
        ShapeError: The parts have different row counts.
    """
    parts = [as_value(p) for p in parts]
    if not parts:
        raise ContractViolation("concat_rows", "nothing to concatenate")
    rows = parts[0].shape[0]
    for part in parts[1:]:
        if part.shape[0] != rows:
            raise ShapeError("concat_rows", parts[0].shape, part.shape)
    if len(parts) == 1:
        return parts[0]
    bounds = np.cumsum([0] + [p.shape[1] for p in parts])

    def backward(g):
        return tuple(g[:, bounds[i] : bounds[i + 1]] for i in range(len(parts)))

    data = np.concatenate([p.data for p in parts], axis=1)
    return DiffValue.from_op(data, parts, backward, "concat_rows")


def stack_rows(parts: Sequence[DiffValue]) -> DiffValue:
    """Stacks values with equal widths on top of each other."""
    parts = [as_value(p) for p in parts]
    if not parts:
        raise ContractViolation("stack_rows", "nothing to stack")
    cols = parts[0].shape[1]
    for part in parts[1:]:
        if part.shape[1] != cols:
            raise ShapeError("stack_rows", parts[0].shape, part.shape)
    if len(parts) == 1:
        return parts[0]
    bounds = np.cumsum([0] + [p.shape[0] for p in parts])

    def backward(g):
        return tuple(g[bounds[i] : bounds[i + 1]] for i in range(len(parts)))

    data = np.concatenate([p.data for p in parts], axis=0)
    return DiffValue.from_op(data, parts, backward, "stack_rows")


def gather_rows(x: DiffValue, index) -> DiffValue:
    """Selects rows `x[index]`; indices may repeat."""
    x = as_value(x)
    index = np.asarray(index, dtype=np.int64).reshape(-1)
    shape = x.shape

    def backward(g):
        grad = np.zeros(shape, dtype=g.dtype)
        np.add.at(grad, index, g)
        return (grad,)

    return DiffValue.from_op(x.data[index], (x,), backward, "gather_rows")


def scatter_rows(x: DiffValue, index, num_rows: int) -> DiffValue:
    """Adds row `i` of `x` into row `index[i]` of a zero `num_rows x d` matrix."""
    x = as_value(x)
    index = np.asarray(index, dtype=np.int64).reshape(-1)
    if len(index) != x.shape[0]:
        raise ShapeError("scatter_rows", x.shape, index.shape)
    data = np.zeros((num_rows, x.shape[1]), dtype=x.data.dtype)
    np.add.at(data, index, x.data)

    def backward(g):
        return (g[index],)

    return DiffValue.from_op(data, (x,), backward, "scatter_rows")


def masked_softmax(logits: DiffValue, group: Partition) -> DiffValue:
    """Softmax of every column within every group of rows.

    The group maximum is subtracted before exponentiation, so equal logits
    give exactly uniform weights.

    Raises:
        ShapeError: The partition does not cover the rows of `logits`.
        ContractViolation: A group is empty.
    """
    logits = as_value(logits)
    if len(group) != logits.shape[0]:
        raise ShapeError("masked_softmax", logits.shape, (len(group), logits.shape[1]))
    if group.has_empty():
        raise ContractViolation("masked_softmax", "every group must hold at least one row")
    seg = group.segment_ids
    cols = logits.shape[1]
    peak = np.full((group.num_segments, cols), -np.inf, dtype=logits.data.dtype)
    np.maximum.at(peak, seg, logits.data)
    exp = np.exp(logits.data - peak[seg])
    total = np.zeros((group.num_segments, cols), dtype=logits.data.dtype)
    np.add.at(total, seg, exp)
    out = exp / total[seg]

    def backward(g):
        inner = np.zeros((group.num_segments, cols), dtype=g.dtype)
        np.add.at(inner, seg, g * out)
        return (out * (g - inner[seg]),)

    return DiffValue.from_op(out, (logits,), backward, "masked_softmax")


def weighted_sum(weights: DiffValue, rows: DiffValue, group: Partition) -> DiffValue:
    """Per group `g`, computes `sum_{i in g} w_i * row_i`.

    With `H` weight columns the row width is split into `H` equal blocks and
    column `h` weighs block `h`. Empty groups produce zero rows.

    Args:
        weights (DiffValue):
            `n x H` weights.
        rows (DiffValue):
            `n x d` rows, `d` divisible by `H`.
        group (Partition):
            The group of each row.

    Returns:
        The `num_segments x d` group sums.
    """
    weights, rows = as_value(weights), as_value(rows)
    n, d = rows.shape
    heads = weights.shape[1]
    if weights.shape[0] != n or len(group) != n or d % heads:
        raise ShapeError("weighted_sum", weights.shape, rows.shape)
    seg = group.segment_ids
    blocks = rows.data.reshape(n, heads, d // heads)
    weighted = (blocks * weights.data[:, :, None]).reshape(n, d)
    out = np.zeros((group.num_segments, d), dtype=rows.data.dtype)
    np.add.at(out, seg, weighted)

    def backward(g):
        spread = g[seg].reshape(n, heads, d // heads)
        return (
            _need(weights, lambda: (spread * blocks).sum(axis=2)),
            _need(rows, lambda: (spread * weights.data[:, :, None]).reshape(n, d)),
        )

    return DiffValue.from_op(out, (weights, rows), backward, "weighted_sum")


def leaky_relu(x: DiffValue, slope: float = 0.01) -> DiffValue:
    x = as_value(x)
    positive = x.data > 0

    def backward(g):
        return (np.where(positive, g, slope * g),)

    data = np.where(positive, x.data, slope * x.data)
    return DiffValue.from_op(data, (x,), backward, "leaky_relu")


def relu(x: DiffValue) -> DiffValue:
    x = as_value(x)
    positive = x.data > 0

    def backward(g):
        return (np.where(positive, g, 0),)

    return DiffValue.from_op(np.where(positive, x.data, 0), (x,), backward, "relu")


def cross_entropy(logits: DiffValue, labels) -> DiffValue:
    """Mean negative log-likelihood of `labels` under `softmax(logits)`.

    Raises:
        ContractViolation: No rows, or a label outside `[0, C)`.
    """
    logits = as_value(logits)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    n, classes = logits.shape
    if len(labels) != n:
        raise ShapeError("cross_entropy", logits.shape, labels.shape)
    if n == 0:
        raise ContractViolation("cross_entropy", "no rows to average")
    if labels.min() < 0 or labels.max() >= classes:
        raise ContractViolation("cross_entropy", f"labels must lie in [0, {classes})")
    peak = logits.data.max(axis=1, keepdims=True)
    shifted = logits.data - peak
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(n)
    loss = (log_norm[:, 0] - shifted[rows, labels]).mean()

    def backward(g):
        grad = np.exp(shifted - log_norm)
        grad[rows, labels] -= 1
        return (grad * (g[0, 0] / n),)

    return DiffValue.from_op(
        np.array([[loss]], dtype=logits.data.dtype), (logits,), backward, "cross_entropy"
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1 + np.tanh(0.5 * x))


def binary_cross_entropy(logits: DiffValue, labels) -> DiffValue:
    """Mean over all `n x C` entries of the stable binary cross entropy with logits.

    Raises:
        ContractViolation: No entries, or a label other than 0 or 1.
    """
    logits = as_value(logits)
    labels = np.asarray(labels)
    if labels.shape != logits.shape:
        raise ShapeError("binary_cross_entropy", logits.shape, labels.shape)
    if labels.size == 0:
        raise ContractViolation("binary_cross_entropy", "no entries to average")
    if not np.isin(labels, (0, 1)).all():
        raise ContractViolation("binary_cross_entropy", "labels must be 0 or 1")
    y = labels.astype(logits.data.dtype)
    x = logits.data
    loss = (np.maximum(x, 0) - x * y + np.log1p(np.exp(-np.abs(x)))).mean()
    count = x.size

    def backward(g):
        return ((_sigmoid(x) - y) * (g[0, 0] / count),)

    return DiffValue.from_op(
        np.array([[loss]], dtype=x.dtype), (logits,), backward, "binary_cross_entropy"
    )


def sum_values(values: Sequence[DiffValue], weights: Sequence[float] = None) -> DiffValue:
    """Weighted sum of equally shaped values (scalars for losses)."""
    values = [as_value(v) for v in values]
    if not values:
        raise ContractViolation("sum_values", "nothing to sum")
    if weights is None:
        weights = [1.0] * len(values)
    for value in values[1:]:
        if value.shape != values[0].shape:
            raise ShapeError("sum_values", values[0].shape, value.shape)
    data = sum(w * v.data for w, v in zip(weights, values))

    def backward(g):
        return tuple(g * w for w in weights)

    return DiffValue.from_op(
        np.asarray(data, dtype=values[0].data.dtype), values, backward, "sum_values"
    )
