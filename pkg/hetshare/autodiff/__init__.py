""".. include:: ../../docs/templates/autodiff.md"""

from .value import DiffValue, as_value, default_dtype, set_default_dtype, precision
from .partition import Partition
from .ops import (
    linear,
    matmul,
    add,
    scale,
    scale_columns,
    row_sum,
    reshape,
    concat_rows,
    stack_rows,
    gather_rows,
    scatter_rows,
    masked_softmax,
    weighted_sum,
    leaky_relu,
    relu,
    cross_entropy,
    binary_cross_entropy,
    sum_values,
)
from .optim import Adam, AdamState, adam_step
from .gradcheck import grad_check
from .exceptions import ShapeError, ContractViolation, OptimizerError

__all__ = [
    "DiffValue",
    "as_value",
    "default_dtype",
    "set_default_dtype",
    "precision",
    "Partition",
    "linear",
    "matmul",
    "add",
    "scale",
    "scale_columns",
    "row_sum",
    "reshape",
    "concat_rows",
    "stack_rows",
    "gather_rows",
    "scatter_rows",
    "masked_softmax",
    "weighted_sum",
    "leaky_relu",
    "relu",
    "cross_entropy",
    "binary_cross_entropy",
    "sum_values",
    "Adam",
    "AdamState",
    "adam_step",
    "grad_check",
    "ShapeError",
    "ContractViolation",
    "OptimizerError",
]
