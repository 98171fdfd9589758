import numpy as np
import pytest

from hetshare.autodiff import (
    ContractViolation,
    DiffValue,
    Partition,
    ShapeError,
    binary_cross_entropy,
    concat_rows,
    cross_entropy,
    gather_rows,
    grad_check,
    leaky_relu,
    linear,
    masked_softmax,
    precision,
    reshape,
    row_sum,
    scale_columns,
    scatter_rows,
    stack_rows,
    sum_values,
    weighted_sum,
)

TOLERANCE = 1e-4


def _rand(rng, *shape):
    return rng.standard_normal(shape)


def _const(data):
    return DiffValue(data, dtype=np.float64)


@pytest.mark.parametrize("seed", range(10))
def test_attention_chain_gradients_random_shapes(seed):
    rng = np.random.default_rng(seed)
    groups = int(rng.integers(1, 5))
    rows = int(rng.integers(groups, groups + 6))
    heads = int(rng.integers(1, 3))
    width = heads * int(rng.integers(1, 4))
    segment_ids = np.concatenate([np.arange(groups), rng.integers(0, groups, rows - groups)])
    group = Partition(segment_ids, groups)
    direction = _const(_rand(rng, 1, groups * width))

    def f(logits, values):
        weights = masked_softmax(leaky_relu(logits, 0.2), group)
        out = weighted_sum(weights, values, group)
        return row_sum(scale_columns(reshape(out, 1, groups * width), direction))

    error = grad_check(f, [_rand(rng, rows, heads), _rand(rng, rows, width)])
    assert error < TOLERANCE


@pytest.mark.parametrize("seed", range(5))
def test_softmax_groups_lie_on_the_simplex(seed):
    rng = np.random.default_rng(seed)
    segment_ids = np.concatenate([np.arange(6), rng.integers(0, 6, 40)])
    weights = masked_softmax(_const(rng.normal(0, 10, (46, 2))), Partition(segment_ids, 6))
    sums = np.zeros((6, 2))
    np.add.at(sums, segment_ids, weights.data)
    assert np.allclose(sums, 1.0, atol=1e-6)
    assert (weights.data > 0).all()


def test_linear_gradients():
    rng = np.random.default_rng(0)
    x, W, b = _rand(rng, 4, 3), _rand(rng, 3, 2), _rand(rng, 1, 2)
    error = grad_check(lambda x, W, b: row_sum(reshape(linear(x, W, b), 1, 8)), [x, W, b])
    assert error < TOLERANCE


def test_segment_softmax_and_sum_gradients():
    rng = np.random.default_rng(1)
    group = Partition([0, 0, 1, 2, 2, 2], 3)
    logits, rows = _rand(rng, 6, 2), _rand(rng, 6, 4)
    direction = _rand(rng, 3, 4)

    def f(logits, rows):
        out = weighted_sum(masked_softmax(logits, group), rows, group)
        return row_sum(scale_columns(reshape(out, 1, 12), _const(direction.reshape(1, -1))))

    assert grad_check(f, [logits, rows]) < TOLERANCE


def test_gather_scatter_concat_gradients():
    rng = np.random.default_rng(2)
    x, y = _rand(rng, 3, 2), _rand(rng, 4, 1)
    direction = _const(_rand(rng, 1, 15))

    def f(x, y):
        gathered = gather_rows(x, [0, 2, 2, 1])
        joint = concat_rows([gathered, y])
        spread = scatter_rows(joint, [4, 0, 4, 1], 5)
        return row_sum(scale_columns(reshape(spread, 1, 15), direction))

    assert grad_check(f, [x, y]) < TOLERANCE


def test_stack_and_leaky_relu_gradients():
    rng = np.random.default_rng(3)
    a, b = _rand(rng, 2, 3), _rand(rng, 1, 3)
    error = grad_check(
        lambda a, b: row_sum(reshape(leaky_relu(stack_rows([a, b]), 0.1), 1, 9)), [a, b]
    )
    assert error < TOLERANCE


def test_losses_gradients():
    rng = np.random.default_rng(4)
    logits = _rand(rng, 5, 3)
    labels = np.array([0, 2, 1, 1, 0])
    assert grad_check(lambda z: cross_entropy(z, labels), [logits]) < TOLERANCE
    indicator = np.array([[1, 0, 1], [0, 0, 0], [1, 1, 1], [0, 1, 0], [1, 0, 0]])
    assert grad_check(lambda z: binary_cross_entropy(z, indicator), [logits]) < TOLERANCE


def test_cross_entropy_value():
    logits = DiffValue([[0.0, 0.0], [2.0, 0.0]], dtype=np.float64)
    expected = (np.log(2) + np.log(1 + np.exp(-2.0))) / 2
    assert cross_entropy(logits, [0, 0]).item() == pytest.approx(expected)


def test_binary_cross_entropy_is_stable():
    logits = DiffValue([[1000.0, -1000.0]], dtype=np.float64)
    value = binary_cross_entropy(logits, np.array([[1, 0]]))
    assert np.isfinite(value.item())
    assert value.item() == pytest.approx(0.0)


def test_softmax_is_uniform_on_equal_logits():
    with precision(np.float64):
        logits = DiffValue(np.full((4, 1), 3.7))
        weights = masked_softmax(logits, Partition([0, 0, 0, 1], 2))
    assert weights.data[:3, 0].tolist() == [1 / 3] * 3
    assert weights.data[3, 0] == 1.0


def test_softmax_rejects_empty_groups():
    with pytest.raises(ContractViolation):
        masked_softmax(DiffValue(np.zeros((2, 1))), Partition([0, 2], 3))


def test_weighted_sum_leaves_empty_groups_zero():
    rows = DiffValue(np.ones((2, 2)))
    out = weighted_sum(DiffValue([[0.5], [0.5]]), rows, Partition([0, 2], 3))
    assert out.data.tolist() == [[0.5, 0.5], [0.0, 0.0], [0.5, 0.5]]


def test_shape_errors():
    with pytest.raises(ShapeError):
        linear(DiffValue(np.zeros((2, 3))), DiffValue(np.zeros((2, 2))))
    with pytest.raises(ShapeError):
        concat_rows([DiffValue(np.zeros((2, 1))), DiffValue(np.zeros((3, 1)))])


def test_label_contracts():
    with pytest.raises(ContractViolation):
        cross_entropy(DiffValue(np.zeros((2, 2))), [0, 2])
    with pytest.raises(ContractViolation):
        binary_cross_entropy(DiffValue(np.zeros((1, 2))), np.array([[0, 2]]))


def test_backward_accumulates():
    x = DiffValue([[1.0, 2.0]], requires_grad=True, dtype=np.float64)
    W = DiffValue([[3.0], [4.0]], dtype=np.float64)
    linear(x, W).backward()
    linear(x, W).backward()
    assert x.grad.tolist() == [[6.0, 8.0]]
    x.zero_grad()
    assert x.grad.tolist() == [[0.0, 0.0]]


def test_shared_subexpression_gradient():
    x = DiffValue([[2.0]], requires_grad=True, dtype=np.float64)
    y = linear(x, DiffValue([[3.0]], dtype=np.float64))
    sum_values([y, y, x], [1.0, 1.0, 2.0]).backward()
    assert x.grad.tolist() == [[8.0]]


def test_constants_do_not_record():
    out = linear(DiffValue(np.ones((2, 2))), DiffValue(np.ones((2, 2))))
    assert not out.requires_grad
    out.backward(np.ones((2, 2)))


def test_default_precision_is_float32():
    assert DiffValue([[1.0]]).data.dtype == np.float32
    with precision(np.float64):
        assert DiffValue([[1.0]]).data.dtype == np.float64
    assert DiffValue([[1.0]]).data.dtype == np.float32
