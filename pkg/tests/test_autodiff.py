import numpy as np
import pytest

from cagpool.autodiff import (
    Tape, Tensor, add, clip, concat_cols, finite_diff_check, gather_rows,
    l2_norm, load_params, log, matmul, mean_rows, mul, relu, save_params,
    scalar_div, scale, sigmoid, split_cols, sub, sum_all, tanh, transpose,
)
from cagpool.errors import NumericalError, ShapeError


def test_tensor_promotes_1d_rejects_3d():
    assert Tensor(np.ones(3)).shape == (1, 3)
    with pytest.raises(ShapeError):
        Tensor(np.ones((2, 2, 2)))


def test_tensor_rejects_nan():
    with pytest.raises(NumericalError):
        Tensor(np.array([[np.nan]]))


def test_matmul_identity():
    a = Tensor([[1.0, 2.0], [3.0, 4.0]])
    out = matmul(a, Tensor(np.eye(2)))
    assert np.array_equal(out.data, [[1, 2], [3, 4]])


def test_mean_rows_example():
    out = mean_rows(Tensor([[1.0, 3.0], [3.0, 5.0]]))
    assert np.array_equal(out.data, [[2.0, 4.0]])


def test_gather_rows_example():
    out = gather_rows(Tensor([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]), [2, 0])
    assert np.array_equal(out.data, [[5, 6], [1, 2]])


def test_square_loss_gradient_analytic():
    x = Tensor([[3.0]])
    with Tape() as tape:
        loss = sum_all(mul(x, x))
        grads = tape.gradients(loss, [x])
    assert np.allclose(grads[x], [[6.0]])


def test_unused_parameter_gets_zero_gradient():
    x = Tensor([[2.0]])
    w = Tensor([[5.0]])
    with Tape() as tape:
        loss = sum_all(mul(x, x))
        grads = tape.gradients(loss, [x, w])
    assert np.array_equal(grads[w], [[0.0]])


def test_finite_diff_sum_of_squares():
    rng = np.random.default_rng(0)
    x = Tensor(rng.normal(size=(3, 3)))
    err = finite_diff_check(lambda t: sum_all(mul(t, t)), x)
    assert err < 1e-6


def test_finite_diff_sigmoid_sum():
    rng = np.random.default_rng(1)
    x = Tensor(rng.normal(size=(4, 2)))
    err = finite_diff_check(lambda t: sum_all(sigmoid(t)), x)
    assert err < 1e-5


def test_finite_diff_linear_nearly_exact():
    rng = np.random.default_rng(2)
    w = Tensor(rng.normal(size=(3, 3)))
    x = Tensor(rng.normal(size=(2, 3)))
    err = finite_diff_check(lambda t: sum_all(matmul(t, w)), x)
    assert err < 1e-9


def test_relu_derivative_zero_at_kink():
    x = Tensor([[0.0]])
    with Tape() as tape:
        loss = sum_all(relu(x))
        grads = tape.gradients(loss, [x])
    assert np.array_equal(grads[x], [[0.0]])


def test_concat_split_round_trip_gradients():
    rng = np.random.default_rng(3)
    a = Tensor(rng.normal(size=(2, 3)))
    b = Tensor(rng.normal(size=(2, 2)))
    with Tape() as tape:
        joined = concat_cols([a, b])
        left, right = split_cols(joined, [3, 2])
        loss = add(sum_all(left), sum_all(right))
        grads = tape.gradients(loss, [a, b])
    assert np.array_equal(grads[a], np.ones((2, 3)))
    assert np.array_equal(grads[b], np.ones((2, 2)))


def test_gather_rows_scatter_add_backward():
    x = Tensor([[1.0], [2.0], [3.0]])
    with Tape() as tape:
        picked = gather_rows(x, [0, 0, 2])
        loss = sum_all(picked)
        grads = tape.gradients(loss, [x])
    assert np.array_equal(grads[x], [[2.0], [0.0], [1.0]])


def test_mul_column_broadcast():
    x = Tensor([[1.0, 2.0], [3.0, 4.0]])
    z = Tensor([[2.0], [10.0]])
    out = mul(x, z)
    assert np.array_equal(out.data, [[2, 4], [30, 40]])
    err = finite_diff_check(
        lambda t: sum_all(mul(x, t)), Tensor([[0.5], [1.5]]))
    assert err < 1e-6


def test_composite_graph_matches_finite_differences():
    rng = np.random.default_rng(4)
    x = Tensor(rng.normal(size=(3, 4)))

    def f(t):
        h = tanh(matmul(t, Tensor(rng_w)))
        h = scalar_div(h, add(l2_norm(h), Tensor([[1.0]])))
        return sum_all(sub(sigmoid(h), scale(h, 0.3)))

    rng_w = np.random.default_rng(5).normal(size=(4, 4))
    assert finite_diff_check(f, x) < 1e-5


def test_log_clip_combination():
    x = Tensor([[0.2, 0.9]])
    err = finite_diff_check(lambda t: sum_all(log(clip(t, 1e-7, 1 - 1e-7))), x)
    assert err < 1e-5


def test_transpose_gradient():
    x = Tensor([[1.0, 2.0, 3.0]])
    with Tape() as tape:
        loss = sum_all(transpose(x))
        grads = tape.gradients(loss, [x])
    assert np.array_equal(grads[x], np.ones((1, 3)))


def test_save_load_params_round_trip(tmp_path):
    params = {"w": Tensor([[1.5, -2.0]]), "b": Tensor([[0.25], [0.75]])}
    path = tmp_path / "params.json"
    save_params(params, path)
    loaded = load_params(path)
    assert set(loaded) == {"w", "b"}
    for name in params:
        assert np.array_equal(loaded[name].data, params[name].data)


def test_nested_tapes_are_independent():
    x = Tensor([[2.0]])
    with Tape() as outer:
        y = mul(x, x)
        with Tape() as inner:
            z = mul(x, x)
            inner_grads = inner.gradients(sum_all(z), [x])
        outer_grads = outer.gradients(sum_all(y), [x])
    assert np.allclose(inner_grads[x], [[4.0]])
    assert np.allclose(outer_grads[x], [[4.0]])
