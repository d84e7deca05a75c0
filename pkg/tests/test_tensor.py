import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_mode_multiply
from rescalk.errors import DegenerateInputError, ShapeError
from rescalk.tensor import (
    as_data_tensor,
    frobenius_norm,
    mode_multiply,
    reconstruct,
    relative_error,
)

shapes = st.tuples(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
seeds = st.integers(0, 2**32 - 1)


def test_mode_multiply_identity_example(rng):
    X = rng.random((3, 4, 5))
    np.testing.assert_array_equal(mode_multiply(X, np.eye(3), 1), X)


def test_mode1_hand_example():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
    out = mode_multiply(X, [[2.0, 0.0], [0.0, 1.0]], 1)
    np.testing.assert_array_equal(out[:, :, 0], [[2.0, 4.0], [3.0, 4.0]])


def test_mode2_hand_example():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])[:, :, None]
    out = mode_multiply(X, [[1.0, 1.0]], 2)
    assert out.shape == (2, 1, 1)
    np.testing.assert_array_equal(out[:, :, 0], [[3.0], [7.0]])


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_mode_multiply_matches_brute_force(rng, mode):
    X = rng.random((3, 4, 2))
    M = rng.standard_normal((5, X.shape[mode - 1]))
    np.testing.assert_allclose(mode_multiply(X, M, mode), brute_mode_multiply(X, M, mode), rtol=1e-13)


@pytest.mark.parametrize("mode", [1, 2, 3])
def test_mode_multiply_shape_error_names_mode(mode):
    X = np.ones((2, 3, 4))
    with pytest.raises(ShapeError, match=f"mode-{mode}"):
        mode_multiply(X, np.ones((2, 7)), mode)


def test_mode_multiply_rejects_bad_mode():
    with pytest.raises(ShapeError):
        mode_multiply(np.ones((2, 2, 2)), np.eye(2), 4)


@settings(max_examples=50, deadline=None)
@given(shape=shapes, seed=seeds)
def test_identity_is_identity_map_on_all_modes(shape, seed):
    X = np.random.default_rng(seed).random(shape)
    for mode in (1, 2, 3):
        np.testing.assert_array_equal(mode_multiply(X, np.eye(shape[mode - 1]), mode), X)


@settings(max_examples=50, deadline=None)
@given(shape=shapes, seed=seeds, mode=st.sampled_from([1, 2, 3]),
       alpha=st.floats(-2, 2), beta=st.floats(-2, 2))
def test_mode_multiply_linear_in_matrix(shape, seed, mode, alpha, beta):
    g = np.random.default_rng(seed)
    X = g.random(shape)
    M1 = g.standard_normal((3, shape[mode - 1]))
    M2 = g.standard_normal((3, shape[mode - 1]))
    lhs = mode_multiply(X, alpha * M1 + beta * M2, mode)
    rhs = alpha * mode_multiply(X, M1, mode) + beta * mode_multiply(X, M2, mode)
    np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


def test_frobenius_examples():
    assert frobenius_norm(np.zeros((3, 3, 3))) == 0.0
    assert frobenius_norm(np.ones((2, 2, 2))) == pytest.approx(np.sqrt(8), abs=1e-15)
    assert frobenius_norm(np.array([[3.0, 4.0]])) == 5.0


def test_frobenius_triangle_inequality(rng):
    for _ in range(100):
        shape = tuple(rng.integers(1, 5, size=3))
        X = rng.standard_normal(shape)
        Y = rng.standard_normal(shape)
        assert frobenius_norm(X + Y) <= frobenius_norm(X) + frobenius_norm(Y) + 1e-12


def test_reconstruct_identity_factor(rng):
    R = rng.random((3, 3, 4))
    np.testing.assert_array_equal(reconstruct(np.eye(3), R), R)


def test_reconstruct_rank_one_hand_example():
    R = np.array([2.5, 7.0]).reshape(1, 1, 2)
    out = reconstruct(np.ones((2, 1)), R)
    np.testing.assert_array_equal(out[:, :, 0], np.full((2, 2), 2.5))
    np.testing.assert_array_equal(out[:, :, 1], np.full((2, 2), 7.0))


def test_reconstruct_trade_dimensions(rng):
    out = reconstruct(rng.random((23, 5)), rng.random((5, 5, 420)))
    assert out.shape == (23, 23, 420)


def test_reconstruct_equals_two_mode_products(rng):
    for _ in range(20):
        n, r, T = rng.integers(1, 7), rng.integers(1, 4), rng.integers(1, 5)
        A = rng.random((n, r))
        R = rng.random((r, r, T))
        via_modes = mode_multiply(mode_multiply(R, A, 1), A, 2)
        np.testing.assert_allclose(reconstruct(A, R), via_modes, rtol=1e-12)


def test_reconstruct_shape_error():
    with pytest.raises(ShapeError):
        reconstruct(np.ones((4, 2)), np.ones((3, 3, 1)))


def test_relative_error_examples(rng):
    A = rng.random((4, 2))
    R = rng.random((2, 2, 3))
    assert relative_error(reconstruct(A, R), A, R) == 0.0
    assert relative_error(rng.random((4, 4, 3)) + 0.1, A, np.zeros_like(R)) == 1.0
    X = np.array([2.0]).reshape(1, 1, 1)
    assert relative_error(X, np.ones((1, 1)), np.ones((1, 1, 1))) == 0.5


def test_relative_error_zero_tensor():
    with pytest.raises(DegenerateInputError):
        relative_error(np.zeros((2, 2, 1)), np.ones((2, 1)), np.ones((1, 1, 1)))


def test_data_tensor_validation():
    with pytest.raises(ShapeError, match="negative"):
        as_data_tensor(-np.ones((2, 2, 2)))
    with pytest.raises(ShapeError, match="non-finite"):
        as_data_tensor(np.full((1, 1, 1), np.nan))
    with pytest.raises(ShapeError, match="order 3"):
        as_data_tensor(np.ones((2, 2)))
    X = as_data_tensor([[[1.0, 2.0]]])
    assert X.flags.c_contiguous and X.dtype == np.float64
