import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhs_scan.core import (
    ElementwiseOp,
    ReduceKind,
    as_tensor,
    elementwise,
    layer_norm,
    matmul,
    project_last,
    reduce,
    sequential_sum,
    softplus,
    transpose,
)
from mhs_scan.errors import DimensionError, DomainError


def _naive_matmul(a, b):
    M, K = a.shape
    N = b.shape[1]
    out = np.zeros((M, N))
    for i in range(M):
        for j in range(N):
            acc = 0.0
            for k in range(K):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


# ---------------------------------------------------------------------------
# matmul
# ---------------------------------------------------------------------------

def test_matmul_identity_is_bitwise():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(matmul(np.eye(2), x), x)


def test_matmul_hand_product():
    assert matmul(np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]])).tolist() == [[11.0]]


def test_matmul_matches_triple_loop_exactly():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((5, 7))
    b = rng.standard_normal((7, 3))
    assert np.array_equal(matmul(a, b), _naive_matmul(a, b))


def test_matmul_shape_mismatch_names_both_shapes():
    with pytest.raises(DimensionError) as exc:
        matmul(np.zeros((2, 3)), np.zeros((4, 5)))
    assert exc.value.shapes == ((2, 3), (4, 5))
    assert "(2, 3)" in str(exc.value)


def test_project_last_applies_to_every_leading_position():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((2, 3, 4))
    w = rng.standard_normal((4, 5))
    out = project_last(x, w)
    assert out.shape == (2, 3, 5)
    assert np.array_equal(out[1, 2], matmul(x[1, 2][None, :], w)[0])


def test_transpose_rejects_non_permutation():
    with pytest.raises(DimensionError):
        transpose(np.zeros((2, 3)), (0, 0))


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------

def test_population_std_hand_value():
    out = reduce(np.array([0.0, 0.0, 0.0, 1.0]), 0, ReduceKind.STD)
    assert out == pytest.approx(math.sqrt(0.1875), abs=1e-15)


def test_mean_of_constant_and_min():
    assert reduce(np.full(4, 0.3), 0, ReduceKind.MEAN) == pytest.approx(0.3)
    assert reduce(np.array([3.0, -1.0, 2.0]), 0, "min") == -1.0


def test_std_of_identical_values_is_exactly_zero():
    x = np.full((3, 4, 5), 0.1)
    assert np.all(reduce(x, 1, ReduceKind.STD) == 0.0)


def test_reduce_rejects_bad_axis():
    with pytest.raises(DimensionError):
        reduce(np.zeros((2, 2)), 2, ReduceKind.SUM)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=20))
def test_sum_is_left_to_right_accumulation(values):
    x = np.array(values)
    acc = 0.0
    for v in values:
        acc = acc + v
    # first slice seeds the accumulator; 0.0 + v == v for finite v
    assert reduce(x, 0, ReduceKind.SUM) == acc
    assert sequential_sum(x, 0) == acc


# ---------------------------------------------------------------------------
# elementwise
# ---------------------------------------------------------------------------

def test_elementwise_scalar_examples():
    assert elementwise(np.array(-0.3), ElementwiseOp.RELU) == 0.0
    assert elementwise(np.array(0.0), "sigmoid") == 0.5
    assert elementwise(np.array(0.0), "softplus") == pytest.approx(math.log(2.0), abs=1e-15)


def test_softplus_is_stable_for_large_inputs():
    out = softplus(np.array([-800.0, 800.0]))
    assert np.all(np.isfinite(out))
    assert out[1] == 800.0


def test_binary_ops_accept_scalar_operands():
    x = np.array([1.0, 2.0])
    assert elementwise(x, "scale", 2.0).tolist() == [2.0, 4.0]
    assert elementwise(x, ElementwiseOp.ADD, np.array([1.0, 1.0])).tolist() == [2.0, 3.0]


def test_binary_ops_reject_unbroadcastable_shapes():
    with pytest.raises(DimensionError):
        elementwise(np.zeros(2), "add", np.zeros(3))
    with pytest.raises(DimensionError):
        elementwise(np.zeros(2), "scale", np.zeros(2))


def test_as_tensor_rejects_non_finite():
    with pytest.raises(DomainError):
        as_tensor([1.0, float("nan")])


# ---------------------------------------------------------------------------
# layer_norm
# ---------------------------------------------------------------------------

def test_layer_norm_constant_vector_is_zero():
    out = layer_norm(np.full(5, 0.1), 0, np.ones(5), np.zeros(5), 0.0)
    assert np.all(out == 0.0)


def test_layer_norm_unit_example():
    out = layer_norm(np.array([1.0, -1.0]), 0, np.ones(2), np.zeros(2), 0.0)
    assert out.tolist() == [1.0, -1.0]


def test_layer_norm_zero_gamma_gives_beta():
    rng = np.random.default_rng(2)
    beta = rng.standard_normal(6)
    out = layer_norm(rng.standard_normal((3, 6)), -1, np.zeros(6), beta, 1e-5)
    assert np.array_equal(out, np.broadcast_to(beta, (3, 6)))


def test_layer_norm_rejects_wrong_affine_extent():
    with pytest.raises(DimensionError):
        layer_norm(np.zeros((2, 3)), -1, np.ones(2), np.zeros(3), 1e-5)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 16))
def test_layer_norm_moments(seed, width):
    x = np.random.default_rng(seed).standard_normal((4, width)) * 3.0 + 1.5
    out = layer_norm(x, -1, np.ones(width), np.zeros(width), 0.0)
    assert np.all(np.abs(out.mean(axis=-1)) <= 1e-12)
    assert np.all(np.abs(out.var(axis=-1) - 1.0) <= 1e-10)
