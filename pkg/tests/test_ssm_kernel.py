import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhs_scan.errors import ContractError, DimensionError, DomainError
from mhs_scan.ssm import (
    DELTA_FLOOR,
    SERIES_THRESHOLD,
    ConvKernel,
    MambaWeights,
    SsmParams,
    causal_depthwise_conv,
    conv_kernel,
    conv_scan,
    discretize,
    init_mamba_weights,
    mamba_block,
    recurrence_scan,
    recurrence_states,
    selective_scan,
    zoh_phi,
    zoh_phi_grad,
)


# ---------------------------------------------------------------------------
# Discretization
# ---------------------------------------------------------------------------

def test_zoh_closed_form():
    A_bar, B_bar = discretize(math.log(2.0), 1.0, 1.0)
    assert abs(float(A_bar) - 2.0) <= 1e-12
    assert abs(float(B_bar) - 1.0) <= 1e-12


def test_zoh_small_delta_bound():
    rng = np.random.default_rng(0)
    A = -rng.uniform(0.5, 2.0, 6)
    B = rng.standard_normal(6)
    delta = 1e-4
    _, B_bar = discretize(delta, A, B)
    assert np.max(np.abs(B_bar - delta * B)) <= np.max(np.abs(A)) * delta**2 * np.max(np.abs(B))


@pytest.mark.parametrize("edge", [SERIES_THRESHOLD, -SERIES_THRESHOLD])
def test_series_branch_is_continuous(edge):
    inside = np.nextafter(edge, 0.0)
    assert abs(float(zoh_phi(inside)) - float(zoh_phi(edge))) <= 1e-12
    assert abs(float(zoh_phi_grad(inside)) - float(zoh_phi_grad(edge))) <= 1e-8


def test_zoh_phi_at_zero():
    assert float(zoh_phi(0.0)) == 1.0
    assert float(zoh_phi_grad(0.0)) == 0.5


@pytest.mark.parametrize("delta", [0.0, -0.1, float("nan")])
def test_non_positive_delta_rejected(delta):
    with pytest.raises(DomainError):
        discretize(delta, -1.0, 1.0)


def test_ssm_params_discretized():
    params = SsmParams(A=np.array([-1.0, -2.0]), B_in=np.ones(2), C_out=np.ones(2), delta=0.1)
    assert params.is_time_invariant
    assert params.state_dim == 2
    A_bar, B_bar, C = params.discretized()
    assert np.allclose(A_bar, np.exp([-0.1, -0.2]), rtol=0, atol=1e-15)
    assert not SsmParams(np.array([-1.0]), np.ones((3, 1)), np.ones(1), np.full(3, 0.1)).is_time_invariant


# ---------------------------------------------------------------------------
# Recurrence and convolution
# ---------------------------------------------------------------------------

def test_scalar_recurrence_example():
    y = recurrence_scan(0.5, 1.0, 2.0, np.array([1.0, 0.0, 0.0]))
    assert y.tolist() == [2.0, 1.0, 0.5]


def test_recurrence_returns_states():
    y, hs = recurrence_states(np.array([0.5]), np.array([1.0]), np.array([1.0]), np.array([1.0, 1.0]))
    assert hs[:, 0].tolist() == [1.0, 1.5]
    assert y.tolist() == [1.0, 1.5]


def test_recurrence_rejects_state_mismatch():
    with pytest.raises(DimensionError):
        recurrence_scan(np.ones(2), np.ones(3), np.ones(2), np.ones(4))


def test_kernel_values():
    kernel = conv_kernel(0.5, 1.0, 2.0, 3)
    assert kernel.length == 3
    assert kernel.values.tolist() == [2.0, 1.0, 0.5]


def test_kernel_rejects_per_step_parameters():
    per_step = np.full((4, 2), 0.5)
    with pytest.raises(ContractError):
        conv_kernel(per_step, per_step, per_step, 4)


def test_conv_scan_length_mismatch():
    with pytest.raises(DimensionError):
        conv_scan(np.ones(3), conv_kernel(0.5, 1.0, 1.0, 4))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_recurrence_equals_convolution(seed):
    rng = np.random.default_rng(seed)
    N, L = int(rng.integers(1, 9)), int(rng.integers(1, 65))
    A_bar, B_bar = discretize(rng.uniform(0.01, 0.5), -rng.uniform(0.1, 2.0, N), rng.standard_normal(N))
    C = rng.standard_normal(N)
    x = rng.standard_normal(L)
    y_rec = recurrence_scan(A_bar, B_bar, C, x)
    y_conv = conv_scan(x, conv_kernel(A_bar, B_bar, C, L))
    assert np.max(np.abs(y_rec - y_conv)) <= 1e-10 * max(np.max(np.abs(y_rec)), 1e-300)


def test_zero_input_gives_zero_output():
    assert np.all(recurrence_scan(np.full(3, 0.9), np.ones(3), np.ones(3), np.zeros(7)) == 0.0)


def test_conv_scan_impulse_reads_out_kernel():
    K = conv_kernel(0.8, 0.5, 2.0, 5)
    assert np.array_equal(conv_scan(np.eye(5)[0], K), K.values)


def test_conv_scan_identity_kernel_passes_input():
    x = np.array([0.3, -1.2, 2.5, 0.0])
    assert np.array_equal(conv_scan(x, ConvKernel(np.eye(4)[0])), x)


def test_conv_scan_two_step_example():
    assert conv_scan(np.array([1.0, 1.0]), ConvKernel(np.array([1.0, 0.5]))).tolist() == [1.0, 1.5]


def test_recurrence_is_linear_in_input():
    rng = np.random.default_rng(11)
    A_bar, B_bar = discretize(0.1, -rng.uniform(0.1, 2.0, 4), rng.standard_normal(4))
    C = rng.standard_normal(4)
    x1, x2 = rng.standard_normal((2, 20))
    a, b = 1.7, -0.4
    combined = recurrence_scan(A_bar, B_bar, C, a * x1 + b * x2)
    separate = a * recurrence_scan(A_bar, B_bar, C, x1) + b * recurrence_scan(A_bar, B_bar, C, x2)
    assert np.max(np.abs(combined - separate)) <= 1e-12


# ---------------------------------------------------------------------------
# Selective scan and sequence block
# ---------------------------------------------------------------------------

def _weights(S=3, N=4, seed=0, **kw):
    return init_mamba_weights(S, np.random.default_rng(seed), state_dim=N, **kw)


def test_init_shapes():
    w = _weights(S=3, N=4)
    assert (w.subspace_dim, w.inner_dim, w.state_dim) == (3, 6, 4)
    assert w.W_delta.shape == (6, 6)
    assert np.array_equal(w.A[0], -np.arange(1.0, 5.0))
    assert np.all(w.D_skip == 1.0)
    assert w.conv_w.shape == (6, 3)
    assert _weights(conv_on=False).conv_w is None


def test_weights_reject_bad_shape():
    w = _weights()
    with pytest.raises(DimensionError):
        w.replace(W_B=np.zeros((6, 5)))


def test_selective_scan_is_causal():
    w = _weights()
    rng = np.random.default_rng(1)
    u = rng.standard_normal((2, 7, 6))
    changed = u.copy()
    changed[:, 4:] += 1.0
    assert np.array_equal(selective_scan(u, w)[:, :4], selective_scan(changed, w)[:, :4])


def test_selective_scan_leading_axes_are_independent():
    w = _weights()
    u = np.random.default_rng(2).standard_normal((3, 5, 6))
    batched = selective_scan(u, w)
    assert np.array_equal(batched[1], selective_scan(u[1], w))


def test_selective_scan_reduces_to_recurrence_for_one_channel():
    rng = np.random.default_rng(4)
    N, L = 3, 6
    w = MambaWeights(
        W_in=np.ones((1, 1)),
        W_gate=np.ones((1, 1)),
        conv_w=None,
        W_delta=np.zeros((1, 1)),
        b_delta=np.array([0.2]),
        W_B=np.zeros((1, N)),
        W_C=np.zeros((1, N)),
        A=-rng.uniform(0.5, 1.5, (1, N)),
        D_skip=np.zeros(1),
        W_out=np.ones((1, 1)),
        b_B=rng.standard_normal(N),
        b_C=rng.standard_normal(N),
    )
    u = rng.standard_normal((L, 1))
    delta = float(np.logaddexp(0.0, 0.2))
    A_bar, B_bar = discretize(delta, w.A[0], w.b_B)
    expected = recurrence_scan(A_bar, B_bar, w.b_C, u[:, 0])
    assert np.allclose(selective_scan(u, w)[:, 0], expected, rtol=1e-12, atol=1e-14)


def test_causal_conv_taps_oldest_to_newest():
    x = np.array([[1.0], [2.0], [3.0]])
    taps = np.array([[10.0, 1.0]])
    assert causal_depthwise_conv(x, taps)[:, 0].tolist() == [1.0, 12.0, 23.0]


def test_mamba_block_shape_and_batch_independence():
    w = _weights(S=3, N=4)
    x = np.random.default_rng(5).standard_normal((4, 3, 9))
    y = mamba_block(x, w)
    assert y.shape == x.shape
    assert np.array_equal(y[2:3], mamba_block(x[2:3], w))


def test_mamba_block_rejects_wrong_channels():
    with pytest.raises(DimensionError):
        mamba_block(np.zeros((1, 4, 5)), _weights(S=3))


def _silu(x):
    return x / (1.0 + math.exp(-x))


def _loop_selective_scan(u, w):
    """Step-by-step scalar loops over one sequence ``u`` (L, D)."""
    L, D = u.shape
    N = w.A.shape[1]
    h = [[0.0] * N for _ in range(D)]
    y = np.zeros((L, D))
    for t in range(L):
        B_t = [sum(u[t, k] * w.W_B[k, n] for k in range(D)) for n in range(N)]
        C_t = [sum(u[t, k] * w.W_C[k, n] for k in range(D)) for n in range(N)]
        for d in range(D):
            z = sum(u[t, k] * w.W_delta[k, d] for k in range(D)) + w.b_delta[d]
            delta = math.log1p(math.exp(z))
            out = 0.0
            for n in range(N):
                x = delta * w.A[d, n]
                h[d][n] = math.exp(x) * h[d][n] + math.expm1(x) / x * delta * B_t[n] * u[t, d]
                out += C_t[n] * h[d][n]
            y[t, d] = out + w.D_skip[d] * u[t, d]
    return y


def _input_dependent_weights(seed, S=1, N=2):
    rng = np.random.default_rng(seed)
    w = _weights(S=S, N=N, seed=seed)
    Si = w.inner_dim
    return w.replace(
        W_delta=0.5 * rng.standard_normal((Si, Si)),
        W_B=rng.standard_normal((Si, N)),
        W_C=rng.standard_normal((Si, N)),
        D_skip=rng.standard_normal(Si),
    )


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_selective_scan_matches_step_loop(seed):
    w = _input_dependent_weights(seed)
    u = np.random.default_rng(seed + 10).standard_normal((5, w.inner_dim))
    assert np.allclose(selective_scan(u, w), _loop_selective_scan(u, w), rtol=1e-12, atol=1e-12)


def test_selective_scan_zero_input():
    w = _input_dependent_weights(3)
    assert np.all(selective_scan(np.zeros((4, w.inner_dim)), w) == 0.0)


def test_selective_scan_without_input_map_is_skip_only():
    w = _input_dependent_weights(4)
    w = w.replace(W_B=np.zeros_like(w.W_B))
    u = np.random.default_rng(5).standard_normal((6, w.inner_dim))
    assert np.array_equal(selective_scan(u, w), w.D_skip * u)


def test_selective_scan_step_size_never_underflows():
    w = _weights(S=1, N=2)
    w = w.replace(W_delta=np.zeros_like(w.W_delta), b_delta=np.full(w.inner_dim, -800.0))
    u = np.random.default_rng(6).standard_normal((4, w.inner_dim))
    y = selective_scan(u, w)
    assert np.all(np.isfinite(y))
    assert np.allclose(y, w.D_skip * u, rtol=1e-12, atol=0.0)


def test_delta_floor_is_smallest_normal():
    assert DELTA_FLOOR == np.finfo(np.float64).tiny > 0.0


def test_mamba_block_zero_input():
    assert np.all(mamba_block(np.zeros((2, 3, 6)), _weights(S=3)) == 0.0)


def test_mamba_block_identity_configuration():
    gate = 2.0
    w = MambaWeights(
        W_in=np.array([[1.0, 0.0]]),
        W_gate=np.array([[gate, 0.5]]),
        conv_w=np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]),
        W_delta=np.zeros((2, 2)),
        b_delta=np.zeros(2),
        W_B=np.zeros((2, 2)),
        W_C=np.zeros((2, 2)),
        A=-np.ones((2, 2)),
        D_skip=np.ones(2),
        W_out=np.array([[1.0], [0.0]]),
    )
    x = np.array([[[0.5, -1.2]]])
    expected = [_silu(v) * _silu(gate * v) for v in x[0, 0]]
    assert np.allclose(mamba_block(x, w)[0, 0], expected, rtol=1e-14, atol=0.0)


def test_mamba_block_single_step():
    w = _input_dependent_weights(7, S=2)
    x = np.random.default_rng(8).standard_normal((3, 2, 1))
    for b in range(3):
        u = x[b, :, 0]
        v = u @ w.W_in * w.conv_w[:, -1]
        v = v / (1.0 + np.exp(-v))
        g = u @ w.W_gate
        g = g / (1.0 + np.exp(-g))
        s = _loop_selective_scan(v[None, :], w)[0]
        assert np.allclose(mamba_block(x[b:b + 1], w)[0, :, 0], (s * g) @ w.W_out, rtol=1e-12, atol=1e-14)
