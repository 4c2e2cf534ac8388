import numpy as np
import pytest

from mhs_scan.errors import DomainError
from mhs_scan.fusion import CvScaling, MixturePooling, SumScheme, apply_scheme
from mhs_scan.gradcheck import (
    OP_BUILDERS,
    GradStatus,
    backward_esf,
    backward_recurrence,
    compare_gradients,
    esf_irregularities,
    gradcheck_module,
    kink_branches,
    numeric_jacobian,
    probe_coordinates,
)
from mhs_scan.ssm import recurrence_scan


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

def test_numeric_jacobian_of_square():
    jac = numeric_jacobian(lambda x: float(x[0] ** 2), np.array([3.0]))
    assert jac.shape == (1,)
    assert abs(jac[0] - 6.0) <= 1e-8


def test_numeric_jacobian_of_linear_map():
    M = np.array([[1.0, -2.0, 0.5], [3.0, 0.0, 4.0]])
    jac = numeric_jacobian(lambda x: M @ x, np.array([0.3, -1.0, 2.0]))
    assert jac.shape == (2, 3)
    assert np.allclose(jac, M, rtol=0, atol=1e-9)


def test_numeric_jacobian_of_relu_away_from_kink():
    jac = numeric_jacobian(lambda x: np.maximum(x, 0.0), np.array([1.0, -1.0]))
    assert np.allclose(jac, np.diag([1.0, 0.0]), rtol=0, atol=1e-9)


def test_numeric_jacobian_on_selected_coordinates():
    jac = numeric_jacobian(lambda x: float(np.sum(x * x)), np.arange(4.0).reshape(2, 2), coords=[1, 3])
    assert np.allclose(jac, [2.0, 6.0], rtol=0, atol=1e-8)


def test_numeric_jacobian_rejects_non_finite_values():
    with pytest.raises(DomainError):
        numeric_jacobian(lambda x: np.log(x), np.array([0.0]))
    with pytest.raises(ValueError):
        numeric_jacobian(lambda x: x, np.array([1.0]), h=0.0)


def test_probe_coordinates():
    rng = np.random.default_rng(0)
    assert probe_coordinates(5, 32, rng).tolist() == [0, 1, 2, 3, 4]
    assert probe_coordinates(5, None, rng).tolist() == [0, 1, 2, 3, 4]
    picked = probe_coordinates(100, 8, rng)
    assert len(picked) == 8
    assert np.all(np.diff(picked) > 0)


def test_compare_gradients_uses_per_tensor_scale():
    abs_err, rel_err = compare_gradients(np.array([10.0, 0.0]), np.array([10.0, 1e-3]))
    assert abs_err == pytest.approx(1e-3)
    assert rel_err == pytest.approx(1e-4)
    assert compare_gradients(np.zeros(0), np.zeros(0)) == (0.0, 0.0)


# ---------------------------------------------------------------------------
# Analytic backward passes
# ---------------------------------------------------------------------------

def test_recurrence_backward_single_step():
    A_bar, B_bar, C = np.array([0.5, -0.3]), np.array([2.0, 1.0]), np.array([1.5, -4.0])
    g = backward_recurrence(A_bar, B_bar, C, np.array([0.7]), np.array([2.0]))
    assert g.x[0] == pytest.approx(2.0 * float(np.dot(C, B_bar)))
    assert np.allclose(g.A_bar, 0.0)
    assert np.allclose(g.C, 2.0 * B_bar * 0.7)


def test_recurrence_backward_with_zero_readout():
    rng = np.random.default_rng(1)
    g = backward_recurrence(np.full(3, 0.8), rng.standard_normal(3), np.zeros(3), rng.standard_normal(6), rng.standard_normal(6))
    assert np.all(g.x == 0.0)
    assert np.all(g.A_bar == 0.0)
    assert np.all(g.B_bar == 0.0)


def test_recurrence_backward_matches_finite_differences():
    rng = np.random.default_rng(2)
    A_bar, B_bar, C = rng.uniform(-0.9, 0.9, 3), rng.standard_normal(3), rng.standard_normal(3)
    x, y_bar = rng.standard_normal(7), rng.standard_normal(7)
    g = backward_recurrence(A_bar, B_bar, C, x, y_bar)
    numeric = numeric_jacobian(lambda v: float(np.sum(y_bar * recurrence_scan(A_bar, B_bar, C, v))), x)
    assert np.allclose(g.x, numeric, rtol=1e-7, atol=1e-9)


def test_sum_backward_replicates_cotangent():
    stack = np.random.default_rng(3).standard_normal((2, 4, 3))
    z_bar = np.random.default_rng(4).standard_normal((2, 3))
    g = backward_esf(SumScheme(), stack, z_bar)
    for k in range(4):
        assert np.array_equal(g.stack[:, k], z_bar)
    assert g.w is None and g.t is None


def test_closed_gate_blocks_every_cotangent():
    stack = np.full((1, 4, 2, 3), 0.7)
    g = backward_esf(CvScaling(t=0.5), stack, np.ones((1, 2, 3)))
    assert np.all(g.stack == 0.0)
    assert g.t == 0.0


def test_esf_backward_is_linear_in_the_cotangent():
    rng = np.random.default_rng(5)
    stack = rng.standard_normal((1, 4, 3, 5))
    z_bar = rng.standard_normal((1, 3, 5))
    scheme = MixturePooling((0.6, 0.4))
    one = backward_esf(scheme, stack, z_bar)
    three = backward_esf(scheme, stack, 3.0 * z_bar)
    assert np.allclose(three.stack, 3.0 * one.stack, rtol=1e-14, atol=0)
    assert np.allclose(three.w, 3.0 * one.w, rtol=1e-12, atol=1e-14)
    assert np.all(backward_esf(scheme, stack, np.zeros_like(z_bar)).stack == 0.0)


def test_mixpool_weight_gradient():
    stack = np.array([1.0, 2.0, 3.0, 6.0]).reshape(1, 4, 1)
    g = backward_esf(MixturePooling((0.5, 0.5)), stack, np.ones((1, 1)))
    assert g.w.tolist() == [3.0, 6.0]
    assert apply_scheme(stack, MixturePooling((0.5, 0.5))).fused[0, 0] == 4.5


def test_irregular_points_are_counted():
    stack = np.array([1.0, 1.0, 2.0, 3.0]).reshape(1, 4, 1)
    assert esf_irregularities(stack, CvScaling(t=0.5), 1e-3) == 1
    assert esf_irregularities(stack, SumScheme(), 1e-3) == 0


# ---------------------------------------------------------------------------
# Harness
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("op_id", sorted(set(OP_BUILDERS) - {"forward"}))
def test_ops_pass_gradcheck(op_id):
    report = gradcheck_module(op_id, seed=0)
    assert report.status is GradStatus.PASS, report.as_dict()
    assert report.max_rel_error <= 1e-5
    assert report.tol == 1e-5


def test_forward_gradcheck_passes():
    report = gradcheck_module("forward", seed=0)
    assert report.status is GradStatus.PASS, report.as_dict()
    assert report.tol == 1e-4
    assert report.max_rel_error <= 1e-4


def test_kink_branches_follow_the_section_order():
    scheme = MixturePooling(w=(0.6, 0.4))
    stack = np.array([[[1.0, 2.0], [3.0, 0.5]]])
    swapped = stack[:, ::-1]
    assert not np.array_equal(kink_branches(stack, scheme), kink_branches(swapped, scheme))
    assert np.array_equal(kink_branches(stack, scheme), kink_branches(stack + 0.1, scheme))


def test_sum_scheme_has_no_kinks():
    assert kink_branches(np.ones((1, 3, 4)), SumScheme()).size == 0


def test_recurrence_gradcheck_over_all_coordinates():
    report = gradcheck_module("recurrence", dims={"N": 3, "L": 10}, seed=4, probes=None)
    assert report.passed
    assert report.probe_count == 3 * 3 + 10


def test_unreachable_regularity_is_inconclusive():
    report = gradcheck_module("esf_cv", seed=0, margin=1e6)
    assert report.status is GradStatus.INCONCLUSIVE
    assert report.attempts == 10
    assert report.as_dict()["status"] == "inconclusive"


def test_unknown_op_rejected():
    with pytest.raises(ValueError):
        gradcheck_module("conv3d")
