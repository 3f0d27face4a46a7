import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamegrad.adjust import (
    aga_sign,
    sga_sign,
    AdaGradStepper,
    Method,
    MethodConfig,
    bundle,
    descend,
    direction,
)
from gamegrad.autodiff import Dual, grad_scalar
from gamegrad.exceptions import EvaluationError
from gamegrad.games import (
    GameDefinition,
    bilinear_zero_sum,
    public_goods,
    quadratic_game,
    toy_example,
)

TOY = toy_example()
coord = st.floats(-1.5, 1.5, allow_nan=False)


def separable_quadratic():
    # l1 = 0.5 (w1 - 1)^2, l2 = 0.5 (w2 - 1)^2
    return quadratic_game([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], [[1.0, 1.0], [1.0, 1.0]])


def test_toy_origin_is_fixed_for_both_fields():
    b = bundle(TOY, [0.0, 0.0])
    np.testing.assert_allclose(b.xi, [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(b.xi_c, [0.0, 0.0], atol=1e-15)


def test_public_goods_bundle():
    b = bundle(public_goods(), [0.5, 0.5])
    np.testing.assert_allclose(b.xi, [0.25, 0.25], atol=1e-15)
    np.testing.assert_allclose(b.xi_c, [-0.5, -0.5], atol=1e-15)
    np.testing.assert_array_equal(b.H, np.zeros((2, 2)))
    np.testing.assert_array_equal(b.H_c, np.zeros((2, 2)))


@pytest.mark.parametrize("w", [(1.0, 1.0), (-0.3, 2.0)])
def test_bilinear_hessian(w):
    b = bundle(bilinear_zero_sum(), w)
    np.testing.assert_array_equal(b.H, [[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_array_equal(b.S, np.zeros((2, 2)))
    np.testing.assert_array_equal(b.A, b.H)


def test_bilinear_xi():
    np.testing.assert_array_equal(bundle(bilinear_zero_sum(), [1.0, 1.0]).xi, [1.0, -1.0])


def test_aga_direction_quadratic_example():
    d, lam = direction(separable_quadratic(), [0.0, 0.0], MethodConfig("AgA", lambda_mag=1.0))
    assert lam == 1.0
    np.testing.assert_allclose(d, [-3.0, -3.0], rtol=0, atol=1e-15)


def test_sga_direction_bilinear_example():
    d, lam = direction(bilinear_zero_sum(), [1.0, 1.0], MethodConfig("SGA", lambda_mag=1.0))
    assert lam == 1.0
    np.testing.assert_allclose(d, [2.0, 0.0], atol=1e-15)


def test_aga_direction_public_goods_degenerate():
    d, lam = direction(public_goods(), [0.5, 0.5], MethodConfig("AgA", lambda_mag=1.0))
    assert lam == 1.0
    np.testing.assert_allclose(d, [-0.25, -0.25], atol=1e-15)


def test_plain_methods():
    w = [0.2, -0.7]
    b = bundle(TOY, w)
    np.testing.assert_array_equal(direction(TOY, w, MethodConfig("SimulInd"))[0], b.xi)
    np.testing.assert_array_equal(direction(TOY, w, MethodConfig("SimulCo"))[0], b.xi_c)
    d, lam = direction(TOY, w, MethodConfig("CGA", lambda_mag=0.3))
    np.testing.assert_allclose(d, b.xi + 0.3 * b.H.T @ b.xi, rtol=1e-14)
    assert lam == 0.3
    d, lam = direction(TOY, w, MethodConfig("AgANoSign", lambda_mag=0.3))
    np.testing.assert_allclose(d, b.xi_c + 0.3 * (b.xi + b.grad_Hc), rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(coord, coord)
def test_bundle_invariants(x, y):
    b = bundle(TOY, [x, y])
    # exact in real arithmetic; floating point leaves at most an ulp
    np.testing.assert_allclose(b.S + b.A, b.H, rtol=0, atol=1e-12)
    np.testing.assert_array_equal(b.S, b.S.T)
    np.testing.assert_array_equal(b.A, -b.A.T)
    np.testing.assert_allclose(b.grad_Hc, b.H_c @ b.xi_c, atol=1e-10)


def test_game_hessian_rows_use_owning_loss():
    # l1 depends on w2 only through a cross term; H[0,1] = d2 l1 / dw1 dw2 = 1, H[1,0] = d2 l2/dw2 dw1 = 0
    g = GameDefinition("cross", (1, 1), (lambda w: w[0] * w[1], lambda w: w[1] ** 2))
    np.testing.assert_array_equal(bundle(g, [0.3, 0.4]).H, [[0.0, 1.0], [0.0, 2.0]])


@settings(max_examples=30, deadline=None)
@given(coord, coord, st.floats(0.1, 10.0))
def test_simulco_scales_with_collective(x, y, k):
    base = TOY
    scaled = GameDefinition("scaled", base.dims, base.losses, collective=lambda w: k * base.collective_loss(w))
    d0 = direction(base, [x, y], MethodConfig("SimulCo"))[0]
    d1 = direction(scaled, [x, y], MethodConfig("SimulCo"))[0]
    np.testing.assert_allclose(d1, k * d0, rtol=1e-13, atol=1e-15)


def _half_sq_xi(game):
    """0.5 * |xi(w)|^2 written so that it can itself be differentiated."""

    def f(w):
        total = 0.0
        for i, loss in enumerate(game.losses):
            for c in game.player_coords(i):
                args = [Dual(x, 1.0 if j == c else 0.0) for j, x in enumerate(w)]
                total = total + 0.5 * loss(args).eps ** 2
        return total

    return f


@settings(max_examples=40, deadline=None)
@given(coord, coord, st.floats(0.01, 2.0))
def test_cga_matches_gradient_of_half_sq_xi(x, y, lam):
    w = [x, y]
    d, _ = direction(TOY, w, MethodConfig("CGA", lambda_mag=lam))
    xi = bundle(TOY, w).xi
    np.testing.assert_allclose(d - xi, lam * grad_scalar(_half_sq_xi(TOY), w), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(coord, coord)
def test_aga_with_zero_lambda_is_simulco(x, y):
    d0 = direction(TOY, [x, y], MethodConfig("SimulCo"))[0]
    d1 = direction(TOY, [x, y], MethodConfig("AgA", lambda_mag=0.0))[0]
    np.testing.assert_array_equal(d0, d1)


def test_method_parse():
    assert Method.parse("aga") is Method.AGA
    assert Method.parse("AgANoSign") is Method.AGA_NO_SIGN
    with pytest.raises(ValueError):
        Method.parse("LOLA")


@pytest.mark.parametrize(
    "kw",
    [{"gamma": 0.0}, {"epsilon": 0.0}, {"lambda_mag": -1.0}, {"max_steps": -1}, {"projection": (1.0, 0.0)}],
)
def test_config_validation(kw):
    with pytest.raises(ValueError):
        MethodConfig("AgA", **kw)


def test_descend_max_steps_zero():
    tr = descend(TOY, [0.3, 0.4], MethodConfig("AgA", max_steps=0))
    assert len(tr) == 1
    assert tr.stop_reason == "max_steps"
    np.testing.assert_array_equal(tr.final.w, [0.3, 0.4])


@pytest.mark.parametrize("method, target", [("SimulInd", (0.0, 0.0)), ("SimulCo", (1.0, 1.0))])
def test_public_goods_limits(method, target):
    cfg = MethodConfig(method, gamma=0.05, max_steps=5000, projection=(0.0, 1.0))
    tr = descend(public_goods(), [0.5, 0.5], cfg)
    np.testing.assert_allclose(tr.final.w, target, atol=1e-3)
    assert tr.final.rewards.sum() == pytest.approx(2.0 if method == "SimulInd" else 3.0, abs=1e-9)


def test_descend_records_and_update_rule():
    cfg = MethodConfig("SGA", gamma=0.1, max_steps=5)
    tr = descend(bilinear_zero_sum(), [1.0, 1.0], cfg)
    assert [r.step for r in tr.records] == list(range(6))
    d, _ = direction(bilinear_zero_sum(), [1.0, 1.0], cfg)
    np.testing.assert_allclose(tr.records[1].w, np.array([1.0, 1.0]) - 0.1 * d)
    assert tr.records[0].dir_norm == pytest.approx(2.0)


def test_stop_tol_converges():
    cfg = MethodConfig("SimulInd", gamma=0.5, max_steps=1000, stop_tol=1e-8)
    tr = descend(separable_quadratic(), [0.0, 0.0], cfg)
    assert tr.stop_reason == "converged"
    assert tr.final.dir_norm <= 1e-8
    assert len(tr) < 1000


def test_recorder_sees_every_record():
    seen = []
    tr = descend(TOY, [-0.5, -0.5], MethodConfig("AgA", gamma=0.05, max_steps=7), recorder=seen.append)
    assert seen == tr.records


def test_pinned_iterate_matches_full_loop():
    # once the projection pins w, the shortcut must reproduce what the loop would compute
    cfg = MethodConfig("SimulCo", gamma=0.1, max_steps=60, projection=(0.0, 1.0))
    fast = descend(public_goods(), [0.2, 0.9], cfg)
    slow = descend(public_goods(), [0.2, 0.9], cfg, stepper=lambda d, g: g * d)
    assert len(fast) == len(slow) == 61
    for a, b in zip(fast.records, slow.records):
        assert a.step == b.step
        assert a.w.tobytes() == b.w.tobytes()
        assert a.rewards.tobytes() == b.rewards.tobytes()
        assert (a.loss_c, a.dir_norm, a.lambda_signed) == (b.loss_c, b.dir_norm, b.lambda_signed)


def test_evaluation_error_aborts_run():
    g = GameDefinition("pole", (1,), (lambda w: 1 / (w[0] - 0.5) + 0 * w[0],))
    tr = descend(g, [0.5], MethodConfig("SimulInd", max_steps=10))
    assert tr.stop_reason == "error"
    assert "step 0" in tr.error
    with pytest.raises(EvaluationError):
        descend(g, [0.5], MethodConfig("SimulInd", max_steps=10), raise_errors=True)


def test_divergence_to_overflow_is_an_error():
    g = GameDefinition("runaway", (1,), (lambda w: -(w[0] ** 4),))
    tr = descend(g, [2.0], MethodConfig("SimulInd", gamma=1.0, max_steps=100))
    assert tr.stop_reason == "error"


def test_descend_is_bit_reproducible():
    cfg = MethodConfig("AgA", gamma=0.05, lambda_mag=0.1, max_steps=50)
    a = descend(TOY, [-0.8, -0.3], cfg).points
    b = descend(TOY, [-0.8, -0.3], cfg).points
    assert a.tobytes() == b.tobytes()


def test_adagrad_stepper():
    step = AdaGradStepper()
    first = step(np.array([2.0, -4.0]), 0.1)
    np.testing.assert_allclose(first, [0.1, -0.1], rtol=1e-7)
    tr = descend(separable_quadratic(), [0.0, 0.0], MethodConfig("SimulInd", gamma=0.5, max_steps=400), stepper=AdaGradStepper())
    np.testing.assert_allclose(tr.final.w, [1.0, 1.0], atol=1e-2)


@pytest.mark.parametrize("scale", [1.0, 1e100, 1e160])
def test_sign_rules_survive_overflow(scale):
    xi = np.array([1.0, -2.0])
    xi_c = np.array([-1.0, 0.5])
    g = np.array([0.3, -1.0])
    assert aga_sign(scale * xi, scale * xi_c, scale * g, 1e-10) == aga_sign(xi, xi_c, g, 1e-10) == -1.0
    H = np.array([[1.0, 2.0], [-1.0, 0.5]])
    assert sga_sign(scale * xi, H, 1e-10) == sga_sign(xi, H, 1e-10)
