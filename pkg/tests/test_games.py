import math

import numpy as np
import pytest

from gamegrad.exceptions import EvaluationError
from gamegrad.games import (
    GameDefinition,
    PublicGoodsParams,
    SvoParams,
    bilinear_zero_sum,
    make_game,
    public_goods,
    quadratic_game,
    svo_shaped,
    toy_example,
)


def test_toy_values_at_origin():
    g = toy_example()
    assert g.losses[0]([0.0, 0.0]) == 0.0
    assert g.losses[1]([0.0, 0.0]) == -1.0
    assert g.collective_value([0.0, 0.0]) == -1.0
    np.testing.assert_array_equal(g.rewards([0.0, 0.0]), [0.0, 1.0])


def test_toy_matches_independent_transcription():
    def l1(a1, a2):
        return -math.sin(a1 * a2 + a2 * a2)

    def l2(a1, a2):
        return -(math.cos(1.0 + a1 - (1.0 + a2) * (1.0 + a2)) + a1 * a2 * a2)

    g = toy_example()
    rng = np.random.default_rng(11)
    for a1, a2 in rng.uniform(-3, 3, size=(1000, 2)):
        got = g.loss_values([a1, a2])
        assert got[0] == pytest.approx(l1(a1, a2), rel=1e-14, abs=1e-14)
        assert got[1] == pytest.approx(l2(a1, a2), rel=1e-14, abs=1e-14)


@pytest.mark.parametrize(
    "w, payoffs",
    [((0.0, 0.0), (1.0, 1.0)), ((1.0, 1.0), (1.5, 1.5)), ((0.5, 0.5), (1.25, 1.25))],
)
def test_public_goods_payoffs(w, payoffs):
    g = public_goods(PublicGoodsParams(b=1.0, c=1.5))
    np.testing.assert_allclose(g.rewards(w), payoffs, rtol=0, atol=1e-15)
    assert g.rewards(w).sum() == pytest.approx(sum(payoffs), abs=1e-15)


@pytest.mark.parametrize("kw", [{"b": 0.0}, {"c": 1.0}, {"c": 2.5}, {"n": 1}])
def test_public_goods_rejects_bad_params(kw):
    with pytest.raises(ValueError):
        PublicGoodsParams(**kw)


def test_public_goods_three_players():
    g = public_goods(PublicGoodsParams(b=2.0, c=1.8, n=3))
    assert g.n_players == 3
    # 2 - 1 + 0.6 * 3
    np.testing.assert_allclose(g.rewards([1.0, 1.0, 1.0]), [2.8] * 3)


def test_quadratic_rejects_asymmetric():
    with pytest.raises(ValueError):
        quadratic_game([[[1, 2], [0, 1]], np.eye(2)], [[0, 0], [0, 0]])


def test_quadratic_value():
    g = quadratic_game([np.eye(2), 2 * np.eye(2)], [[1.0, 1.0], [0.0, 0.0]])
    np.testing.assert_allclose(g.loss_values([0.0, 2.0]), [0.5 * (1 + 1), 0.5 * 2 * 4])


def test_bilinear_losses():
    g = bilinear_zero_sum()
    np.testing.assert_array_equal(g.loss_values([2.0, 3.0]), [6.0, -6.0])
    assert g.collective_value([2.0, 3.0]) == 0.0


def test_svo_alpha_zero_is_identity():
    base = public_goods()
    shaped = svo_shaped(base, SvoParams(0.0))
    rng = np.random.default_rng(3)
    for w in rng.uniform(0, 1, size=(50, 2)):
        np.testing.assert_allclose(shaped.rewards(w), base.rewards(w), rtol=0, atol=1e-15)


def test_svo_closed_form():
    # r_i = 1 and sum of the others = 1
    base = GameDefinition("const", (1, 1), (lambda w: -1.0 + 0 * w[0], lambda w: -1.0 + 0 * w[1]))
    shaped = svo_shaped(base, SvoParams(0.1))
    expected = 1 - 0.1 * (1 - math.atan(1.0))
    assert expected == pytest.approx(0.97854, abs=5e-6)
    np.testing.assert_allclose(shaped.rewards([0.0, 0.0]), [expected, expected], rtol=1e-15)


def test_svo_zero_reward_raises_with_point():
    base = GameDefinition("zero", (1, 1), (lambda w: 0 * w[0], lambda w: -1.0 + 0 * w[1]))
    with pytest.raises(EvaluationError) as info:
        svo_shaped(base, SvoParams(0.5)).rewards([0.25, 0.5])
    assert info.value.point == (0.25, 0.5)


def test_svo_rejects_negative_alpha():
    with pytest.raises(ValueError):
        SvoParams(-0.1)


def test_make_game_unknown():
    with pytest.raises(ValueError, match="unknown game"):
        make_game("chess")


def test_player_partition():
    g = quadratic_game([np.eye(3)] * 2, [np.zeros(3)] * 2, dims=(1, 2))
    assert g.offsets == (0, 1)
    parts = g.split([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(parts[1], [2.0, 3.0])
    with pytest.raises(ValueError):
        g.check_point([1.0, 2.0])


def test_dims_must_match_losses():
    with pytest.raises(ValueError):
        GameDefinition("bad", (1,), (lambda w: w[0], lambda w: w[0]))
