import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from gamegrad.estimator import GameDescent


def test_params_round_trip():
    est = GameDescent(game="public_goods", method="SimulCo", gamma=0.05, projection=(0.0, 1.0))
    params = est.get_params()
    assert params["method"] == "SimulCo" and params["gamma"] == 0.05
    twin = clone(est)
    assert twin.get_params() == params
    twin.set_params(method="AgA", lambda_mag=0.5)
    assert twin.method == "AgA" and est.method == "SimulCo"


def test_fit_transform_public_goods():
    X = np.array([[0.2, 0.9], [0.5, 0.5], [0.0, 1.0]])
    est = GameDescent(game="public_goods", method="SimulCo", gamma=0.05, max_steps=200, projection=(0.0, 1.0))
    out = est.fit_transform(X)
    np.testing.assert_allclose(out, np.ones_like(X), atol=1e-12)
    assert est.n_features_in_ == 2
    assert est.score(X) == pytest.approx(3.0)
    np.testing.assert_allclose(est.equality_scores(), [1.0, 1.0, 1.0])
    assert len(est.trajectories_) == 3
    assert set(est.stop_reasons_) <= {"max_steps", "converged"}


def test_transform_requires_fit():
    with pytest.raises(NotFittedError):
        GameDescent().transform([[0.0, 0.0]])


def test_wrong_width_rejected():
    est = GameDescent(game="toy", max_steps=3).fit([[0.0, 0.0]])
    with pytest.raises(ValueError):
        est.transform([[0.0, 0.0, 0.0]])


def test_invalid_method_raises_on_fit():
    with pytest.raises(ValueError):
        GameDescent(method="Newton").fit([[0.0, 0.0]])
