"""scikit-learn style wrapper around :func:`gamegrad.adjust.descend`.

Rows of ``X`` are starting points in the joint parameter space of a game;
``transform`` maps each to where the chosen dynamic ends up, so a solver
can sit inside a :class:`sklearn.pipeline.Pipeline` or be tuned with
``get_params`` / ``set_params``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .adjust import MethodConfig, descend
from .analysis import equality
from .games import make_game

__all__ = ["GameDescent"]


class GameDescent(TransformerMixin, BaseEstimator):
    """Run one gradient dynamic from many starting points.

    Parameters mirror :class:`~gamegrad.adjust.MethodConfig` plus the game
    name/parameters understood by :func:`~gamegrad.games.make_game`.

    Fitted attributes: ``game_``, ``n_features_in_``, ``trajectories_``,
    ``final_points_``, ``final_rewards_``, ``n_steps_``, ``stop_reasons_``.
    """

    def __init__(
        self,
        game="toy",
        game_params=None,
        method="AgA",
        lambda_mag=1.0,
        gamma=0.01,
        epsilon=1e-10,
        max_steps=1000,
        stop_tol=0.0,
        projection=None,
        svo_alpha=None,
    ):
        self.game = game
        self.game_params = game_params
        self.method = method
        self.lambda_mag = lambda_mag
        self.gamma = gamma
        self.epsilon = epsilon
        self.max_steps = max_steps
        self.stop_tol = stop_tol
        self.projection = projection
        self.svo_alpha = svo_alpha

    def _config(self) -> MethodConfig:
        return MethodConfig(
            method=self.method,
            lambda_mag=self.lambda_mag,
            gamma=self.gamma,
            epsilon=self.epsilon,
            max_steps=self.max_steps,
            stop_tol=self.stop_tol,
            projection=None if self.projection is None else tuple(self.projection),
        )

    def _descend_all(self, X):
        cfg = self._config()
        return [descend(self.game_, x, cfg) for x in X]

    def fit(self, X, y=None):
        self.game_ = make_game(self.game, self.game_params, self.svo_alpha) if isinstance(self.game, str) else self.game
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.game_.dim:
            raise ValueError(f"X has {X.shape[1]} features, game {self.game_.name!r} expects {self.game_.dim}")
        self.n_features_in_ = X.shape[1]
        self.trajectories_ = self._descend_all(X)
        self.final_points_ = np.array([t.final.w for t in self.trajectories_])
        self.final_rewards_ = np.array([t.final.rewards for t in self.trajectories_])
        self.n_steps_ = np.array([t.steps for t in self.trajectories_])
        self.stop_reasons_ = [t.stop_reason for t in self.trajectories_]
        return self

    def transform(self, X):
        """Final point reached from each row of ``X``."""
        check_is_fitted(self, "game_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return np.array([t.final.w for t in self._descend_all(X)])

    def fit_transform(self, X, y=None):
        return self.fit(X).final_points_

    def score(self, X, y=None):
        """Mean social welfare (sum of rewards) at the points reached from ``X``."""
        finals = self.transform(X)
        return float(np.mean([self.game_.rewards(w).sum() for w in finals]))

    def equality_scores(self):
        """Per-start equality E = 1 - Gini of the final rewards."""
        check_is_fitted(self, "final_rewards_")
        return np.array([equality(r)[1] for r in self.final_rewards_])
