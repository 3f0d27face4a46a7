"""Differentiable mixed-motive games.

A game is n players, each owning a contiguous slice of the joint parameter
vector ``w``, and one loss per player.  Rewards are always the negated
losses.  Losses are plain callables taking a sequence of scalar-field
elements (floats, :class:`~gamegrad.autodiff.Dual`, ...) and must only use
arithmetic, integer powers and the elementary functions from
:mod:`gamegrad.autodiff`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .autodiff import arctan, cos, real, sin
from .exceptions import EvaluationError

__all__ = [
    "GameDefinition",
    "PublicGoodsParams",
    "SvoParams",
    "toy_example",
    "public_goods",
    "quadratic_game",
    "bilinear_zero_sum",
    "svo_shaped",
    "make_game",
    "GAME_BUILDERS",
]

Loss = Callable[[Sequence], object]


@dataclass(frozen=True)
class GameDefinition:
    """An n-player twice-differentiable game.

    ``dims[i]`` is the number of parameters owned by player i; they occupy
    ``w[offsets[i]:offsets[i] + dims[i]]``.  When ``collective`` is None the
    collective loss is the sum of the individual losses.
    """

    name: str
    dims: tuple[int, ...]
    losses: tuple[Loss, ...]
    collective: Optional[Loss] = None
    offsets: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        if len(dims) != len(self.losses):
            raise ValueError(f"{len(dims)} player dims given for {len(self.losses)} losses")
        if not dims or any(k < 1 for k in dims):
            raise ValueError(f"player dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "losses", tuple(self.losses))
        object.__setattr__(self, "offsets", tuple(int(x) for x in np.cumsum((0,) + dims[:-1])))

    @property
    def n_players(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return sum(self.dims)

    def player_slice(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i] + self.dims[i])

    def player_coords(self, i: int) -> range:
        return range(self.offsets[i], self.offsets[i] + self.dims[i])

    def split(self, w) -> list[np.ndarray]:
        """Per-player views ``[w_1, ..., w_n]`` of a joint vector."""
        w = self.check_point(w)
        return [w[self.player_slice(i)] for i in range(self.n_players)]

    def check_point(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float).ravel()
        if w.shape != (self.dim,):
            raise ValueError(f"{self.name}: expected {self.dim} parameters, got {w.shape[0]}")
        return w

    def collective_loss(self, w):
        if self.collective is not None:
            return self.collective(w)
        total = self.losses[0](w)
        for loss in self.losses[1:]:
            total = total + loss(w)
        return total

    def evaluate(self, w) -> tuple[np.ndarray, float]:
        """Per-player losses and the collective loss at ``w`` as floats."""
        w = self.check_point(w).tolist()
        losses = np.array([real(loss(w)) for loss in self.losses])
        if self.collective is None:
            total = losses[0]
            for v in losses[1:]:
                total = total + v
            return losses, float(total)
        return losses, real(self.collective(w))

    def loss_values(self, w) -> np.ndarray:
        w = self.check_point(w).tolist()
        return np.array([real(loss(w)) for loss in self.losses])

    def rewards(self, w) -> np.ndarray:
        return -self.loss_values(w)

    def collective_value(self, w) -> float:
        return real(self.collective_loss(self.check_point(w).tolist()))


def toy_example() -> GameDefinition:
    """Two players, one scalar action each.

    l1 = -sin(a1*a2 + a2^2),  l2 = -[cos(1 + a1 - (1 + a2)^2) + a1*a2^2]
    """

    def loss1(w):
        a1, a2 = w
        return -sin(a1 * a2 + a2 ** 2)

    def loss2(w):
        a1, a2 = w
        return -(cos(1 + a1 - (1 + a2) ** 2) + a1 * a2 ** 2)

    return GameDefinition("toy", (1, 1), (loss1, loss2))


@dataclass(frozen=True)
class PublicGoodsParams:
    b: float = 1.0
    c: float = 1.5
    n: int = 2

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"budget b must be positive, got {self.b}")
        if not 1 < self.c <= 2:
            raise ValueError(f"multiplier c must satisfy 1 < c <= 2, got {self.c}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"public goods needs at least 2 players, got {self.n}")


def public_goods(p: PublicGoodsParams = PublicGoodsParams()) -> GameDefinition:
    """Linear public goods game: payoff_i = b - a_i + (c/n) * sum_j a_j.

    The action box [0, b] is not part of the losses; enforce it with the
    optimizer's projection.
    """
    b, share, n = float(p.b), float(p.c) / p.n, int(p.n)

    def payoff_loss(i):
        def loss(w):
            pot = w[0]
            for a in w[1:]:
                pot = pot + a
            return -(b - w[i] + share * pot)

        return loss

    return GameDefinition("public_goods", (1,) * n, tuple(payoff_loss(i) for i in range(n)))


def quadratic_game(qs: Sequence, targets: Sequence, dims: Optional[Sequence[int]] = None) -> GameDefinition:
    """Player i minimises 0.5 * (w - t_i)^T Q_i (w - t_i) over its own slice.

    Every Q_i is a full d x d symmetric matrix over the joint vector.  By
    default each player owns one coordinate.
    """
    qs = [np.asarray(q, dtype=float) for q in qs]
    targets = [np.asarray(t, dtype=float).ravel() for t in targets]
    if len(qs) != len(targets):
        raise ValueError("need one target per quadratic form")
    d = qs[0].shape[0]
    for q, t in zip(qs, targets):
        if q.shape != (d, d) or t.shape != (d,):
            raise ValueError(f"inconsistent shapes: Q {q.shape}, target {t.shape}, d={d}")
        if not np.allclose(q, q.T, rtol=0.0, atol=1e-12):
            raise ValueError("quadratic form matrices must be symmetric")
    dims = tuple(dims) if dims is not None else (1,) * len(qs)
    if sum(dims) != d:
        raise ValueError(f"player dims {dims} do not sum to {d}")

    def quad_loss(q, t):
        q = q.tolist()
        t = t.tolist()

        def loss(w):
            r = [w[k] - t[k] for k in range(d)]
            total = 0.0
            for i in range(d):
                row = 0.0
                for j in range(d):
                    if q[i][j] != 0.0:
                        row = row + q[i][j] * r[j]
                total = total + r[i] * row
            return 0.5 * total

        return loss

    return GameDefinition("quadratic", dims, tuple(quad_loss(q, t) for q, t in zip(qs, targets)))


def bilinear_zero_sum() -> GameDefinition:
    """l1 = w1*w2, l2 = -w1*w2: the classic cycling game."""

    def loss1(w):
        return w[0] * w[1]

    def loss2(w):
        return -(w[0] * w[1])

    return GameDefinition("bilinear", (1, 1), (loss1, loss2))


@dataclass(frozen=True)
class SvoParams:
    alpha: float

    def __post_init__(self):
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")


def svo_shaped(game: GameDefinition, p: SvoParams) -> GameDefinition:
    """Reshape rewards as r_i - alpha * (1 - arctan(sum_{j != i} r_j / r_i)).

    arctan is taken in radians.  The new collective loss is minus the sum of
    shaped rewards, which is also the default, so no override is stored.
    """
    alpha = float(p.alpha)
    base = game.losses

    def shaped(i):
        def loss(w):
            rewards = [-lf(w) for lf in base]
            own = rewards[i]
            if real(own) == 0.0:
                raise EvaluationError(
                    f"svo shaping divides by r_{i + 1} = 0 at w={tuple(real(x) for x in w)}",
                    [real(x) for x in w],
                )
            others = 0.0
            for j, r in enumerate(rewards):
                if j != i:
                    others = others + r
            return -(own - alpha * (1 - arctan(others / own)))

        return loss

    return GameDefinition(f"svo({game.name})", game.dims, tuple(shaped(i) for i in range(game.n_players)))


GAME_BUILDERS = {
    "toy": lambda **kw: toy_example(**kw),
    "public_goods": lambda **kw: public_goods(PublicGoodsParams(**kw)),
    "bilinear": lambda **kw: bilinear_zero_sum(**kw),
    "quadratic": lambda **kw: quadratic_game(**kw),
}


def make_game(name: str, params: Optional[dict] = None, svo_alpha: Optional[float] = None) -> GameDefinition:
    """Build a named game, optionally wrapped in SVO reward shaping."""
    try:
        builder = GAME_BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown game {name!r}; choose from {sorted(GAME_BUILDERS)}") from None
    game = builder(**(params or {}))
    if svo_alpha is not None:
        game = svo_shaped(game, SvoParams(svo_alpha))
    return game
