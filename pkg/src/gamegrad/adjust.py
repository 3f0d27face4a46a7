"""Gradient dynamics for differentiable games and the descent loop.

Directions returned here are what gets *subtracted*: ``w <- w - gamma * d``.

    SimulInd   xi
    SimulCo    xi_c
    CGA        xi + lam * H^T xi
    SGA        xi + lam * A^T xi,      lam = |lam| * sign(<xi,H^T xi><A^T xi,H^T xi>/d + eps)
    AgA        xi_c + lam * (xi + gH), lam = |lam| * sign(<xi_c,gH>(<xi,gH> + |gH|^2)/d + eps)
    AgANoSign  as AgA with lam = +|lam|

where ``gH = H_c^T xi_c`` is the gradient of ``0.5 * |xi_c|^2``.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .autodiff import grad_scalar, hess_scalar, hessian_block, partial_grad
from .exceptions import EvaluationError
from .games import GameDefinition

__all__ = [
    "Method",
    "MethodConfig",
    "GradientBundle",
    "StepRecord",
    "Trajectory",
    "simultaneous_gradient",
    "collective_gradient",
    "game_hessian",
    "collective_hessian",
    "bundle",
    "direction",
    "descend",
    "AdaGradStepper",
]

logger = logging.getLogger(__name__)


class Method(str, enum.Enum):
    SIMUL_IND = "SimulInd"
    SIMUL_CO = "SimulCo"
    CGA = "CGA"
    SGA = "SGA"
    AGA = "AgA"
    AGA_NO_SIGN = "AgANoSign"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        for m in cls:
            if str(value).lower() in (m.value.lower(), m.name.lower()):
                return m
        raise ValueError(f"unknown method {value!r}; choose from {[m.value for m in cls]}")


@dataclass(frozen=True)
class MethodConfig:
    """Which dynamic to run and how.

    ``projection`` is an optional ``(lo, hi)`` box; each bound is a scalar
    or a per-coordinate sequence.
    """

    method: Method = Method.AGA
    lambda_mag: float = 1.0
    gamma: float = 0.01
    epsilon: float = 1e-10
    max_steps: int = 1000
    stop_tol: float = 0.0
    projection: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.lambda_mag >= 0:
            raise ValueError(f"lambda_mag must be non-negative, got {self.lambda_mag}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 0:
            raise ValueError(f"max_steps must be a non-negative integer, got {self.max_steps}")
        if not self.stop_tol >= 0:
            raise ValueError(f"stop_tol must be non-negative, got {self.stop_tol}")
        if self.projection is not None:
            lo, hi = self.projection
            if np.any(np.asarray(lo, dtype=float) > np.asarray(hi, dtype=float)):
                raise ValueError(f"projection box has lo > hi: {self.projection}")

    def project(self, w: np.ndarray) -> np.ndarray:
        if self.projection is None:
            return w
        lo, hi = self.projection
        return np.clip(w, lo, hi)


@dataclass
class GradientBundle:
    xi: np.ndarray
    xi_c: np.ndarray
    grad_Hc: np.ndarray
    H: np.ndarray
    H_c: np.ndarray
    S: np.ndarray
    A: np.ndarray


def simultaneous_gradient(game: GameDefinition, w) -> np.ndarray:
    """xi: each player's gradient of its own loss w.r.t. its own parameters."""
    w = game.check_point(w)
    return np.concatenate(
        [partial_grad(loss, w, game.player_coords(i)) for i, loss in enumerate(game.losses)]
    )


def collective_gradient(game: GameDefinition, w) -> np.ndarray:
    return grad_scalar(game.collective_loss, game.check_point(w))


def game_hessian(game: GameDefinition, w) -> np.ndarray:
    """Jacobian of xi.  Row block i comes from player i's loss only."""
    w = game.check_point(w)
    cols = range(game.dim)
    return np.vstack(
        [hessian_block(loss, w, game.player_coords(i), cols) for i, loss in enumerate(game.losses)]
    )


def collective_hessian(game: GameDefinition, w) -> np.ndarray:
    return hess_scalar(game.collective_loss, game.check_point(w))


def bundle(game: GameDefinition, w) -> GradientBundle:
    w = game.check_point(w)
    xi = simultaneous_gradient(game, w)
    xi_c = collective_gradient(game, w)
    H = game_hessian(game, w)
    H_c = collective_hessian(game, w)
    return GradientBundle(
        xi=xi,
        xi_c=xi_c,
        grad_Hc=H_c.T @ xi_c,
        H=H,
        H_c=H_c,
        S=0.5 * (H + H.T),
        A=0.5 * (H - H.T),
    )


def _sign(x: float) -> float:
    return 1.0 if x >= 0 else -1.0


def _rescaled(*arrays):
    """Divide every array by its own largest magnitude (zeros stay zero)."""
    out = []
    for a in arrays:
        m = float(np.max(np.abs(a))) if a.size else 0.0
        out.append(a / m if m > 0 and math.isfinite(m) else a)
    return out


def sga_sign(xi, H, eps: float) -> float:
    A = 0.5 * (H - H.T)
    ht_xi = H.T @ xi
    with np.errstate(over="ignore", invalid="ignore"):
        arg = np.dot(xi, ht_xi) * np.dot(A.T @ xi, ht_xi) / xi.size
    if not math.isfinite(arg):
        # homogeneous in xi and H, so positive rescaling keeps the sign; eps is negligible here
        xi, H = _rescaled(xi, H)
        A = 0.5 * (H - H.T)
        ht_xi = H.T @ xi
        return _sign(np.dot(xi, ht_xi) * np.dot(A.T @ xi, ht_xi))
    return _sign(arg + eps)


def aga_sign(xi, xi_c, grad_Hc, eps: float) -> float:
    with np.errstate(over="ignore", invalid="ignore"):
        arg = np.dot(xi_c, grad_Hc) * (np.dot(xi, grad_Hc) + np.dot(grad_Hc, grad_Hc)) / xi.size
    if not math.isfinite(arg):
        # degree-4 homogeneous: rescale all three by one common factor
        m = max(float(np.max(np.abs(v))) for v in (xi, xi_c, grad_Hc))
        xi, xi_c, grad_Hc = xi / m, xi_c / m, grad_Hc / m
        return _sign(np.dot(xi_c, grad_Hc) * (np.dot(xi, grad_Hc) + np.dot(grad_Hc, grad_Hc)))
    return _sign(arg + eps)


def direction(game: GameDefinition, w, cfg: MethodConfig) -> tuple[np.ndarray, float]:
    """Update direction for ``cfg.method`` at ``w`` and the signed lambda used.

    Only the derivative pieces the method needs are evaluated.  The returned
    lambda is 0.0 for the two plain simultaneous methods.
    """
    w = game.check_point(w)
    m = cfg.method
    lam = float(cfg.lambda_mag)
    if m is Method.SIMUL_IND:
        return simultaneous_gradient(game, w), 0.0
    if m is Method.SIMUL_CO:
        return collective_gradient(game, w), 0.0
    if m in (Method.CGA, Method.SGA):
        xi = simultaneous_gradient(game, w)
        H = game_hessian(game, w)
        if m is Method.CGA:
            return xi + lam * (H.T @ xi), lam
        lam *= sga_sign(xi, H, cfg.epsilon)
        A = 0.5 * (H - H.T)
        return xi + lam * (A.T @ xi), lam
    if m in (Method.AGA, Method.AGA_NO_SIGN):
        xi = simultaneous_gradient(game, w)
        xi_c = collective_gradient(game, w)
        grad_Hc = collective_hessian(game, w).T @ xi_c
        if m is Method.AGA:
            lam *= aga_sign(xi, xi_c, grad_Hc, cfg.epsilon)
        return xi_c + lam * (xi + grad_Hc), lam
    raise ValueError(f"unknown method {m!r}")


@dataclass
class StepRecord:
    step: int
    w: np.ndarray
    rewards: np.ndarray
    loss_c: float
    dir_norm: float
    lambda_signed: float


@dataclass
class Trajectory:
    """Ordered step records plus why the run ended.

    The record at step k holds the point *before* the k-th update together
    with the direction evaluated there.  The final record's direction fields
    are those evaluated at the final point (or NaN when evaluation failed).
    """

    records: list[StepRecord] = field(default_factory=list)
    stop_reason: str = "max_steps"
    error: Optional[str] = None

    def __len__(self):
        return len(self.records)

    @property
    def points(self) -> np.ndarray:
        return np.array([r.w for r in self.records])

    @property
    def final(self) -> StepRecord:
        return self.records[-1]

    @property
    def steps(self) -> int:
        return self.records[-1].step


Recorder = Callable[[StepRecord], None]


def descend(
    game: GameDefinition,
    w0,
    cfg: MethodConfig,
    recorder: Optional[Recorder] = None,
    stepper=None,
    raise_errors: bool = False,
) -> Trajectory:
    """Iterate ``w <- project(w - gamma * direction)``.

    Stops after ``cfg.max_steps`` updates, or earlier once the direction
    norm drops to ``cfg.stop_tol``.  ``w0`` itself is not projected.  An evaluation error ends the run with
    ``stop_reason == "error"`` and the failing step recorded (re-raised
    instead when ``raise_errors`` is set).  ``stepper`` replaces the plain
    ``gamma * direction`` update; see :class:`AdaGradStepper`.
    """
    w = game.check_point(w0).copy()
    traj = Trajectory()

    def emit(rec):
        traj.records.append(rec)
        if recorder is not None:
            recorder(rec)

    step = 0
    while True:
        try:
            # overflow surfaces as a non-finite value and is reported below
            with np.errstate(over="ignore", invalid="ignore"):
                d, lam = direction(game, w, cfg)
                losses, loss_c = game.evaluate(w)
            norm = float(np.linalg.norm(d))
            if not (math.isfinite(norm) and np.all(np.isfinite(losses)) and math.isfinite(loss_c)):
                raise EvaluationError(f"non-finite state at step {step}, w={tuple(w)}", w)
        except EvaluationError as exc:
            emit(StepRecord(step, w.copy(), np.full(game.n_players, np.nan), math.nan, math.nan, math.nan))
            traj.stop_reason = "error"
            traj.error = f"step {step}: {exc}"
            logger.debug("run aborted: %s", traj.error)
            if raise_errors:
                raise
            return traj
        rec = StepRecord(step, w.copy(), -losses, loss_c, norm, lam)
        emit(rec)
        if step >= cfg.max_steps:
            traj.stop_reason = "max_steps"
            return traj
        if norm <= cfg.stop_tol:
            traj.stop_reason = "converged"
            return traj
        update = cfg.gamma * d if stepper is None else stepper(d, cfg.gamma)
        w_next = cfg.project(w - update)
        if stepper is None and np.array_equal(w_next, w):
            # projection pinned the iterate: every later step repeats this record exactly
            for k in range(step + 1, cfg.max_steps + 1):
                emit(StepRecord(k, w.copy(), rec.rewards.copy(), loss_c, norm, lam))
            traj.stop_reason = "max_steps"
            return traj
        w = w_next
        step += 1


class AdaGradStepper:
    """Accumulated-squared-gradient step scaling (optional, not the default).

    Call with ``(direction, gamma)``; returns the update to subtract.
    """

    def __init__(self, delta: float = 1e-8):
        self.delta = delta
        self._acc = None

    def __call__(self, d: np.ndarray, gamma: float) -> np.ndarray:
        if self._acc is None:
            self._acc = np.zeros_like(d)
        self._acc += d * d
        return gamma * d / (np.sqrt(self._acc) + self.delta)
