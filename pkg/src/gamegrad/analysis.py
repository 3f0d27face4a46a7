"""Fixed-point classification, eigenvalues, alignment and welfare metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .adjust import aga_sign, bundle
from .games import GameDefinition

__all__ = [
    "FixedPointReport",
    "MetricsRecord",
    "sym_eigvals",
    "classify_point",
    "social_welfare",
    "equality",
    "metrics",
    "angle",
    "alignment_sign",
]


def sym_eigvals(M, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Sweeps continue until the off-diagonal Frobenius norm is below
    ``tol * ||M||_F``.
    """
    a = np.array(M, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-9 * max(1.0, scale):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    target = tol * np.linalg.norm(a)

    def off(m):
        return math.sqrt(2.0) * float(np.linalg.norm(np.triu(m, 1)))

    for _ in range(max_sweeps):
        if off(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                h = a[q, q] - a[p, p]
                if abs(h) + 100.0 * abs(apq) == abs(h):
                    # theta would overflow; small-angle limit t = 1 / (2 theta)
                    t = apq / h
                else:
                    theta = h / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # a <- J^T a J with J the (p, q) Givens rotation
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))


@dataclass
class FixedPointReport:
    point: np.ndarray
    residual: float
    eigenvalues: np.ndarray
    classification: str
    use_collective: bool


def classify_point(
    game: GameDefinition,
    w,
    tol: float = 1e-6,
    use_collective: bool = True,
    eig_slack: float = 1e-9,
    tol_det: float = 1e-8,
) -> FixedPointReport:
    """Classify ``w`` as a stable / unstable / indefinite fixed point.

    With ``use_collective`` the residual is ``|xi_c|`` and the spectrum is
    that of ``H_c``; otherwise ``|xi|`` and the symmetric part ``S`` of the
    game Hessian (x^T H x == x^T S x).  Stable needs every eigenvalue
    >= -eig_slack and none within ``tol_det`` of zero; unstable needs every
    eigenvalue negative.  Anything else is indefinite, including singular
    positive semidefinite spectra.
    """
    w = game.check_point(w)
    b = bundle(game, w)
    grad, mat = (b.xi_c, b.H_c) if use_collective else (b.xi, b.S)
    residual = float(np.linalg.norm(grad))
    eig = sym_eigvals(mat)
    if residual > tol:
        label = "not_fixed"
    elif eig[0] >= -eig_slack and np.all(np.abs(eig) > tol_det):
        label = "stable"
    elif eig[-1] < 0:
        label = "unstable"
    else:
        label = "indefinite"
    return FixedPointReport(w, residual, eig, label, use_collective)


@dataclass
class MetricsRecord:
    rewards: np.ndarray
    SW: float
    G: float
    E: float


def social_welfare(rewards: Sequence[float]) -> float:
    return float(np.sum(np.asarray(rewards, dtype=float)))


def equality(rewards: Sequence[float]) -> tuple[float, float]:
    """Return ``(G, E)`` with G the ranked-payoff Gini coefficient and E = 1 - G.

    G = 2 / (n^2 * mean) * sum_i i * (p_i - mean), p sorted ascending, i from 1.
    """
    p = np.sort(np.asarray(rewards, dtype=float).ravel())
    n = p.size
    if n == 0:
        raise ValueError("equality needs at least one reward")
    mean = float(np.mean(p))
    if mean == 0.0:
        raise ZeroDivisionError("equality is undefined for zero mean reward")
    ranks = np.arange(1, n + 1)
    g = 2.0 / (n * n * mean) * float(np.sum(ranks * (p - mean)))
    return g, 1.0 - g


def metrics(rewards: Sequence[float]) -> MetricsRecord:
    r = np.asarray(rewards, dtype=float)
    g, e = equality(r)
    return MetricsRecord(r, social_welfare(r), g, e)


def angle(a, b) -> float:
    """Angle between two nonzero vectors, in radians."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("angle is undefined for a zero vector")
    return float(math.acos(min(1.0, max(-1.0, float(np.dot(a, b)) / (na * nb)))))


def alignment_sign(game: GameDefinition, w, epsilon: float = 1e-10) -> int:
    """Sign AgA assigns to lambda at ``w`` (+1 or -1)."""
    b = bundle(game, w)
    return int(aga_sign(b.xi, b.xi_c, b.grad_Hc, epsilon))
