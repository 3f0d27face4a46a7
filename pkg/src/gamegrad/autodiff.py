"""Forward-mode differentiation with dual and hyper-dual numbers.

Game losses are written against a small scalar-field contract: the usual
arithmetic operators, integer powers, and the elementary functions
:func:`sin`, :func:`cos`, :func:`arctan` and :func:`exp` defined here.  Any
loss written that way can be evaluated on plain floats, on :class:`Dual`
numbers (first derivatives) or on :class:`HyperDual` numbers (second
derivatives), and :class:`Dual` components may themselves be duals, which
gives nested (higher-order) forward mode for free.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .exceptions import EvaluationError

__all__ = [
    "Dual",
    "HyperDual",
    "sin",
    "cos",
    "arctan",
    "exp",
    "real",
    "grad_scalar",
    "partial_grad",
    "hessian_block",
    "hess_scalar",
    "fd_grad",
]

_EVAL_ERRORS = (ArithmeticError, ValueError)


class Dual:
    """First-order dual number ``val + eps * e`` with ``e**2 == 0``.

    Both parts may be floats or other scalar-field elements (nesting).
    """

    __slots__ = ("val", "eps")

    def __init__(self, val, eps=0.0):
        self.val = val
        self.eps = eps

    def __repr__(self):
        return f"Dual({self.val!r}, {self.eps!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val + other.val, self.eps + other.eps)
        return Dual(self.val + other, self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val - other.val, self.eps - other.eps)
        return Dual(self.val - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.val, -self.eps)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.val * other.val, self.val * other.eps + self.eps * other.val)
        return Dual(self.val * other, self.eps * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.val / other.val
            return Dual(q, (self.eps - q * other.eps) / other.val)
        return Dual(self.val / other, self.eps / other)

    def __rtruediv__(self, other):
        q = other / self.val
        return Dual(q, -q * self.eps / self.val)

    def __neg__(self):
        return Dual(-self.val, -self.eps)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n == 0:
            return Dual(self.val ** 0, self.eps * 0)
        return Dual(self.val ** n, n * self.val ** (n - 1) * self.eps)

    def _sin(self):
        return Dual(sin(self.val), cos(self.val) * self.eps)

    def _cos(self):
        return Dual(cos(self.val), -sin(self.val) * self.eps)

    def _arctan(self):
        return Dual(arctan(self.val), self.eps / (1 + self.val * self.val))

    def _exp(self):
        e = exp(self.val)
        return Dual(e, e * self.eps)

    def _real(self):
        return real(self.val)


class HyperDual:
    """Hyper-dual number ``v + a*e1 + b*e2 + m*e1e2`` over the reals.

    Seeding ``e1`` along coordinate i and ``e2`` along coordinate j makes
    the ``m`` part of f's output equal to the mixed partial d2f/dw_i dw_j.
    """

    __slots__ = ("v", "a", "b", "m")

    def __init__(self, v, a=0.0, b=0.0, m=0.0):
        self.v = v
        self.a = a
        self.b = b
        self.m = m

    def __repr__(self):
        return f"HyperDual({self.v!r}, {self.a!r}, {self.b!r}, {self.m!r})"

    def _chain(self, f0, f1, f2):
        # f(x) lifted through its value, first and second derivative at v
        return HyperDual(f0, f1 * self.a, f1 * self.b, f1 * self.m + f2 * self.a * self.b)

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.v + other.v, self.a + other.a, self.b + other.b, self.m + other.m)
        return HyperDual(self.v + other, self.a, self.b, self.m)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.v - other.v, self.a - other.a, self.b - other.b, self.m - other.m)
        return HyperDual(self.v - other, self.a, self.b, self.m)

    def __rsub__(self, other):
        return HyperDual(other - self.v, -self.a, -self.b, -self.m)

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.v * other.v,
                self.v * other.a + self.a * other.v,
                self.v * other.b + self.b * other.v,
                self.v * other.m + self.a * other.b + self.b * other.a + self.m * other.v,
            )
        return HyperDual(self.v * other, self.a * other, self.b * other, self.m * other)

    __rmul__ = __mul__

    def _reciprocal(self):
        inv = 1.0 / self.v
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other._reciprocal()
        return HyperDual(self.v / other, self.a / other, self.b / other, self.m / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __neg__(self):
        return HyperDual(-self.v, -self.a, -self.b, -self.m)

    def __pos__(self):
        return self

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n == 0:
            return HyperDual(1.0)
        if n == 1:
            return self
        v = self.v
        return self._chain(v ** n, n * v ** (n - 1), n * (n - 1) * v ** (n - 2))

    def _sin(self):
        s, c = math.sin(self.v), math.cos(self.v)
        return self._chain(s, c, -s)

    def _cos(self):
        s, c = math.sin(self.v), math.cos(self.v)
        return self._chain(c, -s, -c)

    def _arctan(self):
        q = 1.0 / (1.0 + self.v * self.v)
        return self._chain(math.atan(self.v), q, -2.0 * self.v * q * q)

    def _exp(self):
        e = math.exp(self.v)
        return self._chain(e, e, e)

    def _real(self):
        return self.v


def sin(x):
    return x._sin() if hasattr(x, "_sin") else math.sin(x)


def cos(x):
    return x._cos() if hasattr(x, "_cos") else math.cos(x)


def arctan(x):
    return x._arctan() if hasattr(x, "_arctan") else math.atan(x)


def exp(x):
    return x._exp() if hasattr(x, "_exp") else math.exp(x)


def real(x) -> float:
    """Strip every infinitesimal part and return the plain float value."""
    return x._real() if hasattr(x, "_real") else float(x)


ScalarFn = Callable[[Sequence], object]


def _as_point(w) -> list[float]:
    return [float(x) for x in np.asarray(w, dtype=float).ravel()]


def _call(f: ScalarFn, args, point, coordinate=None):
    try:
        return f(args)
    except EvaluationError:
        raise
    except _EVAL_ERRORS as exc:
        where = "" if coordinate is None else f" (seeded coordinate {coordinate})"
        raise EvaluationError(
            f"evaluation failed at w={tuple(point)}{where}: {exc}", point, coordinate
        ) from exc


def _check(values, point, coordinate):
    for v in values:
        if not math.isfinite(v):
            raise EvaluationError(
                f"non-finite value at w={tuple(point)} (seeded coordinate {coordinate})",
                point,
                coordinate,
            )


def partial_grad(f: ScalarFn, w, coords: Sequence[int]) -> np.ndarray:
    """Exact partial derivatives of ``f`` at ``w`` along ``coords`` only."""
    point = _as_point(w)
    out = np.empty(len(coords))
    for k, i in enumerate(coords):
        args = [Dual(x, 1.0 if j == i else 0.0) for j, x in enumerate(point)]
        y = _call(f, args, point, i)
        val, der = (y.val, y.eps) if isinstance(y, Dual) else (y, 0.0)
        val, der = float(val), float(der)
        _check((val, der), point, i)
        out[k] = der
    return out


def grad_scalar(f: ScalarFn, w) -> np.ndarray:
    """Exact gradient of ``f`` at ``w`` using one forward pass per coordinate."""
    return partial_grad(f, w, range(len(_as_point(w))))


def hessian_block(f: ScalarFn, w, rows: Sequence[int], cols: Sequence[int]) -> np.ndarray:
    """Mixed second partials ``d2f/dw_r dw_c`` for r in rows, c in cols.

    Entries are computed independently (no symmetry is assumed), one
    hyper-dual pass each.
    """
    point = _as_point(w)
    out = np.empty((len(rows), len(cols)))
    for p, r in enumerate(rows):
        for q, c in enumerate(cols):
            args = [
                HyperDual(x, 1.0 if j == r else 0.0, 1.0 if j == c else 0.0)
                for j, x in enumerate(point)
            ]
            y = _call(f, args, point, r)
            if isinstance(y, HyperDual):
                vals = (float(y.v), float(y.a), float(y.b), float(y.m))
            else:
                vals = (float(y), 0.0, 0.0, 0.0)
            _check(vals, point, r)
            out[p, q] = vals[3]
    return out


def hess_scalar(f: ScalarFn, w, symmetrize: bool = True) -> np.ndarray:
    """Exact Hessian of ``f`` at ``w``.

    Every ordered pair (i, j) is seeded separately; with ``symmetrize`` the
    result is replaced by ``(H + H.T) / 2`` so it is exactly symmetric.
    """
    d = len(_as_point(w))
    h = hessian_block(f, w, range(d), range(d))
    if symmetrize:
        h = 0.5 * (h + h.T)
    return h


def fd_grad(f: ScalarFn, w, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient.  Verification only."""
    if not h > 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    point = _as_point(w)
    out = np.empty(len(point))
    for i in range(len(point)):
        up = list(point)
        dn = list(point)
        up[i] += h
        dn[i] -= h
        out[i] = (real(f(up)) - real(f(dn))) / (2.0 * h)
    return out
