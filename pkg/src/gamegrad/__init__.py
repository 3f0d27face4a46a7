"""Gradient adjustment dynamics for differentiable mixed-motive games."""

from .adjust import (
    GradientBundle,
    Method,
    MethodConfig,
    Trajectory,
    bundle,
    descend,
    direction,
)
from .analysis import (
    alignment_sign,
    angle,
    classify_point,
    equality,
    social_welfare,
    sym_eigvals,
)
from .autodiff import Dual, HyperDual, fd_grad, grad_scalar, hess_scalar
from .exceptions import ConfigError, EvaluationError
from .games import (
    GameDefinition,
    PublicGoodsParams,
    SvoParams,
    bilinear_zero_sum,
    public_goods,
    quadratic_game,
    svo_shaped,
    toy_example,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "Dual",
    "EvaluationError",
    "GameDefinition",
    "GradientBundle",
    "HyperDual",
    "Method",
    "MethodConfig",
    "PublicGoodsParams",
    "SvoParams",
    "Trajectory",
    "alignment_sign",
    "angle",
    "bilinear_zero_sum",
    "bundle",
    "classify_point",
    "descend",
    "direction",
    "equality",
    "fd_grad",
    "grad_scalar",
    "hess_scalar",
    "public_goods",
    "quadratic_game",
    "social_welfare",
    "svo_shaped",
    "sym_eigvals",
    "toy_example",
]
