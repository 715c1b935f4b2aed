"""Haar wavelet collocation solvers for singular Emden-Fowler boundary value problems."""

from .haar import HaarSystem, ResolutionConfig, build_system
from .newton import GuessSpace, JacobianMode, NewtonSettings, RobinClosure, solve_newton
from .problem import (
    EXAMPLES,
    BoundaryKind,
    EmdenFowlerProblem,
    Method,
    PowerGuard,
    SolutionGrid,
    residual_norm,
)
from .qlm import REPORT_POINTS, QlmSettings, solve_qlm

__all__ = [
    "EXAMPLES",
    "REPORT_POINTS",
    "BoundaryKind",
    "EmdenFowlerProblem",
    "GuessSpace",
    "HaarSystem",
    "JacobianMode",
    "Method",
    "NewtonSettings",
    "PowerGuard",
    "QlmSettings",
    "ResolutionConfig",
    "RobinClosure",
    "SolutionGrid",
    "build_system",
    "residual_norm",
    "solve_newton",
    "solve_qlm",
]
