"""Quasilinearization: a sequence of linear Haar collocation problems.

Each step linearizes ``y^beta`` about the previous iterate ``y_r`` and solves

    sum_i a_i [h_i(t) + sigma beta t^gamma y_r^(beta-1) (P2_i(t) - t P2_i(1))]
        = forcing + sigma (beta-1) t^gamma y_r^beta - sigma beta (1-t) t^gamma y_r^(beta-1)

at the collocation points for the coefficients of ``y_{r+1}''``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import linsolve
from .haar import HaarSystem, ResolutionConfig, build_system
from .problem import (
    LEFT_VALUE,
    RIGHT_VALUE,
    BoundaryKind,
    EmdenFowlerProblem,
    Method,
    PowerGuard,
    SolutionGrid,
    nonlinear_power,
    power_derivative,
    reconstruct_profile,
    residual_norm,
    singular_weight,
)

log = logging.getLogger(__name__)

REPORT_POINTS = np.round(np.arange(1, 10) / 10, 12)


class NonFiniteIterate(ArithmeticError):
    pass


@dataclass
class QlmSettings:
    """Iteration controls.

    ``max_iter`` is the index ``r`` of the last linearization point, so at most
    ``max_iter + 1`` linear solves are performed and the returned iterate is
    ``y_{r+1}``.  ``init_guess`` holds ``y_0`` at the collocation points; a
    scalar is broadcast.
    """

    max_iter: int = 3
    tol: float = 1e-10
    init_guess: object = 0.0
    guard: PowerGuard = PowerGuard.ERROR

    def __post_init__(self):
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def dirichlet_slope(a, system: HaarSystem) -> float:
    """``y'(0)`` implied by ``y(0) = 1`` and ``y(1) = 0``."""
    return RIGHT_VALUE - LEFT_VALUE - float(np.asarray(a) @ system.p2_at_1)


def collocation_values(a, system: HaarSystem) -> np.ndarray:
    """Dirichlet ``y`` at the collocation points, ``1 - t + sum a_i (P2_i(t) - t P2_i(1))``."""
    t = system.colloc
    return LEFT_VALUE + (RIGHT_VALUE - LEFT_VALUE) * t + np.asarray(a) @ system.dirichlet_P2


def assemble(problem: EmdenFowlerProblem, system: HaarSystem, y_r, guard=PowerGuard.ERROR):
    """Collocation matrix ``A[c, i]`` and right-hand side for one linearized step."""
    if problem.bc is not BoundaryKind.DIRICHLET:
        raise ValueError("quasilinearization is implemented for y(0)=1, y(1)=0 only")
    t = system.colloc
    y_r = np.broadcast_to(np.asarray(y_r, dtype=float), t.shape)
    s, b = problem.sigma, problem.beta
    w = singular_weight(t, problem.gamma)
    yb = nonlinear_power(y_r, b, guard)
    dyb = power_derivative(y_r, b, guard)  # beta * y_r^(beta-1)
    A = system.H.T + (s * w * dyb)[:, None] * system.dirichlet_P2.T
    rhs = problem.forcing + s * w * (dyb * y_r - yb) - s * w * dyb * (1.0 - t)
    return A, rhs


def reconstruct(a, system: HaarSystem, t):
    """Dirichlet ``(y, y', y'')`` at arbitrary ``t`` in [0, 1]."""
    return reconstruct_profile(a, dirichlet_slope(a, system), system, t)


def solve_qlm(
    problem: EmdenFowlerProblem,
    config: ResolutionConfig | int,
    settings: QlmSettings | None = None,
    eval_points=REPORT_POINTS,
    system: HaarSystem | None = None,
) -> SolutionGrid:
    settings = settings or QlmSettings()
    system = system or build_system(config)
    t = system.colloc
    y_r = np.broadcast_to(np.asarray(settings.init_guess, dtype=float), t.shape).copy()

    history = []
    a = np.zeros(system.n)
    solves = 0
    for _ in range(settings.max_iter + 1):
        A, rhs = assemble(problem, system, y_r, settings.guard)
        a = linsolve.solve(A, rhs)
        solves += 1
        y_next = collocation_values(a, system)
        if not np.all(np.isfinite(y_next)):
            raise NonFiniteIterate(f"iterate {solves} is not finite")
        change = float(np.max(np.abs(y_next - y_r)))
        history.append(change)
        log.debug("qlm J=%d solve %d change %.3e", system.config.J, solves, change)
        y_r = y_next
        if change < settings.tol:
            break

    pts = np.atleast_1d(np.asarray(eval_points, dtype=float))
    y, yp, ypp = reconstruct(a, system, pts)
    sol = SolutionGrid(
        eval_points=pts,
        y=y,
        yp=yp,
        ypp=ypp,
        coefficients=a,
        dy0=dirichlet_slope(a, system),
        iterations=solves,
        method=Method.QLM,
        J=system.config.J,
        history=history,
    )
    interior = pts[pts > 0]
    if interior.size:
        sol.residual_sup = residual_norm(sol, problem, system, interior, settings.guard)
    return sol
