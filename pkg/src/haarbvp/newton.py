"""Direct nonlinear Haar collocation solved by damped Newton iteration.

The unknowns are the Haar coefficients of ``y''`` (plus ``y'(0)`` for the
augmented Robin formulation).  ``y`` at a point is

    y(t) = 1 + y'(0) t + sum_i a_i P2_i(t)

and the collocation equations are ``Phi_c = y''(t_c) + sigma t_c^gamma y(t_c)^beta - forcing``.
How ``y'(0)`` is fixed depends on the right-end condition:

* Dirichlet: ``y(1) = 0`` gives ``y'(0) = -1 - sum a_i P2_i(1)``.
* Robin, augmented: ``y'(0)`` is an extra unknown and ``y'(1) - y(1) = 0`` an extra equation.
* Robin, endpoint-ODE: ``y(1)`` is taken from the ODE written at ``t = 1``,
  ``y(1) = ((forcing - y''(1)) / sigma)^(1/beta)``, which keeps the system square.
  This is the closure that produced the published neutral-atom table; it does
  not impose ``y'(1) = y(1)`` exactly.
"""

from __future__ import annotations

import enum
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
    NegativeBaseFractionalPower,
    PowerGuard,
    SolutionGrid,
    nonlinear_power,
    power_derivative,
    reconstruct_profile,
    residual_norm,
    singular_weight,
)
from .qlm import REPORT_POINTS, collocation_values, dirichlet_slope

log = logging.getLogger(__name__)


class NewtonError(RuntimeError):
    pass


class MaxIterations(NewtonError):
    pass


class DampingExhausted(NewtonError):
    pass


class JacobianMode(enum.Enum):
    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite_difference"


class RobinClosure(enum.Enum):
    AUGMENTED = "augmented"
    ENDPOINT_ODE = "endpoint"


class GuessSpace(enum.Enum):
    COEFFICIENTS = "coefficients"
    VALUES = "values"


@dataclass
class NewtonSettings:
    """Newton controls.

    ``init_coeffs`` is a scalar (broadcast) or a length-``2M`` vector, read as
    Haar coefficients or as ``y`` values at the collocation points according to
    ``guess_space``.  ``damping`` is the maximum number of step halvings;
    ``damping=0`` gives undamped Newton.
    """

    max_iter: int = 50
    tol: float = 1e-10
    init_coeffs: object = 1.0
    damping: int = 30
    jacobian_mode: JacobianMode = JacobianMode.ANALYTIC
    guard: PowerGuard = PowerGuard.ERROR
    robin_closure: RobinClosure = RobinClosure.AUGMENTED
    guess_space: GuessSpace = GuessSpace.COEFFICIENTS
    init_dy0: float = 0.0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.damping < 0:
            raise ValueError("damping must be >= 0")
        self.jacobian_mode = JacobianMode(self.jacobian_mode)
        self.guard = PowerGuard(self.guard)
        self.robin_closure = RobinClosure(self.robin_closure)
        self.guess_space = GuessSpace(self.guess_space)


@dataclass
class AugmentedUnknowns:
    a: np.ndarray
    dy0: float

    def to_vector(self) -> np.ndarray:
        return np.append(np.asarray(self.a, dtype=float), self.dy0)

    @classmethod
    def from_vector(cls, u) -> "AugmentedUnknowns":
        u = np.asarray(u, dtype=float)
        return cls(u[:-1].copy(), float(u[-1]))


def _as_vector(u) -> np.ndarray:
    if isinstance(u, AugmentedUnknowns):
        return u.to_vector()
    return np.asarray(u, dtype=float)


def _collocation_terms(y, problem, system, guard):
    w = singular_weight(system.colloc, problem.gamma)
    return w, nonlinear_power(y, problem.beta, guard), power_derivative(y, problem.beta, guard)


# Dirichlet


def residual_system_dirichlet(a, problem, system: HaarSystem, guard=PowerGuard.ERROR):
    a = np.asarray(a, dtype=float)
    y = collocation_values(a, system)
    w = singular_weight(system.colloc, problem.gamma)
    return a @ system.H + problem.sigma * w * nonlinear_power(y, problem.beta, guard) - problem.forcing


def jacobian_dirichlet(a, problem, system: HaarSystem, guard=PowerGuard.ERROR):
    y = collocation_values(a, system)
    w, _, dyb = _collocation_terms(y, problem, system, guard)
    return system.H.T + (problem.sigma * w * dyb)[:, None] * system.dirichlet_P2.T


# Robin, augmented with y'(0)


def _robin_values(u, system):
    u = _as_vector(u)
    a, dy0 = u[:-1], u[-1]
    return a, dy0, LEFT_VALUE + dy0 * system.colloc + a @ system.P2


def residual_system_robin(u, problem, system: HaarSystem, guard=PowerGuard.ERROR):
    a, _, y = _robin_values(u, system)
    w = singular_weight(system.colloc, problem.gamma)
    phi = a @ system.H + problem.sigma * w * nonlinear_power(y, problem.beta, guard) - problem.forcing
    # y'(1) - y(1) with y(0) = 1; y'(0) cancels
    bc = a @ (system.p1_at_1 - system.p2_at_1) - LEFT_VALUE
    return np.append(phi, bc)


def jacobian_robin(u, problem, system: HaarSystem, guard=PowerGuard.ERROR):
    _, _, y = _robin_values(u, system)
    w, _, dyb = _collocation_terms(y, problem, system, guard)
    n = system.n
    scale = problem.sigma * w * dyb
    jac = np.zeros((n + 1, n + 1))
    jac[:n, :n] = system.H.T + scale[:, None] * system.P2.T
    jac[:n, n] = scale * system.colloc
    jac[n, :n] = system.p1_at_1 - system.p2_at_1
    return jac


# Robin, endpoint-ODE closure


def endpoint_value(a, problem, system: HaarSystem, guard=PowerGuard.ERROR) -> float:
    """``y(1)`` from ``y''(1) + sigma y(1)^beta = forcing``."""
    if problem.sigma == 0:
        raise ValueError("endpoint-ODE closure needs sigma != 0")
    base = (problem.forcing - float(np.asarray(a) @ system.h_at_1)) / problem.sigma
    return float(nonlinear_power(base, 1.0 / problem.beta, guard))


def _endpoint_values(a, problem, system, guard):
    a = np.asarray(a, dtype=float)
    y1 = endpoint_value(a, problem, system, guard)
    return y1, collocation_values(a, system) + (y1 - RIGHT_VALUE) * system.colloc


def residual_system_endpoint(a, problem, system: HaarSystem, guard=PowerGuard.ERROR):
    a = np.asarray(a, dtype=float)
    _, y = _endpoint_values(a, problem, system, guard)
    w = singular_weight(system.colloc, problem.gamma)
    return a @ system.H + problem.sigma * w * nonlinear_power(y, problem.beta, guard) - problem.forcing


def jacobian_endpoint(a, problem, system: HaarSystem, guard=PowerGuard.ERROR):
    a = np.asarray(a, dtype=float)
    y1, y = _endpoint_values(a, problem, system, guard)
    w, _, dyb = _collocation_terms(y, problem, system, guard)
    if y1 == 0.0:
        raise NewtonError("endpoint closure is not differentiable at y(1) = 0")
    # d y1 / d a = (1/beta) y1^(1-beta) * (-h(1) / sigma)
    dy1 = (abs(y1) ** (1.0 - problem.beta) / problem.beta) * (-system.h_at_1 / problem.sigma)
    dy = system.dirichlet_P2.T + np.outer(system.colloc, dy1)
    return system.H.T + (problem.sigma * w * dyb)[:, None] * dy


def finite_difference_jacobian(fun, u, h: float = 1e-6) -> np.ndarray:
    """Central differences, one column per unknown."""
    u = np.asarray(u, dtype=float)
    cols = []
    for k in range(u.size):
        e = np.zeros_like(u)
        e[k] = h
        cols.append((np.asarray(fun(u + e)) - np.asarray(fun(u - e))) / (2 * h))
    return np.column_stack(cols)


class _Formulation:
    def __init__(self, problem, system, settings):
        self.problem = problem
        self.system = system
        self.settings = settings
        guard = settings.guard
        if problem.bc is BoundaryKind.DIRICHLET:
            self.kind = "dirichlet"
            res, jac = residual_system_dirichlet, jacobian_dirichlet
        elif settings.robin_closure is RobinClosure.AUGMENTED:
            self.kind = "augmented"
            res, jac = residual_system_robin, jacobian_robin
        else:
            self.kind = "endpoint"
            res, jac = residual_system_endpoint, jacobian_endpoint
        self.residual = lambda u: res(u, problem, system, guard)
        if settings.jacobian_mode is JacobianMode.ANALYTIC:
            self.jacobian = lambda u: jac(u, problem, system, guard)
        else:
            self.jacobian = lambda u: finite_difference_jacobian(self.residual, u)

    def initial(self) -> np.ndarray:
        s, sys = self.settings, self.system
        guess = np.broadcast_to(np.asarray(s.init_coeffs, dtype=float), (sys.n,)).copy()
        if s.guess_space is GuessSpace.VALUES:
            # pick coefficients whose reconstructed profile hits the guessed values
            if self.kind == "dirichlet":
                t = sys.colloc
                guess = linsolve.solve(sys.dirichlet_P2.T, guess - LEFT_VALUE + t)
            else:
                guess = linsolve.solve(sys.P2.T, guess - LEFT_VALUE - s.init_dy0 * sys.colloc)
        if self.kind == "augmented":
            return np.append(guess, s.init_dy0)
        return guess

    def split(self, u) -> tuple[np.ndarray, float]:
        if self.kind == "dirichlet":
            return u, dirichlet_slope(u, self.system)
        if self.kind == "augmented":
            return u[:-1], float(u[-1])
        y1 = endpoint_value(u, self.problem, self.system, self.settings.guard)
        return u, y1 - LEFT_VALUE - float(u @ self.system.p2_at_1)


def _try_residual(form, u):
    try:
        phi = form.residual(u)
    except NegativeBaseFractionalPower:
        return None
    if not np.all(np.isfinite(phi)):
        return None
    return phi


def newton_iterate(form: _Formulation, u0, settings: NewtonSettings):
    """Run damped Newton from ``u0``; returns ``(u, steps, history)``."""
    u = np.asarray(u0, dtype=float)
    phi = form.residual(u)
    if not np.all(np.isfinite(phi)):
        raise NewtonError("initial residual is not finite")
    norm = float(np.max(np.abs(phi)))
    history = [norm]
    steps = 0
    while norm >= settings.tol:
        if steps >= settings.max_iter:
            raise MaxIterations(
                f"no convergence in {settings.max_iter} steps (|Phi|_inf = {norm:.3e})"
            )
        delta = linsolve.solve(form.jacobian(u), -phi)
        lam = 1.0
        for _ in range(settings.damping + 1):
            trial = u + lam * delta
            phi_t = _try_residual(form, trial)
            if phi_t is not None:
                norm_t = float(np.max(np.abs(phi_t)))
                if settings.damping == 0 or norm_t < norm:
                    break
            lam *= 0.5
        else:
            raise DampingExhausted(
                f"step {steps + 1}: no admissible decrease after {settings.damping} halvings"
            )
        if phi_t is None:
            raise NegativeBaseFractionalPower("undamped step left the admissible region")
        u, phi, norm = trial, phi_t, norm_t
        steps += 1
        history.append(norm)
        log.debug("newton %s step %d lambda %.3g |Phi| %.3e", form.kind, steps, lam, norm)
    return u, steps, history


def solve_newton(
    problem: EmdenFowlerProblem,
    config: ResolutionConfig | int,
    settings: NewtonSettings | None = None,
    eval_points=REPORT_POINTS,
    system: HaarSystem | None = None,
) -> SolutionGrid:
    settings = settings or NewtonSettings()
    system = system or build_system(config)
    form = _Formulation(problem, system, settings)
    u, steps, history = newton_iterate(form, form.initial(), settings)
    a, dy0 = form.split(u)

    pts = np.atleast_1d(np.asarray(eval_points, dtype=float))
    y, yp, ypp = reconstruct_profile(a, dy0, system, pts)
    sol = SolutionGrid(
        eval_points=pts,
        y=y,
        yp=yp,
        ypp=ypp,
        coefficients=np.asarray(a, dtype=float),
        dy0=float(dy0),
        iterations=steps,
        method=Method.NEWTON,
        J=system.config.J,
        history=history,
    )
    interior = pts[pts > 0]
    if interior.size:
        sol.residual_sup = residual_norm(sol, problem, system, interior, settings.guard)
    return sol
