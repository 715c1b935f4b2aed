"""Generalized Emden-Fowler problem ``y'' + sigma t^gamma y^beta = forcing`` on (0, 1)."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np

from .haar import HaarSystem, basis_matrices


class RegimeWarning(UserWarning):
    """Parameters lie outside the nominal ``gamma < -2, beta > 1`` regime."""


class NegativeBaseFractionalPower(ArithmeticError):
    pass


class SingularPointError(ValueError):
    pass


class PowerGuard(enum.Enum):
    ERROR = "error"
    SIGNED = "signed"


class BoundaryKind(enum.Enum):
    """Right-end condition; the left end is always ``y(0) = 1``."""

    DIRICHLET = "dirichlet"  # y(1) = 0
    ROBIN = "robin"  # y'(1) = y(1)


class Method(enum.Enum):
    QLM = "QLM"
    NEWTON = "NEWTON"


LEFT_VALUE = 1.0
RIGHT_VALUE = 0.0


@dataclass(frozen=True)
class EmdenFowlerProblem:
    sigma: float
    gamma: float
    beta: float
    bc: BoundaryKind = BoundaryKind.DIRICHLET
    # constant right-hand side; zero for every physical case, nonzero only for manufactured tests
    forcing: float = 0.0

    def __post_init__(self):
        if not self.beta > 1:
            raise ValueError(f"nonlinearity exponent must exceed 1, got beta={self.beta}")
        if not (self.gamma < -2):
            warnings.warn(
                f"gamma={self.gamma}, beta={self.beta} is outside the nominal regime "
                "gamma < -2, beta > 1",
                RegimeWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "bc", BoundaryKind(self.bc))


def _quiet(**kw) -> EmdenFowlerProblem:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        return EmdenFowlerProblem(**kw)


# Worked cases: 1-3 are the ionized-atom (Dirichlet) problems, 4 is Thomas-Fermi with y'(1) = y(1).
EXAMPLES: dict[int, EmdenFowlerProblem] = {
    1: _quiet(sigma=-1.0, gamma=-0.5, beta=1.5),
    2: _quiet(sigma=-1.0, gamma=-1.0, beta=2.0),
    3: _quiet(sigma=-1.0, gamma=-1.25, beta=2.25),
    4: _quiet(sigma=-1.0, gamma=-0.5, beta=1.5, bc=BoundaryKind.ROBIN),
}


def nonlinear_power(y, beta: float, guard: PowerGuard = PowerGuard.ERROR):
    """``y**beta`` with an explicit policy for negative bases.

    ``0**beta`` is 0 for any ``beta > 0``.  Negative bases are only an issue for
    non-integer exponents: ``ERROR`` raises, ``SIGNED`` returns ``sign(y)|y|^beta``.
    """
    y = np.asarray(y, dtype=float)
    if float(beta).is_integer():
        out = y**beta
    elif PowerGuard(guard) is PowerGuard.SIGNED:
        out = np.sign(y) * np.abs(y) ** beta
    else:
        if np.any(y < 0):
            raise NegativeBaseFractionalPower(
                f"negative base {float(np.min(y)):.6g} raised to non-integer power {beta}"
            )
        out = y**beta
    return out[()] if out.ndim == 0 else out


def power_derivative(y, beta: float, guard: PowerGuard = PowerGuard.ERROR):
    """Derivative of :func:`nonlinear_power` with respect to ``y``."""
    y = np.asarray(y, dtype=float)
    if PowerGuard(guard) is PowerGuard.SIGNED and not float(beta).is_integer():
        out = beta * np.abs(y) ** (beta - 1)
    else:
        out = beta * nonlinear_power(y, beta - 1, guard)
    return np.asarray(out)[()] if np.ndim(out) == 0 else out


def singular_weight(t, gamma: float):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise SingularPointError("t^gamma is singular at t = 0")
    return t**gamma


def ode_residual(t, y, ypp, problem: EmdenFowlerProblem, guard: PowerGuard = PowerGuard.ERROR):
    """``R(t) = y'' + sigma t^gamma y^beta - forcing``; vectorized over ``t``."""
    w = singular_weight(t, problem.gamma)
    return (
        np.asarray(ypp, dtype=float)
        + problem.sigma * w * nonlinear_power(y, problem.beta, guard)
        - problem.forcing
    )


@dataclass
class SolutionGrid:
    """Approximate solution sampled at ``eval_points``."""

    eval_points: np.ndarray
    y: np.ndarray
    yp: np.ndarray
    ypp: np.ndarray
    coefficients: np.ndarray
    dy0: float
    iterations: int
    method: Method
    J: int
    residual_sup: float | None = None
    history: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.method = Method(self.method)

    def value_at(self, t: float, atol: float = 1e-12) -> float:
        hit = np.flatnonzero(np.abs(self.eval_points - t) <= atol)
        if hit.size == 0:
            raise KeyError(f"t={t} is not an evaluation point")
        return float(self.y[hit[0]])


def reconstruct_profile(a, dy0: float, system: HaarSystem, t):
    """``(y, y', y'')`` at ``t`` from coefficients and the initial slope, with ``y(0) = 1``."""
    a = np.asarray(a, dtype=float)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    H, P1, P2 = basis_matrices(system.config, t)
    y = LEFT_VALUE + dy0 * t + a @ P2
    yp = dy0 + a @ P1
    ypp = a @ H
    return y, yp, ypp


def residual_norm(
    sol: SolutionGrid,
    problem: EmdenFowlerProblem,
    system: HaarSystem,
    points=None,
    guard: PowerGuard = PowerGuard.ERROR,
) -> float:
    """Sup of ``|R|`` over ``points``.

    ``points=None`` uses the collocation points, where a converged collocation
    solve makes ``R`` vanish up to the solver tolerance.  Pass the report grid
    (or :func:`fine_grid`) to measure the error between collocation points.
    """
    pts = system.colloc if points is None else np.asarray(points, dtype=float)
    y, _, ypp = reconstruct_profile(sol.coefficients, sol.dy0, system, pts)
    return float(np.max(np.abs(ode_residual(pts, y, ypp, problem, guard))))


def fine_grid(num: int = 1000) -> np.ndarray:
    """``num`` uniform points in (0, 1], excluding the singular end."""
    return np.linspace(0.0, 1.0, num + 1)[1:]
