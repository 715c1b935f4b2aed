import math
import warnings

import numpy as np
import pytest

from haarbvp.problem import (
    EXAMPLES,
    BoundaryKind,
    EmdenFowlerProblem,
    Method,
    NegativeBaseFractionalPower,
    PowerGuard,
    RegimeWarning,
    SingularPointError,
    SolutionGrid,
    fine_grid,
    nonlinear_power,
    ode_residual,
    power_derivative,
    residual_norm,
)

from conftest import cached_system

TF = EXAMPLES[1]


def test_examples_parameters():
    assert (TF.sigma, TF.gamma, TF.beta, TF.bc) == (-1.0, -0.5, 1.5, BoundaryKind.DIRICHLET)
    assert EXAMPLES[4].bc is BoundaryKind.ROBIN


def test_regime_warning_and_validation():
    with pytest.warns(RegimeWarning):
        EmdenFowlerProblem(-1, -1, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        EmdenFowlerProblem(-1, -3, 2)
    with pytest.raises(ValueError):
        EmdenFowlerProblem(-1, -3, 1.0)
    assert EmdenFowlerProblem(-1, -3, 2, bc="robin").bc is BoundaryKind.ROBIN


@pytest.mark.parametrize(
    "y, beta, expected",
    [(0.0, 1.5, 0.0), (1.0, 2.25, 1.0), (0.25, 1.5, 0.125)],
)
def test_nonlinear_power_examples(y, beta, expected):
    assert nonlinear_power(y, beta) == expected


def test_nonlinear_power_guards():
    with pytest.raises(NegativeBaseFractionalPower):
        nonlinear_power(-0.25, 1.5)
    assert nonlinear_power(-0.25, 1.5, PowerGuard.SIGNED) == -0.125
    assert nonlinear_power(-0.5, 2.0) == 0.25
    np.testing.assert_array_equal(nonlinear_power(np.array([0.0, 4.0]), 1.5), [0.0, 8.0])


def test_power_derivative_matches_difference_quotient():
    for guard, y in ((PowerGuard.ERROR, 0.3), (PowerGuard.SIGNED, -0.3)):
        h = 1e-6
        fd = (nonlinear_power(y + h, 1.5, guard) - nonlinear_power(y - h, 1.5, guard)) / (2 * h)
        assert power_derivative(y, 1.5, guard) == pytest.approx(fd, rel=1e-8)
    assert power_derivative(0.0, 1.5) == 0.0


def test_ode_residual_examples():
    assert ode_residual(0.25, 0.25, 0.25, TF) == 0.0
    assert ode_residual(0.5, 0.0, 1.0, EXAMPLES[3]) == 1.0
    t, y = 0.37, 0.6
    ypp = -TF.sigma * t**TF.gamma * y**TF.beta
    assert ode_residual(t, y, ypp, TF) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(SingularPointError):
        ode_residual(0.0, 1.0, 0.0, TF)


def _grid_from(a, dy0, J):
    return SolutionGrid(
        eval_points=np.array([]),
        y=np.array([]),
        yp=np.array([]),
        ypp=np.array([]),
        coefficients=np.asarray(a, float),
        dy0=dy0,
        iterations=0,
        method=Method.NEWTON,
        J=J,
    )


def test_residual_norm_manufactured_exact():
    # y'' = 2 with y = (1-t)^2: a_1 = 2, y'(0) = -2
    s = cached_system(3)
    problem = EmdenFowlerProblem(0.0, -3.0, 2.0, forcing=2.0)
    a = np.zeros(s.n)
    a[0] = 2.0
    sol = _grid_from(a, -2.0, 3)
    assert residual_norm(sol, problem, s) < 1e-12
    assert residual_norm(sol, problem, s, fine_grid()) < 1e-12


def test_residual_norm_nonzero_for_emden_fowler():
    s = cached_system(2)
    sol = _grid_from(np.zeros(s.n), -1.0, 2)
    r = residual_norm(sol, TF, s)
    # y = 1 - t, y'' = 0: R = -t^-1/2 (1-t)^3/2, largest at the first collocation point
    t0 = s.colloc[0]
    assert r == pytest.approx(t0**-0.5 * (1 - t0) ** 1.5, rel=1e-14)
    assert r == residual_norm(sol, TF, s)


def test_fine_grid_excludes_origin():
    g = fine_grid(1000)
    assert g.size == 1000 and g[0] > 0 and g[-1] == 1.0


def test_solution_grid_value_at():
    sol = _grid_from([1.0], 0.0, 0)
    sol.eval_points = np.array([0.1, 0.5])
    sol.y = np.array([0.9, 0.5])
    assert sol.value_at(0.5) == 0.5
    with pytest.raises(KeyError):
        sol.value_at(0.3)
    assert math.isclose(sol.value_at(0.1 + 1e-14), 0.9)
