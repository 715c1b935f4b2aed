from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haarbvp.newton import (
    AugmentedUnknowns,
    DampingExhausted,
    GuessSpace,
    JacobianMode,
    MaxIterations,
    NewtonSettings,
    RobinClosure,
    endpoint_value,
    finite_difference_jacobian,
    newton_iterate,
    jacobian_dirichlet,
    jacobian_endpoint,
    jacobian_robin,
    residual_system_dirichlet,
    residual_system_endpoint,
    residual_system_robin,
    solve_newton,
)
from haarbvp.problem import (
    EXAMPLES,
    EmdenFowlerProblem,
    NegativeBaseFractionalPower,
    PowerGuard,
    residual_norm,
)
from haarbvp.qlm import assemble, collocation_values, reconstruct

from conftest import cached_system

MANUFACTURED = EmdenFowlerProblem(0.0, -3.0, 2.0, forcing=2.0)
ENDPOINT = NewtonSettings(robin_closure=RobinClosure.ENDPOINT_ODE)


def rel_err(analytic, fd):
    # unit floor: entries are O(1) through H, and exact zeros carry ~1e-9 difference noise
    return np.max(np.abs(analytic - fd) / np.maximum(np.abs(fd), 1.0))


def test_residual_dirichlet_zero_coefficients():
    s = cached_system(0)
    phi = residual_system_dirichlet(np.zeros(2), EXAMPLES[1], s)
    expected = -(0.25**-0.5) * 0.75**1.5
    assert phi[0] == pytest.approx(expected, rel=1e-14)
    assert phi[0] == pytest.approx(-1.299038, abs=1e-6)


def test_residual_dirichlet_linear_case():
    s = cached_system(3)
    linear = EmdenFowlerProblem(0.0, -3.0, 2.0)
    np.testing.assert_array_equal(residual_system_dirichlet(np.zeros(s.n), linear, s), 0.0)
    a = np.random.default_rng(0).standard_normal(s.n)
    np.testing.assert_allclose(residual_system_dirichlet(a, linear, s), a @ s.H)
    np.testing.assert_array_equal(jacobian_dirichlet(a, linear, s), s.H.T)


def test_converged_residual_small():
    sol = solve_newton(EXAMPLES[1], 3)
    phi = residual_system_dirichlet(sol.coefficients, EXAMPLES[1], cached_system(3))
    assert np.max(np.abs(phi)) < 1e-10


def _shrink(base, correction):
    """Largest factor <= 1 keeping ``base + f * correction`` at least half of ``base``."""
    with np.errstate(divide="ignore"):
        room = np.where(correction != 0, 0.5 * base / np.abs(correction), np.inf)
    return min(1.0, float(room.min()))


def _admissible_point(rng, s, scale=0.5):
    a = rng.standard_normal(s.n) * scale
    return a * _shrink(1 - s.colloc, a @ s.dirichlet_P2)


@settings(max_examples=20, deadline=None)
@given(J=st.integers(0, 5), example=st.sampled_from([1, 2, 3]), seed=st.integers(0, 2**32 - 1))
def test_dirichlet_jacobian_matches_finite_differences(J, example, seed):
    s = cached_system(J)
    p = EXAMPLES[example]
    a = _admissible_point(np.random.default_rng(seed), s)
    fd = finite_difference_jacobian(lambda u: residual_system_dirichlet(u, p, s), a)
    assert rel_err(jacobian_dirichlet(a, p, s), fd) < 1e-5


@settings(max_examples=15, deadline=None)
@given(J=st.integers(0, 5), seed=st.integers(0, 2**32 - 1))
def test_robin_jacobian_matches_finite_differences(J, seed):
    s = cached_system(J)
    p = EXAMPLES[4]
    rng = np.random.default_rng(seed)
    dy0 = rng.uniform(-0.5, 0.5)
    a = rng.standard_normal(s.n) * 0.5
    a *= _shrink(1 + dy0 * s.colloc, a @ s.P2)
    u = np.append(a, dy0)
    fd = finite_difference_jacobian(lambda v: residual_system_robin(v, p, s), u)
    assert rel_err(jacobian_robin(u, p, s), fd) < 1e-5


@settings(max_examples=15, deadline=None)
@given(J=st.integers(0, 5), seed=st.integers(0, 2**32 - 1))
def test_endpoint_jacobian_matches_finite_differences(J, seed):
    s = cached_system(J)
    p = EXAMPLES[4]
    rng = np.random.default_rng(seed)
    a = np.zeros(s.n)
    a[0] = rng.uniform(0.5, 3.0)  # y''(1) > 0 keeps y(1) = y''(1)^(2/3) smooth
    y1 = endpoint_value(a, p, s)
    base = collocation_values(a, s) + y1 * s.colloc
    rest = np.append(0.0, rng.standard_normal(s.n - 1) * 0.5)
    a += rest * _shrink(base, rest @ s.dirichlet_P2)
    fd = finite_difference_jacobian(lambda v: residual_system_endpoint(v, p, s), a)
    assert rel_err(jacobian_endpoint(a, p, s), fd) < 1e-5


def test_jacobian_shares_quasilinear_matrix():
    s = cached_system(3)
    a = _admissible_point(np.random.default_rng(5), s)
    A, _ = assemble(EXAMPLES[1], s, collocation_values(a, s))
    np.testing.assert_allclose(jacobian_dirichlet(a, EXAMPLES[1], s), A, rtol=1e-14, atol=1e-14)


def test_robin_residual_boundary_component():
    s = cached_system(2)
    u = AugmentedUnknowns(np.zeros(s.n), 0.0)
    assert residual_system_robin(u, EXAMPLES[4], s)[-1] == -1.0
    u.dy0 = 0.37
    assert residual_system_robin(u, EXAMPLES[4], s)[-1] == -1.0
    assert AugmentedUnknowns.from_vector(u.to_vector()).dy0 == 0.37


def test_manufactured_one_step():
    sol = solve_newton(MANUFACTURED, 4, NewtonSettings(init_coeffs=0.0, damping=0))
    assert sol.iterations == 1
    expected = np.zeros(cached_system(4).n)
    expected[0] = 2.0
    np.testing.assert_allclose(sol.coefficients, expected, atol=1e-13)
    np.testing.assert_allclose(sol.y, (1 - sol.eval_points) ** 2, atol=1e-13)
    assert sol.history[-1] < 1e-12


@pytest.mark.parametrize(
    "example, J, t, expected",
    [(1, 8, 0.9, 0.0836864), (2, 5, 0.5, 0.387587), (3, 7, 0.1, 0.7057)],
)
def test_solve_newton_table_cells(example, J, t, expected):
    sol = solve_newton(EXAMPLES[example], J)
    assert sol.value_at(t) == pytest.approx(expected, abs=5e-5)


@pytest.mark.parametrize("example", [1, 2, 3])
def test_residual_norm_equals_phi_at_convergence(example):
    s = cached_system(4)
    sol = solve_newton(EXAMPLES[example], 4)
    phi = residual_system_dirichlet(sol.coefficients, EXAMPLES[example], s)
    assert abs(residual_norm(sol, EXAMPLES[example], s) - np.max(np.abs(phi))) < 1e-13


@pytest.mark.parametrize("J", [0, 3, 6])
def test_dirichlet_bc_exact_every_iterate(J):
    s = cached_system(J)
    for scale in (0.0, 1.0, 25.0):
        y, _, _ = reconstruct(np.full(s.n, scale), s, [0.0, 1.0])
        assert abs(y[0] - 1) < 1e-12 and abs(y[1]) < 1e-12


@pytest.mark.parametrize("example", [1, 2, 3])
def test_guess_robustness(example):
    base = solve_newton(EXAMPLES[example], 5)
    for g in (1.01, 1.1):
        other = solve_newton(EXAMPLES[example], 5, NewtonSettings(init_coeffs=g))
        assert np.max(np.abs(other.y - base.y)) < 1e-8


def test_values_space_guess_reaches_same_solution():
    base = solve_newton(EXAMPLES[1], 4)
    other = solve_newton(EXAMPLES[1], 4, NewtonSettings(init_coeffs=0.5, guess_space=GuessSpace.VALUES))
    assert np.max(np.abs(other.y - base.y)) < 1e-8


def test_finite_difference_mode_matches_analytic():
    a = solve_newton(EXAMPLES[2], 3)
    b = solve_newton(EXAMPLES[2], 3, NewtonSettings(jacobian_mode=JacobianMode.FINITE_DIFFERENCE))
    assert np.max(np.abs(a.y - b.y)) < 1e-9


def test_plain_newton_when_damping_disabled():
    a = solve_newton(EXAMPLES[1], 5)
    b = solve_newton(EXAMPLES[1], 5, NewtonSettings(damping=0))
    assert np.max(np.abs(a.y - b.y)) < 1e-10


@pytest.mark.parametrize("J", [3, 5])
def test_robin_augmented_bc_at_convergence(J):
    sol = solve_newton(EXAMPLES[4], J, eval_points=[0.0, 1.0])
    assert abs(sol.y[0] - 1.0) < 1e-12
    assert abs(sol.yp[1] - sol.y[1]) < 1e-9


def test_robin_endpoint_reproduces_published_cell():
    sol = solve_newton(EXAMPLES[4], 3, ENDPOINT)
    assert sol.value_at(0.5) == pytest.approx(1.10753, abs=5e-6)
    assert sol.residual_sup == pytest.approx(0.102233, abs=5e-7)
    # the closure takes y(1) from the ODE at t = 1, not from y'(1) = y(1)
    edge = solve_newton(EXAMPLES[4], 3, ENDPOINT, eval_points=[1.0])
    assert edge.y[0] == pytest.approx(edge.coefficients[0] ** (2 / 3), rel=1e-12)


def test_robin_augmented_reports_residual():
    sol = solve_newton(EXAMPLES[4], 5)
    assert sol.residual_sup == pytest.approx(0.0237877, rel=0.25)


def test_max_iterations():
    with pytest.raises(MaxIterations):
        solve_newton(EXAMPLES[3], 5, NewtonSettings(max_iter=1))


def _arctan_form():
    return SimpleNamespace(
        kind="scalar",
        residual=lambda u: np.arctan(u),
        jacobian=lambda u: np.array([[1.0 / (1.0 + u[0] ** 2)]]),
    )


def test_damping_exhausted():
    # from u = 10 the Newton step on arctan overshoots; one halving is not enough
    with pytest.raises(DampingExhausted):
        newton_iterate(_arctan_form(), [10.0], NewtonSettings(damping=1))
    u, steps, history = newton_iterate(_arctan_form(), [10.0], NewtonSettings(damping=30))
    assert abs(u[0]) < 1e-10
    assert all(b < a for a, b in zip(history, history[1:]))


def test_damping_exhausted_on_collocation_system():
    with pytest.raises(DampingExhausted):
        solve_newton(EXAMPLES[2], 3, NewtonSettings(init_coeffs=20.0, damping=1))


def test_inadmissible_start_raises():
    with pytest.raises(NegativeBaseFractionalPower):
        solve_newton(EXAMPLES[1], 2, NewtonSettings(init_coeffs=200.0))


def test_signed_guard_allows_negative_start():
    sol = solve_newton(EXAMPLES[1], 3, NewtonSettings(init_coeffs=200.0, guard=PowerGuard.SIGNED))
    ref = solve_newton(EXAMPLES[1], 3)
    assert np.max(np.abs(sol.y - ref.y)) < 1e-8


def test_settings_validation():
    with pytest.raises(ValueError):
        NewtonSettings(max_iter=0)
    with pytest.raises(ValueError):
        NewtonSettings(tol=-1)
    with pytest.raises(ValueError):
        NewtonSettings(damping=-1)
    assert NewtonSettings(robin_closure="endpoint").robin_closure is RobinClosure.ENDPOINT_ODE
