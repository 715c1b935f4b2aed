"""Command-line front end: ``solve``, ``convergence`` and ``compare``.

Exit codes: 0 success, 1 solver failure, 2 comparison failure, 3 bad configuration.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import refdata
from .haar import ResolutionConfig
from .linsolve import SingularMatrix
from .newton import NewtonError, NewtonSettings, solve_newton
from .problem import (
    EXAMPLES,
    BoundaryKind,
    EmdenFowlerProblem,
    NegativeBaseFractionalPower,
    PowerGuard,
    RegimeWarning,
    SolutionGrid,
)
from .qlm import REPORT_POINTS, NonFiniteIterate, QlmSettings, solve_qlm

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_COMPARE = 2
EXIT_CONFIG = 3

SOLVER_ERRORS = (SingularMatrix, NewtonError, NegativeBaseFractionalPower, NonFiniteIterate)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    method: str | None = None
    example: int | None = None
    sigma: float | None = None
    gamma: float | None = None
    beta: float | None = None
    bc: str = "dirichlet"
    J: int = 3
    iters: int | None = None
    tol: float = 1e-10
    guess: float | None = None
    guess_space: str | None = None
    robin_closure: str = "augmented"
    damping: int = 30
    guard: str = "error"
    points: np.ndarray = field(default_factory=lambda: REPORT_POINTS.copy())
    fmt: str = "table"

    def problem(self) -> EmdenFowlerProblem:
        explicit = (self.sigma, self.gamma, self.beta)
        if self.example is not None:
            if any(v is not None for v in explicit):
                raise ConfigError("give either --example or --sigma/--gamma/--beta, not both")
            if self.example not in EXAMPLES:
                raise ConfigError(f"unknown example {self.example}")
            return EXAMPLES[self.example]
        if any(v is None for v in explicit):
            raise ConfigError("--sigma, --gamma and --beta are all required without --example")
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RegimeWarning)
                return EmdenFowlerProblem(self.sigma, self.gamma, self.beta, BoundaryKind(self.bc))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def resolved_method(self) -> str:
        if self.method:
            return self.method
        return "qlm" if self.problem().bc is BoundaryKind.DIRICHLET else "newton"

    def resolution(self) -> ResolutionConfig:
        try:
            return ResolutionConfig(self.J)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def run(cfg: RunConfig, J: int | None = None) -> SolutionGrid:
    problem = cfg.problem()
    res = cfg.resolution() if J is None else ResolutionConfig(J)
    guard = PowerGuard(cfg.guard)
    method = cfg.resolved_method()
    if method == "qlm":
        if problem.bc is not BoundaryKind.DIRICHLET:
            raise ConfigError("qlm supports the Dirichlet condition only; use --method newton")
        settings = QlmSettings(
            max_iter=3 if cfg.iters is None else cfg.iters,
            tol=cfg.tol,
            init_guess=0.0 if cfg.guess is None else cfg.guess,
            guard=guard,
        )
        if cfg.guess_space == "coefficients":
            raise ConfigError("qlm guesses are y-values at collocation points")
        return solve_qlm(problem, res, settings, eval_points=cfg.points)
    if method == "newton":
        settings = NewtonSettings(
            max_iter=50 if cfg.iters is None else cfg.iters,
            tol=cfg.tol,
            init_coeffs=1.0 if cfg.guess is None else cfg.guess,
            damping=cfg.damping,
            guard=guard,
            robin_closure=cfg.robin_closure,
            guess_space=cfg.guess_space or "coefficients",
        )
        return solve_newton(problem, res, settings, eval_points=cfg.points)
    raise ConfigError(f"unknown method {method!r}")


def _fmt_exact(v: float) -> str:
    # shortest repr that round-trips exactly
    return "inf" if math.isinf(v) else repr(float(v))


def _g6(v: float) -> str:
    return format(float(v), ".6g")


def format_solution(sol: SolutionGrid, fmt: str, residual: bool) -> str:
    if fmt == "csv":
        lines = ["t,y"]
        lines += [f"{_fmt_exact(t)},{_fmt_exact(y)}" for t, y in zip(sol.eval_points, sol.y)]
        if residual and sol.residual_sup is not None:
            lines.append(f"inf,{_fmt_exact(sol.residual_sup)}")
        return "\n".join(lines) + "\n"
    lines = [
        f"# method={sol.method.value} J={sol.J} iterations={sol.iterations}",
        f"{'t':>8}  {'y':>12}",
    ]
    lines += [f"{_g6(t):>8}  {_g6(y):>12}" for t, y in zip(sol.eval_points, sol.y)]
    if residual and sol.residual_sup is not None:
        lines.append(f"{'R_inf':>8}  {_g6(sol.residual_sup):>12}")
    return "\n".join(lines) + "\n"


def format_comparison(rep: refdata.ComparisonReport) -> str:
    lines = [f"{'t':>8}  {'computed':>12}  {'reference':>12}  {'|diff|':>10}"]
    for t, c, r, d in zip(rep.t, rep.computed, rep.reference, rep.diff):
        lines.append(f"{_g6(t):>8}  {_g6(c):>12}  {_g6(r):>12}  {d:10.3e}")
    verdict = "PASS" if rep.passed else "FAIL"
    lines.append(f"max |diff| = {rep.max_diff:.3e}  atol = {rep.atol:.3e}  {verdict}")
    return "\n".join(lines) + "\n"


def _reference_column(cfg: RunConfig) -> refdata.ReferenceColumn:
    if cfg.example is None:
        raise ConfigError("reference comparison needs --example")
    return refdata.table(cfg.example, cfg.resolved_method()).column(cfg.J)


def cmd_solve(cfg: RunConfig, residual=False, compare=False, atol=5e-5, out=sys.stdout) -> int:
    ref = _reference_column(cfg) if compare else None
    if ref is not None:
        cfg.points = ref.t
    sol = run(cfg)
    out.write(format_solution(sol, cfg.fmt, residual))
    if ref is not None:
        rep = refdata.compare(sol, ref, atol)
        out.write(format_comparison(rep))
        return EXIT_OK if rep.passed else EXIT_COMPARE
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, levels, out=sys.stdout, err=sys.stderr) -> int:
    if len(levels) < 2:
        raise ConfigError("a convergence study needs at least two levels")
    for J in levels:
        ResolutionConfig(J)
    out.write("J,t,y,delta_prev,r_inf\n")
    prev = None
    status = EXIT_OK
    for J in levels:
        try:
            sol = run(cfg, J)
        except SOLVER_ERRORS as exc:
            err.write(f"J={J}: {type(exc).__name__}: {exc}\n")
            status = EXIT_SOLVER
            continue
        delta = np.abs(sol.y - prev) if prev is not None else [None] * sol.y.size
        r_inf = "" if sol.residual_sup is None else _fmt_exact(sol.residual_sup)
        for t, y, d in zip(sol.eval_points, sol.y, delta):
            out.write(f"{J},{_fmt_exact(t)},{_fmt_exact(y)},{'' if d is None else _fmt_exact(d)},{r_inf}\n")
        prev = sol.y
    return status


def cmd_compare(cfg: RunConfig, atol: float, out=sys.stdout) -> int:
    ref = _reference_column(cfg)
    cfg.points = ref.t
    sol = run(cfg)
    rep = refdata.compare(sol, ref, atol)
    out.write(f"# example={cfg.example} method={sol.method.value} J={sol.J}\n")
    out.write(format_comparison(rep))
    if ref.r_inf is not None and sol.residual_sup is not None:
        out.write(f"R_inf computed = {_g6(sol.residual_sup)}  reference = {_g6(ref.r_inf)}\n")
    return EXIT_OK if rep.passed else EXIT_COMPARE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _points(text: str) -> np.ndarray:
    try:
        pts = np.array([float(s) for s in text.split(",") if s.strip()])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if pts.size == 0 or np.any((pts < 0) | (pts > 1)):
        raise argparse.ArgumentTypeError("points must be a comma list inside [0, 1]")
    return pts


def _add_common(p: argparse.ArgumentParser, with_J=True):
    p.add_argument("--example", type=int, choices=sorted(EXAMPLES))
    p.add_argument("--sigma", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--bc", choices=[b.value for b in BoundaryKind], default="dirichlet")
    p.add_argument(
        "--method",
        choices=["qlm", "newton"],
        help="default: qlm for the Dirichlet condition, newton for Robin",
    )
    if with_J:
        p.add_argument("--J", type=int, default=3, help="resolution level (2^(J+1) unknowns)")
    p.add_argument(
        "--iters",
        type=int,
        help="qlm: last linearization index r (default 3); newton: max steps (default 50)",
    )
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument(
        "--guess",
        type=float,
        help="constant initial guess (default: 0 for qlm, 1 for newton)",
    )
    p.add_argument("--guess-space", choices=["coefficients", "values"])
    p.add_argument("--robin-closure", choices=["augmented", "endpoint"], default="augmented")
    p.add_argument("--damping", type=int, default=30)
    p.add_argument("--guard", choices=[g.value for g in PowerGuard], default="error")
    p.add_argument("--points", type=_points, help="comma-separated evaluation points")
    p.add_argument("--format", dest="fmt", choices=["table", "csv"], default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="haarbvp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one problem at one level")
    _add_common(p)
    p.add_argument("--residual", action="store_true", help="report sup |R| over the points")
    p.add_argument("--compare", action="store_true", help="compare with the published column")
    p.add_argument("--atol", type=float, default=5e-5)

    p = sub.add_parser("convergence", help="J-sweep as CSV")
    _add_common(p, with_J=False)
    p.add_argument("--levels", type=int, nargs="+", default=[3, 5, 7, 8])

    p = sub.add_parser("compare", help="solve and check against the published table")
    _add_common(p)
    p.add_argument("--atol", type=float, default=5e-5)
    return parser


def _config(ns) -> RunConfig:
    cfg = RunConfig(
        method=ns.method,
        example=ns.example,
        sigma=ns.sigma,
        gamma=ns.gamma,
        beta=ns.beta,
        bc=ns.bc,
        J=getattr(ns, "J", 3),
        iters=ns.iters,
        tol=ns.tol,
        guess=ns.guess,
        guess_space=ns.guess_space,
        robin_closure=ns.robin_closure,
        damping=ns.damping,
        guard=ns.guard,
        fmt=ns.fmt,
    )
    if ns.points is not None:
        cfg.points = ns.points
    return cfg


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ns = build_parser().parse_args(argv)
    try:
        cfg = _config(ns)
        if ns.command == "solve":
            return cmd_solve(cfg, ns.residual, ns.compare, ns.atol, out=out)
        if ns.command == "convergence":
            return cmd_convergence(cfg, ns.levels, out=out, err=err)
        return cmd_compare(cfg, ns.atol, out=out)
    # SingularMatrix is a ValueError subclass, so solver errors are matched first
    except SOLVER_ERRORS as exc:
        err.write(f"solver failed: {type(exc).__name__}: {exc}\n")
        return EXIT_SOLVER
    except (ValueError, refdata.MissingCell) as exc:
        err.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
