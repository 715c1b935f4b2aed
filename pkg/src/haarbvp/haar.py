"""Haar basis on [0, 1], its closed-form repeated integrals and the
operational matrices evaluated at the collocation points.

Matrices follow the wavelet-major layout ``H[i, c] = h_{i+1}(x_c)``: rows are
wavelets, columns are collocation points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial

import numpy as np

MAX_LEVEL = 10


@dataclass(frozen=True)
class ResolutionConfig:
    """Resolution level ``J`` and the sizes derived from it."""

    J: int

    def __post_init__(self):
        if isinstance(self.J, bool) or int(self.J) != self.J:
            raise ValueError(f"resolution level must be an integer, got {self.J!r}")
        if self.J < 0:
            raise ValueError(f"resolution level must be >= 0, got {self.J}")
        if self.J > MAX_LEVEL:
            raise ValueError(f"resolution level J={self.J} exceeds ceiling {MAX_LEVEL}")
        object.__setattr__(self, "J", int(self.J))

    @property
    def M(self) -> int:
        return 2**self.J

    @property
    def n(self) -> int:
        return 2 * self.M

    @property
    def dx(self) -> float:
        return 1.0 / self.n


@dataclass(frozen=True)
class WaveletIndex:
    """Level/translation decomposition of wavelet number ``i``.

    For the scaling function (``i == 1``) ``j`` and ``k`` are ``None`` and the
    breakpoints are ``(0, 1, 1)``, which makes the generic integral formula
    collapse to ``x**v / v!``.
    """

    i: int
    j: int | None
    k: int | None
    alpha1: float
    alpha2: float
    alpha3: float

    @property
    def is_scaling(self) -> bool:
        return self.i == 1

    @property
    def m(self) -> int | None:
        return None if self.j is None else 2**self.j


def wavelet_index(i: int, config: ResolutionConfig) -> WaveletIndex:
    if not 1 <= i <= config.n:
        raise IndexError(f"wavelet number {i} outside 1..{config.n}")
    if i == 1:
        return WaveletIndex(1, None, None, 0.0, 1.0, 1.0)
    j = (i - 1).bit_length() - 1
    m = 2**j
    k = i - m - 1
    mu = config.M / m
    dx = config.dx
    return WaveletIndex(
        i,
        j,
        k,
        2 * k * mu * dx,
        (2 * k + 1) * mu * dx,
        2 * (k + 1) * mu * dx,
    )


def haar_fn(idx: WaveletIndex, x):
    """Evaluate ``h_i`` at ``x`` (scalar or array).

    Support is half-open: ``+1`` on ``[a1, a2)``, ``-1`` on ``[a2, a3)``.
    The scaling function is 1 on the closed interval ``[0, 1]``.
    """
    x = np.asarray(x, dtype=float)
    if idx.is_scaling:
        out = ((x >= 0.0) & (x <= 1.0)).astype(float)
    else:
        out = np.where(
            (x >= idx.alpha1) & (x < idx.alpha2),
            1.0,
            np.where((x >= idx.alpha2) & (x < idx.alpha3), -1.0, 0.0),
        )
    return out[()] if out.ndim == 0 else out


def haar_integral(v: int, idx: WaveletIndex, x):
    """``v``-fold integral of ``h_i`` from 0 to ``x``."""
    if v < 1:
        raise ValueError(f"integration order must be >= 1, got {v}")
    x = np.asarray(x, dtype=float)
    scale = 1.0 / factorial(v)
    if idx.is_scaling:
        out = scale * x**v
    else:
        # ramp(a) = (x - a)^v for x >= a else 0; sum of three ramps gives all four branches
        out = scale * (
            _ramp(x, idx.alpha1, v) - 2.0 * _ramp(x, idx.alpha2, v) + _ramp(x, idx.alpha3, v)
        )
    return out[()] if out.ndim == 0 else out


def _ramp(x, a, v):
    return np.where(x >= a, np.maximum(x - a, 0.0) ** v, 0.0)


def grid_and_collocation(config: ResolutionConfig) -> tuple[np.ndarray, np.ndarray]:
    c = np.arange(config.n + 1)
    grid = c * config.dx
    colloc = 0.5 * (grid[:-1] + grid[1:])
    return grid, colloc


def basis_matrices(config: ResolutionConfig, points) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(H, P1, P2)`` of shape ``(n, len(points))`` at arbitrary points."""
    t = np.atleast_1d(np.asarray(points, dtype=float))
    n = config.n
    H = np.empty((n, t.size))
    P1 = np.empty((n, t.size))
    P2 = np.empty((n, t.size))
    for i in range(1, n + 1):
        idx = wavelet_index(i, config)
        H[i - 1] = haar_fn(idx, t)
        P1[i - 1] = haar_integral(1, idx, t)
        P2[i - 1] = haar_integral(2, idx, t)
    return H, P1, P2


@dataclass(frozen=True)
class HaarSystem:
    config: ResolutionConfig
    grid: np.ndarray
    colloc: np.ndarray
    H: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    p1_at_1: np.ndarray
    p2_at_1: np.ndarray
    h_at_1: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def dirichlet_P2(self) -> np.ndarray:
        """``P2[i, c] - x_c * P2_i(1)``: the profile with ``y(0)`` and ``y(1)`` eliminated."""
        return self.P2 - np.outer(self.p2_at_1, self.colloc)

    def levels(self) -> np.ndarray:
        """Level ``j`` of each wavelet row; the scaling row is reported as level 0."""
        return np.array(
            [0] + [(i - 1).bit_length() - 1 for i in range(2, self.n + 1)], dtype=int
        )


def build_system(config: ResolutionConfig | int) -> HaarSystem:
    if not isinstance(config, ResolutionConfig):
        config = ResolutionConfig(config)
    grid, colloc = grid_and_collocation(config)
    H, P1, P2 = basis_matrices(config, colloc)
    h1, p1, p2 = basis_matrices(config, [1.0])
    for arr in (H, P1, P2, h1, p1, p2):
        arr.setflags(write=False)
    return HaarSystem(
        config=config,
        grid=grid,
        colloc=colloc,
        H=H,
        P1=P1,
        P2=P2,
        p1_at_1=p1[:, 0],
        p2_at_1=p2[:, 0],
        h_at_1=h1[:, 0],
    )
