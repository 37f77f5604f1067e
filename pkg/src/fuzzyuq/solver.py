"""One-dimensional fuzzy-stochastic elliptic problem.

    d/dx (a(x, y, z) du/dx) = 0 on [0, L],  u(0) = 0,  a(L) u'(L) = 1

has the solution u(x) = int_0^x 1/a. It is evaluated by the midpoint rule on
N_h uniform cells; a partial last cell contributes its fractional width times
the compliance 1/a at the cell midpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import Interval
from .extension import DEFAULT_BOX_RESOLUTION, DEFAULT_MF, DEFAULT_MS, draw_set, fuzzy_expectation, level_extrema
from .interaction import FuzzyVector
from .random_field import KLExpansion, Sampler
from .translation import MomentSet, TranslationTable, fit_beta_from_moments, translate


class NonPositiveCoefficient(ArithmeticError):
    def __init__(self, x):
        self.x = x
        super().__init__(f"coefficient is not strictly positive at x={x}")


@dataclass(frozen=True)
class SolveConfig:
    length: float = 2.0
    cells: int = 200

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("domain length must be positive")
        if self.cells < 1:
            raise ValueError("at least one quadrature cell is required")

    @property
    def h(self) -> float:
        return self.length / self.cells

    @property
    def nodes(self) -> np.ndarray:
        return (np.arange(self.cells) + 0.5) * self.h


def _cell_weights(xs: np.ndarray, config: SolveConfig) -> np.ndarray:
    """Quadrature weights (len(xs), n_used) so that u(xs) = weights @ b(nodes)."""
    if np.any(xs < 0) or np.any(xs > config.length * (1 + 1e-12)):
        raise ValueError(f"x must lie in [0, {config.length}]")
    h = config.h
    pos = np.minimum(xs / h, config.cells)
    near = np.round(pos)
    pos = np.where(np.abs(pos - near) < 1e-9, near, pos)
    full = np.floor(pos).astype(int)
    frac = pos - full
    n_used = int(min(config.cells, max(1, np.max(full) + 1)))
    w = (np.arange(n_used)[None, :] < full[:, None]) * h
    partial = full < n_used
    w[np.nonzero(partial)[0], full[partial]] += frac[partial] * h
    return w


class CoefficientModel:
    """Base for coefficient fields; subclasses provide the compliance 1/a."""

    ydim = 1

    def compliance(self, x: np.ndarray, ys: np.ndarray, z) -> np.ndarray:
        """1/a at points ``x`` for every draw: shape (n_draws, len(x))."""
        raise NotImplementedError

    def coefficient(self, x, y, z) -> float:
        ys = np.atleast_1d(np.asarray(y, dtype=float))[None, ...]
        return float(1.0 / self.compliance(np.atleast_1d(float(x)), ys, z)[0, 0])

    def displacement(self, xs, ys, z, config: SolveConfig) -> np.ndarray:
        """u(xs) for every draw, shape (n_draws, len(xs))."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        w = _cell_weights(xs, config)
        nodes = config.nodes[: w.shape[1]]
        b = self.compliance(nodes, ys, z)
        bad = ~(np.isfinite(b) & (b > 0))
        if bad.any():
            raise NonPositiveCoefficient(float(nodes[np.nonzero(bad.any(axis=0))[0][0]]))
        return b @ w.T


@dataclass(frozen=True)
class Example1Coefficient(CoefficientModel):
    """a = (2 + sin(2 pi x / L)) exp(z1 + y z2): lognormal in y with fuzzy parameters."""

    length: float = 2.0

    def compliance(self, x, ys, z):
        ys = np.asarray(ys, dtype=float).reshape(-1)
        spatial = 1.0 / (2.0 + np.sin(2 * np.pi * np.asarray(x) / self.length))
        return np.exp(-z[0] - ys * z[1])[:, None] * spatial[None, :]

    def displacement(self, xs, ys, z, config: SolveConfig):
        # separable: same midpoint sum, factored as random part times spatial part
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        w = _cell_weights(xs, config)
        spatial = 1.0 / (2.0 + np.sin(2 * np.pi * config.nodes[: w.shape[1]] / self.length))
        ys = np.asarray(ys, dtype=float).reshape(-1)
        return np.exp(-z[0] - ys * z[1])[:, None] * (w @ spatial)[None, :]


def example1_mean_oracle(length: float, z) -> float:
    """Closed form E[u(L)] = (L / sqrt 3) exp(-z1 + z2^2 / 2)."""
    return length / math.sqrt(3.0) * math.exp(-z[0] + 0.5 * z[1] ** 2)


@dataclass(frozen=True, eq=False)
class Example2Coefficient(CoefficientModel):
    """a = 1/b with b the beta translation of a truncated KL Gaussian field.

    The fuzzy parameter z is the moment vector (mean, std, skewness, excess
    kurtosis) of b. Solver coordinates are multiplied by ``x_scale`` to reach
    the units of the KL grid (metres to micrometres by default).
    """

    kl: KLExpansion
    m: int
    x_scale: float = 1e6
    tabulate: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def ydim(self) -> int:
        return self.m

    def _basis(self, x: np.ndarray) -> np.ndarray:
        key = x.tobytes()
        if key not in self._cache:
            xg = x * self.x_scale
            on_grid = np.allclose(xg, self.kl.grid[: xg.size], rtol=0, atol=1e-9 * self.kl.spacing)
            if on_grid:
                basis = self.kl.field_basis(self.m)[: xg.size]
            else:
                basis = self.kl.field_basis(self.m, xg)
            self._cache[key] = basis
        return self._cache[key]

    def gaussian(self, x, ys) -> np.ndarray:
        ys = np.atleast_2d(np.asarray(ys, dtype=float))
        return ys @ self._basis(np.asarray(x, dtype=float)).T

    def compliance(self, x, ys, z):
        params = _fit(tuple(float(v) for v in z))
        if not self.tabulate:
            return translate(self.gaussian(x, ys), params)
        table = _table(params)
        return table.evaluate(self._prepared(np.asarray(x, dtype=float), ys, table))

    def _prepared(self, x, ys, table):
        # the Hermite basis depends only on the draws, so it is kept for the draw set last seen
        key = (x.tobytes(), table.g_max, table.nodes)
        prep = self._cache.get("prep")
        if prep is None or prep[0] is not ys or prep[1] != key:
            prep = (ys, key, table.prepare(self.gaussian(x, ys)))
            self._cache["prep"] = prep
        return prep[2]


@lru_cache(maxsize=4096)
def _fit(z: tuple[float, ...]):
    return fit_beta_from_moments(MomentSet(*z))


@lru_cache(maxsize=64)
def _table(params) -> TranslationTable:
    return TranslationTable(params)


def solve_displacement(coef: CoefficientModel, x: float, y, z, config: SolveConfig) -> float:
    ys = np.asarray(y, dtype=float)[None, ...]
    return float(coef.displacement(np.array([x]), ys, np.asarray(z, dtype=float), config)[0, 0])


class _Displacement:
    def __init__(self, coef, xs, ys, config):
        self.coef, self.xs, self.ys, self.config = coef, xs, ys, config

    def __call__(self, *args):
        # (z) for a fixed draw, or (ys, z) inside a Monte Carlo loop
        if len(args) == 1:
            return self.coef.displacement(self.xs, self.ys, args[0], self.config)[0]
        ys, z = args
        return self.coef.displacement(self.xs, ys, z, self.config)


def solution_alpha_cut(
    coef: CoefficientModel,
    x: float,
    y,
    fvec: FuzzyVector,
    alpha: float,
    resolution: int = DEFAULT_MF,
    config: SolveConfig = SolveConfig(),
) -> Interval:
    """[min, max] of u(x, y, z) over the discretized joint cut at ``alpha``, draw fixed."""
    ys = np.asarray(y, dtype=float)[None, ...]
    lo, hi, _, _ = level_extrema(
        _Displacement(coef, np.array([x]), ys, config), fvec, [alpha], DEFAULT_BOX_RESOLUTION, resolution
    )
    return Interval(float(lo[0, 0]), float(hi[0, 0]))


def expected_displacement(
    coef: CoefficientModel,
    x,
    fvec: FuzzyVector,
    sampler: Sampler | np.ndarray,
    n_samples: int | None = DEFAULT_MS,
    levels: Sequence[float] | None = None,
    n_points: int = DEFAULT_MF,
    config: SolveConfig = SolveConfig(),
    resolution: int = DEFAULT_BOX_RESOLUTION,
    workers: int = 1,
):
    """Fuzzy E[u(x, y, z~)]; a list of fuzzy variables when ``x`` is an array."""
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = draw_set(sampler, n_samples, coef.ydim)
    out = fuzzy_expectation(
        _Displacement(coef, xs, None, config), fvec, ys, None, levels, n_points, coef.ydim, resolution, workers
    )
    return out[0] if np.ndim(x) == 0 else out
