"""Propagation of fuzzy inputs through crisp and stochastic maps.

Output alpha-cuts are obtained as the extrema of the map over the joint
alpha-cut of the inputs. The joint cut is discretized (see
:func:`fuzzyuq.interaction.candidate_points`) and the extrema are taken over
the evaluated points; points evaluated at a higher level also belong to every
lower-level cut, so each level's extrema include them. This keeps the
computed cuts nested exactly.

Stochastic maps are handled by Monte Carlo with one shared set of draws for
every fuzzy point (common random numbers). Maps receive the whole draw array
at once and return one value (or one row of values) per draw.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

from .core import FuzzyVariable, Interval, MembershipSample, from_alpha_cuts
from .interaction import Box, FuzzyVector, candidate_points, joint_alpha_cut
from .random_field import Sampler

DEFAULT_MF = 181
DEFAULT_MS = 10_000
DEFAULT_BOX_RESOLUTION = 21


class EvaluationError(RuntimeError):
    """A user map failed; ``point`` holds the fuzzy-parameter value it was called with."""

    def __init__(self, point, cause: BaseException):
        self.point = np.asarray(point)
        super().__init__(f"evaluation failed at z={self.point.tolist()}: {cause!r}")


def _levels(levels, fvec: FuzzyVector) -> np.ndarray:
    lv = fvec.levels if levels is None else np.asarray(levels, dtype=float)
    if lv.size == 0:
        raise ValueError("level list is empty")
    if np.any(np.diff(lv) <= 0):
        raise ValueError("levels must be strictly ascending")
    return lv


class _PointMap:
    """Picklable adapter evaluating a per-point function over a block of points."""

    def __init__(self, func):
        self.func = func

    def __call__(self, points: np.ndarray) -> np.ndarray:
        rows = []
        for z in points:
            try:
                rows.append(np.asarray(self.func(z), dtype=float))
            except EvaluationError:
                raise
            except Exception as exc:  # noqa: BLE001 - re-raised with the offending point
                raise EvaluationError(z, exc) from exc
        return np.stack(rows)


def _evaluate(func: _PointMap, points: np.ndarray, workers: int) -> np.ndarray:
    if workers <= 1 or len(points) < 2 * workers:
        return func(points)
    chunks = np.array_split(points, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(func, chunks))
    # concatenation in chunk order keeps the reduction independent of scheduling
    return np.concatenate(parts, axis=0)


def level_extrema(
    func,
    fvec: FuzzyVector,
    levels,
    resolution: int,
    chain_resolution: int | None = None,
    workers: int = 1,
) -> tuple[np.ndarray, np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """Minimum and maximum of ``func`` over each level's discretized joint cut.

    ``func`` maps one point z to a scalar or a 1-D array; extrema are taken
    elementwise. Returns (lo, hi, points, values) with lo/hi of shape
    (n_levels, ...) and the evaluated points/values per level.
    """
    lv = _levels(levels, fvec)
    wrapped = func if isinstance(func, _PointMap) else _PointMap(func)
    pts = [candidate_points(fvec, float(a), resolution, chain_resolution) for a in lv]
    vals = [_evaluate(wrapped, p, workers) for p in pts]
    lo = np.stack([v.min(axis=0) for v in vals])
    hi = np.stack([v.max(axis=0) for v in vals])
    for k in range(lv.size - 2, -1, -1):
        lo[k] = np.minimum(lo[k], lo[k + 1])
        hi[k] = np.maximum(hi[k], hi[k + 1])
    return lo, hi, pts, vals


def _refine(g, cut, z0: np.ndarray, sign: float, best: float) -> float:
    """Local polish of an extremum from the best grid point; never worse than ``best``."""
    if isinstance(cut, Box):
        bounds = [(iv.lo, iv.hi) for iv in cut.intervals]
        res = optimize.minimize(lambda z: sign * float(g(z)), z0, method="L-BFGS-B", bounds=bounds)
        cand = sign * res.fun
    else:
        from .interaction import _points_at

        if cut.total_length == 0:
            return best
        res = optimize.minimize_scalar(
            lambda s: sign * float(g(_points_at(cut, np.array([s]))[0])),
            bounds=(0.0, cut.total_length),
            method="bounded",
        )
        cand = sign * res.fun
    return min(best, cand) if sign > 0 else max(best, cand)


def extend(
    g: Callable[[np.ndarray], float],
    fvec: FuzzyVector,
    levels: Sequence[float] | None = None,
    resolution: int = 41,
    refine: bool = False,
    workers: int = 1,
) -> FuzzyVariable:
    """Fuzzy image of ``fvec`` under the crisp continuous map ``g``.

    ``resolution`` is the grid count per box dimension and the point count on
    interactive chains. With ``refine`` each extremum is polished by a bounded
    local search started from the best grid point.
    """
    lv = _levels(levels, fvec)
    lo, hi, pts, vals = level_extrema(g, fvec, lv, resolution, workers=workers)
    if refine:
        for k, a in enumerate(lv):
            cut = joint_alpha_cut(fvec, float(a))
            v = vals[k]
            lo[k] = _refine(g, cut, pts[k][int(np.argmin(v))], 1.0, lo[k])
            hi[k] = _refine(g, cut, pts[k][int(np.argmax(v))], -1.0, hi[k])
        for k in range(lv.size - 2, -1, -1):
            lo[k] = min(lo[k], lo[k + 1])
            hi[k] = max(hi[k], hi[k + 1])
    return from_alpha_cuts(lv, [Interval(float(a), float(b)) for a, b in zip(lo, hi)])


def oracle_grid(fvec: FuzzyVector, resolution: int = 401) -> tuple[np.ndarray, np.ndarray]:
    """Dense points over the zero-cut with their joint membership degrees.

    Memberships come from the marginal membership functions (minimum rule),
    not from the alpha-cut machinery used by :func:`extend`.
    """
    from .interaction import Interaction, comonotone_chain, discretize

    if fvec.mode is Interaction.NON_INTERACTIVE:
        axes = []
        for c in fvec.components:
            lo, hi = c.support
            axes.append(np.unique(np.concatenate([np.linspace(lo, hi, resolution), c.lower, c.upper])))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
    else:
        pts = discretize(comonotone_chain(fvec, 0.0), resolution)
    return pts, fvec.joint_membership(pts)


def extend_oracle(g, z_grid, z_membership, v_edges) -> list[MembershipSample]:
    """Brute-force extension principle on a grid.

    Each output bin gets the supremum of the joint membership over the grid
    points whose image falls in it (0 when none does). Returned samples sit at
    the bin centers.
    """
    z_grid = np.atleast_2d(np.asarray(z_grid, dtype=float))
    mu = np.asarray(z_membership, dtype=float)
    edges = np.asarray(v_edges, dtype=float)
    values = np.array([g(z) for z in z_grid], dtype=float)
    idx = np.searchsorted(edges, values, side="right") - 1
    # the closing edge belongs to the last bin
    idx[values == edges[-1]] = edges.size - 2
    nbins = edges.size - 1
    degree = np.zeros(nbins)
    ok = (idx >= 0) & (idx < nbins)
    np.maximum.at(degree, idx[ok], mu[ok])
    centers = 0.5 * (edges[:-1] + edges[1:])
    return [MembershipSample(float(c), float(d)) for c, d in zip(centers, degree)]


def oracle_cut(samples: Sequence[MembershipSample], v_edges, alpha: float, tol: float = 1e-9) -> Interval:
    """Hull of the output bins whose degree reaches ``alpha``."""
    edges = np.asarray(v_edges, dtype=float)
    deg = np.array([s.degree for s in samples])
    hit = np.nonzero(deg >= alpha - tol)[0]
    if hit.size == 0:
        raise ValueError(f"no output bin reaches degree {alpha}")
    return Interval(float(edges[hit[0]]), float(edges[hit[-1] + 1]))


def draw_set(sampler: Sampler | np.ndarray, count: int | None = None, dim: int = 1) -> np.ndarray:
    """Shared Monte Carlo draws: an explicit array, or ``count`` x ``dim`` normals from ``sampler``."""
    if isinstance(sampler, np.ndarray):
        if sampler.shape[0] < 1:
            raise ValueError("draw set is empty")
        return sampler
    if count is None or count < 1:
        raise ValueError("number of Monte Carlo samples must be positive")
    ys = sampler.standard_normal((count, dim))
    return ys[:, 0] if dim == 1 else ys


class _Mean:
    def __init__(self, q, ys):
        self.q, self.ys = q, ys

    def __call__(self, z):
        return np.asarray(self.q(self.ys, z), dtype=float).mean(axis=0)


def _to_variables(lv, lo, hi):
    if lo.ndim == 1:
        return from_alpha_cuts(lv, [Interval(float(a), float(b)) for a, b in zip(lo, hi)])
    return [
        from_alpha_cuts(lv, [Interval(float(a), float(b)) for a, b in zip(lo[:, j], hi[:, j])])
        for j in range(lo.shape[1])
    ]


def fuzzy_expectation(
    q,
    fvec: FuzzyVector,
    sampler: Sampler | np.ndarray,
    n_samples: int | None = DEFAULT_MS,
    levels: Sequence[float] | None = None,
    n_points: int = DEFAULT_MF,
    ydim: int = 1,
    resolution: int = DEFAULT_BOX_RESOLUTION,
    workers: int = 1,
):
    """Fuzzy expectation E[q(y, z~)] by Monte Carlo with common random numbers.

    ``q(ys, z)`` receives all draws at once and returns one value per draw,
    or one row of values per draw for vector quantities; in the latter case a
    list of fuzzy variables (one per output column) is returned.
    ``n_points`` is the number of points on interactive chains, ``resolution``
    the grid count per box dimension.
    """
    ys = draw_set(sampler, n_samples, ydim)
    lv = _levels(levels, fvec)
    lo, hi, _, _ = level_extrema(_Mean(q, ys), fvec, lv, resolution, n_points, workers)
    return _to_variables(lv, lo, hi)


@dataclass(frozen=True, eq=False)
class PBoxFamily:
    """Left (upper) and right (lower) CDF envelopes per alpha-level."""

    grid: np.ndarray
    levels: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def pbox(self, alpha: float) -> tuple[np.ndarray, np.ndarray]:
        k = int(np.nonzero(np.isclose(self.levels, alpha))[0][0])
        return self.left[k], self.right[k]

    def check(self) -> list[str]:
        """Envelope order, monotonicity in the grid variable, and band nesting across levels."""
        problems = []
        if np.any(self.right > self.left):
            problems.append("right envelope exceeds left envelope")
        if np.any(self.left < 0) or np.any(self.left > 1) or np.any(self.right < 0) or np.any(self.right > 1):
            problems.append("envelope outside [0, 1]")
        if np.any(np.diff(self.left, axis=1) < 0) or np.any(np.diff(self.right, axis=1) < 0):
            problems.append("envelope not nondecreasing")
        if np.any(np.diff(self.left, axis=0) > 0) or np.any(np.diff(self.right, axis=0) < 0):
            problems.append("bands not nested across levels")
        return problems

    def contains(self, other: "PBoxFamily") -> bool:
        return bool(np.all(self.left >= other.left) and np.all(self.right <= other.right))

    def rows(self):
        for k, a in enumerate(self.levels):
            for j, u in enumerate(self.grid):
                yield float(a), float(u), float(self.left[k, j]), float(self.right[k, j])


def fuzzy_cdf_type1(
    cdf_family: Callable[[np.ndarray, np.ndarray], np.ndarray],
    fuzzy_theta: FuzzyVector,
    y0_grid,
    levels: Sequence[float] | None = None,
    n_points: int = DEFAULT_MF,
    resolution: int = DEFAULT_BOX_RESOLUTION,
) -> PBoxFamily:
    """Envelopes of a CDF family whose parameters are fuzzy.

    ``cdf_family(y0_grid, theta)`` returns the CDF values on the whole grid.
    """
    grid = np.asarray(y0_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("evaluation grid is empty")
    lv = _levels(levels, fuzzy_theta)
    lo, hi, _, _ = level_extrema(lambda th: cdf_family(grid, th), fuzzy_theta, lv, resolution, n_points)
    return PBoxFamily(grid, lv, hi, lo)


class _EmpiricalCDF:
    def __init__(self, q, ys, grid):
        self.q, self.ys, self.grid = q, ys, grid

    def __call__(self, z):
        u = np.sort(np.asarray(self.q(self.ys, z), dtype=float))
        return np.searchsorted(u, self.grid, side="right") / u.size


def fuzzy_cdf_type2(
    q,
    fvec: FuzzyVector,
    sampler: Sampler | np.ndarray,
    n_samples: int | None,
    u0_grid,
    levels: Sequence[float] | None = None,
    n_points: int = DEFAULT_MF,
    ydim: int = 1,
    resolution: int = DEFAULT_BOX_RESOLUTION,
    workers: int = 1,
) -> PBoxFamily:
    """Fuzzy CDF of the fuzzy-stochastic output q(y, z~).

    For each fuzzy point the empirical CDF E[1{q <= u0}] is formed on the
    whole grid from the same draws; the envelopes are its extrema per level.
    """
    grid = np.asarray(u0_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("evaluation grid is empty")
    ys = draw_set(sampler, n_samples, ydim)
    lv = _levels(levels, fvec)
    lo, hi, _, _ = level_extrema(_EmpiricalCDF(q, ys, grid), fvec, lv, resolution, n_points, workers)
    return PBoxFamily(grid, lv, hi, lo)


class _Indicator:
    def __init__(self, g):
        self.g = g

    def __call__(self, ys, z):
        return (np.asarray(self.g(ys, z)) <= 0).astype(float)


def failure_probability(
    g,
    fvec: FuzzyVector,
    sampler: Sampler | np.ndarray,
    n_samples: int | None = DEFAULT_MS,
    levels: Sequence[float] | None = None,
    n_points: int = DEFAULT_MF,
    ydim: int = 1,
    resolution: int = DEFAULT_BOX_RESOLUTION,
    workers: int = 1,
) -> FuzzyVariable:
    """Fuzzy probability that the limit state ``g(y, z~)`` is nonpositive."""
    return fuzzy_expectation(_Indicator(g), fvec, sampler, n_samples, levels, n_points, ydim, resolution, workers)
