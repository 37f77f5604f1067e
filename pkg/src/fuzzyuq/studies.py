"""End-to-end reproductions of the two model problems.

Example 1: lognormal coefficient with triangular fuzzy mean and standard
deviation; quantities Q1 = E[u(L)], Q2(x) = E[u(x)] and the fuzzy CDF Q3 of
u(L). Example 2: fiber-composite compliance as a fuzzy-stationary beta
translation field; quantities Q4(x) = E[u(x)], the fuzzy CDF Q5 of u(L/4) and
the fuzzy failure probability Q6 = P(u(L/4) >= u_cr).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, fields

import numpy as np

from .core import DEFAULT_LEVELS, FuzzyVariable, Interval, from_alpha_cuts, make_triangular
from .data import build_moment_vector, fit_membership, harmonic_coarsen, reference_moment_variables, station_moments
from .extension import PBoxFamily, draw_set, fuzzy_cdf_type2, level_extrema
from .interaction import FuzzyVector, Interaction
from .random_field import CovarianceSpec, Sampler, kl_decompose, kl_truncation_order, midpoint_grid
from .solver import Example1Coefficient, Example2Coefficient, SolveConfig, expected_displacement


@dataclass
class Example1Config:
    length: float = 2.0
    cells: int = 200
    n_samples: int = 10_000
    n_points: int = 181
    box_resolution: int = 21
    levels: tuple[float, ...] = DEFAULT_LEVELS
    seed: int = 2024
    z1: tuple[float, float, float] = (1.00, 1.06, 1.20)
    z2: tuple[float, float, float] = (0.10, 0.13, 0.20)
    q2_x: tuple[float, ...] = tuple(np.round(np.linspace(1.8, 2.0, 21), 12))
    q3_u0: tuple[float, ...] = tuple(np.round(np.linspace(0.2, 0.6, 81), 12))
    workers: int = 1


@dataclass
class Example1Result:
    mode: Interaction
    q1: FuzzyVariable
    q2: list[FuzzyVariable]
    q3: PBoxFamily


def example1_vector(cfg: Example1Config, mode: Interaction | str) -> FuzzyVector:
    comps = [make_triangular(*cfg.z1, levels=cfg.levels), make_triangular(*cfg.z2, levels=cfg.levels)]
    return FuzzyVector(comps, mode)


def example1_draws(cfg: Example1Config) -> np.ndarray:
    return draw_set(Sampler(cfg.seed), cfg.n_samples, 1)


class _EndDisplacement:
    def __init__(self, coef, x, solve):
        self.coef, self.x, self.solve = coef, x, solve

    def __call__(self, ys, z):
        return self.coef.displacement([self.x], ys, z, self.solve)[:, 0]


def run_example1(cfg: Example1Config, modes=(Interaction.NON_INTERACTIVE, Interaction.FULLY_INTERACTIVE)):
    coef = Example1Coefficient(cfg.length)
    solve = SolveConfig(cfg.length, cfg.cells)
    ys = example1_draws(cfg)
    xs = np.concatenate([[cfg.length], np.asarray(cfg.q2_x)])
    results = {}
    for mode in modes:
        mode = Interaction(mode)
        fvec = example1_vector(cfg, mode)
        means = expected_displacement(
            coef, xs, fvec, ys, None, cfg.levels, cfg.n_points, solve, cfg.box_resolution, cfg.workers
        )
        q3 = fuzzy_cdf_type2(
            _EndDisplacement(coef, cfg.length, solve),
            fvec,
            ys,
            None,
            cfg.q3_u0,
            cfg.levels,
            cfg.n_points,
            resolution=cfg.box_resolution,
            workers=cfg.workers,
        )
        results[mode] = Example1Result(mode, means[0], list(means[1:]), q3)
    return results


@dataclass
class Example2Config:
    length: float = 1.7e-3  # m
    cells: int = 170
    x_scale: float = 1e6  # m -> micrometres for the covariance
    exponent: float = 2.0
    correlation_length: float = 20.0  # micrometres
    kl_terms: int | None = 27
    kl_fraction: float = 0.9
    n_samples: int = 10_000
    n_points: int = 181
    levels: tuple[float, ...] = DEFAULT_LEVELS
    seed: int = 2024
    u_cr: float = 6.9e-5
    q4_x: tuple[float, ...] = tuple(np.round(np.linspace(0.0, 1.0e-3, 21), 15))
    q5_u0: tuple[float, ...] = tuple(np.round(np.linspace(3.0e-5, 9.0e-5, 61), 15))
    bins: int = 20
    tabulate: bool = True
    workers: int = 1
    moments: list = field(default=None, repr=False)  # four FuzzyVariables; reference fixtures when None


@dataclass
class Example2Result:
    q4: list[FuzzyVariable]
    q5: PBoxFamily
    q6: FuzzyVariable
    kl_terms: int
    retained_variance: float
    timings: dict


def moments_from_map(pixmap, bins: int = 20, levels=DEFAULT_LEVELS) -> list[FuzzyVariable]:
    mom = station_moments(harmonic_coarsen(pixmap))
    return [fit_membership(mom[:, j], bins, levels) for j in range(4)]


class _Example2Kernel:
    """One pass over the draws per fuzzy point: Q4 means, Q5 empirical CDF and the Q6 indicator mean."""

    def __init__(self, coef, solve, ys, cfg: Example2Config):
        self.coef, self.solve, self.ys = coef, solve, ys
        self.xs = np.concatenate([np.asarray(cfg.q4_x), [cfg.length / 4]])
        self.u0 = np.asarray(cfg.q5_u0)
        self.u_cr = cfg.u_cr

    def __call__(self, z):
        u = self.coef.displacement(self.xs, self.ys, z, self.solve)
        quarter = u[:, -1]
        q4 = u[:, :-1].mean(axis=0)
        q5 = np.searchsorted(np.sort(quarter), self.u0, side="right") / quarter.size
        q6 = np.mean(self.u_cr - quarter <= 0)
        return np.concatenate([q4, q5, [q6]])


def example2_setup(cfg: Example2Config):
    solve = SolveConfig(cfg.length, cfg.cells)
    grid = midpoint_grid(cfg.length, cfg.cells) * cfg.x_scale
    kl = kl_decompose(grid, CovarianceSpec(cfg.exponent, cfg.correlation_length))
    m = cfg.kl_terms if cfg.kl_terms else kl_truncation_order(kl, cfg.kl_fraction)
    coef = Example2Coefficient(kl, m, cfg.x_scale, cfg.tabulate)
    # the reference decagons are defined at the five standard levels; other levels interpolate
    moments = cfg.moments if cfg.moments is not None else reference_moment_variables(DEFAULT_LEVELS)
    return solve, kl, m, coef, build_moment_vector(moments)


def run_example2(cfg: Example2Config) -> Example2Result:
    t0 = time.perf_counter()
    solve, kl, m, coef, fvec = example2_setup(cfg)
    ys = draw_set(Sampler(cfg.seed), cfg.n_samples, m)
    t1 = time.perf_counter()
    kernel = _Example2Kernel(coef, solve, ys, cfg)
    lv = np.asarray(cfg.levels, dtype=float)
    lo, hi, _, _ = level_extrema(kernel, fvec, lv, 2, cfg.n_points, cfg.workers)
    t2 = time.perf_counter()

    nx, nu = len(cfg.q4_x), len(cfg.q5_u0)

    def cuts(col):
        return from_alpha_cuts(lv, [Interval(float(a), float(b)) for a, b in zip(lo[:, col], hi[:, col])])

    q4 = [cuts(j) for j in range(nx)]
    q5 = PBoxFamily(np.asarray(cfg.q5_u0), lv, hi[:, nx : nx + nu], lo[:, nx : nx + nu])
    q6 = cuts(nx + nu)
    retained = float(kl.eigenvalues[:m].sum() / kl.eigenvalues.sum())
    timings = {"setup_s": t1 - t0, "propagation_s": t2 - t1}
    return Example2Result(q4, q5, q6, m, retained, timings)


def config_dict(cfg) -> dict:
    out = {}
    for f in fields(cfg):
        if f.name == "moments":
            continue
        v = getattr(cfg, f.name)
        out[f.name] = [float(x) for x in v] if isinstance(v, (tuple, list)) else v
    return out
