"""Fiber-map ingestion and fuzzy moment construction.

Binary fiber maps are coarsened into element moduli by harmonic averaging,
sample moments of the compliance are computed per station, and each moment's
histogram is turned into a decagonal membership function.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from .core import DEFAULT_LEVELS, FuzzyVariable, Interval, from_alpha_cuts, make_crisp, make_polygonal
from .interaction import FuzzyVector, Interaction
from .translation import MomentSet

A_FIBER = 24.0  # GPa
A_MATRIX = 3.6  # GPa

# decagonal vertices of the mean, std, skewness and excess kurtosis of the
# composite compliance (levels 0, .25, .5, .75, 1)
REFERENCE_MOMENT_VERTICES = (
    (0.1222, 0.1249, 0.1277, 0.1304, 0.1330, 0.1360, 0.1388, 0.1445, 0.1502, 0.1559),
    (0.0200, 0.0217, 0.0236, 0.0236, 0.0285, 0.0345, 0.0360, 0.0360, 0.0408, 0.0430),
    (0.0, 0.25, 0.50, 0.75, 1.00, 1.20, 1.25, 1.50, 1.75, 2.00),
    (-1.00, -0.55, -0.20, 0.0, 0.50, 1.00, 1.50, 2.00, 3.30, 4.50),
)


class DegenerateSpread(ValueError):
    pass


class PackingFailure(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class PixelMap:
    """Binary fiber map, 1 = fiber, 0 = matrix; rows are the vertical axis."""

    occupancy: np.ndarray

    def __post_init__(self):
        occ = np.asarray(self.occupancy, dtype=np.uint8)
        if occ.ndim != 2 or occ.size == 0:
            raise ValueError("occupancy must be a non-empty 2-D grid")
        if np.any(occ > 1):
            raise ValueError("occupancy must be binary")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @property
    def volume_fraction(self) -> float:
        return float(self.occupancy.mean())

    def __eq__(self, other):
        return isinstance(other, PixelMap) and np.array_equal(self.occupancy, other.occupancy)


@dataclass(frozen=True, eq=False)
class SampleEnsemble:
    """Element moduli per (bar, station) with station midpoints in micrometres."""

    values: np.ndarray
    stations: np.ndarray

    @property
    def bars(self) -> int:
        return self.values.shape[0]

    @property
    def compliance(self) -> np.ndarray:
        return 1.0 / self.values

    def rows(self):
        for i in range(self.values.shape[0]):
            for j in range(self.values.shape[1]):
                a = float(self.values[i, j])
                yield i + 1, j + 1, float(self.stations[j]), a, 1.0 / a


def harmonic_coarsen(
    pixmap: PixelMap, element_px: int = 10, a_fiber: float = A_FIBER, a_matrix: float = A_MATRIX
) -> SampleEnsemble:
    h, w = pixmap.height, pixmap.width
    if h % element_px or w % element_px:
        raise ValueError(f"map of {w}x{h} px is not divisible into {element_px}-px elements")
    blocks = pixmap.occupancy.reshape(h // element_px, element_px, w // element_px, element_px)
    frac = blocks.sum(axis=(1, 3), dtype=np.int64) / element_px**2
    # 1 / (f / a_f + (1 - f) / a_m), written so that pure elements come out exact
    values = a_fiber * a_matrix / (frac * a_matrix + (1.0 - frac) * a_fiber)
    values = np.clip(values, min(a_fiber, a_matrix), max(a_fiber, a_matrix))
    stations = (np.arange(w // element_px) + 0.5) * element_px
    return SampleEnsemble(values, stations)


def sample_moments(samples) -> MomentSet:
    """Mean, std (n-1 divisor), skewness and excess kurtosis (n-divisor central moments)."""
    x = np.asarray(samples, dtype=float)
    if x.size < 4:
        raise ValueError("at least 4 samples are needed")
    mean = x.mean()
    d = x - mean
    m2 = np.mean(d**2)
    if m2 == 0.0 or np.all(x == x[0]):
        raise DegenerateSpread("samples have zero spread; skewness and kurtosis are undefined")
    m3 = np.mean(d**3)
    m4 = np.mean(d**4)
    return MomentSet(float(mean), float(x.std(ddof=1)), float(m3 / m2**1.5), float(m4 / m2**2 - 3.0))


def station_moments(ensemble: SampleEnsemble) -> np.ndarray:
    """Compliance moments at every station, shape (stations, 4)."""
    b = ensemble.compliance
    return np.array([sample_moments(b[:, j]).as_tuple() for j in range(b.shape[1])])


@dataclass(frozen=True, eq=False)
class FittedMembership:
    variable: FuzzyVariable
    edges: np.ndarray
    counts: np.ndarray
    degrees: np.ndarray
    residuals: tuple[float, float]


def _line_fit(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    if x.size < 2:
        return y.astype(float), 0.0
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    fitted = np.polyval(coef, x)
    return fitted, float(res[0]) if res.size else 0.0


def _first_crossing(x: np.ndarray, mu: np.ndarray, alpha: float) -> float:
    # mu nondecreasing along x
    i = int(np.argmax(mu >= alpha))
    if i == 0 or mu[i] == mu[i - 1] or mu[i] == alpha:
        return float(x[i])
    t = (alpha - mu[i - 1]) / (mu[i] - mu[i - 1])
    return float(x[i - 1] + t * (x[i] - x[i - 1]))


def fit_membership_detailed(
    values, bins: int = 20, levels: Sequence[float] = DEFAULT_LEVELS
) -> FittedMembership:
    v = np.asarray(values, dtype=float)
    lv = np.asarray(levels, dtype=float)
    if np.all(v == v[0]):
        fv = make_crisp(float(v[0]), lv)
        return FittedMembership(fv, np.array([v[0], v[0]]), np.array([v.size]), np.array([1.0]), (0.0, 0.0))
    if np.unique(v).size < 3:
        raise ValueError("at least 3 distinct values are needed to fit a membership function")

    counts, edges = np.histogram(v, bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    k = int(np.argmax(counts))
    # centers are affine in the bin index, so fitting against the index gives the same
    # heights while staying well conditioned for any data scale
    idx = np.arange(counts.size, dtype=float)
    rise, res_r = _line_fit(idx[: k + 1], counts[: k + 1].astype(float))
    fall, res_f = _line_fit(idx[k:], counts[k:].astype(float))
    fitted = np.concatenate([rise, fall[1:]])
    fitted[k] = max(rise[-1], fall[0])
    deg = np.clip(fitted / fitted.max(), 0.0, 1.0)
    # quasi-concavity: nondecreasing up to the peak, nonincreasing after
    if k > 0:
        deg[: k + 1] = optimize.isotonic_regression(deg[: k + 1], increasing=True).x
    if k < deg.size - 1:
        deg[k:] = optimize.isotonic_regression(deg[k:], increasing=False).x
    deg = np.clip(deg, 0.0, 1.0)
    deg[k] = 1.0

    x_left = np.concatenate([[edges[0]], centers[: k + 1]])
    mu_left = np.concatenate([[0.0], deg[: k + 1]])
    x_right = np.concatenate([[edges[-1]], centers[k:][::-1]])
    mu_right = np.concatenate([[0.0], deg[k:][::-1]])
    lo = [_first_crossing(x_left, mu_left, a) for a in lv]
    hi = [_first_crossing(-x_right, mu_right, a) * -1.0 for a in lv]
    # the peak bin center belongs to every cut; guards against rounding in the interpolation
    lo = np.minimum(lo, centers[k])
    hi = np.maximum(hi, centers[k])
    fv = from_alpha_cuts(lv, [Interval(float(a), float(b)) for a, b in zip(lo, hi)])
    return FittedMembership(fv, edges, counts, deg, (res_r, res_f))


def fit_membership(values, bins: int = 20, levels: Sequence[float] = DEFAULT_LEVELS) -> FuzzyVariable:
    """Piecewise-linear membership function fitted to the histogram of ``values``.

    Least-squares lines are fitted to the bin heights on each side of the
    peak bin, normalized to a unit peak, clipped to [0, 1] and made
    quasi-concave by isotonic regression. The cut at each level is read off
    the resulting curve, whose zero level spans the histogram range.
    """
    return fit_membership_detailed(values, bins, levels).variable


def reference_moment_variables(levels: Sequence[float] = DEFAULT_LEVELS) -> list[FuzzyVariable]:
    return [make_polygonal(v, levels) for v in REFERENCE_MOMENT_VERTICES]


def build_moment_vector(fitted: Sequence[FuzzyVariable]) -> FuzzyVector:
    if len(fitted) != 4:
        raise ValueError("four moment variables are required")
    return FuzzyVector(fitted, Interaction.FULLY_INTERACTIVE)


def _disc_template(radius: float) -> np.ndarray:
    r = int(np.ceil(radius))
    dy, dx = np.mgrid[-r : r + 1, -r : r + 1]
    inside = dx**2 + dy**2 < radius**2
    return np.column_stack([dy[inside], dx[inside]])


def synthesize_fiber_map(
    seed: int = 0,
    width_px: int = 1700,
    height_px: int = 500,
    volume_fraction: float = 0.63,
    fiber_radius_px: float = 3.5,
    sweeps: int = 5,
    max_retries: int = 3,
) -> PixelMap:
    """Random non-overlapping fiber cross-sections at a target volume fraction.

    Discs start on randomly vacated sites of a staggered lattice and are then
    shaken by single-pixel Monte Carlo moves that are accepted only when the
    disc stays inside the map and off every other disc. Since discs never
    overlap, the occupancy is exactly n * (pixels per disc) / (map area).
    """
    if not 0.0 <= volume_fraction < 1.0:
        raise ValueError("volume fraction must lie in [0, 1)")
    occ = np.zeros((height_px, width_px), dtype=np.uint8)
    if volume_fraction == 0.0:
        return PixelMap(occ)
    tpl = _disc_template(fiber_radius_px)
    area = tpl.shape[0]
    n = int(round(volume_fraction * width_px * height_px / area))
    r = int(np.ceil(fiber_radius_px))

    dx = int(np.ceil(2 * fiber_radius_px))
    offset = dx // 2
    dy = int(np.ceil(np.sqrt(max((2 * fiber_radius_px) ** 2 - offset**2, 0.0))))
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        rows = np.arange(r, height_px - r, dy)
        sites = []
        for i, cy in enumerate(rows):
            start = r + (offset if i % 2 else 0)
            sites.extend((cy, cx) for cx in range(start, width_px - r, dx))
        sites = np.array(sites)
        if sites.shape[0] >= n:
            break
        dy -= 1  # denser rows; overlap is rejected below, so this only helps feasibility
        if dy < 1:
            break
    if sites.shape[0] < n:
        raise PackingFailure(f"cannot place {n} fibers of radius {fiber_radius_px} px in the map")
    centers = sites[rng.choice(sites.shape[0], size=n, replace=False)]

    owner = np.full((height_px, width_px), -1, dtype=np.int32)
    for idx, c in enumerate(centers):
        px = tpl + c
        if np.any(owner[px[:, 0], px[:, 1]] >= 0):
            raise PackingFailure("initial lattice placement overlaps; fiber radius too large for the lattice")
        owner[px[:, 0], px[:, 1]] = idx

    moves = np.array([[0, 1], [0, -1], [1, 0], [-1, 0]])
    for _ in range(sweeps):
        order = rng.permutation(n)
        steps = moves[rng.integers(0, 4, size=n)]
        for idx, step in zip(order, steps):
            new = centers[idx] + step
            if new[0] < r or new[0] >= height_px - r or new[1] < r or new[1] >= width_px - r:
                continue
            px = tpl + new
            own = owner[px[:, 0], px[:, 1]]
            if np.any((own >= 0) & (own != idx)):
                continue
            old = tpl + centers[idx]
            owner[old[:, 0], old[:, 1]] = -1
            owner[px[:, 0], px[:, 1]] = idx
            centers[idx] = new

    occ = (owner >= 0).astype(np.uint8)
    achieved = occ.mean()
    if abs(achieved - volume_fraction) > 0.01:
        raise PackingFailure(f"achieved volume fraction {achieved:.4f}, requested {volume_fraction}")
    return PixelMap(occ)
