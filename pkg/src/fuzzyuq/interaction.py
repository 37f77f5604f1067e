"""Fuzzy vectors and their joint alpha-cuts.

Non-interactive components have box-shaped joint cuts (the Cartesian product
of the marginal cuts). Fully interactive components are handled through the
nested polygonal construction: the modal box diagonal, extended level by
level with the diagonals of the left and right residual boxes, which yields
a coordinatewise monotone chain through the modal region.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import FuzzyVariable, Interval, alpha_cut, membership


class Interaction(enum.Enum):
    NON_INTERACTIVE = "non"
    FULLY_INTERACTIVE = "full"


@dataclass(frozen=True)
class Box:
    intervals: tuple[Interval, ...]

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def lower(self) -> np.ndarray:
        return np.array([iv.lo for iv in self.intervals])

    @property
    def upper(self) -> np.ndarray:
        return np.array([iv.hi for iv in self.intervals])

    def contains(self, point, tol: float = 1e-12) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def to_dict(self) -> dict:
        return {"variant": "box", "intervals": [[iv.lo, iv.hi] for iv in self.intervals]}


@dataclass(frozen=True, eq=False)
class Polyline:
    """Piecewise-linear chain with its cumulative arc-length table."""

    vertices: np.ndarray
    cumulative_length: np.ndarray = field(init=False)

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.shape[0] > 1:
            seg = np.linalg.norm(np.diff(v, axis=0), axis=1)
            keep = np.concatenate([[True], seg > 0])
            v = v[keep]
        cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(v, axis=0), axis=1))])
        v.setflags(write=False)
        cum.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "cumulative_length", cum)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def total_length(self) -> float:
        return float(self.cumulative_length[-1])

    def to_dict(self) -> dict:
        return {
            "variant": "polyline",
            "vertices": self.vertices.tolist(),
            "cumulative_length": self.cumulative_length.tolist(),
            "total_length": self.total_length,
        }


JointAlphaCut = Box | Polyline


def joint_cut_from_dict(data: dict) -> JointAlphaCut:
    if data["variant"] == "box":
        return Box(tuple(Interval(float(a), float(b)) for a, b in data["intervals"]))
    if data["variant"] == "polyline":
        return Polyline(np.asarray(data["vertices"], dtype=float))
    raise ValueError(f"unknown joint cut variant {data['variant']!r}")


@dataclass(frozen=True)
class FuzzyVector:
    components: tuple[FuzzyVariable, ...]
    mode: Interaction = Interaction.NON_INTERACTIVE

    def __init__(self, components: Sequence[FuzzyVariable], mode: Interaction | str = Interaction.NON_INTERACTIVE):
        comps = tuple(components)
        if not comps:
            raise ValueError("a fuzzy vector needs at least one component")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "mode", Interaction(mode))

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def levels(self) -> np.ndarray:
        """Union of the components' stored levels."""
        return np.unique(np.concatenate([c.levels for c in self.components]))

    @property
    def modal_point(self) -> np.ndarray:
        """Midpoint of the modal box (the modal point itself for peaked components)."""
        return np.array([0.5 * (c.core.lo + c.core.hi) for c in self.components])

    def with_mode(self, mode: Interaction | str) -> "FuzzyVector":
        return FuzzyVector(self.components, mode)

    def joint_alpha_cut(self, alpha: float) -> JointAlphaCut:
        return joint_alpha_cut(self, alpha)

    def joint_membership(self, points) -> np.ndarray:
        """Membership of points of the zero-cut, as the minimum of the marginal degrees.

        For fully interactive vectors this is only meaningful for points on the
        zero-cut chain (elsewhere the joint membership is zero).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        degs = np.column_stack([membership(c, pts[:, i]) for i, c in enumerate(self.components)])
        return degs.min(axis=1)


def _marginal_box(fvec: FuzzyVector, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    cuts = [alpha_cut(c, alpha) for c in fvec.components]
    return np.array([c.lo for c in cuts]), np.array([c.hi for c in cuts])


def comonotone_chain(fvec: FuzzyVector, alpha: float) -> Polyline:
    """Polygonal joint cut of fully interactive components at ``alpha``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    levels = [a for a in fvec.levels if a > alpha]
    levels = [alpha] + levels
    lows, highs = [], []
    for a in levels:
        lo, hi = _marginal_box(fvec, a)
        lows.append(lo)
        highs.append(hi)
    # lower endpoints from alpha up to the top, then upper endpoints back down
    verts = np.vstack(lows + highs[::-1])
    return Polyline(verts)


def joint_alpha_cut(fvec: FuzzyVector, alpha: float) -> JointAlphaCut:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    if fvec.mode is Interaction.NON_INTERACTIVE:
        return Box(tuple(alpha_cut(c, alpha) for c in fvec.components))
    return comonotone_chain(fvec, alpha)


def arc_length_point(cut: Polyline, s: float) -> np.ndarray:
    total = cut.total_length
    if s < 0.0 or s > total * (1 + 1e-12) + 1e-300:
        raise ValueError(f"arc length {s} outside [0, {total}]")
    return _points_at(cut, np.array([min(s, total)]))[0]


def _points_at(cut: Polyline, s: np.ndarray) -> np.ndarray:
    cum = cut.cumulative_length
    v = cut.vertices
    if v.shape[0] == 1:
        return np.repeat(v, s.size, axis=0)
    seg = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, cum.size - 2)
    span = cum[seg + 1] - cum[seg]
    # a segment shorter than the rounding of the running length has span 0
    t = np.divide(s - cum[seg], span, out=np.zeros_like(s, dtype=float), where=span > 0)
    pts = v[seg] + t[:, None] * (v[seg + 1] - v[seg])
    # exact vertices where the parameter lands on a knot
    on_knot = np.isin(s, cum)
    if on_knot.any():
        pts[on_knot] = v[np.searchsorted(cum, s[on_knot])]
    return pts


def discretize(cut: JointAlphaCut, resolution: int) -> np.ndarray:
    """Finite point set on a joint cut.

    Box: tensor grid with ``resolution`` points per non-degenerate dimension,
    corners included. Polyline: ``resolution`` points uniform in arc length,
    with every vertex snapped onto its nearest grid slot. A zero-length chain
    yields its single point.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if isinstance(cut, Box):
        axes = [np.unique(np.linspace(iv.lo, iv.hi, resolution)) for iv in cut.intervals]
        for ax, iv in zip(axes, cut.intervals):
            ax[0], ax[-1] = iv.lo, iv.hi
        return np.array(list(itertools.product(*axes)), dtype=float)

    total = cut.total_length
    if total == 0.0:
        return cut.vertices[:1].copy()
    cum = cut.cumulative_length
    s = np.linspace(0.0, total, resolution)
    s[-1] = total
    taken = {0, resolution - 1}
    for c in cum[1:-1]:
        order = np.argsort(np.abs(s - c), kind="stable")
        for k in order:
            if int(k) not in taken:
                s[k] = c
                taken.add(int(k))
                break
    s = np.sort(s)
    return _points_at(cut, s)


def candidate_points(fvec: FuzzyVector, alpha: float, resolution: int, chain_resolution: int | None = None) -> np.ndarray:
    """Search points used by the optimizers on the joint cut at ``alpha``.

    For non-interactive vectors the box grid is augmented with the
    discretized comonotone chain, which lies inside the box; this keeps the
    discrete search set of the box a superset of the fully interactive one.
    """
    chain_resolution = chain_resolution or resolution
    chain = discretize(comonotone_chain(fvec, alpha), chain_resolution)
    if fvec.mode is Interaction.FULLY_INTERACTIVE:
        return chain
    box = discretize(joint_alpha_cut(fvec, alpha), resolution)
    return np.unique(np.vstack([box, chain]), axis=0)
