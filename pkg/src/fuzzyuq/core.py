"""Fuzzy variables stored as alpha-cut tables.

A fuzzy variable is kept as a list of ascending membership levels (starting
at 0 and ending at 1) together with one closed interval per level. Cuts at
intermediate levels are obtained by linear interpolation of the endpoints,
and the membership function is reconstructed from the same table.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)

# absorbs rounding when ingesting computed cuts
NESTING_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, other: "Interval | float", tol: float = 0.0) -> bool:
        if isinstance(other, Interval):
            return self.lo - tol <= other.lo and other.hi <= self.hi + tol
        return self.lo - tol <= other <= self.hi + tol

    def __iter__(self):
        yield self.lo
        yield self.hi


@dataclass(frozen=True)
class MembershipSample:
    abscissa: float
    degree: float

    def __post_init__(self):
        if not 0.0 <= self.degree <= 1.0:
            raise ValueError(f"membership degree {self.degree} outside [0, 1]")


class FuzzyVariable:
    """Piecewise-linear fuzzy variable defined by its alpha-cut table.

    The constructor only checks shapes; use :func:`validate` to audit the
    nesting, boundedness and normalization conditions, or build instances
    through :func:`from_alpha_cuts`, which rejects invalid tables.
    """

    __slots__ = ("_levels", "_lo", "_hi")

    def __init__(self, levels: Sequence[float], lo: Sequence[float], hi: Sequence[float]):
        levels = np.array(levels, dtype=float)
        lo = np.array(lo, dtype=float)
        hi = np.array(hi, dtype=float)
        if levels.ndim != 1 or lo.shape != levels.shape or hi.shape != levels.shape:
            raise ValueError("levels, lo and hi must be 1-D arrays of equal length")
        if levels.size < 2:
            raise ValueError("at least two levels (0 and 1) are required")
        for arr in (levels, lo, hi):
            arr.setflags(write=False)
        object.__setattr__(self, "_levels", levels)
        object.__setattr__(self, "_lo", lo)
        object.__setattr__(self, "_hi", hi)

    def __setattr__(self, name, value):
        raise AttributeError("FuzzyVariable is immutable")

    @property
    def levels(self) -> np.ndarray:
        return self._levels

    @property
    def lower(self) -> np.ndarray:
        """Left endpoints of the stored cuts."""
        return self._lo

    @property
    def upper(self) -> np.ndarray:
        """Right endpoints of the stored cuts."""
        return self._hi

    @property
    def cuts(self) -> list[Interval]:
        return [Interval(float(a), float(b)) for a, b in zip(self._lo, self._hi)]

    @property
    def support(self) -> Interval:
        return alpha_cut(self, 0.0)

    @property
    def core(self) -> Interval:
        return alpha_cut(self, 1.0)

    @property
    def is_crisp(self) -> bool:
        return bool(np.all(self._lo == self._lo[0]) and np.all(self._hi == self._lo[0]))

    def alpha_cut(self, alpha: float) -> Interval:
        return alpha_cut(self, alpha)

    def membership(self, z):
        return membership(self, z)

    def to_dict(self) -> dict:
        return {
            "levels": self._levels.tolist(),
            "cuts": [[float(a), float(b)] for a, b in zip(self._lo, self._hi)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FuzzyVariable":
        cuts = data["cuts"]
        return from_alpha_cuts(data["levels"], [Interval(float(a), float(b)) for a, b in cuts])

    def __eq__(self, other):
        if not isinstance(other, FuzzyVariable):
            return NotImplemented
        return (
            np.array_equal(self._levels, other._levels)
            and np.array_equal(self._lo, other._lo)
            and np.array_equal(self._hi, other._hi)
        )

    def __hash__(self):
        return hash((self._levels.tobytes(), self._lo.tobytes(), self._hi.tobytes()))

    def __repr__(self):
        pairs = ", ".join(f"{a:g}:[{l:.6g}, {h:.6g}]" for a, l, h in zip(self._levels, self._lo, self._hi))
        return f"FuzzyVariable({pairs})"


def _check_levels(levels: np.ndarray) -> None:
    if levels[0] != 0.0 or levels[-1] != 1.0:
        raise ValueError("levels must start at 0 and end at 1")
    if np.any(np.diff(levels) <= 0):
        raise ValueError("levels must be strictly ascending")


def make_triangular(l: float, m: float, r: float, levels: Sequence[float] = DEFAULT_LEVELS) -> FuzzyVariable:
    """Triangular fuzzy number <l, m, r>.

    Degenerate triangles (l == m or m == r) are accepted; l == m == r gives a
    crisp variable.
    """
    if l > m or m > r:
        raise ValueError(f"triangular number requires l <= m <= r, got <{l}, {m}, {r}>")
    lv = np.asarray(levels, dtype=float)
    _check_levels(lv)
    lo = l + lv * (m - l)
    hi = r - lv * (r - m)
    lo[-1] = hi[-1] = m
    return FuzzyVariable(lv, lo, hi)


def make_crisp(value: float, levels: Sequence[float] = (0.0, 1.0)) -> FuzzyVariable:
    return make_triangular(value, value, value, levels)


def make_polygonal(vertices: Sequence[float], levels: Sequence[float] = DEFAULT_LEVELS) -> FuzzyVariable:
    """Polygonal fuzzy variable from its 2n vertices, read from the outside in.

    With the default five levels this is the decagonal shape: vertex j and
    vertex 2n+1-j (1-indexed) bound the cut at the j-th level.
    """
    v = np.asarray(vertices, dtype=float)
    lv = np.asarray(levels, dtype=float)
    _check_levels(lv)
    n = lv.size
    if v.size != 2 * n:
        raise ValueError(f"{v.size} vertices given, expected {2 * n} for {n} levels")
    if np.any(np.diff(v) < 0):
        bad = int(np.argmax(np.diff(v) < 0))
        raise ValueError(f"vertices must be ascending; vertex {bad + 1} > vertex {bad + 2}")
    return FuzzyVariable(lv, v[:n], v[::-1][:n])


def from_alpha_cuts(
    levels: Sequence[float], intervals: Iterable[Interval | Sequence[float]], tol: float = NESTING_TOL
) -> FuzzyVariable:
    """Assemble a fuzzy variable from computed alpha-cuts.

    Nesting violations smaller than ``tol`` are treated as rounding and
    snapped; larger ones raise ``ValueError`` naming the offending levels.
    """
    lv = np.asarray(levels, dtype=float)
    cuts = [iv if isinstance(iv, Interval) else Interval(float(iv[0]), float(iv[1])) for iv in intervals]
    if lv.size == 0:
        raise ValueError("no levels given")
    if len(cuts) != lv.size:
        raise ValueError("one interval per level is required")
    _check_levels(lv)
    lo = np.array([c.lo for c in cuts])
    hi = np.array([c.hi for c in cuts])
    for k in range(1, lv.size):
        if lo[k] < lo[k - 1] - tol or hi[k] > hi[k - 1] + tol:
            raise ValueError(
                f"cuts are not nested: cut at alpha={lv[k]:g} [{lo[k]:.12g}, {hi[k]:.12g}] is not "
                f"inside cut at alpha={lv[k - 1]:g} [{lo[k - 1]:.12g}, {hi[k - 1]:.12g}]"
            )
        lo[k] = max(lo[k], lo[k - 1])
        hi[k] = min(hi[k], hi[k - 1])
    return FuzzyVariable(lv, lo, hi)


def alpha_cut(fv: FuzzyVariable, alpha: float) -> Interval:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha} outside [0, 1]")
    lo = float(np.interp(alpha, fv.levels, fv.lower))
    hi = float(np.interp(alpha, fv.levels, fv.upper))
    return Interval(lo, hi)


def _sup_level(levels: np.ndarray, ends: np.ndarray, z: float, rising: bool) -> float:
    # largest alpha with ends(alpha) <= z (rising) or ends(alpha) >= z (falling)
    ok = ends <= z if rising else ends >= z
    idx = np.nonzero(ok)[0]
    if idx.size == 0:
        return 0.0
    i = int(idx[-1])
    if i == levels.size - 1:
        return 1.0
    a, b = ends[i], ends[i + 1]
    frac = (z - a) / (b - a)
    return float(levels[i] + frac * (levels[i + 1] - levels[i]))


def membership(fv: FuzzyVariable, z):
    """Membership degree of ``z`` (scalar or array), by inverting the endpoint curves."""
    zs = np.asarray(z, dtype=float)
    out = np.empty(zs.shape)
    lv, lo, hi = fv.levels, fv.lower, fv.upper
    for idx, val in np.ndenumerate(zs):
        if val < lo[0] or val > hi[0]:
            out[idx] = 0.0
        else:
            out[idx] = min(_sup_level(lv, lo, val, True), _sup_level(lv, hi, val, False))
    return float(out) if out.ndim == 0 else out


def geq_scalar(fv: FuzzyVariable, a: float) -> bool:
    """True when the whole support lies at or above ``a``."""
    return bool(a <= fv.lower[0])


def leq_scalar(fv: FuzzyVariable, a: float) -> bool:
    return bool(fv.upper[0] <= a)


def validate(fv: FuzzyVariable, tol: float = NESTING_TOL) -> list[str]:
    """Audit the table; returns human-readable violations (empty when valid)."""
    problems = []
    lv, lo, hi = fv.levels, fv.lower, fv.upper
    if lv[0] != 0.0 or lv[-1] != 1.0:
        problems.append(f"levels must span [0, 1], got {lv[0]:g}..{lv[-1]:g}")
    if np.any(np.diff(lv) <= 0):
        problems.append("levels are not strictly ascending")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        problems.append("unbounded cut: non-finite endpoint")
    if lo[-1] > hi[-1]:
        problems.append(f"not normalized: cut at alpha={lv[-1]:g} is empty [{lo[-1]:g}, {hi[-1]:g}]")
    for k in range(lv.size - 1):
        if lo[k] > hi[k]:
            problems.append(f"empty cut at alpha={lv[k]:g}: [{lo[k]:g}, {hi[k]:g}]")
    for k in range(1, lv.size):
        if lo[k] < lo[k - 1] - tol or hi[k] > hi[k - 1] + tol:
            problems.append(f"nesting violated between alpha={lv[k - 1]:g} and alpha={lv[k]:g}")
    return problems


def membership_samples(fv: FuzzyVariable, count: int = 201, pad: float = 0.05) -> list[MembershipSample]:
    """Sample the membership function on a uniform grid slightly wider than the support."""
    s = fv.support
    span = s.width if s.width > 0 else max(abs(s.lo), 1.0)
    grid = np.linspace(s.lo - pad * span, s.hi + pad * span, count)
    grid = np.unique(np.concatenate([grid, fv.lower, fv.upper]))
    return [MembershipSample(float(x), float(m)) for x, m in zip(grid, membership(fv, grid))]
