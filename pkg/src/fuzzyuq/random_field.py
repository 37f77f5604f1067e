"""Seeded sampling and discrete Karhunen-Loeve expansion of a Gaussian field."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class Sampler:
    """Reproducible standard normal stream backed by the counter-based Philox generator.

    Substreams derived with :meth:`spawn` are independent of each other and
    depend only on the root seed and their index, so workers can draw
    without coordinating.
    """

    def __init__(self, seed: int = 0, _seq: np.random.SeedSequence | None = None):
        self.seed = int(seed)
        self._seq = _seq if _seq is not None else np.random.SeedSequence(self.seed)
        self._gen = np.random.Generator(np.random.Philox(self._seq))

    def standard_normal(self, count) -> np.ndarray:
        if np.any(np.asarray(count) < 0):
            raise ValueError("count must be nonnegative")
        return self._gen.standard_normal(count)

    def uniform(self, size=None) -> np.ndarray:
        return self._gen.random(size)

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, n: int) -> list["Sampler"]:
        return [Sampler(self.seed, seq) for seq in self._seq.spawn(n)]


@dataclass(frozen=True)
class CovarianceSpec:
    exponent: float = 2.0
    correlation_length: float = 20.0

    def __post_init__(self):
        if self.exponent <= 0 or self.correlation_length <= 0:
            raise ValueError("exponent and correlation length must be positive")


def covariance(x1, x2, spec: CovarianceSpec):
    """exp(-|x1 - x2|^p / (2 l^2)), broadcasting over array arguments."""
    d = np.abs(np.asarray(x1, dtype=float) - np.asarray(x2, dtype=float))
    return np.exp(-(d**spec.exponent) / (2.0 * spec.correlation_length**2))


# eigenvalues below this fraction of the largest one are clipped to zero
CLIP_RATIO = 1e-12


@dataclass(frozen=True, eq=False)
class KLExpansion:
    grid: np.ndarray
    spacing: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # column j is phi_j on the grid, orthonormal under weight h
    spec: CovarianceSpec
    trace: float
    raw_eigenvalues: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.grid.size

    def mode_values(self, x, m: int) -> np.ndarray:
        """First ``m`` eigenfunctions at arbitrary points, via the Nystrom extension.

        Returns an array of shape (len(x), m). At grid points this reproduces
        the discrete eigenvectors.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lam = self.eigenvalues[:m]
        if np.any(lam <= 0):
            raise ValueError("cannot extend modes with zero eigenvalue")
        kernel = covariance(x[:, None], self.grid[None, :], self.spec)
        return self.spacing * kernel @ self.eigenvectors[:, :m] / lam

    def field_basis(self, m: int, x=None) -> np.ndarray:
        """Columns sqrt(lambda_j) phi_j, on the grid or at points ``x``."""
        phi = self.eigenvectors[:, :m] if x is None else self.mode_values(x, m)
        return phi * np.sqrt(self.eigenvalues[:m])


def kl_decompose(grid, spec: CovarianceSpec) -> KLExpansion:
    """Nystrom eigendecomposition of the covariance on a uniform midpoint grid.

    Solves the symmetric problem (h C) v = lambda v; the eigenfunctions are
    phi = v / sqrt(h), orthonormal in the discrete inner product h * sum.
    """
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("grid must have at least 2 points")
    steps = np.diff(x)
    h = float(steps.mean())
    if np.any(steps <= 0) or np.max(np.abs(steps - h)) > 1e-9 * max(h, abs(x).max()):
        raise ValueError("grid must be strictly ascending with uniform spacing")
    mat = h * covariance(x[:, None], x[None, :], spec)
    lam, vec = np.linalg.eigh(mat)
    order = np.argsort(lam)[::-1]
    lam, vec = lam[order], vec[:, order]
    raw = lam.copy()
    lam = np.where(lam < CLIP_RATIO * lam[0], 0.0, lam)
    # deterministic sign: largest-magnitude entry of each vector positive
    pivot = vec[np.argmax(np.abs(vec), axis=0), np.arange(vec.shape[1])]
    vec = vec * np.where(pivot < 0, -1.0, 1.0)
    phi = vec / np.sqrt(h)
    for arr in (x, lam, phi, raw):
        arr.setflags(write=False)
    return KLExpansion(x, h, lam, phi, spec, float(np.trace(mat)), raw)


def kl_truncation_order(kl: KLExpansion, fraction: float) -> int:
    """Smallest m whose leading eigenvalues retain ``fraction`` of the total variance."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    lam = kl.eigenvalues
    total = lam.sum()
    if fraction == 1.0:
        return int(np.count_nonzero(lam > 0))
    partial = np.cumsum(lam)
    return int(np.searchsorted(partial, fraction * total - 1e-15 * total) + 1)


def evaluate_field(kl: KLExpansion, m: int, y) -> np.ndarray:
    """Truncated expansion sum_j sqrt(lambda_j) phi_j y_j on the grid.

    ``y`` may be a single coefficient vector of length m or a 2-D array with
    one row per realization.
    """
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != m:
        raise ValueError(f"expected {m} coefficients, got {y.shape[-1]}")
    if m > kl.size:
        raise ValueError(f"only {kl.size} modes available")
    return y @ kl.field_basis(m).T


def pointwise_variance(kl: KLExpansion, m: int) -> np.ndarray:
    return (kl.eigenvectors[:, :m] ** 2 * kl.eigenvalues[:m]).sum(axis=1)


def midpoint_grid(length: float, cells: int) -> np.ndarray:
    h = length / cells
    return (np.arange(cells) + 0.5) * h
