"""Four-parameter beta marginals and the Gaussian-to-beta translation map."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, optimize, special

from .random_field import KLExpansion, evaluate_field


@dataclass(frozen=True)
class MomentSet:
    mean: float
    std: float
    skewness: float
    excess_kurtosis: float

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError(f"standard deviation must be positive, got {self.std}")

    @classmethod
    def from_point(cls, z) -> "MomentSet":
        z = np.asarray(z, dtype=float)
        return cls(float(z[0]), float(z[1]), float(z[2]), float(z[3]))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mean, self.std, self.skewness, self.excess_kurtosis)


@dataclass(frozen=True)
class BetaParams:
    shape_p: float
    shape_q: float
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.shape_p > 0 and self.shape_q > 0):
            raise ValueError("beta shapes must be positive")
        if not self.lo < self.hi:
            raise ValueError("beta support must satisfy lo < hi")

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        return {"shape_p": self.shape_p, "shape_q": self.shape_q, "lo": self.lo, "hi": self.hi}


class Infeasible(ValueError):
    """No beta law matches the requested moments."""

    def __init__(self, moments: MomentSet, suggestion: MomentSet | None):
        self.moments = moments
        self.suggestion = suggestion
        msg = (
            f"no beta law with skewness {moments.skewness:g} and excess kurtosis "
            f"{moments.excess_kurtosis:g}"
        )
        if suggestion is not None:
            msg += f"; nearest feasible excess kurtosis is {suggestion.excess_kurtosis:g}"
        super().__init__(msg)


def beta_moments(params: BetaParams) -> MomentSet:
    """Analytic mean, std, skewness and excess kurtosis of a four-parameter beta law."""
    p, q, span = params.shape_p, params.shape_q, params.span
    nu = p + q
    mean = params.lo + span * p / nu
    var = span**2 * p * q / (nu**2 * (nu + 1))
    skew = 2 * (q - p) * math.sqrt(nu + 1) / ((nu + 2) * math.sqrt(p * q))
    kurt = 6 * ((p - q) ** 2 * (nu + 1) - p * q * (nu + 2)) / (p * q * (nu + 2) * (nu + 3))
    return MomentSet(mean, math.sqrt(var), skew, kurt)


def feasible_kurtosis_range(skewness: float) -> tuple[float, float]:
    """Open interval of excess kurtosis attainable by beta laws at this skewness."""
    g2 = skewness**2
    return g2 - 2.0, 1.5 * g2


def _moments_close(a: MomentSet, b: MomentSet, rtol: float) -> bool:
    return all(abs(x - y) <= rtol * max(1.0, abs(y)) for x, y in zip(a.as_tuple(), b.as_tuple()))


def fit_beta_from_moments(moments: MomentSet, rtol: float = 1e-8) -> BetaParams:
    """Match a four-parameter beta law to four moments.

    Shapes follow from (skewness, excess kurtosis) through the Pearson type I
    relations; the support is then recovered from mean and std. The result is
    checked against the analytic moments before returning.
    """
    g, k = moments.skewness, moments.excess_kurtosis
    kmin, kmax = feasible_kurtosis_range(g)
    if not (kmin < k < kmax):
        margin = 1e-6 * max(1.0, kmax - kmin)
        nearest = min(max(k, kmin + margin), kmax - margin)
        suggestion = MomentSet(moments.mean, moments.std, g, nearest) if kmax - kmin > 2 * margin else None
        raise Infeasible(moments, suggestion)

    nu = 3.0 * (k - g * g + 2.0) / (1.5 * g * g - k)
    # written so that a vanishing skewness gives root -> 0 without dividing by g
    root = abs(g) * (nu + 2.0) / math.sqrt(g * g * (nu + 2.0) ** 2 + 16.0 * (nu + 1.0))
    big, small = nu / 2.0 * (1.0 + root), nu / 2.0 * (1.0 - root)
    # negative skew puts the mass to the right: p > q
    p, q = (big, small) if g < 0 else (small, big)
    span = moments.std / 2.0 * math.sqrt((2.0 + nu) ** 2 * g * g + 16.0 * (1.0 + nu))
    lo = moments.mean - p / nu * span
    params = BetaParams(p, q, lo, lo + span)

    if not _moments_close(beta_moments(params), moments, rtol):
        params = _polish(params, moments)
        if not _moments_close(beta_moments(params), moments, rtol):
            raise Infeasible(moments, None)
    return params


def _polish(params: BetaParams, target: MomentSet) -> BetaParams:
    def residual(logs):
        p, q = np.exp(logs)
        m = beta_moments(BetaParams(p, q, 0.0, 1.0))
        return [m.skewness - target.skewness, m.excess_kurtosis - target.excess_kurtosis]

    sol = optimize.fsolve(residual, np.log([params.shape_p, params.shape_q]), xtol=1e-14)
    p, q = np.exp(sol)
    unit = beta_moments(BetaParams(p, q, 0.0, 1.0))
    span = target.std / unit.std
    lo = target.mean - span * unit.mean
    return BetaParams(float(p), float(q), lo, lo + span)


def beta_cdf(params: BetaParams, x):
    t = np.clip((np.asarray(x, dtype=float) - params.lo) / params.span, 0.0, 1.0)
    out = special.betainc(params.shape_p, params.shape_q, t)
    return float(out) if np.ndim(out) == 0 else out


def beta_pdf(params: BetaParams, x):
    t = (np.asarray(x, dtype=float) - params.lo) / params.span
    inside = (t > 0) & (t < 1)
    tc = np.where(inside, t, 0.5)
    logpdf = (
        (params.shape_p - 1) * np.log(tc)
        + (params.shape_q - 1) * np.log1p(-tc)
        - special.betaln(params.shape_p, params.shape_q)
        - math.log(params.span)
    )
    return np.where(inside, np.exp(logpdf), 0.0)


def beta_inverse_cdf(params: BetaParams, u: float, xtol: float = 1e-12) -> float:
    """Quantile by bracketed root finding on [lo, hi]."""
    if not 0.0 < u < 1.0:
        raise ValueError(f"probability {u} outside (0, 1)")
    return optimize.brentq(
        lambda x: beta_cdf(params, x) - u, params.lo, params.hi, xtol=xtol * params.span, rtol=4 * np.finfo(float).eps
    )


def beta_quantile(params: BetaParams, u):
    """Vectorized quantile through the inverse regularized incomplete beta function."""
    u = np.asarray(u, dtype=float)
    return params.lo + params.span * special.betaincinv(params.shape_p, params.shape_q, u)


def standard_normal_cdf(x):
    out = special.ndtr(np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def translate(g, params: BetaParams):
    """Gaussian value(s) mapped onto the beta marginal: Psi^{-1}(Phi(g)).

    The upper tail uses the complementary inverse so large ``g`` keeps its
    resolution instead of rounding Phi(g) to 1.
    """
    g = np.asarray(g, dtype=float)
    p, q = params.shape_p, params.shape_q
    upper = g > 0
    t = np.where(
        upper,
        special.betainccinv(p, q, special.ndtr(-g)),
        special.betaincinv(p, q, special.ndtr(g)),
    )
    out = params.lo + params.span * t
    return float(out) if out.ndim == 0 else out


class HermiteNodes:
    """Precomputed cubic Hermite basis for a fixed set of Gaussian values.

    The basis depends only on the query points and the table grid, so one
    instance serves every parameter set evaluated on the same draws.
    """

    def __init__(self, g, g_max: float, nodes: int):
        g = np.asarray(g, dtype=float)
        self.shape = g.shape
        flat = g.reshape(-1)
        step = 2 * g_max / (nodes - 1)
        pos = (flat + g_max) / step
        self.outside = (pos < 0) | (pos > nodes - 1)
        idx = np.clip(np.floor(pos).astype(np.int64), 0, nodes - 2)
        t = np.clip(pos - idx, 0.0, 1.0)
        t2, t3 = t * t, t * t * t
        self.idx = idx
        self.h00 = 2 * t3 - 3 * t2 + 1
        self.h10 = (t3 - 2 * t2 + t) * step
        self.h01 = -2 * t3 + 3 * t2
        self.h11 = (t3 - t2) * step
        self.g_outside = flat[self.outside]
        self.g_max, self.nodes = g_max, nodes


class TranslationTable:
    """Cubic Hermite table of the translation map over a Gaussian range.

    The batched solver evaluates the translation for every draw and every
    fuzzy point; tabulating it once per parameter set in Gaussian space, with
    exact nodal values and slopes phi(g) / psi(x), keeps that affordable.
    Values beyond the tabulated range fall back to :func:`translate`.
    """

    def __init__(self, params: BetaParams, g_max: float = 8.5, nodes: int = 2049):
        self.params = params
        self.g_max, self.nodes = g_max, nodes
        g = np.linspace(-g_max, g_max, nodes)
        x = translate(g, params)
        dens = beta_pdf(params, x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            slope = np.exp(-0.5 * g * g) / math.sqrt(2 * math.pi) / dens
        if not np.all(np.isfinite(slope)):
            # singular density at the table edge; shape-preserving slopes instead
            slope = interpolate.PchipInterpolator(g, x).derivative()(g)
        self.values, self.slopes = x, slope

    def prepare(self, g) -> HermiteNodes:
        return HermiteNodes(g, self.g_max, self.nodes)

    def evaluate(self, prep: HermiteNodes) -> np.ndarray:
        if prep.g_max != self.g_max or prep.nodes != self.nodes:
            raise ValueError("prepared basis does not match this table's grid")
        i = prep.idx
        y, m = self.values, self.slopes
        out = prep.h00 * y[i] + prep.h10 * m[i] + prep.h01 * y[i + 1] + prep.h11 * m[i + 1]
        if prep.g_outside.size:
            out[prep.outside] = translate(prep.g_outside, self.params)
        return out.reshape(prep.shape)

    def __call__(self, g):
        return self.evaluate(self.prepare(g))


def compliance_field(kl: KLExpansion, m: int, y, moments_point: MomentSet) -> np.ndarray:
    params = fit_beta_from_moments(moments_point)
    return translate(evaluate_field(kl, m, y), params)
