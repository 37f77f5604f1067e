import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import special

from fuzzyuq.core import alpha_cut, make_crisp, make_triangular, validate
from fuzzyuq.extension import (
    EvaluationError,
    PBoxFamily,
    extend,
    extend_oracle,
    failure_probability,
    fuzzy_cdf_type1,
    fuzzy_cdf_type2,
    fuzzy_expectation,
    level_extrema,
    oracle_cut,
    oracle_grid,
)
from fuzzyuq.interaction import FuzzyVector
from fuzzyuq.random_field import Sampler

FUNCS = {
    "sum": lambda z: z[0] + z[1],
    "product": lambda z: z[0] * z[1],
    "square_minus": lambda z: z[0] ** 2 - z[1],
}


def tri012():
    return make_triangular(0.0, 1.0, 2.0)


def test_identity_returns_input_cuts(tri_z1):
    out = extend(lambda z: z[0], FuzzyVector([tri_z1]))
    assert out == tri_z1


def test_sum_of_triangles():
    out = extend(FUNCS["sum"], FuzzyVector([tri012(), tri012()]))
    assert alpha_cut(out, 0.0) == alpha_cut(make_triangular(0, 2, 4), 0.0)
    assert (out.core.lo, out.core.hi) == (2.0, 2.0)
    assert_allclose(out.lower, [0, 0.5, 1, 1.5, 2])


def test_fully_interactive_sum_is_narrower():
    a = make_triangular(-1.0, 0.0, 1.0)
    non = extend(FUNCS["sum"], FuzzyVector([a, a]))
    # comonotone pairing of a with itself gives the same cut as 2a
    full = extend(FUNCS["sum"], FuzzyVector([a, a], "full"))
    assert_allclose(full.lower, 2 * a.lower, atol=1e-14)
    diff = extend(lambda z: z[0] - z[1], FuzzyVector([a, a], "full"))
    assert_allclose(diff.lower, 0.0, atol=1e-14)
    assert_allclose(diff.upper, 0.0, atol=1e-14)
    assert np.all(non.lower <= full.lower) and np.all(non.upper >= full.upper)


@pytest.mark.parametrize("name", sorted(FUNCS))
@pytest.mark.parametrize("mode", ["non", "full"])
def test_extend_agrees_with_brute_force(tri_z1, tri_z2, name, mode):
    g = FUNCS[name]
    fvec = FuzzyVector([tri_z1, tri_z2], mode)
    out = extend(g, fvec, resolution=41)
    pts, mu = oracle_grid(fvec, 401)
    vals = np.array([g(p) for p in pts])
    edges = np.linspace(vals.min(), vals.max(), 201)
    width = edges[1] - edges[0]
    samples = extend_oracle(g, pts, mu, edges)
    for a in out.levels:
        ref = oracle_cut(samples, edges, a)
        got = alpha_cut(out, a)
        assert abs(got.lo - ref.lo) <= width and abs(got.hi - ref.hi) <= width


def test_oracle_identity_and_constant(tri_z1):
    fvec = FuzzyVector([tri_z1])
    pts, mu = oracle_grid(fvec, 201)
    edges = np.linspace(0.99, 1.21, 23)
    samples = extend_oracle(lambda z: z[0], pts, mu, edges)
    from fuzzyuq.core import membership

    for s in samples:
        assert s.degree == pytest.approx(membership(tri_z1, s.abscissa), abs=0.25)
    const = extend_oracle(lambda z: 3.0, pts, mu, np.array([2.5, 2.9, 3.1, 3.5]))
    assert [s.degree for s in const] == [0.0, 1.0, 0.0]


def test_refine_never_worse_and_finds_interior_extremum():
    fvec = FuzzyVector([make_triangular(0.0, 0.5, 1.0)])
    g = lambda z: -((z[0] - 0.3137) ** 2)
    coarse = extend(g, fvec, levels=[0, 1], resolution=3)
    fine = extend(g, fvec, levels=[0, 1], resolution=3, refine=True)
    assert fine.upper[0] >= coarse.upper[0]
    assert fine.upper[0] == pytest.approx(0.0, abs=1e-8)
    assert validate(fine) == []


def test_evaluation_error_carries_point(tri_z1):
    def boom(z):
        if z[0] > 1.1:
            raise ZeroDivisionError("bad")
        return z[0]

    with pytest.raises(EvaluationError) as info:
        extend(boom, FuzzyVector([tri_z1]))
    assert info.value.point[0] > 1.1


def test_levels_must_ascend(tri_z1):
    with pytest.raises(ValueError):
        extend(lambda z: z[0], FuzzyVector([tri_z1]), levels=[0, 1, 0.5])


def test_expectation_of_z_equals_extension(tri_z1, tri_z2):
    fvec = FuzzyVector([tri_z1, tri_z2])
    q = lambda ys, z: np.full(ys.shape[0], z[0] * z[1])
    ex = fuzzy_expectation(q, fvec, Sampler(1), 100)
    ref = extend(lambda z: z[0] * z[1], fvec, resolution=21)
    assert_allclose(ex.lower, ref.lower, rtol=1e-14)
    assert_allclose(ex.upper, ref.upper, rtol=1e-14)


def test_expectation_of_y_collapses(tri_z1):
    ys = Sampler(2).standard_normal(10_000)
    ex = fuzzy_expectation(lambda y, z: y, FuzzyVector([tri_z1]), ys)
    assert_allclose(ex.lower, ys.mean(), rtol=0, atol=0)
    assert_allclose(ex.upper, ys.mean(), rtol=0, atol=0)
    assert abs(ys.mean()) < 3 / math.sqrt(10_000)


def test_expectation_vector_output(tri_z1):
    q = lambda ys, z: np.column_stack([ys * 0 + z[0], ys * 0 - z[0]])
    out = fuzzy_expectation(q, FuzzyVector([tri_z1]), Sampler(0), 10)
    assert isinstance(out, list) and len(out) == 2
    assert_allclose(out[1].lower, -tri_z1.upper)


def lognormal_q(ys, z):
    # module level so worker processes can unpickle it
    return np.exp(-z[0] - ys * z[1])


def test_common_random_numbers_are_deterministic_across_workers(tri_z1, tri_z2):
    fvec = FuzzyVector([tri_z1, tri_z2])
    a = fuzzy_expectation(lognormal_q, fvec, Sampler(9), 2000, workers=1)
    b = fuzzy_expectation(lognormal_q, fvec, Sampler(9), 2000, workers=3)
    assert a == b


def test_type1_normal_with_fuzzy_mean():
    fvec = FuzzyVector([make_triangular(-1.0, 0.0, 1.0), make_crisp(1.0, (0, 0.25, 0.5, 0.75, 1))])
    fam = lambda y0, th: special.ndtr((y0 - th[0]) / th[1])
    pb = fuzzy_cdf_type1(fam, fvec, [-0.5, 0.0, 0.5])
    left, right = pb.pbox(0.0)
    assert left[1] == pytest.approx(special.ndtr(1.0), abs=1e-15)
    assert right[1] == pytest.approx(special.ndtr(-1.0), abs=1e-15)
    assert left[1] == pytest.approx(0.8413, abs=1e-4) and right[1] == pytest.approx(0.1587, abs=1e-4)
    assert pb.check() == []


def test_type1_crisp_parameters_collapse():
    fvec = FuzzyVector([make_crisp(0.3, (0, 0.5, 1)), make_crisp(2.0, (0, 0.5, 1))])
    grid = np.linspace(-3, 3, 13)
    pb = fuzzy_cdf_type1(lambda y0, th: special.ndtr((y0 - th[0]) / th[1]), fvec, grid)
    assert_allclose(pb.left, pb.right)
    assert_allclose(pb.left[0], special.ndtr((grid - 0.3) / 2.0))


def test_type2_independent_of_z_is_empirical_cdf(tri_z1):
    ys = Sampler(3).standard_normal(5000)
    grid = np.linspace(-2, 2, 9)
    pb = fuzzy_cdf_type2(lambda y, z: y, FuzzyVector([tri_z1]), ys, None, grid)
    ecdf = np.searchsorted(np.sort(ys), grid, side="right") / ys.size
    assert_allclose(pb.left, np.broadcast_to(ecdf, pb.left.shape))
    assert_allclose(pb.right, pb.left)


def test_type2_monotone_in_z(tri_z1):
    ys = Sampler(4).standard_normal(4000)
    grid = np.linspace(0.0, 3.0, 13)
    pb = fuzzy_cdf_type2(lambda y, z: y + z[0], FuzzyVector([tri_z1]), ys, None, grid)
    ecdf = lambda shift: np.searchsorted(np.sort(ys + shift), grid, side="right") / ys.size
    left, right = pb.pbox(0.0)
    assert_allclose(left, ecdf(1.0))
    assert_allclose(right, ecdf(1.2))
    assert pb.check() == []


def test_failure_probability_extremes(tri_z1):
    fvec = FuzzyVector([tri_z1])
    ys = Sampler(5).standard_normal(100)
    always_safe = failure_probability(lambda y, z: 1.0 + y * 0, fvec, ys)
    always_fail = failure_probability(lambda y, z: -1.0 + y * 0, fvec, ys)
    assert always_safe.is_crisp and always_safe.lower[0] == 0.0
    assert always_fail.is_crisp and always_fail.lower[0] == 1.0


def test_pbox_check_flags_problems():
    good = PBoxFamily(np.array([0.0, 1.0]), np.array([0.0, 1.0]), np.array([[0.5, 1.0], [0.4, 0.9]]), np.array([[0.1, 0.5], [0.2, 0.6]]))
    assert good.check() == []
    crossed = PBoxFamily(good.grid, good.levels, good.right, good.left)
    assert "right envelope exceeds left envelope" in crossed.check()
    wider_top = PBoxFamily(good.grid, good.levels, good.left[::-1], good.right[::-1])
    assert "bands not nested across levels" in wider_top.check()
    assert good.contains(good)


def test_level_extrema_hull(tri_z1):
    lo, hi, pts, vals = level_extrema(lambda z: np.sin(20 * z[0]), FuzzyVector([tri_z1]), [0, 0.5, 1], 7)
    assert np.all(np.diff(lo) >= 0) and np.all(np.diff(hi) <= 0)
    assert len(pts) == 3 and vals[2].shape == (1,)


coefs = st.lists(st.floats(-3, 3), min_size=4, max_size=4)


@given(coefs, st.integers(3, 15))
def test_interaction_dominance_property(c, res):
    g = lambda z: c[0] * z[0] + c[1] * z[1] + c[2] * z[0] * z[1] + c[3] * np.sin(3 * z[0])
    comps = [make_triangular(1.0, 1.06, 1.2), make_triangular(0.1, 0.13, 0.2)]
    non = extend(g, FuzzyVector(comps, "non"), resolution=res)
    full = extend(g, FuzzyVector(comps, "full"), resolution=res)
    assert np.all(non.lower <= full.lower) and np.all(non.upper >= full.upper)


@given(coefs)
def test_extension_output_nested_on_fine_levels(c):
    g = lambda z: c[0] * z[0] ** 2 + c[1] * z[1] + c[2] * np.cos(5 * z[1]) + c[3]
    comps = [make_triangular(-1.0, 0.2, 1.0), make_triangular(0.0, 1.0, 1.5)]
    out = extend(g, FuzzyVector(comps), levels=np.linspace(0, 1, 101), resolution=9)
    assert validate(out, tol=0.0) == []
