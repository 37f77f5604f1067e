import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from fuzzyuq.core import (
    DEFAULT_LEVELS,
    FuzzyVariable,
    Interval,
    alpha_cut,
    from_alpha_cuts,
    geq_scalar,
    leq_scalar,
    make_crisp,
    make_polygonal,
    make_triangular,
    membership,
    membership_samples,
    validate,
)

Z1_VERTS = (0.1222, 0.1249, 0.1277, 0.1304, 0.1330, 0.1360, 0.1388, 0.1445, 0.1502, 0.1559)
Z3_VERTS = (0.0, 0.25, 0.50, 0.75, 1.00, 1.20, 1.25, 1.50, 1.75, 2.00)


def triangles():
    return st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=3, max_size=3).map(sorted)


def test_interval_rejects_empty_and_nonfinite():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    with pytest.raises(ValueError):
        Interval(0.0, np.inf)
    assert Interval(1.0, 3.0).width == 2.0
    assert Interval(0, 4).contains(Interval(1, 2))
    assert not Interval(0, 4).contains(5.0)


def test_triangular_cuts(tri_z1):
    assert alpha_cut(tri_z1, 0.0) == Interval(1.00, 1.20)
    assert alpha_cut(tri_z1, 1.0) == Interval(1.06, 1.06)
    half = alpha_cut(tri_z1, 0.5)
    assert_allclose([half.lo, half.hi], [1.03, 1.13], atol=1e-14)


def test_triangular_second_marginal(tri_z2):
    half = alpha_cut(tri_z2, 0.5)
    assert_allclose([half.lo, half.hi], [0.115, 0.165], atol=1e-14)


def test_triangular_crisp():
    fv = make_triangular(5, 5, 5)
    assert fv.is_crisp
    for a in np.linspace(0, 1, 11):
        assert alpha_cut(fv, a) == Interval(5.0, 5.0)


def test_triangular_rejects_unordered():
    with pytest.raises(ValueError):
        make_triangular(1.0, 0.5, 2.0)


def test_polygonal_decagon_cuts():
    z3 = make_polygonal(Z3_VERTS)
    assert alpha_cut(z3, 0.0) == Interval(0.0, 2.0)
    assert alpha_cut(z3, 1.0) == Interval(1.0, 1.2)
    z1 = make_polygonal(Z1_VERTS)
    assert alpha_cut(z1, 0.5) == Interval(0.1277, 0.1445)


def test_polygonal_equal_vertices_is_crisp():
    assert make_polygonal([3.0] * 10).is_crisp


def test_polygonal_rejects_descending_and_wrong_count():
    with pytest.raises(ValueError, match="vertex 2"):
        make_polygonal([0, 2, 1, 3, 4, 5, 6, 7, 8, 9])
    with pytest.raises(ValueError):
        make_polygonal([0, 1, 2])


def test_alpha_cut_rejects_out_of_range(tri_z1):
    with pytest.raises(ValueError):
        alpha_cut(tri_z1, 1.5)


def test_membership_values(tri_z1):
    assert membership(tri_z1, 1.06) == 1.0
    assert membership(tri_z1, 0.5) == 0.0
    assert membership(tri_z1, 1.03) == pytest.approx(0.5, abs=1e-12)
    assert membership(tri_z1, 1.13) == pytest.approx(0.5, abs=1e-12)
    assert_allclose(membership(tri_z1, np.array([1.0, 1.2, 1.3])), [0.0, 0.0, 0.0])


def test_membership_on_flat_core():
    z3 = make_polygonal(Z3_VERTS)
    assert membership(z3, 1.1) == 1.0
    assert membership(z3, 1.0) == 1.0
    assert membership(z3, 0.25) == pytest.approx(0.25)


def test_scalar_comparisons(tri_z1):
    assert geq_scalar(tri_z1, 0.9)
    assert not geq_scalar(tri_z1, 1.05)
    assert geq_scalar(make_crisp(5.0), 5.0)
    assert leq_scalar(make_crisp(5.0), 5.0)
    assert leq_scalar(tri_z1, 1.2)
    assert not leq_scalar(tri_z1, 1.1)


def test_from_alpha_cuts_matches_triangular():
    fv = from_alpha_cuts([0, 1], [Interval(0, 2), Interval(1, 1)])
    tri = make_triangular(0, 1, 2, levels=(0, 1))
    assert fv == tri
    for a in np.linspace(0, 1, 7):
        assert alpha_cut(fv, a) == alpha_cut(tri, a)


def test_from_alpha_cuts_rejects_non_nested():
    with pytest.raises(ValueError, match="alpha=1"):
        from_alpha_cuts([0, 1], [(0, 1), (2, 3)])


def test_from_alpha_cuts_snaps_rounding():
    fv = from_alpha_cuts([0, 1], [(0, 1), (-1e-14, 0.5)])
    assert fv.lower[1] == 0.0
    assert validate(fv) == []


def test_from_alpha_cuts_rejects_bad_levels():
    with pytest.raises(ValueError):
        from_alpha_cuts([0.1, 1], [(0, 1), (0, 1)])
    with pytest.raises(ValueError):
        from_alpha_cuts([0, 0.5, 0.5, 1], [(0, 1)] * 4)
    with pytest.raises(ValueError):
        from_alpha_cuts([], [])


def test_five_level_table_interpolates_linearly():
    cuts = [(0.0, 0.2284), (0.0, 0.15), (0.0, 0.08), (0.0, 0.03), (0.0, 0.01)]
    fv = from_alpha_cuts(DEFAULT_LEVELS, cuts)
    mid = alpha_cut(fv, 0.125)
    assert mid.hi == pytest.approx(0.5 * (0.2284 + 0.15))
    assert membership(fv, 0.15) == pytest.approx(0.25)


def test_validate_reports_problems():
    assert validate(make_triangular(1, 2, 3)) == []
    bad = FuzzyVariable([0, 1], [1, 0], [2, 3])
    msgs = validate(bad)
    assert len(msgs) == 1 and "nesting" in msgs[0]
    empty_core = FuzzyVariable([0, 1], [0, 2], [3, 1])
    assert any("normalized" in m for m in validate(empty_core))


def test_immutable(tri_z1):
    with pytest.raises(AttributeError):
        tri_z1.foo = 1
    with pytest.raises(ValueError):
        tri_z1.lower[0] = 0.0


def test_dict_roundtrip(tri_z1):
    assert FuzzyVariable.from_dict(tri_z1.to_dict()) == tri_z1
    assert hash(FuzzyVariable.from_dict(tri_z1.to_dict())) == hash(tri_z1)


def test_membership_samples_cover_support(tri_z1):
    samples = membership_samples(tri_z1, 51)
    xs = [s.abscissa for s in samples]
    assert min(xs) < 1.0 and max(xs) > 1.2
    assert max(s.degree for s in samples) == 1.0


@given(triangles(), st.lists(st.floats(0, 1), min_size=2, max_size=20))
def test_triangular_cuts_nested(tri, alphas):
    fv = make_triangular(*tri)
    alphas = sorted(alphas)
    cuts = [alpha_cut(fv, a) for a in alphas]
    for outer, inner in zip(cuts, cuts[1:]):
        assert outer.contains(inner, tol=1e-9)


@given(triangles(), st.floats(0, 1))
def test_cut_endpoints_have_membership_at_least_alpha(tri, a):
    l, m, r = tri
    fv = make_triangular(l, m, r)
    cut = alpha_cut(fv, a)
    for x in (cut.lo, cut.hi):
        assert membership(fv, x) >= a - 1e-9


@given(st.lists(st.floats(-100, 100), min_size=10, max_size=10).map(sorted))
def test_polygonal_always_valid(verts):
    assert validate(make_polygonal(verts)) == []


@given(
    st.lists(
        st.tuples(st.floats(-50, 50), st.floats(0, 50)), min_size=2, max_size=8
    )
)
def test_from_alpha_cuts_accepts_any_nested_table(raw):
    # build a nested table by shrinking widths
    n = len(raw)
    levels = np.linspace(0, 1, n)
    centre = raw[0][0]
    widths = sorted((w for _, w in raw), reverse=True)
    fv = from_alpha_cuts(levels, [(centre - w, centre + w) for w in widths])
    assert validate(fv) == []
    for a in np.linspace(0, 1, 101):
        assert alpha_cut(fv, a).contains(alpha_cut(fv, min(1.0, a + 0.01)), tol=1e-12)
