import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from fuzzyuq import io
from fuzzyuq.core import make_polygonal, make_triangular, membership_samples, validate
from fuzzyuq.data import PixelMap, SampleEnsemble
from fuzzyuq.extension import PBoxFamily
from fuzzyuq.interaction import FuzzyVector, joint_alpha_cut
from fuzzyuq.random_field import CovarianceSpec, kl_decompose, midpoint_grid


def test_cut_table_roundtrip(tmp_path):
    fv = make_polygonal([0.1222, 0.1249, 0.1277, 0.1304, 0.1330, 0.1360, 0.1388, 0.1445, 0.1502, 0.1559])
    path = tmp_path / "cut.csv"
    io.write_cut_table(path, fv)
    assert path.read_text().splitlines()[0] == "# fuzzyuq cut-table v1"
    back = io.read_cut_table(path)
    assert back == fv and validate(back) == []


def test_pbox_roundtrip(tmp_path):
    pb = PBoxFamily(np.array([0.1, 0.2, 0.3]), np.array([0.0, 1.0]), np.array([[0.5, 0.8, 1.0], [0.4, 0.6, 0.9]]), np.array([[0.1, 0.2, 0.5], [0.3, 0.4, 0.7]]))
    io.write_pbox(tmp_path / "p.csv", pb)
    back = io.read_pbox(tmp_path / "p.csv")
    for name in ("grid", "levels", "left", "right"):
        assert np.array_equal(getattr(back, name), getattr(pb, name))


def test_field_and_samples_files(tmp_path):
    fvs = [make_triangular(0, 1, 2), make_triangular(1, 2, 3)]
    io.write_field(tmp_path / "f.csv", [0.0, 0.5], fvs)
    kind, header, rows = io.read_csv(tmp_path / "f.csv")
    assert kind == "fuzzyuq fuzzy-field v1" and header == ["x", "alpha", "lo", "hi"] and len(rows) == 10
    io.write_membership_samples(tmp_path / "m.csv", membership_samples(fvs[0], 11))
    assert io.read_csv(tmp_path / "m.csv")[1] == ["abscissa", "degree"]


def test_json_roundtrips(tri_z1, tri_z2):
    assert io.fuzzy_from_json(io.fuzzy_to_json(tri_z1)) == tri_z1
    fvec = FuzzyVector([tri_z1, tri_z2])
    box = joint_alpha_cut(fvec, 0.5)
    assert io.joint_cut_from_json(io.joint_cut_to_json(box)) == box
    chain = joint_alpha_cut(fvec.with_mode("full"), 0.0)
    back = io.joint_cut_from_json(io.joint_cut_to_json(chain))
    assert_allclose(back.vertices, chain.vertices)
    with pytest.raises(ValueError):
        io.joint_cut_from_json(json.dumps({"variant": "blob"}))


def test_eigenpair_dump(tmp_path):
    kl = kl_decompose(midpoint_grid(10.0, 5), CovarianceSpec(2.0, 1.0))
    io.write_eigenpairs(tmp_path / "e.csv", kl, 3)
    _, header, rows = io.read_csv(tmp_path / "e.csv")
    assert len(header) == 2 + 5 and len(rows) == 3
    assert float(rows[0][1]) == kl.eigenvalues[0]


def test_ensemble_roundtrip(tmp_path):
    ens = SampleEnsemble(np.array([[3.6, 24.0, 6.0], [10.0, 5.5, 7.25]]), np.array([5.0, 15.0, 25.0]))
    io.write_ensemble(tmp_path / "e.csv", ens)
    back = io.read_ensemble(tmp_path / "e.csv")
    assert np.array_equal(back.values, ens.values) and np.array_equal(back.stations, ens.stations)


def test_points_file(tmp_path):
    io.write_points(tmp_path / "p.csv", np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert io.read_csv(tmp_path / "p.csv")[1] == ["z1", "z2"]


def test_pgm_rejects_ascii(tmp_path):
    (tmp_path / "a.pgm").write_bytes(b"P2\n2 1\n255\n0 255\n")
    with pytest.raises(ValueError):
        io.read_pgm(tmp_path / "a.pgm")


def test_pgm_with_comment(tmp_path):
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n3 1\n255\n\x00\xff\x00")
    assert np.array_equal(io.read_pgm(tmp_path / "c.pgm").occupancy, [[0, 1, 0]])


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 1)))
def test_map_roundtrips(occ):
    import tempfile
    from pathlib import Path

    pm = PixelMap(occ)
    assert io.map_from_rle(json.loads(json.dumps(io.map_to_rle(pm)))) == pm
    with tempfile.TemporaryDirectory() as d:
        io.write_pgm(Path(d) / "m.pgm", pm)
        assert io.read_pgm(Path(d) / "m.pgm") == pm


@given(st.lists(st.floats(-1e6, 1e6), min_size=10, max_size=10).map(sorted))
def test_cut_table_text_is_lossless(verts):
    import tempfile
    from pathlib import Path

    fv = make_polygonal(verts)
    with tempfile.TemporaryDirectory() as d:
        io.write_cut_table(Path(d) / "c.csv", fv)
        assert io.read_cut_table(Path(d) / "c.csv") == fv
