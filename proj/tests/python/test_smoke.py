import math
import os
from pathlib import Path

import numpy as np
import pytest

import spherephd as sp

DATA = Path(os.environ.get("SPHD_TEST_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


def test_counts_and_mesh():
    assert sp.pixel_count(3) == 1280
    assert sp.vertex_count(3) == 642
    m = sp.Mesh(3)
    assert m.pixel_count == 1280
    assert m.vertices().shape == (642, 3)
    assert m.faces().shape == (1280, 3)
    assert m.faces().max() < 642
    assert math.isclose(m.areas().sum(), 4 * math.pi, rel_tol=1e-12)
    c = m.centroids()
    assert np.allclose(np.linalg.norm(c, axis=1), 1.0)
    assert np.array_equal(m.locate(c), np.arange(1280))
    assert m.locate(np.array([0.0, 0.0, 1.0])) in range(1280)
    assert m.up_mask().sum() == 640


def test_tables():
    t = sp.conv_table(3)
    assert t.shape == (1280, 10)
    assert np.array_equal(t[:, 0], np.arange(1280))
    p = sp.pool_table(3)
    assert p.shape == (320, 4)
    assert np.array_equal(np.sort(p.ravel()), np.arange(1280))
    assert all(sp.verify_tables(2).values())
    with pytest.raises(sp.SpherePhdError):
        sp.conv_table(0)


def test_irregularity_ordering():
    scores = [sp.irregularity(sp.effective_areas(k))[2] for k in ("sphd", "cube", "erp")]
    assert scores[0] < scores[1] < scores[2]
    assert math.isclose(scores[0], 0.082756786987198, rel_tol=1e-10)
    _, d, score = sp.irregularity([math.e, 1 / math.e])
    assert np.allclose(d, [1, -1])
    assert math.isclose(score, 1.0)
    with pytest.raises(sp.SpherePhdError):
        sp.irregularity([1.0, 0.0])


def test_projection_constants_and_rotation():
    r = sp.random_rotation(5)
    assert np.allclose(r @ r.T, np.eye(3))
    assert math.isclose(np.linalg.det(r), 1.0)
    erp = np.full((40, 80), 0.25)
    s = sp.erp_to_sphd(erp, 3, rotation=r)
    assert s.shape == (1, 1280)
    assert np.all(s == 0.25)
    back = sp.sphd_to_erp(s, 20, 40, supersample=2)
    assert back.shape == (20, 40, 1)
    assert np.all(back == 0.25)
    with pytest.raises(sp.SpherePhdError):
        sp.erp_to_sphd(erp, 3, rotation=np.diag([1.0, 1.0, -1.0]))


def test_sphi_round_trip(tmp_path):
    img = np.random.default_rng(0).random((2, 1280)).astype(np.float32).astype(np.float64)
    path = tmp_path / "x.sphi"
    sp.write_sphi(path, img)
    arr, dtype = sp.read_sphi(path)
    assert dtype == "f32"
    assert np.array_equal(arr, img)
    path.write_bytes(path.read_bytes()[:-1])
    with pytest.raises(sp.FormatError):
        sp.read_sphi(path)


def test_cli(tmp_path):
    code, out, _ = sp.run_cli(["mesh-info", "-n", "2"])
    assert code == 0
    assert "faces: 320, vertices: 162, edges: 480, euler: 2" in out
    assert sp.run_cli(["mesh-info", "-n", "9"])[0] == 2
    code, _, err = sp.run_cli([
        "spherize-mnist", "--idx", str(DATA / "mnist-sample-images-idx3-ubyte"),
        "--labels", str(DATA / "mnist-sample-labels-idx1-ubyte"),
        "--count", "2", "--seed", "7", "--out", str(tmp_path / "s"),
    ])
    assert code == 0, err
    arr, _ = sp.read_sphi(tmp_path / "s" / "img_000000.sphi")
    assert arr.shape == (1, 1280)
    assert arr.max() > 0.5
