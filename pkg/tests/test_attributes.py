import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from visrepair import shapes
from visrepair.attributes import attribute_class, recover_attributes, uv_charts
from visrepair.exact import ExactPoint
from visrepair.mesh_io import IndexedMesh

SQUARE = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], float)


def source(materials=("a", "b")):
    # affine texture map u = 0.2 + 0.5 x, v = 0.1 + 0.8 y
    uvs = np.array([[0.2 + 0.5 * x, 0.1 + 0.8 * y] for x, y, _ in SQUARE])
    return IndexedMesh(SQUARE, np.array([[0, 1, 2], [0, 2, 3]]), uvs, np.array([[0, 1, 2], [0, 2, 3]]),
                       np.array(materials, dtype=object))


def corner_uvs(mesh):
    return mesh.uvs[mesh.face_uv_corners]


def pts(v):
    return [ExactPoint.from_floats(p) for p in np.asarray(v, float).tolist()]


def test_identity_reproduces_source():
    src = source()
    out, info = recover_attributes(IndexedMesh(src.vertices, src.faces), pts(src.vertices), [[0], [1]], src)
    assert np.array_equal(corner_uvs(out), corner_uvs(src))
    assert list(out.face_material) == ["a", "b"]
    assert info["unreached_corners"] == 0


def test_subtriangle_barycentric():
    src = source()
    v = np.vstack([SQUARE, [[0.5, 0.25, 0]]])
    m = IndexedMesh(v, np.array([[0, 1, 4], [1, 2, 4], [2, 0, 4], [0, 2, 3]]))
    out, _ = recover_attributes(m, pts(v), [[0], [0], [0], [1]], src)
    uv = corner_uvs(out)
    assert uv[0, 2] == pytest.approx((0.45, 0.3), abs=1e-15)
    assert np.array_equal(uv[0, 0], [0.2, 0.1])


def test_bridge_faces_one_ring_average():
    # two inherited faces plus three extra faces hanging off the bottom-right
    src = source()
    v = np.vstack([SQUARE, [[0.5, -0.5, 0], [1.5, 0.5, 0]]])
    m = IndexedMesh(v, np.array([[0, 1, 2], [0, 2, 3], [0, 4, 1], [1, 4, 5], [1, 5, 2]]))
    out, info = recover_attributes(m, pts(v), [[0], [1], None, None, None], src)
    uv = corner_uvs(out)
    at0 = ((0.7 + 0.7 + 0.2) / 3, (0.1 + 0.9 + 0.9) / 3)  # ring {1, 2, 3, 4}, 4 unassigned
    at1 = ((0.2 + 0.7) / 2, (0.1 + 0.9) / 2)  # ring {0, 2, 4, 5}
    at4 = ((0.2 + 0.7) / 2, (0.1 + 0.1) / 2)  # ring {0, 1, 5}
    at5 = ((0.7 + 0.7) / 2, (0.1 + 0.9) / 2)  # ring {1, 2, 4}
    want = {2: [at0, at4, at1], 3: [at1, at4, at5], 4: [at1, at5, None]}
    want[4][2] = ((0.2 + 0.7 + 0.2) / 3, (0.1 + 0.1 + 0.9) / 3)  # vertex 2, ring {0, 1, 3, 5}
    for f, corners in want.items():
        for k, w in enumerate(corners):
            assert uv[f, k] == pytest.approx(w, abs=1e-12)
    assert info["uv_rounds"] == 1
    assert list(out.face_material) == ["a", "b", "a", "a", "a"]


def test_unreached_component_zero():
    src = source()
    v = np.vstack([SQUARE, [[5, 5, 0], [6, 5, 0], [5, 6, 0]]])
    m = IndexedMesh(v, np.array([[0, 1, 2], [0, 2, 3], [4, 5, 6]]))
    out, info = recover_attributes(m, pts(v), [[0], [1], None], src)
    assert info["unreached_corners"] == 3
    assert np.array_equal(corner_uvs(out)[2], np.zeros((3, 2)))


def test_missing_source_uvs_flagged():
    src = IndexedMesh(SQUARE, np.array([[0, 1, 2], [0, 2, 3]]), face_material=np.array(["a", "a"], dtype=object))
    out, info = recover_attributes(IndexedMesh(SQUARE, src.faces), pts(SQUARE), [[0], [1]], src)
    assert out.uvs is None and info["missing_source_uvs"]


def test_charts_split_on_seam():
    m = shapes.grid_plane(2, size=2.0, uv_seam=True)
    ch = uv_charts(m)
    left = [f for f in range(m.n_faces) if m.face_material[f] == "left"]
    assert len(set(ch.tolist())) == 2
    assert len({ch[f] for f in left}) == 1
    assert attribute_class(m, ch, None) == ("extra",)
    assert attribute_class(m, ch, left[0])[1] == "left"


@given(st.lists(st.tuples(st.integers(0, 64), st.integers(0, 64)), min_size=1, max_size=6))
def test_inherited_affine_exact(samples):
    # points of source face 0 (x >= y); the map is affine so interpolation is exact up to one rounding
    src = source()
    ptsxy = [(max(a, b) / 64, min(a, b) / 64) for a, b in samples]
    v = np.vstack([SQUARE, [[x, y, 0] for x, y in ptsxy]])
    faces = [[0, 1, 4 + i] for i in range(len(ptsxy))]
    m = IndexedMesh(v, np.array(faces))
    out, _ = recover_attributes(m, pts(v), [[0]] * len(faces), src)
    uv = corner_uvs(out)
    for i, (x, y) in enumerate(ptsxy):
        assert uv[i, 2] == pytest.approx((0.2 + 0.5 * x, 0.1 + 0.8 * y), abs=1e-15)
