from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from visrepair import shapes
from visrepair.exact import ExactPlane, ExactPoint, plane_side, vector_area
from visrepair.mesh_io import IndexedMesh, concatenate
from visrepair.partition import build_partition, exact_vertices, map_facets


def source_vector_area(mesh, f):
    ex = exact_vertices(mesh)
    return vector_area([ex[i] for i in mesh.faces[f]])


def check_complex(cx, mesh, overlapping=()):
    # volume conservation
    vols = [cx.cell_volume(c) for c in range(cx.n_cells)]
    assert all(v > 0 for v in vols)
    assert sum(vols) == cx.box_volume()
    # two-sidedness and symmetric adjacency
    for f, (pos, neg) in enumerate(cx.facet_cells):
        assert pos != neg
        for c in (pos, neg):
            if c != cx.outer_cell:
                assert f in cx.cell_facets[c]
    for c, fs in enumerate(cx.cell_facets):
        assert all(c in cx.facet_cells[f] for f in fs)
    # convexity: every cell vertex on the inner side of each of its planes
    for c, fs in enumerate(cx.cell_facets):
        verts = [cx.points[i] for i in cx.cell_vertices(c)]
        for f in fs:
            s = cx.facet_side_of(f, c)
            assert all(s * plane_side(cx.facet_planes[f], p) >= 0 for p in verts)
    # coverage of every source face by its mapped facets
    mapped = cx.mapped_area_by_source()
    for f in range(mesh.n_faces):
        if f in overlapping:
            continue
        assert mapped.get(f, (0, 0, 0)) == source_vector_area(mesh, f), f


FIXTURES = {
    "cube": shapes.cube(),
    "split": shapes.split_cube(),
    "nested": shapes.nested_cubes(),
    "inter": shapes.interpenetrating_cubes(),
    "disk": shapes.disk(8),
    "seam": shapes.grid_plane(2, uv_seam=True),
    "bowtie": shapes.bowtie(),
    "fin": shapes.fin_cube(),
}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_invariants(name):
    mesh = FIXTURES[name]
    check_complex(build_partition(mesh), mesh)


def test_cube_single_inside_cell():
    cx = build_partition(shapes.cube())
    inside = 0
    for c in range(cx.n_cells):
        pts = [cx.points[i].coords for i in cx.cell_vertices(c)]
        bc = [sum(p[k] for p in pts) / len(pts) for k in range(3)]
        inside += all(0 < x < 1 for x in bc)
    assert inside == 1


def test_single_triangle():
    tri = IndexedMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    cx = build_partition(tri)
    assert cx.n_cells >= 2
    mapped = [f for f in range(cx.n_facets) if cx.provenance[f] is not None]
    assert mapped and all(cx.provenance[f] == 0 for f in mapped)
    check_complex(cx, tri)
    # every other facet on the triangle's plane lies outside it
    h = ExactPlane(0, 0, 1, 0)
    for f in range(cx.n_facets):
        if cx.provenance[f] is None and cx.facet_planes[f].canonical()[0] == h:
            pts = [cx.points[i].coords for i in cx.facet_loops[f]]
            assert any(p[0] + p[1] > 1 or p[0] < 0 or p[1] < 0 for p in pts)


def test_seam_edge_present():
    m = shapes.grid_plane(2, uv_seam=True)
    cx = build_partition(m)
    half = Fraction(1, 2)
    for f in range(cx.n_facets):
        if cx.provenance[f] is None:
            continue
        xs = [cx.points[i].coords[0] for i in cx.facet_loops[f]]
        assert max(xs) <= half or min(xs) >= half


def test_duplicate_overlap_lowest_id():
    m = shapes.coplanar_duplicates()
    cx = build_partition(m)
    top = {4: m.faces[2], 5: m.faces[3]}
    assert set(top) and all(cx.provenance[f] not in (12, 13) for f in range(cx.n_facets))
    check_complex(cx, m, overlapping=(12, 13))
    # the top square is covered once, by the two original top faces
    mapped = cx.mapped_area_by_source()
    assert mapped[2][2] + mapped[3][2] == 1


def test_map_facets_on_other_source():
    cube = shapes.cube()
    cx = build_partition(cube)
    tri = IndexedMesh([[5, 5, 5], [6, 5, 5], [5, 6, 5]], [[0, 1, 2]])
    prov, sign = map_facets(cx, tri)
    assert all(p is None for p in prov) and all(s == 0 for s in sign)


def test_provenance_sign_matches_winding():
    m = shapes.cube()
    cx = build_partition(m)
    normals = m.face_normals()
    for f in range(cx.n_facets):
        src = cx.provenance[f]
        if src is None:
            continue
        n = np.array([float(x) for x in cx.facet_planes[f].normal])
        assert np.sign(n @ normals[src]) == cx.provenance_sign[f]


def test_debug_dump(tmp_path):
    cx = build_partition(shapes.cube())
    cx.write_debug(tmp_path)
    rows = (tmp_path / "facets.csv").read_text().splitlines()
    assert rows[0] == "facet_id,cell_pos,cell_neg,source_face,area" and len(rows) == cx.n_facets + 1


def test_zero_area_face_skipped(caplog):
    m = IndexedMesh([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]], [[0, 1, 2], [0, 1, 3]])
    cx = build_partition(m)
    assert "zero-area" in caplog.text
    assert sum(cx.cell_volume(c) for c in range(cx.n_cells)) == cx.box_volume()


coord = st.integers(-3, 3)


@st.composite
def soups(draw):
    n = draw(st.integers(1, 3))
    tris = []
    for _ in range(n):
        tris.append(np.array(draw(st.lists(st.tuples(coord, coord, coord), min_size=3, max_size=3)), float))
    v = np.concatenate(tris)
    return IndexedMesh(v, np.arange(3 * n).reshape(-1, 3))


def _overlapping(mesh):
    # faces sharing a plane with a lower face may lose area to it
    ex = exact_vertices(mesh)
    seen, out = set(), set()
    for f in range(mesh.n_faces):
        key = ExactPlane.through(*[ex[i] for i in mesh.faces[f]]).canonical()[0]
        if key in seen:
            out.add(f)
        seen.add(key)
    return out


@given(soups())
def test_random_soups(mesh):
    assume((mesh.face_areas() > 0).all())
    cx = build_partition(mesh)
    check_complex(cx, mesh, overlapping=_overlapping(mesh))
