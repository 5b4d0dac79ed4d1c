from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from visrepair import shapes
from visrepair.exact import BOUNDARY, INSIDE, ExactPlane, ExactPoint, point_in_triangle, vector_area
from visrepair.hausdorff import hausdorff
from visrepair.mesh_io import IndexedMesh
from visrepair.simplify import collapse_redundant, detect_boundaries, simplify
from visrepair.topology import is_manifold, is_watertight


def pts(mesh):
    return [ExactPoint.from_floats(v) for v in mesh.vertices.tolist()]


def exact_area(mesh, points, faces):
    total = [Fraction(0)] * 3
    for f in faces:
        a = vector_area([points[i] for i in mesh.faces[f]])
        total = [x + y for x, y in zip(total, a)]
    return total


def vertex_rows(mesh):
    return {tuple(v) for v in mesh.vertices.tolist()}


def same_surface(a, b):
    """Exact certificate for zero Hausdorff distance between planar re-triangulations."""
    return plane_areas(a) == plane_areas(b) and all(covered(a, b, f) for f in range(b.n_faces))


def plane_areas(mesh):
    p = pts(mesh)
    out = {}
    for f in range(mesh.n_faces):
        tri = [p[i] for i in mesh.faces[f]]
        h = ExactPlane.through(*tri)
        a = vector_area(tri)
        out[h] = [x + y for x, y in zip(out.get(h, [0, 0, 0]), a)]
    return out


def covered(a, b, f):
    pa, pb = pts(a), pts(b)
    tri = [pb[i] for i in b.faces[f]]
    c = ExactPoint.from_rationals(*(sum(t.coords[k] for t in tri) / 3 for k in range(3)))
    return any(point_in_triangle(c, [pa[i] for i in a.faces[g]]) in (INSIDE, BOUNDARY) for g in range(a.n_faces))


def test_subdivided_cube_to_twelve():
    m = shapes.subdivided_cube()
    res = simplify(m, pts(m))
    out = res.mesh
    assert out.n_faces == 12
    assert vertex_rows(out) <= vertex_rows(m)
    assert is_watertight(out) and is_manifold(out)
    assert same_surface(m, out)
    assert hausdorff(m, out) < 1e-12
    assert out.signed_volume() == pytest.approx(1.0, abs=1e-15)


def test_groups_one_per_side():
    m = shapes.subdivided_cube()
    bg = detect_boundaries(m, pts(m))
    assert len(bg.groups) == 6
    for g in bg.groups:
        assert len(g.loops) == 1 and sorted(g.loops[0]) == sorted(set(g.loops[0]))
        assert len(g.loops[0]) == 4 and len(g.interior) == 1


def test_single_triangle_boundary():
    m = IndexedMesh(np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]), np.array([[0, 1, 2]]))
    bg = detect_boundaries(m, pts(m))
    assert len(bg.groups) == 1
    loop = bg.groups[0].loops[0]
    assert sorted(loop) == [0, 1, 2]
    assert simplify(m, pts(m)).mesh.n_faces == 1


def test_collinear_boundary_points_removed():
    # unit square with 3 extra points on its bottom edge, fanned from vertex 3
    v = [[0, 0, 0], [0.25, 0, 0], [0.5, 0, 0], [0.75, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]
    f = [[0, 1, 6], [1, 2, 6], [2, 3, 6], [3, 4, 6], [4, 5, 6]]
    m = IndexedMesh(np.array(v, float), np.array(f))
    bg = collapse_redundant(m, detect_boundaries(m, pts(m)))
    assert bg.removable == {1, 2, 3}
    res = simplify(m, pts(m))
    assert res.mesh.n_faces == 2 and res.mesh.n_vertices == 4


def test_cube_identity():
    m = shapes.cube()
    res = simplify(m, pts(m))
    assert res.mesh.n_faces == 12 and res.mesh.n_vertices == 8
    assert same_surface(m, res.mesh)


def l_shape():
    # L of 6 corners plus a center-ish interior vertex per arm
    corners = [[0, 0, 0], [2, 0, 0], [2, 1, 0], [1, 1, 0], [1, 2, 0], [0, 2, 0]]
    v = corners + [[0.5, 0.5, 0], [0.5, 1.5, 0], [1.5, 0.5, 0]]
    f = [[0, 1, 8], [1, 2, 8], [2, 3, 8], [3, 6, 8], [0, 8, 6], [3, 4, 7], [4, 5, 7], [5, 0, 6],
         [5, 6, 7], [6, 3, 7]]
    return IndexedMesh(np.array(v, float), np.array(f))


def test_l_shape_four_triangles_inside():
    m = l_shape()
    p = pts(m)
    res = simplify(m, p)
    out = res.mesh
    assert out.n_faces == 4
    q = pts(out)
    assert exact_area(out, q, range(4)) == exact_area(m, p, range(m.n_faces)) == [0, 0, 3]
    for f in range(4):
        a = vector_area([q[i] for i in out.faces[f]])
        assert a[2] > 0
        c = out.vertices[out.faces[f]].mean(axis=0)
        assert not (c[0] > 1 and c[1] > 1)


def test_seam_edges_kept():
    m = shapes.grid_plane(2, size=2.0, uv_seam=True)
    cls = list(m.face_material)
    res = simplify(m, pts(m), cls)
    out = res.mesh
    assert out.n_faces == 4
    edges = {tuple(sorted(map(tuple, out.vertices[[u, v]].tolist()))) for t in out.faces.tolist()
             for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}
    assert ((1.0, 0.0, 0.0), (1.0, 2.0, 0.0)) in edges
    for t in out.faces.tolist():
        xs = out.vertices[t, 0]
        assert xs.max() <= 1.0 or xs.min() >= 1.0


def test_wall_blocks_diagonal():
    v = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0.5, 0.3, 0]]
    f = [[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]]
    square = IndexedMesh(np.array(v, float), np.array(f))
    assert simplify(square, pts(square)).mesh.n_faces == 2
    wall_v = v + [[0.2, 0.5, -1], [0.8, 0.5, -1], [0.5, 0.5, 1]]
    walled = IndexedMesh(np.array(wall_v, float), np.array(f + [[5, 6, 7]]))
    out = simplify(walled, pts(walled), l_extended=0.01).mesh
    assert out.n_faces == 5


def test_no_redundant_vertices_identity():
    m = IndexedMesh(np.array([[0.0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]), np.array([[0, 1, 2], [0, 2, 3]]))
    res = simplify(m, pts(m))
    assert res.mesh.n_faces == 2 and res.mesh.n_vertices == 4


@given(st.integers(1, 5), st.integers(0, 2**16))
def test_grid_simplifies_preserving_area(n, seed):
    rng = np.random.default_rng(seed)
    m = shapes.grid_plane(n, size=float(n))
    # random diagonal choice per cell keeps a valid triangulation
    faces = m.faces.copy()
    for k in range(0, len(faces), 2):
        if rng.random() < 0.5:
            a, b, c = faces[k]
            d = faces[k + 1][2]
            faces[k], faces[k + 1] = [a, b, d], [b, c, d]
    m = IndexedMesh(m.vertices, faces)
    p = pts(m)
    res = simplify(m, p)
    out = res.mesh
    assert out.n_faces == 2
    assert vertex_rows(out) <= vertex_rows(m)
    assert exact_area(out, pts(out), range(out.n_faces)) == exact_area(m, p, range(m.n_faces))


@pytest.mark.parametrize("name", ["subdivided_cube", "nested_cubes", "interpenetrating_cubes", "cube"])
def test_watertight_preserved(name):
    m = getattr(shapes, name)()
    out = simplify(m, pts(m)).mesh
    assert out.n_faces <= m.n_faces
    assert is_watertight(out) == is_watertight(m)
    assert vertex_rows(out) <= vertex_rows(m)
