"""Small procedural meshes used by tests, benchmarks and examples."""
from __future__ import annotations

import math

import numpy as np

from .mesh_io import IndexedMesh, concatenate

_CUBE_V = np.array(
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]], dtype=float
)
# outward winding
_CUBE_F = np.array(
    [[0, 2, 1], [0, 3, 2], [4, 5, 6], [4, 6, 7], [0, 1, 5], [0, 5, 4],
     [1, 2, 6], [1, 6, 5], [2, 3, 7], [2, 7, 6], [3, 0, 4], [3, 4, 7]], dtype=np.int64
)

_CUBE_QUADS = [[0, 3, 2, 1], [4, 5, 6, 7], [0, 1, 5, 4], [1, 2, 6, 5], [2, 3, 7, 6], [3, 0, 4, 7]]


def cube(size: float = 1.0, origin=(0.0, 0.0, 0.0)) -> IndexedMesh:
    """Closed 12-triangle cube with outward normals."""
    return IndexedMesh(_CUBE_V * size + np.asarray(origin, float), _CUBE_F.copy())


def grid_plane(n: int = 1, size: float = 1.0, z: float = 0.0, uv_seam: bool = False) -> IndexedMesh:
    """Flat ``n x n`` quad grid in the xy plane, facing +z.

    With ``uv_seam`` the left and right halves get separate UV charts and
    materials, so the middle column line is an attribute seam.
    """
    xs = np.linspace(0.0, size, n + 1)
    verts = np.array([[x, y, z] for y in xs for x in xs])
    faces = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            faces += [[a, b, c], [a, c, d]]
    faces = np.array(faces, dtype=np.int64)
    if not uv_seam:
        return IndexedMesh(verts, faces)
    uvs, corners, mats = [], [], []
    half = size / 2
    for f in faces:
        cx = verts[f, 0].mean()
        left = cx < half
        row = []
        for v in f:
            x, y = verts[v, 0], verts[v, 1]
            u = x / size if left else 0.5 + x / size
            row.append(len(uvs))
            uvs.append([u, y / size])
        corners.append(row)
        mats.append("left" if left else "right")
    return IndexedMesh(verts, faces, np.array(uvs), np.array(corners, dtype=np.int64),
                       np.array(mats, dtype=object))


def subdivided_cube() -> IndexedMesh:
    """Closed cube whose every side is a fan of 4 triangles around its center."""
    verts = [list(v) for v in _CUBE_V]
    faces = []
    for quad in _CUBE_QUADS:
        ci = len(verts)
        verts.append(np.mean(_CUBE_V[quad], axis=0).tolist())
        for k in range(4):
            faces.append([quad[k], quad[(k + 1) % 4], ci])
    return IndexedMesh(np.array(verts), np.array(faces, dtype=np.int64))


def split_cube(gap_face: int = 1) -> IndexedMesh:
    """Cube with one triangle removed (a defect a repair should close)."""
    m = cube()
    keep = np.ones(m.n_faces, bool)
    keep[gap_face] = False
    return IndexedMesh(m.vertices, m.faces[keep])


def open_box() -> IndexedMesh:
    """Cube without its top: five closed sides around an opening."""
    m = cube()
    return IndexedMesh(m.vertices, m.faces[[0, 1, 4, 5, 6, 7, 8, 9, 10, 11]])


def disk(n: int = 16, radius: float = 1.0) -> IndexedMesh:
    """Single-sided triangle fan facing +z."""
    ang = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    verts = np.vstack([[0.0, 0.0, 0.0], np.stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(n)], 1)])
    faces = np.array([[0, 1 + i, 1 + (i + 1) % n] for i in range(n)], dtype=np.int64)
    return IndexedMesh(verts, faces)


def mobius(n: int = 24, width: float = 0.3, radius: float = 1.0) -> IndexedMesh:
    """Möbius strip: a non-orientable open surface."""
    verts = []
    for i in range(n):
        t = 2 * math.pi * i / n
        for s in (-width, width):
            verts.append([(radius + s * math.cos(t / 2)) * math.cos(t),
                          (radius + s * math.cos(t / 2)) * math.sin(t),
                          s * math.sin(t / 2)])
    faces = []
    for i in range(n):
        a, b = 2 * i, 2 * i + 1
        if i + 1 < n:
            c, d = 2 * (i + 1), 2 * (i + 1) + 1
        else:
            c, d = 1, 0  # the half twist swaps the two rails
        faces += [[a, c, d], [a, d, b]]
    return IndexedMesh(np.array(verts), np.array(faces, dtype=np.int64))


def nested_cubes() -> IndexedMesh:
    """A small cube floating inside a larger one."""
    return concatenate([cube(3.0), cube(1.0, origin=(1.0, 1.0, 1.0))])


def interpenetrating_cubes() -> IndexedMesh:
    """Two overlapping cubes with self-intersecting surfaces."""
    return concatenate([cube(1.0), cube(1.0, origin=(0.5, 0.25, 0.25))])


def bowtie() -> IndexedMesh:
    """Two tetrahedra touching at one vertex (a non-manifold pinch)."""
    v = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]], float)
    f = np.array([[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3],
                  [0, 4, 5], [0, 6, 4], [0, 5, 6], [4, 6, 5]], dtype=np.int64)
    return IndexedMesh(v, f)


def fin_cube() -> IndexedMesh:
    """Cube with an extra fin triangle hanging off an edge (a non-manifold edge)."""
    m = cube()
    v = np.vstack([m.vertices, [[0.5, -1.0, 0.0]]])
    f = np.vstack([m.faces, [[0, 8, 1]]])
    return IndexedMesh(v, f)


def uv_sphere(n_lon: int = 16, lats_deg=None, radius: float = 1.0) -> IndexedMesh:
    """Closed latitude-longitude sphere with poles.

    ``lats_deg`` lists the ring polar angles (degrees from +z) and lets callers
    place rings exactly where holes will be cut.
    """
    if lats_deg is None:
        lats_deg = [180.0 * k / 8 for k in range(1, 8)]
    lats = [math.radians(a) for a in lats_deg]
    verts = [[0.0, 0.0, radius]]
    for th in lats:
        for j in range(n_lon):
            ph = 2 * math.pi * j / n_lon
            verts.append([radius * math.sin(th) * math.cos(ph), radius * math.sin(th) * math.sin(ph),
                          radius * math.cos(th)])
    verts.append([0.0, 0.0, -radius])
    south = len(verts) - 1

    def ring(r, j):
        return 1 + r * n_lon + j % n_lon

    faces = []
    for j in range(n_lon):
        faces.append([0, ring(0, j), ring(0, j + 1)])
    for r in range(len(lats) - 1):
        for j in range(n_lon):
            a, b = ring(r, j), ring(r, j + 1)
            c, d = ring(r + 1, j + 1), ring(r + 1, j)
            faces += [[a, d, c], [a, c, b]]
    last = len(lats) - 1
    for j in range(n_lon):
        faces.append([south, ring(last, j + 1), ring(last, j)])
    return IndexedMesh(np.array(verts), np.array(faces, dtype=np.int64))


def sphere_with_hole(n_lon: int = 16, hole_deg: float = 20.0, n_rings: int = 6) -> IndexedMesh:
    """UV sphere whose north cap (polar angle below ``hole_deg``) is removed."""
    lats = [hole_deg] + [hole_deg + (180.0 - hole_deg) * k / n_rings for k in range(1, n_rings)]
    m = uv_sphere(n_lon, lats)
    keep = ~np.any(m.faces == 0, axis=1)
    return IndexedMesh(m.vertices, m.faces[keep])


def hole_loop(mesh: IndexedMesh):
    """Boundary vertex ids of a single-hole mesh, in loop order."""
    from .topology import build_adjacency

    nxt = {}
    for (u, v), inc in build_adjacency(mesh).items():
        if len(inc) == 1:
            f, d = inc[0]
            a, b = (u, v) if d > 0 else (v, u)
            nxt[a] = b
    if not nxt:
        return []
    start = min(nxt)
    loop = [start]
    while nxt[loop[-1]] != start:
        loop.append(nxt[loop[-1]])
    return loop


def scene() -> IndexedMesh:
    """Several disjoint defective components."""
    a = split_cube()
    b = IndexedMesh(disk(8).vertices * 0.5 + np.array([3.0, 0.5, 0.5]), disk(8).faces)
    c = cube(0.5, origin=(0.0, 3.0, 0.0)).flipped(np.ones(12, bool))
    return concatenate([a, b, c])


def nested_cubes_inner_flipped() -> IndexedMesh:
    """Nested cubes whose inner cube is wound inward."""
    inner = cube(1.0, origin=(1.0, 1.0, 1.0))
    return concatenate([cube(3.0), inner.flipped(np.ones(inner.n_faces, bool))])


def partly_flipped_cube(faces=(0, 4, 9)) -> IndexedMesh:
    """Closed cube with a few triangles wound inward."""
    m = cube()
    mask = np.zeros(m.n_faces, bool)
    mask[list(faces)] = True
    return m.flipped(mask)


def coplanar_duplicates() -> IndexedMesh:
    """Cube whose top side is also covered by the opposite diagonal split."""
    m = cube()
    extra = np.array([[4, 5, 7], [5, 6, 7]], dtype=np.int64)
    return IndexedMesh(m.vertices, np.vstack([m.faces, extra]))


def defective_cube() -> IndexedMesh:
    """Cube with one triangle deleted and three flipped."""
    m = partly_flipped_cube((0, 4, 9))
    keep = np.ones(m.n_faces, bool)
    keep[2] = False
    return IndexedMesh(m.vertices, m.faces[keep])


def corpus():
    """Named defective fixtures covering the failure modes the repair targets."""
    disk_b = disk(8)
    return {
        "deleted_face": split_cube(),
        "defective_cube": defective_cube(),
        "flipped_subset": partly_flipped_cube(),
        "interpenetrating": interpenetrating_cubes(),
        "nested_inner_flipped": nested_cubes_inner_flipped(),
        "open_quad": grid_plane(1),
        "open_disk": disk(),
        "mobius": mobius(),
        "coplanar_duplicates": coplanar_duplicates(),
        "edge_fan": fin_cube(),
        "bowtie": bowtie(),
        "uv_seam_plane": grid_plane(2, uv_seam=True),
        "scene": scene(),
        "subdivided_cube": subdivided_cube(),
        "disk_offset": IndexedMesh(disk_b.vertices + np.array([0.0, 0.0, 0.5]), disk_b.faces),
    }
