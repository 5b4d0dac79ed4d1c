"""Recover per-corner UVs and per-face materials on the repaired mesh."""
from __future__ import annotations

import logging
from collections import Counter, defaultdict
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exact import BOUNDARY, INSIDE, ExactPoint, barycentric, point_in_triangle
from .mesh_io import IndexedMesh

log = logging.getLogger(__name__)


def uv_charts(mesh: IndexedMesh) -> np.ndarray:
    """Chart id per face: faces joined across edges where material and both UVs agree."""
    from .topology import build_adjacency

    n = mesh.n_faces
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (u, v), inc in build_adjacency(mesh).items():
        for i in range(len(inc)):
            for j in range(i + 1, len(inc)):
                f, g = inc[i][0], inc[j][0]
                if _continuous(mesh, f, g, u, v):
                    a, b = find(f), find(g)
                    if a != b:
                        parent[max(a, b)] = min(a, b)
    return np.array([find(i) for i in range(n)], dtype=np.int64)


def _continuous(mesh: IndexedMesh, f: int, g: int, u: int, v: int) -> bool:
    if mesh.face_material is not None and mesh.face_material[f] != mesh.face_material[g]:
        return False
    if mesh.uvs is None:
        return True
    rf, rg = list(mesh.faces[f]), list(mesh.faces[g])
    for w in (u, v):
        a = mesh.uvs[mesh.face_uv_corners[f][rf.index(w)]]
        b = mesh.uvs[mesh.face_uv_corners[g][rg.index(w)]]
        if not np.array_equal(a, b):
            return False
    return True


def attribute_class(source: IndexedMesh, charts: np.ndarray, face: Optional[int]):
    """Grouping key for simplification: 'extra' or (material, chart) of a source face."""
    if face is None or face < 0:
        return ("extra",)
    mat = None if source.face_material is None else source.face_material[face]
    return ("face", mat, int(charts[face]))


def _corner_uv(p: ExactPoint, sources: Sequence[int], source: IndexedMesh, src_points: Sequence[ExactPoint]):
    """UV of an exact point by barycentric interpolation on the lowest containing source face."""
    chosen = None
    for s in sorted(sources):
        tri = [src_points[i] for i in source.faces[s]]
        try:
            if point_in_triangle(p, tri) in (INSIDE, BOUNDARY):
                chosen = s
                break
        except ValueError:
            continue
    if chosen is None:
        chosen = min(sources)  # off every face: extrapolate on the first one
    tri = [src_points[i] for i in source.faces[chosen]]
    w = barycentric(p, tri)
    uv = source.uvs[source.face_uv_corners[chosen]]
    return tuple(float(sum(w[k] * Fraction(float(uv[k, c])) for k in range(3))) for c in range(2))


def recover_attributes(mesh: IndexedMesh, points: Sequence[ExactPoint],
                       face_sources: Sequence[Optional[Sequence[int]]], source: IndexedMesh,
                       src_points: Optional[Sequence[ExactPoint]] = None):
    """Attach UVs and materials to ``mesh``.

    ``face_sources[f]`` lists the source-mesh faces whose region face ``f``
    lies in (None for extra faces). ``source`` is the offset-stage mesh, whose
    offset copies and side walls already carry their origin's attributes.
    Inherited corners interpolate exactly; extra corners are flood-filled from
    one-ring neighbours round by round. Returns ``(mesh, info)``.
    """
    info = {"unreached_corners": 0, "missing_source_uvs": False}
    n = mesh.n_faces
    if src_points is None:
        src_points = [ExactPoint.from_floats(v) for v in source.vertices.tolist()]
    faces = mesh.faces.tolist()
    has_uv = source.uvs is not None
    has_mat = source.face_material is not None
    corner_uv: Dict[Tuple[int, int], Tuple[float, float]] = {}
    material: List[Optional[str]] = [None] * n
    assigned_mat = [False] * n
    for f in range(n):
        srcs = face_sources[f]
        if not srcs:
            continue
        if has_mat:
            material[f] = source.face_material[min(srcs)]
            assigned_mat[f] = True
        if has_uv:
            for k in range(3):
                corner_uv[(f, k)] = _corner_uv(points[faces[f][k]], srcs, source, src_points)
    if has_uv:
        _flood_uvs(faces, mesh.n_vertices, corner_uv, info)
    if has_mat:
        _flood_materials(faces, material, assigned_mat)
    uvs = corners = None
    if has_uv:
        table: Dict[Tuple[float, float], int] = {}
        corners = np.zeros((n, 3), dtype=np.int64)
        for f in range(n):
            for k in range(3):
                uv = corner_uv.get((f, k), (0.0, 0.0))
                corners[f, k] = table.setdefault(uv, len(table))
        uvs = np.array(list(table), dtype=np.float64).reshape(-1, 2)
    elif any(face_sources):
        info["missing_source_uvs"] = True
    out = IndexedMesh(mesh.vertices, mesh.faces, uvs, corners, tuple(material) if has_mat else None)
    return out, info


def _flood_uvs(faces, n_vertices, corner_uv, info) -> None:
    nbrs: Dict[int, set] = defaultdict(set)
    corners_at: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for f, tri in enumerate(faces):
        for k in range(3):
            corners_at[tri[k]].append((f, k))
            nbrs[tri[k]].update((tri[(k + 1) % 3], tri[(k + 2) % 3]))
    todo = sorted((f, k) for f in range(len(faces)) for k in range(3) if (f, k) not in corner_uv)
    rounds = 0
    while todo:
        rounds += 1
        fresh = {}
        for f, k in todo:
            vals = []
            for u in sorted(nbrs[faces[f][k]]):
                got = [corner_uv[c] for c in corners_at[u] if c in corner_uv]
                if got:
                    vals.append((sum(g[0] for g in got) / len(got), sum(g[1] for g in got) / len(got)))
            if vals:
                fresh[(f, k)] = (sum(v[0] for v in vals) / len(vals), sum(v[1] for v in vals) / len(vals))
        if not fresh:
            break
        corner_uv.update(fresh)
        todo = [c for c in todo if c not in fresh]
    if todo:
        info["unreached_corners"] = len(todo)
        log.warning("%d UV corners unreachable by flood fill; set to (0, 0)", len(todo))
    info["uv_rounds"] = rounds


def _flood_materials(faces, material, assigned) -> None:
    faces_at: Dict[int, List[int]] = defaultdict(list)
    for f, tri in enumerate(faces):
        for v in tri:
            faces_at[v].append(f)
    todo = [f for f in range(len(faces)) if not assigned[f]]
    while todo:
        fresh = {}
        for f in todo:
            ring = sorted({g for v in faces[f] for g in faces_at[v] if g != f and assigned[g]})
            if ring:
                votes = Counter(material[g] for g in ring)
                top = max(votes.values())
                fresh[f] = min((m for m, c in votes.items() if c == top), key=lambda m: (m is None, str(m)))
        if not fresh:
            break
        for f, m in fresh.items():
            material[f] = m
            assigned[f] = True
        todo = [f for f in todo if f not in fresh]
