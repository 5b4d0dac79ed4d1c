"""Edge adjacency, patch flood fill, watertight/manifold predicates and
non-manifold splitting."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

import numpy as np

from .mesh_io import IndexedMesh

Edge = Tuple[int, int]
# (face index, +1 if the face walks the edge from low to high vertex id else -1)
Incidence = Tuple[int, int]


class NonManifoldSplitError(ValueError):
    pass


def build_adjacency(mesh: IndexedMesh) -> Dict[Edge, List[Incidence]]:
    adj: Dict[Edge, List[Incidence]] = defaultdict(list)
    for fi, (a, b, c) in enumerate(mesh.faces.tolist()):
        for u, v in ((a, b), (b, c), (c, a)):
            if u < v:
                adj[(u, v)].append((fi, 1))
            else:
                adj[(v, u)].append((fi, -1))
    return dict(adj)


@dataclass(frozen=True)
class Patch:
    faces: FrozenSet[int]
    contains_nonmanifold_boundary: bool


def group_patches(
    mesh: IndexedMesh,
    forbid_nonmanifold: bool = False,
    adjacency: Dict[Edge, List[Incidence]] = None,
    face_subset=None,
) -> List[Patch]:
    """Flood-fill faces into consistently oriented patches.

    Growth crosses an edge between two faces that traverse it in opposite
    directions. With ``forbid_nonmanifold`` it only crosses edges with exactly
    two incidences. Seeds are taken in ascending face order so the result is
    deterministic. ``face_subset`` restricts grouping to those faces; the
    adjacency is then computed on the subset only.
    """
    if face_subset is not None:
        allowed = np.zeros(mesh.n_faces, bool)
        allowed[np.asarray(list(face_subset), dtype=np.int64)] = True
    else:
        allowed = np.ones(mesh.n_faces, bool)
    if adjacency is None:
        adjacency = build_adjacency(mesh)
    neighbours: Dict[int, List[int]] = defaultdict(list)
    nonmanifold_face = np.zeros(mesh.n_faces, bool)
    for inc in adjacency.values():
        inc = [x for x in inc if allowed[x[0]]]
        if len(inc) > 2:
            for f, _ in inc:
                nonmanifold_face[f] = True
            if forbid_nonmanifold:
                continue
        for i, (f, d) in enumerate(inc):
            for g, e in inc[i + 1 :]:
                if d != e and f != g:
                    neighbours[f].append(g)
                    neighbours[g].append(f)
    seen = ~allowed
    patches = []
    for seed in range(mesh.n_faces):
        if seen[seed]:
            continue
        seen[seed] = True
        stack, members = [seed], [seed]
        while stack:
            f = stack.pop()
            for g in neighbours.get(f, ()):
                if not seen[g]:
                    seen[g] = True
                    stack.append(g)
                    members.append(g)
        patches.append(Patch(frozenset(members), bool(nonmanifold_face[members].any())))
    return patches


def is_watertight(mesh: IndexedMesh) -> bool:
    """Every edge has equally many traversals in each direction (and >= 2)."""
    if mesh.n_faces == 0:
        return False
    for inc in build_adjacency(mesh).values():
        if len(inc) < 2 or sum(d for _, d in inc) != 0:
            return False
    return True


def _vertex_fans(mesh: IndexedMesh, links: Dict[Edge, List[Tuple[int, int]]]):
    """Group the faces around every vertex into fans.

    ``links[edge]`` lists face pairs glued across ``edge``. Returns a dict
    ``vertex -> list of face sets``.
    """
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for fi, face in enumerate(mesh.faces.tolist()):
        for v in face:
            parent[(v, fi)] = (v, fi)
    for (u, v), pairs in links.items():
        for f, g in pairs:
            for w in (u, v):
                a, b = find((w, f)), find((w, g))
                if a != b:
                    parent[max(a, b)] = min(a, b)
    fans: Dict[int, Dict[tuple, List[int]]] = defaultdict(dict)
    for v, fi in sorted(parent):
        fans[v].setdefault(find((v, fi)), []).append(fi)
    return {v: list(groups.values()) for v, groups in fans.items()}


def is_manifold(mesh: IndexedMesh) -> bool:
    """Edges carry at most two faces, every vertex sees one fan, no isolated vertices."""
    adj = build_adjacency(mesh)
    links = {}
    for e, inc in adj.items():
        if len(inc) > 2:
            return False
        if len(inc) == 2:
            links[e] = [(inc[0][0], inc[1][0])]
    used = np.zeros(mesh.n_vertices, bool)
    used[mesh.faces.reshape(-1)] = True
    if not used.all():
        return False
    return all(len(groups) == 1 for groups in _vertex_fans(mesh, links).values())


def _pair_around_edge(mesh: IndexedMesh, edge: Edge, inc: List[Incidence]) -> List[Tuple[int, int]]:
    """Pair the faces around a balanced non-manifold edge by angle.

    A face walking the edge in the axis direction has its normal pointing in
    the counter-clockwise rotation sense, so the sector clockwise of it lies on
    its back side. Each face walking against the axis is glued to the next
    face counter-clockwise, which closes the sector they share.
    """
    u, v = edge
    p0 = mesh.vertices[u]
    axis = mesh.vertices[v] - p0
    axis = axis / np.linalg.norm(axis)
    ref = None
    entries = []
    for f, d in inc:
        w = [x for x in mesh.faces[f].tolist() if x != u and x != v][0]
        r = mesh.vertices[w] - p0
        r = r - axis * np.dot(r, axis)
        if ref is None:
            ref = r / np.linalg.norm(r)
            ref2 = np.cross(axis, ref)
        ang = math.atan2(float(np.dot(r, ref2)), float(np.dot(r, ref)))
        entries.append((ang, f, d))
    entries.sort()
    n = len(entries)
    # rotate so the sequence alternates starting from a backward face
    start = None
    for s in range(n):
        if all(entries[(s + k) % n][2] == (-1 if k % 2 == 0 else 1) for k in range(n)):
            start = s
            break
    if start is None:
        # coincident angles can hide the alternation; fall back to direction order
        back = [f for _, f, d in entries if d < 0]
        fwd = [f for _, f, d in entries if d > 0]
        return list(zip(back, fwd))
    seq = [entries[(start + k) % n] for k in range(n)]
    return [(seq[k][1], seq[k + 1][1]) for k in range(0, n, 2)]


def split_nonmanifold(mesh: IndexedMesh, return_origin: bool = False):
    """Duplicate vertices so every edge has two faces and every vertex one fan.

    Requires balanced edges; raises :class:`NonManifoldSplitError` on an odd
    or unbalanced incidence count. With ``return_origin`` also returns, per
    output vertex, the input vertex it copies.
    """
    adj = build_adjacency(mesh)
    links: Dict[Edge, List[Tuple[int, int]]] = {}
    for e, inc in adj.items():
        if len(inc) % 2 or sum(d for _, d in inc) != 0:
            raise NonManifoldSplitError(f"edge {e} has unbalanced incidences {inc}")
        if len(inc) == 2:
            links[e] = [(inc[0][0], inc[1][0])]
        else:
            links[e] = _pair_around_edge(mesh, e, inc)
    fans = _vertex_fans(mesh, links)
    faces = mesh.faces.copy()
    verts = list(mesh.vertices)
    origin = list(range(mesh.n_vertices))
    for v in sorted(fans):
        groups = fans[v]
        for group in groups[1:]:
            nv = len(verts)
            verts.append(mesh.vertices[v])
            origin.append(v)
            for f in group:
                faces[f][faces[f] == v] = nv
    out = IndexedMesh(np.array(verts).reshape(-1, 3), faces, mesh.uvs, mesh.face_uv_corners, mesh.face_material)
    if return_origin:
        return out, np.asarray(origin, dtype=np.int64)
    return out


def remove_unused_vertices(mesh: IndexedMesh) -> Tuple[IndexedMesh, np.ndarray]:
    """Compact the vertex array; returns the mesh and old->new index map (-1 unused)."""
    used = np.zeros(mesh.n_vertices, bool)
    used[mesh.faces.reshape(-1)] = True
    remap = -np.ones(mesh.n_vertices, dtype=np.int64)
    remap[used] = np.arange(int(used.sum()))
    out = IndexedMesh(mesh.vertices[used], remap[mesh.faces], mesh.uvs, mesh.face_uv_corners, mesh.face_material)
    return out, remap
