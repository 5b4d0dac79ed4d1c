"""Boundary-constrained re-triangulation of co-planar face groups.

Faces are grouped by exact oriented supporting plane and attribute class, so
UV and material seams are always group boundaries. A vertex is dropped only
when every group around it sees it either as an interior vertex or as a
straight (collinear) point of its boundary, which keeps neighbouring groups
consistent and the surface free of T-junctions. Each group is then rebuilt
from its reduced boundary loops by exact ear clipping. No vertex moves and
none is added.
"""
from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Hashable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .exact import (
    BOUNDARY,
    INSIDE,
    ExactPlane,
    ExactPoint,
    dominant_axis,
    intersect_segment_plane,
    orient3d,
    point_in_triangle,
)
from .mesh_io import IndexedMesh
from .partition import _orient_h, _project_h

log = logging.getLogger(__name__)


@dataclass
class Group:
    faces: List[int]
    plane: ExactPlane
    key: Hashable
    loops: List[List[int]] = field(default_factory=list)  # outer loop first, then holes
    interior: Set[int] = field(default_factory=set)
    simple: bool = True  # boundary decomposes into vertex-disjoint loops with one outer


@dataclass
class BoundaryGraph:
    groups: List[Group]
    face_group: np.ndarray
    # boundary edges between co-planar, same-orientation groups of different attribute class
    seams: List[Tuple[int, int]] = field(default_factory=list)
    removable: Set[int] = field(default_factory=set)


# ------------------------------------------------------------ 2D predicates


class _Frame:
    """Exact projection of a plane onto its dominant axis, oriented ccw-positive."""

    def __init__(self, points: Sequence[ExactPoint], plane: ExactPlane):
        n = plane.normal
        self.k = dominant_axis(n)
        self.sgn = (-1 if self.k == 1 else 1) * (1 if n[self.k] > 0 else -1)
        self.points = points
        self.cache: Dict[int, tuple] = {}

    def p(self, i):
        q = self.cache.get(i)
        if q is None:
            q = self.cache[i] = _project_h(self.points[i], self.k)
        return q

    def turn(self, a, b, c) -> int:
        return self.sgn * _orient_h(self.p(a), self.p(b), self.p(c))

    def f(self, i):
        x, y, w = self.p(i)
        return x / w, y / w

    def area2(self, loop) -> Fraction:
        """Twice the signed area (ccw positive) of a loop."""
        s = Fraction(0)
        for j in range(len(loop)):
            x0, y0, w0 = self.p(loop[j])
            x1, y1, w1 = self.p(loop[(j + 1) % len(loop)])
            s += Fraction(x0 * y1 - y0 * x1, w0 * w1)
        return self.sgn * s


def _in_closed_triangle(fr: _Frame, a, b, c, x) -> bool:
    return fr.turn(a, b, x) >= 0 and fr.turn(b, c, x) >= 0 and fr.turn(c, a, x) >= 0


def _segments_cross(fr: _Frame, a, b, c, d) -> bool:
    """Segments ab and cd share a point other than a common endpoint id."""
    if len({a, b, c, d}) < 4:
        shared = {a, b} & {c, d}
        if len(shared) == 2:
            return False
        s = shared.pop()
        # collinear overlap beyond the shared endpoint
        u = b if a == s else a
        v = d if c == s else c
        if fr.turn(s, u, v) != 0:
            return False
        return _same_direction(fr, s, u, v)
    o1, o2 = fr.turn(a, b, c), fr.turn(a, b, d)
    o3, o4 = fr.turn(c, d, a), fr.turn(c, d, b)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return ((o1 == 0 and _on_segment(fr, a, b, c)) or (o2 == 0 and _on_segment(fr, a, b, d))
            or (o3 == 0 and _on_segment(fr, c, d, a)) or (o4 == 0 and _on_segment(fr, c, d, b)))


def _on_segment(fr: _Frame, a, b, x) -> bool:
    (ax, ay), (bx, by), (xx, xy) = (tuple(Fraction(v, fr.p(i)[2]) for v in fr.p(i)[:2]) for i in (a, b, x))
    return min(ax, bx) <= xx <= max(ax, bx) and min(ay, by) <= xy <= max(ay, by)


def _same_direction(fr: _Frame, s, u, v) -> bool:
    (sx, sy), (ux, uy), (vx, vy) = (tuple(Fraction(c, fr.p(i)[2]) for c in fr.p(i)[:2]) for i in (s, u, v))
    return (ux - sx) * (vx - sx) + (uy - sy) * (vy - sy) > 0


# ------------------------------------------------------------ boundaries


def _oriented_plane(points, face) -> Optional[ExactPlane]:
    try:
        return ExactPlane.through(points[face[0]], points[face[1]], points[face[2]])
    except ValueError:
        return None


def detect_boundaries(mesh: IndexedMesh, points: Sequence[ExactPoint],
                      face_class: Optional[Sequence[Hashable]] = None) -> BoundaryGraph:
    """Group co-planar, consistently oriented faces of equal class and trace their loops."""
    F = mesh.n_faces
    face_class = face_class if face_class is not None else [None] * F
    faces = mesh.faces.tolist()
    keys = []
    for fi in range(F):
        h = _oriented_plane(points, faces[fi])
        keys.append(None if h is None else (h, face_class[fi]))
    # faces sharing an edge in opposite directions with the same key join a group
    half: Dict[Tuple[int, int], List[int]] = defaultdict(list)
    for fi, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            half[(u, v)].append(fi)
    parent = list(range(F))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (u, v), fs in half.items():
        for f in fs:
            if keys[f] is None:
                continue
            for g in half.get((v, u), ()):
                if keys[g] == keys[f]:
                    ra, rb = find(f), find(g)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
    members: Dict[int, List[int]] = defaultdict(list)
    for fi in range(F):
        members[find(fi)].append(fi)
    groups: List[Group] = []
    face_group = np.empty(F, dtype=np.int64)
    for root in sorted(members):
        fs = members[root]
        k = keys[fs[0]]
        g = Group(fs, k[0] if k else None, k)
        for f in fs:
            face_group[f] = len(groups)
        if k is None:
            g.simple = False
        else:
            _trace_loops(g, faces, points)
        groups.append(g)
    seams = _seam_edges(groups, faces, face_group)
    bg = BoundaryGraph(groups, face_group, seams)
    bg.removable = _removable_vertices(bg, points, mesh.n_vertices)
    return bg


def _trace_loops(g: Group, faces, points) -> None:
    cnt: Counter = Counter()
    verts = set()
    for f in g.faces:
        a, b, c = faces[f]
        verts.update((a, b, c))
        for u, v in ((a, b), (b, c), (c, a)):
            cnt[(u, v)] += 1
    nxt: Dict[int, int] = {}
    for (u, v), n in cnt.items():
        net = n - cnt.get((v, u), 0)
        if net < 0:
            continue
        if net > 1 or (net == 1 and u in nxt):
            g.simple = False
            return
        if net == 1:
            nxt[u] = v
    loops = []
    seen = set()
    for start in sorted(nxt):
        if start in seen:
            continue
        loop = [start]
        seen.add(start)
        while nxt[loop[-1]] != start:
            v = nxt[loop[-1]]
            if v in seen or v not in nxt:
                g.simple = False
                return
            loop.append(v)
            seen.add(v)
        loops.append(loop)
    fr = _Frame(points, g.plane)
    outer = [l for l in loops if fr.area2(l) > 0]
    holes = [l for l in loops if fr.area2(l) < 0]
    if len(outer) != 1 or len(outer) + len(holes) != len(loops):
        g.simple = False
        return
    g.loops = outer + sorted(holes, key=min)
    g.interior = verts - seen


def _seam_edges(groups: List[Group], faces, face_group) -> List[Tuple[int, int]]:
    out = set()
    owner: Dict[Tuple[int, int], int] = {}
    for gi, g in enumerate(groups):
        for l in g.loops:
            for j in range(len(l)):
                owner[(l[j], l[(j + 1) % len(l)])] = gi
    for (u, v), gi in owner.items():
        gj = owner.get((v, u))
        if gj is None or gj == gi:
            continue
        a, b = groups[gi], groups[gj]
        if a.plane == b.plane and a.key != b.key:
            out.add((min(u, v), max(u, v)))
    return sorted(out)


def _straight(points, a, v, b) -> bool:
    """``v`` lies strictly between ``a`` and ``b`` on one line."""
    P, V, Q = points[a].coords, points[v].coords, points[b].coords
    d1 = [V[k] - P[k] for k in range(3)]
    d2 = [Q[k] - V[k] for k in range(3)]
    cr = (d1[1] * d2[2] - d1[2] * d2[1], d1[2] * d2[0] - d1[0] * d2[2], d1[0] * d2[1] - d1[1] * d2[0])
    return cr == (0, 0, 0) and sum(d1[k] * d2[k] for k in range(3)) > 0


def _removable_vertices(bg: BoundaryGraph, points, n_vertices: int, pinned: Set[int] = frozenset()) -> Set[int]:
    ok = np.ones(n_vertices, bool)
    seen = np.zeros(n_vertices, bool)
    for v in pinned:
        ok[v] = False
    for g in bg.groups:
        on_loop: Dict[int, Tuple[int, int]] = {}
        for l in g.loops:
            for j, v in enumerate(l):
                on_loop[v] = (l[j - 1], l[(j + 1) % len(l)])
        if not g.simple:
            continue
        for v in set(on_loop) | g.interior:
            seen[v] = True
            if v in on_loop:
                a, b = on_loop[v]
                if not _straight(points, a, v, b):
                    ok[v] = False
    return {int(v) for v in np.nonzero(ok & seen)[0]} - _vertices_of_complex_groups(bg)


def _vertices_of_complex_groups(bg: BoundaryGraph) -> Set[int]:
    out: Set[int] = set()
    for g in bg.groups:
        if not g.simple:
            out.update(g.interior)
            for l in g.loops:
                out.update(l)
    return out


# ------------------------------------------------------------ triangulation


def _bridge_holes(fr: _Frame, outer: List[int], holes: List[List[int]]) -> Optional[List[int]]:
    """Join holes to the outer loop with zero-width bridges (weakly simple polygon)."""
    poly = list(outer)
    remaining = [list(h) for h in holes]
    # rightmost holes first so bridges never cross later holes
    remaining.sort(key=lambda h: -max(fr.f(v)[0] for v in h))
    for hole in remaining:
        hv = max(range(len(hole)), key=lambda j: (fr.f(hole[j])[0], -hole[j]))
        h = hole[hv]
        edges = [(poly[j], poly[(j + 1) % len(poly)]) for j in range(len(poly))]
        for other in remaining:
            edges += [(other[j], other[(j + 1) % len(other)]) for j in range(len(other))]
        hx, hy = fr.f(h)
        order = sorted(range(len(poly)), key=lambda j: ((fr.f(poly[j])[0] - hx) ** 2 + (fr.f(poly[j])[1] - hy) ** 2, j))
        chosen = None
        for j in order:
            o = poly[j]
            if o == h:
                continue
            if not _in_wedge(fr, poly[j - 1], o, poly[(j + 1) % len(poly)], h):
                continue
            hp, hn = hole[hv - 1], hole[(hv + 1) % len(hole)]
            if not _in_wedge(fr, hp, h, hn, o):
                continue
            if any(_segments_cross(fr, o, h, a, b) for a, b in edges):
                continue
            chosen = j
            break
        if chosen is None:
            return None
        rot = hole[hv:] + hole[:hv]
        poly = poly[: chosen + 1] + rot + [h] + poly[chosen:]
    return poly


def _in_wedge(fr: _Frame, p, o, n, x) -> bool:
    if fr.turn(p, o, n) >= 0:
        return fr.turn(p, o, x) > 0 and fr.turn(o, n, x) > 0
    return fr.turn(p, o, x) > 0 or fr.turn(o, n, x) > 0


def _angle(fr: _Frame, a, b, c) -> float:
    (ax, ay), (bx, by), (cx, cy) = fr.f(a), fr.f(b), fr.f(c)
    u = (ax - bx, ay - by)
    v = (cx - bx, cy - by)
    return math.atan2(abs(u[0] * v[1] - u[1] * v[0]), u[0] * v[0] + u[1] * v[1])


def ear_clip(fr: _Frame, poly: List[int]) -> Optional[List[Tuple[int, int, int]]]:
    """Ear clipping on a (weakly) simple ccw polygon, smallest angle first."""
    ring = list(poly)
    tris = []
    while len(ring) > 3:
        n = len(ring)
        best, best_key = None, None
        for j in range(n):
            a, b, c = ring[j - 1], ring[j], ring[(j + 1) % n]
            if fr.turn(a, b, c) <= 0:
                continue
            blocked = False
            for x in ring:
                if x in (a, b, c):
                    continue
                if _in_closed_triangle(fr, a, b, c, x):
                    blocked = True
                    break
            if blocked:
                continue
            key = (_angle(fr, a, b, c), j)
            if best_key is None or key < best_key:
                best, best_key = j, key
        if best is None:
            return None
        j = best
        tris.append((ring[j - 1], ring[j], ring[(j + 1) % n]))
        ring.pop(j)
        # drop flat spikes left behind (a, b, a)
        ring = _drop_spikes(ring)
    if len(ring) == 3:
        if fr.turn(*ring) <= 0:
            return None
        tris.append(tuple(ring))
    elif len(ring) > 0:
        return None
    return tris


def _drop_spikes(ring: List[int]) -> List[int]:
    changed = True
    while changed and len(ring) > 3:
        changed = False
        for j in range(len(ring)):
            if ring[j - 1] == ring[(j + 1) % len(ring)]:
                # a zero-width bridge collapsed; remove the tip and one copy
                i1 = j
                i2 = (j + 1) % len(ring)
                for i in sorted((i1, i2), reverse=True):
                    ring.pop(i)
                changed = True
                break
    return ring


def _valid_triangulation(fr: _Frame, loops: List[List[int]], tris) -> bool:
    """Positive triangles whose boundary chain equals the loops."""
    chain: Counter = Counter()
    for a, b, c in tris:
        if fr.turn(a, b, c) <= 0:
            return False
        for u, v in ((a, b), (b, c), (c, a)):
            if chain[(v, u)]:
                chain[(v, u)] -= 1
            else:
                chain[(u, v)] += 1
    want: Counter = Counter()
    for l in loops:
        for j in range(len(l)):
            want[(l[j], l[(j + 1) % len(l)])] += 1
    return +chain == +want


def _triangulate_group(fr: _Frame, loops: List[List[int]]):
    poly = _bridge_holes(fr, loops[0], loops[1:]) if len(loops) > 1 else list(loops[0])
    if poly is None:
        return None
    tris = ear_clip(fr, poly)
    if tris is None or not _valid_triangulation(fr, loops, tris):
        return None
    return tris


# ------------------------------------------------------------ 3D check


def _segment_hits_triangle(p: ExactPoint, q: ExactPoint, tri: Sequence[ExactPoint]) -> bool:
    """Segment interior meets the closed triangle (coplanar contact ignored)."""
    a, b, c = tri
    s1, s2 = orient3d(a, b, c, p), orient3d(a, b, c, q)
    if s1 == s2 or s1 == 0 or s2 == 0:
        return False
    h = ExactPlane.through(a, b, c)
    x = intersect_segment_plane(p, q, h)
    return point_in_triangle(x, tri) in (INSIDE, BOUNDARY)


# ------------------------------------------------------------ public API


def collapse_redundant(mesh: IndexedMesh, boundaries: BoundaryGraph, pinned: Set[int] = frozenset()) -> BoundaryGraph:
    """Drop removable vertices from every group's loops and interior sets.

    Removable vertices are interior to their groups or straight points on
    group boundaries in every group that uses them. Positions never change.
    """
    drop = boundaries.removable - set(pinned)
    groups = []
    for g in boundaries.groups:
        ng = Group(g.faces, g.plane, g.key, simple=g.simple)
        if g.simple:
            ng.loops = [[v for v in l if v not in drop] for l in g.loops]
            ng.interior = {v for v in g.interior if v not in drop}
        else:
            ng.loops = [list(l) for l in g.loops]
            ng.interior = set(g.interior)
        groups.append(ng)
    return BoundaryGraph(groups, boundaries.face_group, boundaries.seams, drop)


@dataclass(frozen=True)
class SimplifyResult:
    mesh: IndexedMesh
    face_parent: np.ndarray  # for each output face, one input face of its group
    face_group: np.ndarray
    groups: List[Group]  # indexed by the input mesh's vertex ids
    kept_vertices: np.ndarray  # input vertex id of each output vertex


def retriangulate(mesh: IndexedMesh, points: Sequence[ExactPoint], boundaries: BoundaryGraph,
                  l_extended: float = 0.0, original: Optional[BoundaryGraph] = None):
    """Rebuild every simple group from its reduced loops.

    Returns ``(tris_per_group, failed_groups)``; ``tris_per_group[g]`` is None
    when the group keeps its original faces.
    """
    faces = mesh.faces
    out: List[Optional[list]] = []
    failed: List[int] = []
    tri_box = None
    for gi, g in enumerate(boundaries.groups):
        if not g.simple or g.interior or any(len(l) < 3 for l in g.loops):
            out.append(None)
            if g.simple and (g.interior or any(len(l) < 3 for l in g.loops)):
                failed.append(gi)
            continue
        fr = _Frame(points, g.plane)
        tris = _triangulate_group(fr, g.loops)
        if tris is None or len(tris) > len(g.faces):
            out.append(None)
            if tris is None:
                failed.append(gi)
            continue
        old_edges = {(min(u, v), max(u, v)) for f in g.faces for u, v in
                     ((faces[f][0], faces[f][1]), (faces[f][1], faces[f][2]), (faces[f][2], faces[f][0]))}
        new_edges = sorted({(min(u, v), max(u, v)) for t in tris for u, v in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}
                           - old_edges)
        if new_edges:
            if tri_box is None:
                tv = mesh.vertices[faces]
                tri_box = (tv.min(axis=1), tv.max(axis=1))
            if _diagonals_intersect(mesh, points, new_edges, set(g.faces), tri_box, l_extended):
                out.append(None)
                failed.append(gi)
                continue
        out.append(tris)
    return out, failed


def _diagonals_intersect(mesh, points, edges, own_faces, tri_box, l_ext) -> bool:
    lo_all, hi_all = tri_box
    faces = mesh.faces
    for u, v in edges:
        seg = mesh.vertices[[u, v]]
        lo = seg.min(axis=0) - l_ext
        hi = seg.max(axis=0) + l_ext
        cand = np.nonzero(np.all(hi_all >= lo, axis=1) & np.all(lo_all <= hi, axis=1))[0]
        for f in cand.tolist():
            if f in own_faces:
                continue
            tri = [points[i] for i in faces[f]]
            if _segment_hits_triangle(points[u], points[v], tri):
                return True
    return False


def simplify(mesh: IndexedMesh, points: Sequence[ExactPoint], face_class=None,
             l_extended: float = 0.0) -> SimplifyResult:
    """Detect boundaries, drop redundant vertices and re-triangulate, with fallbacks.

    A group whose rebuild fails keeps its faces; its vertices are then pinned
    and the remaining groups are redone, so neighbours stay consistent.
    """
    base = detect_boundaries(mesh, points, face_class)
    pinned: Set[int] = set()
    for _ in range(len(base.groups) + 1):
        bg = collapse_redundant(mesh, base, pinned)
        tris, failed = retriangulate(mesh, points, bg, l_extended)
        # a kept group must not reference dropped vertices
        need = set()
        for gi, t in enumerate(tris):
            if t is None:
                for f in base.groups[gi].faces:
                    need.update(int(x) for x in mesh.faces[f])
        bad = need & bg.removable
        if not bad:
            break
        pinned |= bad
    else:  # pragma: no cover - the pinned set only grows, so this terminates earlier
        raise RuntimeError("simplification did not converge")
    new_faces, parent, fgroup = [], [], []
    for gi, g in enumerate(base.groups):
        if tris[gi] is None:
            for f in g.faces:
                new_faces.append(mesh.faces[f].tolist())
                parent.append(f)
                fgroup.append(gi)
        else:
            for t in tris[gi]:
                new_faces.append(list(t))
                parent.append(g.faces[0])
                fgroup.append(gi)
    if len(new_faces) > mesh.n_faces:  # pragma: no cover - guarded per group
        raise AssertionError("simplification increased the face count")
    faces = np.asarray(new_faces, dtype=np.int64).reshape(-1, 3)
    kept = np.unique(faces)
    remap = np.full(mesh.n_vertices, -1, dtype=np.int64)
    remap[kept] = np.arange(len(kept))
    out = IndexedMesh(mesh.vertices[kept], remap[faces])
    log.info("simplify: %d -> %d faces, %d vertices dropped", mesh.n_faces, len(new_faces), len(bg.removable))
    return SimplifyResult(out, np.asarray(parent, dtype=np.int64), np.asarray(fgroup, dtype=np.int64), base.groups,
                          kept)
