"""Exact BSP cell complex over the offset mesh.

The ambient box (5% margin) starts as a single convex cell. Each face, largest
first, splits only the cells whose cross-section with the face plane overlaps
the triangle: first by planes through the triangle edges (perpendicular to
the face), then by the face plane. Every facet lying in a face plane therefore
sits inside a single triangle, which makes the facet -> face mapping
well-defined.

Facets are shared between their two cells and split in place, and every
split edge is recorded, so facet loops stay free of T-junctions: two facets
that touch along a segment list the same vertices along it.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .exact import (
    BOUNDARY,
    INSIDE,
    ExactPlane,
    ExactPoint,
    centroid,
    cross,
    dominant_axis,
    intersect_segment_plane,
    plane_side,
    point_in_triangle,
    vector_area,
)
from .mesh_io import IndexedMesh

log = logging.getLogger(__name__)

OUTER = -1
BOX_MARGIN = Fraction(1, 20)


class _Facet:
    __slots__ = ("loop", "plane", "pos", "neg")

    def __init__(self, loop, plane, pos, neg):
        self.loop = loop      # point ids, counter-clockwise about the plane normal
        self.plane = plane    # ExactPlane; ``pos`` lies on its positive side
        self.pos = pos
        self.neg = neg


@dataclass
class CellComplex:
    points: List[ExactPoint]
    facet_loops: List[List[int]]
    facet_planes: List[ExactPlane]
    facet_cells: List[Tuple[int, int]]  # (cell on positive side, cell on negative side)
    cell_facets: List[List[int]]
    box: Tuple[ExactPoint, ExactPoint]
    provenance: List[Optional[int]] = field(default_factory=list)
    provenance_sign: List[int] = field(default_factory=list)

    @property
    def n_cells(self) -> int:
        return len(self.cell_facets)

    @property
    def n_facets(self) -> int:
        return len(self.facet_loops)

    @property
    def outer_cell(self) -> int:
        return self.n_cells

    def facet_vector_area(self, f: int):
        return vector_area([self.points[i] for i in self.facet_loops[f]])

    def facet_area(self, f: int) -> float:
        a = self.facet_vector_area(f)
        return float(np.sqrt(float(a[0]) ** 2 + float(a[1]) ** 2 + float(a[2]) ** 2))

    def cell_volume(self, c: int) -> Fraction:
        vol = Fraction(0)
        for f in self.cell_facets[c]:
            a = self.facet_vector_area(f)
            p = self.points[self.facet_loops[f][0]].coords
            term = a[0] * p[0] + a[1] * p[1] + a[2] * p[2]
            # loop normal points toward the positive cell, i.e. outward for the negative one
            vol += term if self.facet_cells[f][1] == c else -term
        return vol / 3

    def cell_vertices(self, c: int) -> List[int]:
        return sorted({i for f in self.cell_facets[c] for i in self.facet_loops[f]})

    def facet_side_of(self, f: int, c: int) -> int:
        """+1 when cell ``c`` lies on the positive side of facet ``f``'s plane."""
        pos, neg = self.facet_cells[f]
        if c == pos:
            return 1
        if c == neg:
            return -1
        raise ValueError(f"cell {c} does not border facet {f}")

    def box_volume(self) -> Fraction:
        lo, hi = (p.coords for p in self.box)
        return (hi[0] - lo[0]) * (hi[1] - lo[1]) * (hi[2] - lo[2])

    def mapped_area_by_source(self):
        """Exact summed vector area of facets per mapped source face, oriented like the face."""
        out: Dict[int, list] = {}
        for f, src in enumerate(self.provenance):
            if src is None:
                continue
            a = self.facet_vector_area(f)
            s = self.provenance_sign[f]
            acc = out.setdefault(src, [Fraction(0)] * 3)
            for k in range(3):
                acc[k] += s * a[k]
        return {k: tuple(v) for k, v in out.items()}

    def write_debug(self, directory) -> None:
        import os

        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "complex.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["points", "facets", "cells"])
            w.writerow([len(self.points), self.n_facets, self.n_cells])
        with open(os.path.join(directory, "facets.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["facet_id", "cell_pos", "cell_neg", "source_face", "area"])
            for f in range(self.n_facets):
                src = self.provenance[f] if self.provenance else None
                w.writerow([f, *self.facet_cells[f], "" if src is None else src, self.facet_area(f)])


# ----------------------------------------------------------------- builder


def _orient_h(o, p, r) -> int:
    """Sign of the 2D orientation of homogeneous points (x, y, w), w > 0."""
    v = (o[0] * (p[1] * r[2] - p[2] * r[1]) - o[1] * (p[0] * r[2] - p[2] * r[0])
         + o[2] * (p[0] * r[1] - p[1] * r[0]))
    return (v > 0) - (v < 0)


def _project_h(p: ExactPoint, k: int):
    return (p[1], p[2], p[3]) if k == 0 else ((p[0], p[2], p[3]) if k == 1 else (p[0], p[1], p[3]))


def _sort_convex(pts: List[ExactPoint], normal) -> List[ExactPoint]:
    """Order the vertices of a convex polygon counter-clockwise about ``normal``.

    Pure integer arithmetic: points are sorted by angle around the
    lexicographically lowest vertex; collinear runs are ordered by distance.
    """
    if len(pts) < 3:
        return list(pts)
    k = dominant_axis(normal)
    proj = [_project_h(p, k) for p in pts]
    # lowest x/w, then lowest y/w, compared by cross multiplication
    piv = 0
    for i in range(1, len(proj)):
        a, b = proj[i], proj[piv]
        dx = a[0] * b[2] - b[0] * a[2]
        if dx < 0 or (dx == 0 and a[1] * b[2] - b[1] * a[2] < 0):
            piv = i
    o = proj[piv]

    def dist(q):
        return (abs(q[0] * o[2] - o[0] * q[2]) + abs(q[1] * o[2] - o[1] * q[2]), q[2])

    def cmp(i, j):
        s = _orient_h(o, proj[i], proj[j])
        if s:
            return -s
        di, dj = dist(proj[i]), dist(proj[j])
        lhs, rhs = di[0] * dj[1], dj[0] * di[1]
        return (lhs > rhs) - (lhs < rhs)

    rest = sorted((i for i in range(len(pts)) if i != piv), key=cmp_to_key(cmp))
    # points on the closing edge back to the pivot come out nearest-first; reverse that run
    last = len(rest) - 1
    while last > 0 and _orient_h(o, proj[rest[last - 1]], proj[rest[-1]]) == 0:
        last -= 1
    if last > 0:
        rest[last:] = rest[last:][::-1]
    order = [piv] + rest
    # projected ccw corresponds to ccw about +axis k, with a sign flip when dropping y
    flip = (-1 if k == 1 else 1) * (1 if normal[k] > 0 else -1)
    if flip < 0:
        order = [order[0]] + order[1:][::-1]
    return [pts[i] for i in order]


def _has_area(poly: List[ExactPoint], normal) -> bool:
    k = dominant_axis(normal)
    proj = [_project_h(p, k) for p in poly]
    return any(_orient_h(proj[0], proj[i], proj[i + 1]) for i in range(1, len(proj) - 1))


def _edge_plane(a: ExactPoint, b: ExactPoint, c: ExactPoint, normal) -> ExactPlane:
    """Plane through edge ab perpendicular to the face, with c on its positive side."""
    A, B = a.coords, b.coords
    e = (B[0] - A[0], B[1] - A[1], B[2] - A[2])
    n = cross(normal, e)
    d = -(n[0] * A[0] + n[1] * A[1] + n[2] * A[2])
    h = ExactPlane.from_coefficients(n[0], n[1], n[2], d)
    if plane_side(h, c) < 0:
        h = h.flipped()
    return h


class PartitionBuilder:
    def __init__(self, lo: Sequence[Fraction], hi: Sequence[Fraction]):
        self.points: List[ExactPoint] = []
        self.point_id: Dict[ExactPoint, int] = {}
        self.fpoints: List[Tuple[float, float, float]] = []
        self.facets: Dict[int, _Facet] = {}
        self.cells: Dict[int, set] = {}
        self.cell_bbox: Dict[int, tuple] = {}
        self.splits: Dict[Tuple[int, int], int] = {}
        self._next_facet = 0
        self._next_cell = 0
        self._fplanes = {}
        self.box = (ExactPoint.from_rationals(*lo), ExactPoint.from_rationals(*hi))
        self._init_box(lo, hi)

    # -- bookkeeping
    def _pid(self, p: ExactPoint) -> int:
        i = self.point_id.get(p)
        if i is None:
            i = len(self.points)
            self.points.append(p)
            self.point_id[p] = i
            self.fpoints.append(p.to_floats())
        return i

    def _new_facet(self, loop, plane, pos, neg) -> int:
        fid = self._next_facet
        self._next_facet += 1
        self.facets[fid] = _Facet(loop, plane, pos, neg)
        return fid

    def _new_cell(self, facets) -> int:
        cid = self._next_cell
        self._next_cell += 1
        self.cells[cid] = set(facets)
        return cid

    def _init_box(self, lo, hi):
        corners = {}
        for ix in range(2):
            for iy in range(2):
                for iz in range(2):
                    p = ExactPoint.from_rationals(hi[0] if ix else lo[0], hi[1] if iy else lo[1], hi[2] if iz else lo[2])
                    corners[(ix, iy, iz)] = self._pid(p)
        cid = self._new_cell([])
        for axis in range(3):
            for upper in (0, 1):
                # normal points into the box
                n = [0, 0, 0]
                n[axis] = -1 if upper else 1
                bound = hi[axis] if upper else lo[axis]
                plane = ExactPlane.from_coefficients(n[0], n[1], n[2], -n[axis] * bound)
                pts = []
                for key, pid in corners.items():
                    if key[axis] == upper:
                        pts.append(self.points[pid])
                loop = [self.point_id[p] for p in _sort_convex(pts, plane.normal)]
                fid = self._new_facet(loop, plane, cid, OUTER)
                self.cells[cid].add(fid)
        self._update_bbox(cid)

    def _expand(self, loop: List[int]) -> List[int]:
        splits = self.splits
        n = len(loop)
        if not any(((loop[k], loop[k - 1]) if loop[k] < loop[k - 1] else (loop[k - 1], loop[k])) in splits
                   for k in range(n)):
            return loop
        out = []
        for k in range(n):
            a, b = loop[k], loop[(k + 1) % n]
            out.append(a)
            # insert recorded split points between a and b, recursively
            stack = [(a, b)]
            seq = []
            while stack:
                u, v = stack.pop()
                m = splits.get((u, v) if u < v else (v, u))
                if m is None:
                    seq.append(v)
                else:
                    stack.append((m, v))
                    stack.append((u, m))
            seq.pop()  # the final v is b itself
            out.extend(seq)
        return out

    def _cell_loops(self, cid: int):
        for fid in self.cells[cid]:
            f = self.facets[fid]
            if self.splits:
                f.loop = self._expand(f.loop)
        return [(fid, self.facets[fid]) for fid in sorted(self.cells[cid])]

    def _update_bbox(self, cid: int):
        vs = {i for fid in self.cells[cid] for i in self.facets[fid].loop}
        fp = np.array([self.fpoints[i] for i in vs])
        self.cell_bbox[cid] = (fp.min(axis=0), fp.max(axis=0))

    # -- geometry of a cell against a plane
    def _signs(self, cid, h):
        loops = self._cell_loops(cid)
        sides = {}
        for _, f in loops:
            for i in f.loop:
                if i not in sides:
                    sides[i] = plane_side(h, self.points[i])
        return loops, sides

    def section(self, cid: int, h: ExactPlane) -> List[List[ExactPoint]]:
        """Convex polygons where ``h`` meets the closed cell (cross-section or facets in h)."""
        loops, sides = self._signs(cid, h)
        vals = sides.values()
        if any(s > 0 for s in vals) and any(s < 0 for s in vals):
            pts = {self.points[i] for i, s in sides.items() if s == 0}
            for _, f in loops:
                L = f.loop
                for k in range(len(L)):
                    a, b = L[k], L[(k + 1) % len(L)]
                    if sides[a] * sides[b] < 0:
                        pts.add(intersect_segment_plane(self.points[a], self.points[b], h))
            return [_sort_convex(list(pts), h.normal)]
        out = []
        for _, f in loops:
            if all(sides[i] == 0 for i in f.loop):
                out.append([self.points[i] for i in f.loop])
        return out

    def split(self, cid: int, h: ExactPlane):
        """Split a cell by ``h``; returns (positive cell, negative cell) or None."""
        loops, sides = self._signs(cid, h)
        vals = list(sides.values())
        if not (any(s > 0 for s in vals) and any(s < 0 for s in vals)):
            return None
        cp = self._new_cell([])
        cn = self._new_cell([])
        zero = {i for i, s in sides.items() if s == 0}
        for fid, f in loops:
            L = f.loop
            ss = [sides[i] for i in L]
            if all(s >= 0 for s in ss):
                self._reassign(fid, cid, cp)
                continue
            if all(s <= 0 for s in ss):
                self._reassign(fid, cid, cn)
                continue
            fp, fn = self._cut_facet(fid, sides, zero, h)
            for nf, side_cell in ((fp, cp), (fn, cn)):
                g = self.facets[nf]
                if g.pos == cid:
                    g.pos = side_cell
                else:
                    g.neg = side_cell
                self.cells[side_cell].add(nf)
        loop = [self.point_id[p] for p in _sort_convex([self.points[i] for i in zero], h.normal)]
        g = self._new_facet(loop, h, cp, cn)
        self.cells[cp].add(g)
        self.cells[cn].add(g)
        del self.cells[cid]
        del self.cell_bbox[cid]
        self._update_bbox(cp)
        self._update_bbox(cn)
        return cp, cn

    def _cut_facet(self, fid: int, sides, zero, h: ExactPlane):
        """Replace a facet straddling ``h`` by its two pieces (positive, negative)."""
        f = self.facets[fid]
        L = f.loop
        ss = [sides[i] for i in L]
        lp, ln = [], []
        n = len(L)
        for k in range(n):
            a, b = L[k], L[(k + 1) % n]
            sa, sb = ss[k], ss[(k + 1) % n]
            if sa >= 0:
                lp.append(a)
            if sa <= 0:
                ln.append(a)
            if sa * sb < 0:
                key = (a, b) if a < b else (b, a)
                m = self.splits.get(key)
                if m is None:
                    m = self._pid(intersect_segment_plane(self.points[a], self.points[b], h))
                    self.splits[key] = m
                sides[m] = 0
                zero.add(m)
                lp.append(m)
                ln.append(m)
        fp = self._new_facet(lp, f.plane, f.pos, f.neg)
        fn = self._new_facet(ln, f.plane, f.pos, f.neg)
        for c in (f.pos, f.neg):
            if c != OUTER and c in self.cells:
                self.cells[c].discard(fid)
                self.cells[c].update((fp, fn))
        del self.facets[fid]
        return fp, fn

    def split_facet(self, fid: int, b: ExactPlane):
        """Cut one facet along its intersection line with ``b`` (cells unchanged)."""
        f = self.facets[fid]
        if self.splits:
            f.loop = self._expand(f.loop)
        sides = {i: plane_side(b, self.points[i]) for i in f.loop}
        if not (any(v > 0 for v in sides.values()) and any(v < 0 for v in sides.values())):
            return None
        return self._cut_facet(fid, sides, set(), b)

    def _reassign(self, fid, old, new):
        f = self.facets[fid]
        if f.pos == old:
            f.pos = new
        else:
            f.neg = new
        self.cells[new].add(fid)

    # -- face insertion
    def _candidates(self, lo, hi):
        out = []
        for cid, (bl, bh) in self.cell_bbox.items():
            if (bl <= hi).all() and (bh >= lo).all():
                out.append(cid)
        return sorted(out)

    def insert_face(self, h: ExactPlane, bounds: List[ExactPlane], flo, fhi, tri=None) -> None:
        """Split by the plane of a triangle every cell the triangle passes through.

        ``bounds`` are the triangle's edge planes (perpendicular to ``h``, inner
        side positive). A cell is split by the whole plane ``h`` when its section
        overlaps the triangle interior; the resulting facets on ``h`` are then
        cut along the triangle edges so each lies inside or outside it.
        """
        hf = _float_plane(h)
        bf = [_float_plane(b) for b in bounds]
        key = h.canonical()[0]
        for cid in self._candidates(flo, fhi):
            if cid not in self.cells or self._bbox_misses(cid, hf, bf):
                continue
            if tri is not None and self._separated(cid, tri):
                continue
            if not self._overlaps(cid, h, bounds):
                continue
            res = self.split(cid, h)
            owners = res if res is not None else (cid,)
            work = sorted({fid for c in owners for fid in self.cells[c]
                           if self.facets[fid].plane.canonical()[0] == key})
            for b in bounds:
                nxt = []
                for fid in work:
                    pieces = self.split_facet(fid, b)
                    nxt.extend(pieces if pieces is not None else (fid,))
                work = nxt

    def _bbox_misses(self, cid, hf, bf) -> bool:
        # conservative: only rejects when the margin dwarfs any rounding error
        lo, hi = self.cell_bbox[cid]
        tol = 1e-7 * (float(np.abs(lo).max()) + float(np.abs(hi).max()) + 1.0)
        for n, d, scale in [hf] + bf:
            c = 0.5 * (lo + hi)
            r = 0.5 * (hi - lo)
            v = (float(n @ c) + d) / scale
            reach = float(np.abs(n) @ r) / scale
            if n is hf[0] and abs(v) > reach + tol:
                return True
            if n is not hf[0] and v < -(reach + tol):
                return True
        return False

    def _separated(self, cid, tri) -> bool:
        # some cell facet plane has the whole triangle clearly outside the cell
        tol = 1e-7 * (float(np.abs(tri).max()) + 1.0)
        for fid in self.cells[cid]:
            f = self.facets[fid]
            fp = self._fplanes.get(f.plane)
            if fp is None:
                fp = self._fplanes[f.plane] = _float_plane(f.plane)
            n, d, scale = fp
            v = (tri @ n + d) / scale
            if f.neg == cid:
                v = -v
            if (v < -tol).all():
                return True
        return False

    @staticmethod
    def _straddles(poly, b) -> bool:
        s = [plane_side(b, p) for p in poly]
        return any(x > 0 for x in s) and any(x < 0 for x in s)

    def _overlaps(self, cid, h, bounds) -> bool:
        for poly in self.section(cid, h):
            clipped = poly
            for b in bounds:
                clipped = _clip(clipped, b)
                if len(clipped) < 3:
                    break
            if len(clipped) >= 3 and _has_area(clipped, h.normal):
                return True
        return False

    def finalize(self) -> CellComplex:
        cell_ids = sorted(self.cells)
        cmap = {c: i for i, c in enumerate(cell_ids)}
        outer = len(cell_ids)
        fids = sorted(self.facets)
        fmap = {f: i for i, f in enumerate(fids)}
        loops, planes, fcells = [], [], []
        for f in fids:
            fc = self.facets[f]
            loops.append(self._expand(fc.loop) if self.splits else list(fc.loop))
            planes.append(fc.plane)
            fcells.append((cmap.get(fc.pos, outer), cmap.get(fc.neg, outer)))
        cell_facets = [sorted(fmap[f] for f in self.cells[c]) for c in cell_ids]
        return CellComplex(list(self.points), loops, planes, fcells, cell_facets, self.box)


def _float_plane(h: ExactPlane):
    n = np.array([float(h.a), float(h.b), float(h.c)])
    return n, float(h.d), float(np.linalg.norm(n))


def _clip(poly: List[ExactPoint], b: ExactPlane) -> List[ExactPoint]:
    out = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        sp, sq = plane_side(b, p), plane_side(b, q)
        if sp >= 0:
            out.append(p)
        if sp * sq < 0:
            out.append(intersect_segment_plane(p, q, b))
    return out


# --------------------------------------------------------------- public API


def exact_vertices(mesh: IndexedMesh) -> List[ExactPoint]:
    return [ExactPoint.from_floats(v) for v in mesh.vertices.tolist()]


def _box_bounds(pts: List[ExactPoint]):
    cs = [p.coords for p in pts]
    lo = [min(c[k] for c in cs) for k in range(3)]
    hi = [max(c[k] for c in cs) for k in range(3)]
    ext = [hi[k] - lo[k] for k in range(3)]
    diag_like = max(max(ext), Fraction(1, 1 << 20))
    lo2, hi2 = [], []
    for k in range(3):
        m = BOX_MARGIN * (ext[k] if ext[k] > 0 else diag_like)
        lo2.append(lo[k] - m)
        hi2.append(hi[k] + m)
    return lo2, hi2


def seam_edges(mesh: IndexedMesh, ex: Optional[List[ExactPoint]] = None):
    """Edges shared by two coplanar faces whose attributes disagree across them."""
    from .topology import build_adjacency

    if mesh.face_material is None and mesh.uvs is None:
        return []
    ex = ex or exact_vertices(mesh)
    out = []
    for (u, v), inc in sorted(build_adjacency(mesh).items()):
        if len(inc) != 2:
            continue
        (f, _), (g, _) = inc
        try:
            hf = ExactPlane.through(*(ex[i] for i in mesh.faces[f])).canonical()[0]
            hg = ExactPlane.through(*(ex[i] for i in mesh.faces[g])).canonical()[0]
        except ValueError:
            continue
        if hf != hg:
            continue
        if _attributes_differ(mesh, f, g, u, v):
            out.append(((u, v), f, g))
    return out


def _attributes_differ(mesh: IndexedMesh, f: int, g: int, u: int, v: int) -> bool:
    if mesh.face_material is not None and mesh.face_material[f] != mesh.face_material[g]:
        return True
    if mesh.uvs is not None:
        for w in (u, v):
            cf = mesh.face_uv_corners[f][list(mesh.faces[f]).index(w)]
            cg = mesh.face_uv_corners[g][list(mesh.faces[g]).index(w)]
            if not np.array_equal(mesh.uvs[cf], mesh.uvs[cg]):
                return True
    return False


def build_partition(mesh: IndexedMesh, offsets=None, seams: bool = True) -> CellComplex:
    """BSP complex of ``mesh`` (the offset-stage surface) with facet provenance."""
    ex = exact_vertices(mesh)
    if not ex:
        raise ValueError("empty mesh")
    lo, hi = _box_bounds(ex)
    builder = PartitionBuilder(lo, hi)
    areas = mesh.face_areas()
    order = sorted(range(mesh.n_faces), key=lambda i: (-areas[i], i))
    tri_f = mesh.vertices[mesh.faces]
    diag = float(np.linalg.norm(np.array([float(h - l) for l, h in zip(lo, hi)])))
    pad = 1e-9 * diag
    skipped = 0
    for fi in order:
        a, b, c = (ex[i] for i in mesh.faces[fi])
        try:
            h = ExactPlane.through(a, b, c)
        except ValueError:
            skipped += 1
            continue
        n = h.normal
        bounds = [_edge_plane(a, b, c, n), _edge_plane(b, c, a, n), _edge_plane(c, a, b, n)]
        t = tri_f[fi]
        builder.insert_face(h, bounds, t.min(axis=0) - pad, t.max(axis=0) + pad, t)
    if skipped:
        log.warning("skipped %d zero-area faces during partition", skipped)
    if seams:
        for (u, v), f, g in seam_edges(mesh, ex):
            fa = [ex[i] for i in mesh.faces[f]]
            h = ExactPlane.through(*fa)
            # splitting plane through the seam, perpendicular to the shared face plane
            third = [p for p in fa if p not in (ex[u], ex[v])][0]
            cut = _edge_plane(ex[u], ex[v], third, h.normal)
            region = np.vstack([tri_f[f], tri_f[g]])
            for cid in builder._candidates(region.min(axis=0) - pad, region.max(axis=0) + pad):
                if cid not in builder.cells:
                    continue
                for poly in builder.section(cid, h):
                    if builder._straddles(poly, cut):
                        builder.split(cid, cut)
                        break
    cx = builder.finalize()
    prov, sign = map_facets(cx, mesh, ex)
    cx.provenance = prov
    cx.provenance_sign = sign
    return cx


def map_facets(cx: CellComplex, source: IndexedMesh, ex: Optional[List[ExactPoint]] = None):
    """Facet -> source face whose closed triangle holds the facet barycenter.

    Candidates share the facet's supporting plane; the lowest face id wins.
    Also returns, per facet, +1 when the facet plane normal agrees with the
    face winding normal and -1 otherwise (0 when unmapped).
    """
    ex = ex or exact_vertices(source)
    by_plane: Dict[ExactPlane, List[Tuple[int, int]]] = {}
    for fi in range(source.n_faces):
        tri = [ex[i] for i in source.faces[fi]]
        try:
            key, s = ExactPlane.through(*tri).canonical()
        except ValueError:
            continue
        by_plane.setdefault(key, []).append((fi, s))
    prov: List[Optional[int]] = []
    sign: List[int] = []
    for f in range(cx.n_facets):
        key, fs = cx.facet_planes[f].canonical()
        cands = by_plane.get(key, ())
        hit = None
        if cands:
            bc = centroid(cx.points[i] for i in cx.facet_loops[f])
            for fi, s in cands:
                tri = [ex[i] for i in source.faces[fi]]
                if point_in_triangle(bc, tri) in (INSIDE, BOUNDARY):
                    hit = (fi, s * fs)
                    break
        prov.append(hit[0] if hit else None)
        sign.append(hit[1] if hit else 0)
    return prov, sign
