"""Facet reorientation, classification, the interior/exterior min cut, and
interface extraction."""
from __future__ import annotations

import csv
import itertools
import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import RepairConfig
from .exact import ExactPoint, dominant_axis
from .maxflow import MaxFlow, to_integer_capacities
from .measures import FaceMeasures, measures_from_counts, plan_samples, trace_sample_counts
from .mesh_io import IndexedMesh
from .partition import CellComplex, _orient_h, _project_h
from .topology import build_adjacency, group_patches

log = logging.getLogger(__name__)

VISIBLE, INVISIBLE, EXTRA = 0, 1, 2


# ------------------------------------------------------------ triangulation


def triangulate_loop(points: Sequence[ExactPoint], loop: Sequence[int], normal) -> List[Tuple[int, int, int]]:
    """Triangulate a convex loop that may contain collinear (flat) vertices.

    Ears are cut at strictly convex corners, choosing one whose removal keeps
    the rest non-degenerate, so no zero-area triangle is produced and no
    vertex is added.
    """
    k = dominant_axis(normal)
    sgn = (-1 if k == 1 else 1) * (1 if normal[k] > 0 else -1)
    ring = list(loop)
    proj = {i: _project_h(points[i], k) for i in ring}

    def turn(a, b, c):
        return sgn * _orient_h(proj[a], proj[b], proj[c])

    tris = []
    while len(ring) > 3:
        n = len(ring)
        convex = [j for j in range(n) if turn(ring[j - 1], ring[j], ring[(j + 1) % n]) > 0]
        chosen = None
        for j in convex:
            rest = ring[:j] + ring[j + 1:]
            m = len(rest)
            if any(turn(rest[q - 1], rest[q], rest[(q + 1) % m]) > 0 for q in range(m)):
                chosen = j
                break
        if chosen is None:
            break
        j = chosen
        tris.append((ring[j - 1], ring[j], ring[(j + 1) % n]))
        ring.pop(j)
    if len(ring) == 3:
        if turn(*ring) > 0:
            tris.append(tuple(ring))
    return tris


@dataclass(frozen=True)
class FacetSoup:
    """Triangulated facets: ``mesh`` vertices are complex point ids."""

    mesh: IndexedMesh
    tri_facet: np.ndarray


def facet_soup(cx: CellComplex, facets: Sequence[int], signs: Optional[Sequence[int]] = None) -> FacetSoup:
    """Triangles of the given facets, wound about the plane normal times ``signs``."""
    verts = np.array([p.to_floats() for p in cx.points]) if cx.points else np.zeros((0, 3))
    tris, owner = [], []
    for idx, f in enumerate(facets):
        s = 1 if signs is None else signs[idx]
        for t in triangulate_loop(cx.points, cx.facet_loops[f], cx.facet_planes[f].normal):
            tris.append(t if s > 0 else t[::-1])
            owner.append(f)
    faces = np.asarray(tris, dtype=np.int64).reshape(-1, 3)
    return FacetSoup(IndexedMesh(verts, faces), np.asarray(owner, dtype=np.int64))


# ------------------------------------------------------------ facet measures


def mapped_facets(cx: CellComplex) -> List[int]:
    return [f for f, p in enumerate(cx.provenance) if p is not None]


def trace_facet_measures(cx: CellComplex, config: RepairConfig, backend: Optional[str] = None) -> FaceMeasures:
    """Trace the mapped facets (wound like their source faces).

    Only mapped facets are traced: the unmapped ones include the box hull and
    would block every ray. Samples are drawn per triangle and aggregated per
    facet; unmapped facets get zero measures.
    """
    fids = mapped_facets(cx)
    soup = facet_soup(cx, fids, [cx.provenance_sign[f] for f in fids])
    n = cx.n_facets
    if soup.mesh.n_faces == 0:
        z = np.zeros(n)
        return FaceMeasures(z, z.copy(), z.copy(), np.zeros((0, 2), np.int32), np.zeros(0, np.int64),
                            config.n_dirs, config.visibility_threshold)
    plan = plan_samples(soup.mesh, config)
    counts = trace_sample_counts(soup.mesh, plan, config, backend)
    return measures_from_counts(counts, soup.tri_facet[plan.sample_face], n, config.n_dirs,
                                config.visibility_threshold)


# ------------------------------------------------------------ reorientation


def reorient_facets(cx: CellComplex, measures: FaceMeasures, visibility_threshold: float = 0.5):
    """Orientation sign per facet relative to its plane normal (0 for extra facets).

    Mapped facets start oriented like their source face and are grouped into
    patches that never cross a non-manifold edge. Patches lying in one plane
    are merged across edges where the union stays manifold and consistent.
    Patches with negative area-weighted orientation over their visible
    facets are flipped. Returns ``(signs, n_flipped_patches)``.
    """
    fids = mapped_facets(cx)
    signs = np.zeros(cx.n_facets, dtype=np.int64)
    if not fids:
        return signs, 0
    base = [cx.provenance_sign[f] for f in fids]
    soup = facet_soup(cx, fids, base)
    mesh = soup.mesh
    adj = build_adjacency(mesh)
    patches = group_patches(mesh, forbid_nonmanifold=True, adjacency=adj)
    tri_patch = np.empty(mesh.n_faces, dtype=np.int64)
    for i, p in enumerate(patches):
        tri_patch[list(p.faces)] = i
    # merge co-planar patches whose union stays manifold and consistently oriented
    plane_of = [{cx.facet_planes[soup.tri_facet[t]].canonical()[0] for t in p.faces} for p in patches]
    parent = list(range(len(patches)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    candidates = set()
    for inc in adj.values():
        ps = {int(tri_patch[t]) for t, _ in inc}
        if len(ps) > 1:
            for a, b in itertools.combinations(sorted(ps), 2):
                if len(plane_of[a]) == 1 and plane_of[a] == plane_of[b]:
                    candidates.add((a, b))
    for a, b in sorted(candidates):
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        members = {p for p in range(len(patches)) if find(p) in (ra, rb)}
        ok = True
        for inc in adj.values():
            sub = [d for t, d in inc if tri_patch[t] in members]
            if len(sub) > 2 or (len(sub) == 2 and sub[0] == sub[1]):
                ok = False
                break
        if ok:
            parent[max(ra, rb)] = min(ra, rb)
    groups: Dict[int, List[int]] = {}
    for t in range(mesh.n_faces):
        groups.setdefault(find(int(tri_patch[t])), []).append(t)
    # area-weighted orientation over the visible facets of each merged patch
    vis = measures.visibility > visibility_threshold
    n_flipped = 0
    facet_flip: Dict[int, int] = {}
    for root in sorted(groups):
        facets = sorted({int(soup.tri_facet[t]) for t in groups[root]})
        num = den = 0.0
        for f in facets:
            if vis[f]:
                a = cx.facet_area(f)
                num += a * measures.orientation[f]
                den += a
        flip = den > 0 and num / den < 0
        n_flipped += int(flip)
        for f in facets:
            facet_flip[f] = -1 if flip else 1
    for f, b in zip(fids, base):
        signs[f] = b * facet_flip[f]
    return signs, n_flipped


def classify_facets(cx: CellComplex, measures: FaceMeasures, visibility_threshold: float = 0.5) -> np.ndarray:
    out = np.full(cx.n_facets, EXTRA, dtype=np.int8)
    for f, p in enumerate(cx.provenance):
        if p is not None:
            out[f] = VISIBLE if measures.visibility[f] > visibility_threshold else INVISIBLE
    return out


# ------------------------------------------------------------------ the cut


@dataclass
class CutProblem:
    n_cells: int                      # nodes 0..n_cells-1 are cells, node n_cells is outside
    data_interior: List[float]        # D(I) per node
    data_exterior: List[float]        # D(E) per node
    edges: Dict[Tuple[int, int], float]

    @property
    def outer(self) -> int:
        return self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    def pairwise(self, a_label: bool, b_label: bool, w: float) -> float:
        return w if a_label != b_label else 0.0


def build_cut(cx: CellComplex, classes: np.ndarray, signs: np.ndarray) -> CutProblem:
    """Data terms from visible facets and one smoothness edge per extra facet."""
    n = cx.n_cells
    d_i = [0.0] * (n + 1)
    d_e = [0.0] * (n + 1)
    acc_i = [Fraction(0)] * (n + 1)
    acc_e = [Fraction(0)] * (n + 1)
    edges: Dict[Tuple[int, int], Fraction] = {}
    for f in range(cx.n_facets):
        pos, neg = cx.facet_cells[f]
        if classes[f] == EXTRA:
            a, b = (pos, neg) if pos < neg else (neg, pos)
            edges[(a, b)] = edges.get((a, b), Fraction(0)) + Fraction(cx.facet_area(f))
        elif classes[f] == VISIBLE:
            area = Fraction(cx.facet_area(f))
            into, outof = (pos, neg) if signs[f] > 0 else (neg, pos)
            # normal pointing into a cell argues for that cell being exterior
            acc_i[into] += area
            acc_e[outof] += area
    for c in range(n + 1):
        d_i[c] = float(acc_i[c])
        d_e[c] = float(acc_e[c])
    w = {k: float(v) for k, v in edges.items()}
    for k, v in w.items():
        # regular: S(I,I) = S(E,E) = 0 <= S(I,E) = S(E,I)
        assert v >= 0.0 and k[0] != k[1], "irregular cut term"
    return CutProblem(n, d_i, d_e, w)


def energy(problem: CutProblem, interior: Sequence[bool]) -> Fraction:
    """Exact energy of a labeling (True = Interior); infinite if outside is Interior."""
    if interior[problem.outer]:
        return Fraction(10) ** 300
    e = Fraction(0)
    for c in range(problem.n_nodes):
        e += Fraction(problem.data_interior[c] if interior[c] else problem.data_exterior[c])
    for (a, b), w in problem.edges.items():
        if interior[a] != interior[b]:
            e += Fraction(w)
    return e


def solve_cut(problem: CutProblem) -> np.ndarray:
    """Globally optimal labeling via max-flow; True marks Interior.

    Source side is Exterior, sink side Interior; the outside node is tied to
    the source. A node is Interior only if it can still reach the sink in the
    residual graph, so undecided components default to Exterior.
    """
    n = problem.n_nodes
    s, t = n, n + 1
    keys = sorted(problem.edges)
    raw = problem.data_interior + problem.data_exterior + [problem.edges[k] for k in keys]
    ints, _ = to_integer_capacities(raw)
    di, de, ew = ints[:n], ints[n:2 * n], ints[2 * n:]
    g = MaxFlow(n + 2)
    for v in range(n):
        if v == problem.outer:
            g.add_edge(s, v, None)
        elif di[v]:
            g.add_edge(s, v, di[v])
        if de[v]:
            g.add_edge(v, t, de[v])
    for (a, b), w in zip(keys, ew):
        if w:
            g.add_edge(a, b, w, w)
    g.max_flow(s, t)
    reach = g.reaches(t)
    return np.array(reach[:n], dtype=bool)


def brute_force(problem: CutProblem):
    """Exhaustive optimum for small problems (outside fixed Exterior).

    Walks all labelings in Gray-code order on exact integer costs, so each
    step only re-prices one node and its edges.
    """
    n = problem.n_cells
    if n > 20:
        raise ValueError("too many cells for exhaustive search")
    N = problem.n_nodes
    keys = sorted(problem.edges)
    raw = problem.data_interior + problem.data_exterior + [problem.edges[k] for k in keys]
    ints, _ = to_integer_capacities(raw)
    di, de, ew = ints[:N], ints[N:2 * N], ints[2 * N:]
    nbrs: List[List[Tuple[int, int]]] = [[] for _ in range(N)]
    for (a, b), w in zip(keys, ew):
        nbrs[a].append((b, w))
        nbrs[b].append((a, w))
    lab = [False] * N
    cur = sum(de)
    best_e, best = cur, 0
    code = 0
    for step in range(1, 1 << n):
        v = (step & -step).bit_length() - 1
        code ^= 1 << v
        before = lab[v]
        delta = (de[v] - di[v]) if before else (di[v] - de[v])
        for u, w in nbrs[v]:
            delta += -w if lab[u] != before else w
        lab[v] = not before
        cur += delta
        if cur < best_e:
            best_e, best = cur, code
    out = np.array([(best >> i) & 1 == 1 for i in range(n)] + [False], dtype=bool)
    return out, energy(problem, out)


def write_cut_csv(problem: CutProblem, interior: np.ndarray, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    with open(os.path.join(directory, "cells.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label", "D_I", "D_E"])
        for c in range(problem.n_nodes):
            w.writerow([c, "I" if interior[c] else "E", problem.data_interior[c], problem.data_exterior[c]])
    with open(os.path.join(directory, "edges.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["a", "b", "weight"])
        for (a, b), wt in sorted(problem.edges.items()):
            w.writerow([a, b, wt])


# --------------------------------------------------------------- extraction


@dataclass(frozen=True)
class Interface:
    mesh: IndexedMesh
    tri_facet: np.ndarray     # facet each triangle came from
    tri_source: np.ndarray    # mapped source face, -1 for extra facets
    points: List[ExactPoint]  # exact position of each output vertex


def extract_interface(cx: CellComplex, interior: np.ndarray) -> Interface:
    """Facets between Interior and Exterior cells, wound from Interior to Exterior."""
    lab = list(interior[: cx.n_cells]) + [False]
    chosen, signs = [], []
    for f in range(cx.n_facets):
        pos, neg = cx.facet_cells[f]
        if lab[pos] == lab[neg]:
            continue
        chosen.append(f)
        # the loop normal points toward ``pos``; keep it when ``pos`` is exterior
        signs.append(1 if not lab[pos] else -1)
    soup = facet_soup(cx, chosen, signs)
    used = np.unique(soup.mesh.faces) if soup.mesh.n_faces else np.zeros(0, np.int64)
    remap = np.full(len(cx.points), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    verts = soup.mesh.vertices[used] if len(used) else np.zeros((0, 3))
    faces = remap[soup.mesh.faces] if soup.mesh.n_faces else np.zeros((0, 3), np.int64)
    src = np.array([-1 if cx.provenance[f] is None else cx.provenance[f] for f in soup.tri_facet],
                   dtype=np.int64)
    return Interface(IndexedMesh(verts, faces), soup.tri_facet, src, [cx.points[i] for i in used])
