"""End-to-end repair: measures, reorientation, offsetting, partition, cut,
extraction, simplification, topology fix-up and attribute recovery."""
from __future__ import annotations

import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import extraction as ex
from .attributes import attribute_class, recover_attributes, uv_charts
from .config import RepairConfig, bbox_diagonal
from .exact import ExactPoint
from .hausdorff import hausdorff
from .measures import compute_measures, write_measures_csv
from .mesh_io import IndexedMesh, normalize, save_mesh
from .partition import build_partition
from .preprocess import ORIGINAL, flipped_patch_count, offset_open_surfaces, reorient
from .simplify import simplify
from .topology import build_adjacency, is_manifold, is_watertight, remove_unused_vertices, split_nonmanifold

log = logging.getLogger(__name__)

REPORT_KEYS = ("input_faces", "output_faces", "watertight", "manifold", "hausdorff", "flipped_patches",
               "offset_faces", "extra_faces", "stage_ms")


@dataclass
class RepairReport:
    input_faces: int = 0
    output_faces: int = 0
    watertight: bool = False
    manifold: bool = False
    hausdorff: float = 0.0
    flipped_patches: int = 0
    offset_faces: int = 0
    extra_faces: int = 0
    stage_ms: Dict[str, float] = field(default_factory=dict)
    # not part of the JSON report
    input_vertices: int = 0
    output_vertices: int = 0
    removed_duplicates: int = 0
    removed_degenerate: int = 0
    closed_before_hole_removal: bool = False
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in REPORT_KEYS}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)


class _Timer:
    def __init__(self):
        self.ms: Dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.ms[name] = self.ms.get(name, 0.0) + (time.perf_counter() - t0) * 1000.0


def repair(mesh: IndexedMesh, config: Optional[RepairConfig] = None, backend: Optional[str] = None,
           debug_dir: Optional[str] = None, hausdorff_samples: int = 2000):
    """Repair ``mesh`` into a watertight 2-manifold; returns ``(mesh, RepairReport)``."""
    config = config or RepairConfig()
    timer = _Timer()
    report = RepairReport()
    if mesh.n_faces == 0:
        raise ValueError("input mesh has no faces")
    with timer.stage("normalize"):
        m0 = normalize(mesh)
    if m0.n_faces == 0 or not m0.face_areas().sum() > 0:
        raise ValueError("input mesh has zero area")
    report.input_faces = mesh.n_faces
    report.input_vertices = mesh.n_vertices
    report.removed_duplicates = int(m0.report.get("removed_duplicates", 0))
    report.removed_degenerate = int(m0.report.get("removed_degenerate", 0))
    cfg = config.resolve(bbox_diagonal(m0.vertices))
    report.config = cfg.as_dict()
    if debug_dir:
        os.makedirs(debug_dir, exist_ok=True)

    with timer.stage("measures"):
        meas = compute_measures(m0, cfg, backend)
    with timer.stage("reorient"):
        m1, flip_mask = reorient(m0, meas, cfg.visibility_threshold)
        report.flipped_patches = flipped_patch_count(m1, flip_mask) if flip_mask.any() else 0
    with timer.stage("measures"):
        if cfg.retrace_after_reorient and flip_mask.any():
            meas = compute_measures(m1, cfg, backend)
    if debug_dir:
        write_measures_csv(meas, os.path.join(debug_dir, "measures.csv"))

    with timer.stage("offset"):
        m2, record = offset_open_surfaces(m1, meas, cfg, cfg.d_offset)
        report.offset_faces = record.n_generated
    with timer.stage("partition"):
        cx = build_partition(m2, record)
    if debug_dir:
        save_mesh(m2, os.path.join(debug_dir, "offset.obj"))
        cx.write_debug(debug_dir)

    with timer.stage("facet_measures"):
        fmeas = ex.trace_facet_measures(cx, cfg, backend)
    with timer.stage("cut"):
        signs, _ = ex.reorient_facets(cx, fmeas, cfg.visibility_threshold)
        classes = ex.classify_facets(cx, fmeas, cfg.visibility_threshold)
        problem = ex.build_cut(cx, classes, signs)
        interior = ex.solve_cut(problem)
    if debug_dir:
        ex.write_cut_csv(problem, np.append(interior, False), debug_dir)
    with timer.stage("extract"):
        iface = ex.extract_interface(cx, interior)
    if debug_dir and iface.mesh.n_faces:
        save_mesh(iface.mesh, os.path.join(debug_dir, "interface.obj"))

    charts = uv_charts(m2)
    tri_class = [attribute_class(m2, charts, int(s)) for s in iface.tri_source]
    points = list(iface.points)
    work = iface.mesh
    if cfg.simplify and work.n_faces:
        with timer.stage("simplify"):
            res = simplify(work, points, tri_class, cfg.l_extended)
            face_sources = []
            for gi in res.face_group:
                g = res.groups[gi]
                srcs = sorted({int(iface.tri_source[f]) for f in g.faces if iface.tri_source[f] >= 0})
                face_sources.append(srcs or None)
            work = res.mesh
            points = [points[i] for i in res.kept_vertices]
    else:
        face_sources = [None if s < 0 else [int(s)] for s in iface.tri_source]

    with timer.stage("topology"):
        if work.n_faces:
            work, origin = split_nonmanifold(work, return_origin=True)
            points = [points[i] for i in origin]
    with timer.stage("attributes"):
        if m2.has_uvs or m2.face_material is not None:
            work, _ = recover_attributes(work, points, face_sources, m2)
    report.closed_before_hole_removal = bool(work.n_faces) and is_watertight(work) and is_manifold(work)

    if cfg.preserve_hole_boundaries and work.n_faces:
        with timer.stage("holes"):
            work, keep = remove_hole_faces(work, points, face_sources, record, m0, cfg.preserve_hole_boundaries)
            face_sources = [face_sources[i] for i in keep]

    report.output_faces = work.n_faces
    report.output_vertices = work.n_vertices
    report.watertight = bool(is_watertight(work))
    report.manifold = bool(work.n_faces) and bool(is_manifold(work))
    report.extra_faces = sum(1 for s in face_sources if not s)
    with timer.stage("hausdorff"):
        report.hausdorff = hausdorff(m0, work, hausdorff_samples, cfg.rng_seed) if work.n_faces else float("inf")
    report.stage_ms = {k: round(v, 3) for k, v in timer.ms.items()}
    return work, report


def _on_polyline(p: ExactPoint, loop_pts: Sequence[ExactPoint]) -> bool:
    n = len(loop_pts)
    for i in range(n):
        a, b = loop_pts[i], loop_pts[(i + 1) % n]
        if p == a or p == b:
            return True
        A, B, P = a.coords, b.coords, p.coords
        d = [B[k] - A[k] for k in range(3)]
        e = [P[k] - A[k] for k in range(3)]
        cr = (d[1] * e[2] - d[2] * e[1], d[2] * e[0] - d[0] * e[2], d[0] * e[1] - d[1] * e[0])
        if cr == (0, 0, 0):
            t = sum(d[k] * e[k] for k in range(3))
            if 0 <= t <= sum(x * x for x in d):
                return True
    return False


def remove_hole_faces(mesh: IndexedMesh, points: Sequence[ExactPoint], face_sources, record, input_mesh,
                      loops: Sequence[Sequence[int]]):
    """Delete the faces that close each user-marked boundary loop.

    Candidates are extra faces and generated offset faces. Those with a vertex
    on a marked loop seed a flood fill that spreads through candidate faces.
    Returns the trimmed mesh and the kept face ids.
    """
    n = mesh.n_faces
    candidate = np.zeros(n, bool)
    for f in range(n):
        srcs = face_sources[f]
        if not srcs:
            candidate[f] = True
        elif all(record.face_kind[s] != ORIGINAL for s in srcs):
            candidate[f] = True
    seeds = set()
    for loop in loops:
        loop_pts = [ExactPoint.from_floats(input_mesh.vertices[i]) for i in loop]
        on = [_on_polyline(p, loop_pts) for p in points]
        for f in np.nonzero(candidate)[0]:
            if any(on[v] for v in mesh.faces[f]):
                seeds.add(int(f))
    adj = build_adjacency(mesh)
    nbr: Dict[int, List[int]] = {}
    for inc in adj.values():
        for f, _ in inc:
            for g, _ in inc:
                if f != g:
                    nbr.setdefault(f, []).append(g)
    remove = set(seeds)
    stack = sorted(seeds)
    while stack:
        f = stack.pop()
        for g in nbr.get(f, ()):
            if candidate[g] and g not in remove:
                remove.add(g)
                stack.append(g)
    keep = np.array([f for f in range(n) if f not in remove], dtype=np.int64)
    out = mesh.subset(keep)
    out, _ = remove_unused_vertices(out)
    log.info("hole preservation removed %d faces", len(remove))
    return out, keep.tolist()


def read_loops(path) -> List[List[int]]:
    loops = []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if parts:
                loops.append([int(x) for x in parts])
    return loops
