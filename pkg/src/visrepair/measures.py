"""Per-face visibility, orientation and openness from escaped hemisphere rays.

Every face gets ``max(ceil(A(f)/A(M) * n_total), n_min)`` surface samples. From
each sample, ``n_dirs`` directions per side are traced with diffuse bounces; a
ray counts as valid when it leaves all geometry within ``max_bounces``
reflections. The compiled backend is used when importable, otherwise a numpy
implementation with identical arithmetic takes over.
"""
from __future__ import annotations

import csv
import logging
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _tracepy
from .bvh import build_bvh
from .config import RepairConfig, bbox_diagonal
from .mesh_io import IndexedMesh

log = logging.getLogger(__name__)

try:
    from . import _tracer as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

BACKEND = "cython" if _compiled is not None and os.environ.get("VISREPAIR_BACKEND") != "python" else "python"


@dataclass(frozen=True)
class SamplePlan:
    counts: np.ndarray        # samples per face
    sample_face: np.ndarray   # (S,)
    sample_index: np.ndarray  # (S,) index of the sample within its face
    bary: np.ndarray          # (S, 2) weights of edges v1-v0 and v2-v0 over sorted corners
    points: np.ndarray        # (S, 3)


@dataclass(frozen=True)
class FaceMeasures:
    visibility: np.ndarray
    orientation: np.ndarray
    openness: np.ndarray
    sample_counts: np.ndarray  # (S, 2) valid rays [front, back]
    sample_face: np.ndarray
    n_dirs: int
    visibility_threshold: float = 0.5

    @property
    def n_faces(self) -> int:
        return len(self.visibility)


def sample_counts_per_face(areas: np.ndarray, n_total: int, n_min: int) -> np.ndarray:
    total = float(areas.sum())
    if not total > 0:
        raise ValueError("mesh has zero total area")
    out = np.empty(len(areas), dtype=np.int64)
    for i, a in enumerate(areas.tolist()):
        out[i] = max(math.ceil(a / total * n_total), n_min)
    return out


def plan_samples(mesh: IndexedMesh, config: RepairConfig) -> SamplePlan:
    areas = mesh.face_areas()
    counts = sample_counts_per_face(areas, config.n_total, config.n_min)
    sample_face = np.repeat(np.arange(mesh.n_faces, dtype=np.int64), counts)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    sample_index = np.arange(len(sample_face), dtype=np.int64) - np.repeat(starts, counts)
    key = _tracepy.stream_key(config.rng_seed, sample_face, sample_index, _tracepy.POINT_DOMAIN)
    counter = np.zeros(len(key), dtype=np.uint64)
    u = np.zeros(len(key))
    v = np.zeros(len(key))
    todo = np.ones(len(key), bool)
    while todo.any():
        idx = np.nonzero(todo)[0]
        a = _tracepy.draw(key[idx], counter[idx])
        b = _tracepy.draw(key[idx], counter[idx] + np.uint64(1))
        counter[idx] += 2
        flip = a + b > 1.0
        a[flip], b[flip] = 1.0 - a[flip], 1.0 - b[flip]
        ok = (a > 0.0) & (b > 0.0) & (a + b < 1.0)
        u[idx[ok]], v[idx[ok]] = a[ok], b[ok]
        todo[idx[ok]] = False
    tri = mesh.vertices[canonical_faces(mesh)[0]]
    v0 = tri[sample_face, 0]
    e1 = tri[sample_face, 1] - v0
    e2 = tri[sample_face, 2] - v0
    points = v0 + u[:, None] * e1 + v[:, None] * e2
    return SamplePlan(counts, sample_face, sample_index, np.stack([u, v], axis=1), points)


def measures_from_counts(sample_counts, sample_face, n_faces, n_dirs, visibility_threshold=0.5) -> FaceMeasures:
    """Aggregate per-sample valid-ray counts into the three face measures."""
    c = np.asarray(sample_counts, dtype=np.int64)
    sf = np.asarray(sample_face, dtype=np.int64)
    npos, nneg = c[:, 0], c[:, 1]
    hi = np.maximum(npos, nneg)
    lo = np.minimum(npos, nneg)
    visibility = np.zeros(n_faces)
    np.maximum.at(visibility, sf, hi / n_dirs)
    diff = np.bincount(sf, weights=(npos - nneg).astype(float), minlength=n_faces)
    tot = np.bincount(sf, weights=(npos + nneg).astype(float), minlength=n_faces)
    orientation = np.zeros(n_faces)
    ok = tot > 0
    orientation[ok] = diff[ok] / tot[ok]
    visible_sample = hi / n_dirs > visibility_threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        per = np.where(visible_sample, (lo / hi) * ((npos + nneg) / (2.0 * n_dirs)), 0.0)
    openness = np.zeros(n_faces)
    np.maximum.at(openness, sf, per)
    return FaceMeasures(visibility, orientation, openness, c.astype(np.int32), sf, n_dirs, visibility_threshold)


def canonical_faces(mesh: IndexedMesh):
    """Corners sorted by vertex id, and whether that reverses each face's winding.

    Tracing in this frame makes rays independent of corner order, so flipping a
    face swaps its front and back counts exactly.
    """
    f = mesh.faces
    odd = ((f[:, 0] > f[:, 1]).astype(int) + (f[:, 0] > f[:, 2]) + (f[:, 1] > f[:, 2])) % 2 == 1
    return np.sort(f, axis=1), odd


def _tracer_inputs(mesh: IndexedMesh):
    faces, odd = canonical_faces(mesh)
    tri = mesh.vertices[faces]
    v0 = np.ascontiguousarray(tri[:, 0])
    e1 = np.ascontiguousarray(tri[:, 1] - tri[:, 0])
    e2 = np.ascontiguousarray(tri[:, 2] - tri[:, 0])
    n = np.cross(e1, e2)
    ln = np.linalg.norm(n, axis=1)
    normals = np.zeros_like(n)
    ok = ln > 0
    normals[ok] = n[ok] / ln[ok, None]
    return tri, v0, e1, e2, np.ascontiguousarray(normals), odd


def trace_sample_counts(mesh: IndexedMesh, plan: SamplePlan, config: RepairConfig,
                        backend: Optional[str] = None) -> np.ndarray:
    backend = backend or BACKEND
    tri, v0, e1, e2, normals, odd = _tracer_inputs(mesh)
    eps = 1e-9 * bbox_diagonal(mesh.vertices)
    sf = np.ascontiguousarray(plan.sample_face, dtype=np.int64)
    si = np.ascontiguousarray(plan.sample_index, dtype=np.int64)
    pts = np.ascontiguousarray(plan.points, dtype=np.float64)
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled tracer not available")
        bvh = build_bvh(tri[:, 0], tri[:, 1], tri[:, 2])
        counts = _compiled.trace_counts(
            v0, e1, e2, normals, sf, si, pts,
            np.uint64(config.rng_seed), config.n_dirs, config.max_bounces, eps,
            bvh.bmin, bvh.bmax, bvh.left, bvh.right, bvh.start, bvh.count, bvh.order,
            int(config.threads),
        )
    elif backend == "python":
        counts = _tracepy.trace_counts(
            v0, e1, e2, normals, sf, si, pts, config.rng_seed,
            config.n_dirs, config.max_bounces, eps,
        )
    else:
        raise ValueError(f"unknown backend {backend!r}")
    degenerate = ~np.any(normals != 0.0, axis=1)
    counts = np.asarray(counts, dtype=np.int32)
    if degenerate.any():
        counts[degenerate[sf]] = 0
    # front means the winding side: swap where the sorted frame reversed it
    flip = odd[sf]
    counts[flip] = counts[flip][:, ::-1]
    return counts


def trace_measures(mesh: IndexedMesh, plan: SamplePlan, config: RepairConfig,
                   backend: Optional[str] = None) -> FaceMeasures:
    counts = trace_sample_counts(mesh, plan, config, backend)
    return measures_from_counts(counts, plan.sample_face, mesh.n_faces, config.n_dirs,
                                config.visibility_threshold)


def compute_measures(mesh: IndexedMesh, config: RepairConfig, backend: Optional[str] = None) -> FaceMeasures:
    """Plan samples and trace them in one call."""
    return trace_measures(mesh, plan_samples(mesh, config), config, backend)


def classify_faces(measures: FaceMeasures, config: RepairConfig):
    """Boolean arrays ``(visible, open)`` by strict threshold comparison."""
    visible = measures.visibility > config.visibility_threshold
    is_open = measures.openness > config.openness_threshold
    return visible, is_open


def write_measures_csv(measures: FaceMeasures, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["face_id", "visibility", "orientation", "openness"])
        for i in range(measures.n_faces):
            w.writerow([i, repr(float(measures.visibility[i])), repr(float(measures.orientation[i])),
                        repr(float(measures.openness[i]))])
