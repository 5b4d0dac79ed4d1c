"""Patch reorientation and thin-shell extrusion of open surfaces."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .config import RepairConfig
from .measures import FaceMeasures
from .mesh_io import IndexedMesh
from .topology import build_adjacency, group_patches

log = logging.getLogger(__name__)

ORIGINAL, OFFSET, WALL = 0, 1, 2


@dataclass(frozen=True)
class OffsetRecord:
    """Provenance of the offset-stage mesh.

    ``face_origin[i]`` is the input face that face ``i`` came from (itself for
    untouched faces) and ``face_kind[i]`` is ORIGINAL, OFFSET or WALL.
    ``corner_origin[i, k]`` is the input-face corner (0..2) whose position and
    attributes corner ``k`` was copied from. New vertices are appended after
    the input vertices; ``vertex_origin`` and ``displacement`` describe them.
    """

    face_origin: np.ndarray
    face_kind: np.ndarray
    corner_origin: np.ndarray
    vertex_origin: np.ndarray
    displacement: np.ndarray
    d_offset: float = 0.0
    open_patches: Tuple[frozenset, ...] = field(default_factory=tuple)

    @property
    def n_generated(self) -> int:
        return int(np.count_nonzero(self.face_kind != ORIGINAL))

    @classmethod
    def identity(cls, n_faces: int) -> "OffsetRecord":
        return cls(
            np.arange(n_faces, dtype=np.int64),
            np.zeros(n_faces, dtype=np.int8),
            np.tile(np.arange(3, dtype=np.int64), (n_faces, 1)),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, 3)),
        )


def patch_orientations(mesh: IndexedMesh, measures: FaceMeasures, patches, visibility_threshold=0.5):
    """Area-weighted mean orientation over each patch's visible faces (0 if none)."""
    areas = mesh.face_areas()
    visible = measures.visibility > visibility_threshold
    out = []
    for p in patches:
        idx = np.fromiter(sorted(p.faces), dtype=np.int64)
        w = areas[idx] * visible[idx]
        tot = w.sum()
        out.append(float((w * measures.orientation[idx]).sum() / tot) if tot > 0 else 0.0)
    return out


def reorient(mesh: IndexedMesh, measures: FaceMeasures, visibility_threshold: float = 0.5):
    """Flip every consistent-orientation patch whose orientation measure is negative.

    Returns the new mesh and the boolean per-face flip mask.
    """
    patches = group_patches(mesh)
    scores = patch_orientations(mesh, measures, patches, visibility_threshold)
    mask = np.zeros(mesh.n_faces, bool)
    n_flipped = 0
    for p, s in zip(patches, scores):
        if s < 0:
            mask[list(p.faces)] = True
            n_flipped += 1
    log.info("reorient: %d of %d patches flipped", n_flipped, len(patches))
    if not mask.any():
        return mesh, mask
    return mesh.flipped(mask), mask


def flipped_patch_count(mesh: IndexedMesh, mask: np.ndarray) -> int:
    return sum(1 for p in group_patches(mesh) if mask[next(iter(p.faces))])


def _sectors(faces: np.ndarray, patch: List[int], crossing: Dict[Tuple[int, int], List[int]]):
    """Union-find of (face, vertex) corners joined across patch-interior edges."""
    parent: Dict[Tuple[int, int], Tuple[int, int]] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in patch:
        for v in faces[f]:
            parent[(f, int(v))] = (f, int(v))
    for (u, v), fs in crossing.items():
        if len(fs) != 2:
            continue
        f, g = fs
        for w in (u, v):
            a, b = find((f, w)), find((g, w))
            if a != b:
                parent[max(a, b)] = min(a, b)
    return {k: find(k) for k in parent}


def offset_open_surfaces(mesh: IndexedMesh, measures: FaceMeasures, config: RepairConfig,
                         d_offset: float) -> Tuple[IndexedMesh, OffsetRecord]:
    """Extrude every open patch into a closed thin shell of thickness ``d_offset``.

    Each vertex gets one offset copy per fan sector of the patch (sectors are
    separated by patch boundary edges), displaced by ``-d_offset`` along the
    sector's area-weighted normal. That covers pinch vertices and the
    non-orientable cut of a Möbius strip, where one vertex needs several
    copies.
    """
    is_open = measures.openness > config.openness_threshold
    n_in = mesh.n_faces
    if not is_open.any():
        return mesh, OffsetRecord.identity(n_in)
    open_ids = np.nonzero(is_open)[0]
    patches = group_patches(mesh, face_subset=open_ids)
    adj = build_adjacency(mesh)
    faces = mesh.faces
    normals = mesh.face_normals()
    areas = mesh.face_areas()
    verts = [mesh.vertices]
    new_vertex_origin: List[int] = []
    displacement: List[np.ndarray] = []
    new_faces: List[List[int]] = []
    face_origin: List[int] = []
    face_kind: List[int] = []
    corner_origin: List[List[int]] = []
    next_vid = mesh.n_vertices
    for patch in patches:
        members = sorted(patch.faces)
        in_patch = set(members)
        # edges the patch flood fill could cross: exactly two opposite-direction patch faces
        crossing: Dict[Tuple[int, int], List[int]] = {}
        for f in members:
            a, b, c = faces[f]
            for u, v in ((a, b), (b, c), (c, a)):
                key = (int(min(u, v)), int(max(u, v)))
                if key in crossing:
                    continue
                inc = [(g, d) for g, d in adj[key] if g in in_patch]
                if len(inc) == 2 and inc[0][1] != inc[1][1]:
                    crossing[key] = [inc[0][0], inc[1][0]]
        root = _sectors(faces, members, crossing)
        sector_normal: Dict[Tuple[int, int], np.ndarray] = {}
        for (f, v), r in root.items():
            sector_normal.setdefault(r, np.zeros(3))
            sector_normal[r] = sector_normal[r] + areas[f] * normals[f]
        offset_vid: Dict[Tuple[int, int], int] = {}
        for r in sorted(sector_normal):
            f0, v = r
            n = sector_normal[r]
            ln = float(np.linalg.norm(n))
            if ln == 0.0:
                # cancelling normals: fall back to the sector's first face
                n, ln = normals[f0], float(np.linalg.norm(normals[f0]))
            disp = -d_offset * (n / ln) if ln > 0 else np.zeros(3)
            offset_vid[r] = next_vid
            next_vid += 1
            new_vertex_origin.append(v)
            displacement.append(disp)
            verts.append((mesh.vertices[v] + disp)[None, :])
        for f in members:
            a, b, c = (int(x) for x in faces[f])
            o = {w: offset_vid[root[(f, w)]] for w in (a, b, c)}
            new_faces.append([o[c], o[b], o[a]])
            face_origin.append(f)
            face_kind.append(OFFSET)
            corner_origin.append([2, 1, 0])
            for k, (u, v) in enumerate(((a, b), (b, c), (c, a))):
                key = (min(u, v), max(u, v))
                if key in crossing:
                    continue
                ku, kv = k, (k + 1) % 3
                new_faces.append([v, u, o[u]])
                corner_origin.append([kv, ku, ku])
                new_faces.append([v, o[u], o[v]])
                corner_origin.append([kv, ku, kv])
                face_origin += [f, f]
                face_kind += [WALL, WALL]
    all_faces = np.vstack([faces, np.asarray(new_faces, dtype=np.int64)])
    origin = np.concatenate([np.arange(n_in), np.asarray(face_origin, dtype=np.int64)])
    kind = np.concatenate([np.zeros(n_in, np.int8), np.asarray(face_kind, np.int8)])
    corners = np.vstack([np.tile(np.arange(3), (n_in, 1)), np.asarray(corner_origin, dtype=np.int64)])
    vertices = np.vstack(verts)
    uvs = uv_corners = None
    if mesh.has_uvs:
        uvs = mesh.uvs
        uv_corners = mesh.face_uv_corners[origin, :][np.arange(len(origin))[:, None], corners]
    mats = None if mesh.face_material is None else tuple(mesh.face_material[i] for i in origin)
    out = IndexedMesh(vertices, all_faces, uvs, uv_corners, mats)
    record = OffsetRecord(origin, kind, corners, np.asarray(new_vertex_origin, dtype=np.int64),
                          np.asarray(displacement).reshape(-1, 3), float(d_offset),
                          tuple(p.faces for p in patches))
    log.info("offset: %d open faces in %d patches, %d faces generated", len(open_ids), len(patches),
             record.n_generated)
    return out, record
