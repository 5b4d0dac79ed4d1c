"""Triangle meshes with per-corner UVs and per-face materials, plus OBJ I/O."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np


class ObjParseError(ValueError):
    """Raised for malformed OBJ input; carries the offending line number."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class IndexedMesh:
    vertices: np.ndarray
    faces: np.ndarray
    uvs: Optional[np.ndarray] = None
    face_uv_corners: Optional[np.ndarray] = None
    face_material: Optional[Tuple[Optional[str], ...]] = None
    report: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "faces", _frozen(f))
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        if self.uvs is not None:
            uv = np.asarray(self.uvs, dtype=np.float64).reshape(-1, 2)
            object.__setattr__(self, "uvs", _frozen(uv))
            if self.face_uv_corners is None:
                raise ValueError("uvs given without face_uv_corners")
            c = np.asarray(self.face_uv_corners, dtype=np.int64).reshape(-1, 3)
            if len(c) != len(f):
                raise ValueError("face_uv_corners must have one row per face")
            if len(c) and (c.min() < 0 or c.max() >= len(uv)):
                raise ValueError("uv corner index out of range")
            object.__setattr__(self, "face_uv_corners", _frozen(c))
        elif self.face_uv_corners is not None:
            raise ValueError("face_uv_corners given without uvs")
        if self.face_material is not None:
            mats = tuple(self.face_material)
            if len(mats) != len(f):
                raise ValueError("face_material must have one entry per face")
            object.__setattr__(self, "face_material", mats)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def has_uvs(self) -> bool:
        return self.uvs is not None

    def face_areas(self) -> np.ndarray:
        t = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]), axis=1)

    def face_normals(self) -> np.ndarray:
        """Unit normals by winding; zero rows for degenerate faces."""
        t = self.vertices[self.faces]
        n = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        l = np.linalg.norm(n, axis=1)
        out = np.zeros_like(n)
        ok = l > 0
        out[ok] = n[ok] / l[ok, None]
        return out

    def signed_volume(self) -> float:
        t = self.vertices[self.faces]
        return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)

    def subset(self, face_ids) -> "IndexedMesh":
        """Keep only ``face_ids`` (vertex arrays untouched)."""
        idx = np.asarray(face_ids, dtype=np.int64)
        return self.with_faces(self.faces[idx], idx)

    def with_faces(self, faces, source_rows) -> "IndexedMesh":
        """New mesh whose face ``i`` takes its attributes from row ``source_rows[i]``.

        ``faces`` may be a re-wound version of the source rows; UV corners are
        permuted to follow the vertex permutation.
        """
        faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        src = np.asarray(source_rows, dtype=np.int64)
        corners = None
        if self.face_uv_corners is not None:
            old = self.faces[src]
            old_c = self.face_uv_corners[src]
            corners = np.empty_like(faces)
            for k in range(3):
                pos = np.argmax(old == faces[:, k : k + 1], axis=1)
                corners[:, k] = old_c[np.arange(len(src)), pos]
        mats = None
        if self.face_material is not None:
            mats = tuple(self.face_material[i] for i in src)
        return IndexedMesh(self.vertices, faces, self.uvs, corners, mats)

    def flipped(self, mask=None) -> "IndexedMesh":
        """Reverse winding of the faces selected by ``mask`` (all when None)."""
        faces = self.faces.copy()
        sel = np.ones(len(faces), bool) if mask is None else np.asarray(mask, bool)
        faces[sel] = faces[sel][:, ::-1]
        return self.with_faces(faces, np.arange(len(faces)))

    def equals(self, other: "IndexedMesh", atol: float = 0.0) -> bool:
        if self.vertices.shape != other.vertices.shape or not np.array_equal(self.faces, other.faces):
            return False
        if not np.allclose(self.vertices, other.vertices, rtol=0, atol=atol):
            return False
        if (self.uvs is None) != (other.uvs is None):
            return False
        if self.uvs is not None:
            if self.uvs.shape != other.uvs.shape or not np.allclose(self.uvs, other.uvs, rtol=0, atol=atol):
                return False
            if not np.array_equal(self.face_uv_corners, other.face_uv_corners):
                return False
        return _mats(self) == _mats(other)


def _mats(m: IndexedMesh):
    if m.face_material is None or all(x is None for x in m.face_material):
        return None
    return m.face_material


def empty_mesh() -> IndexedMesh:
    return IndexedMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))


# --------------------------------------------------------------------------- OBJ


def _resolve(tok: str, count: int, lineno: int, what: str) -> int:
    try:
        i = int(tok)
    except ValueError:
        raise ObjParseError(f"bad {what} index {tok!r}", lineno) from None
    if i > 0:
        i -= 1
    elif i < 0:
        i += count
    else:
        raise ObjParseError(f"{what} index 0 is invalid", lineno)
    if not 0 <= i < count:
        raise ObjParseError(f"dangling {what} index {tok}", lineno)
    return i


def parse_obj(text: str) -> IndexedMesh:
    verts: List[Tuple[float, float, float]] = []
    uvs: List[Tuple[float, float]] = []
    faces: List[Tuple[int, int, int]] = []
    corners: List[Optional[Tuple[int, int, int]]] = []
    mats: List[Optional[str]] = []
    material: Optional[str] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ObjParseError("vertex needs three coordinates", lineno)
            try:
                verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError:
                raise ObjParseError("non-numeric vertex coordinate", lineno) from None
        elif tag == "vt":
            if len(parts) < 3:
                raise ObjParseError("texture coordinate needs two values", lineno)
            try:
                uvs.append((float(parts[1]), float(parts[2])))
            except ValueError:
                raise ObjParseError("non-numeric texture coordinate", lineno) from None
        elif tag == "f":
            refs = parts[1:]
            if len(refs) < 3:
                raise ObjParseError("polygon with fewer than 3 vertices cannot be triangulated", lineno)
            vi, ti = [], []
            for r in refs:
                sub = r.split("/")
                vi.append(_resolve(sub[0], len(verts), lineno, "vertex"))
                if len(sub) > 1 and sub[1]:
                    ti.append(_resolve(sub[1], len(uvs), lineno, "texture"))
            if ti and len(ti) != len(vi):
                raise ObjParseError("mixed corners with and without texture indices", lineno)
            for k in range(1, len(vi) - 1):
                faces.append((vi[0], vi[k], vi[k + 1]))
                corners.append((ti[0], ti[k], ti[k + 1]) if ti else None)
                mats.append(material)
        elif tag == "usemtl":
            material = parts[1] if len(parts) > 1 else None
        # vn, o, g, s, mtllib and friends carry nothing the pipeline uses
    has_uv = bool(uvs) and any(c is not None for c in corners)
    if has_uv:
        uv_arr = list(uvs)
        if any(c is None for c in corners):
            # faces without texture references share one (0,0) coordinate
            uv_arr.append((0.0, 0.0))
        z = len(uv_arr) - 1
        fixed = [c if c is not None else (z, z, z) for c in corners]
        uv_np = np.array(uv_arr, dtype=float).reshape(-1, 2)
        corner_np = np.array(fixed, dtype=np.int64).reshape(-1, 3)
    else:
        uv_np = corner_np = None
    mat = tuple(mats) if any(m is not None for m in mats) else None
    return IndexedMesh(
        np.array(verts, dtype=float).reshape(-1, 3),
        np.array(faces, dtype=np.int64).reshape(-1, 3),
        uv_np,
        corner_np,
        mat,
    )


def load_mesh(path: "str | os.PathLike") -> IndexedMesh:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_obj(fh.read())


def format_obj(mesh: IndexedMesh) -> str:
    out = []
    for x, y, z in mesh.vertices:
        out.append(f"v {x:.17g} {y:.17g} {z:.17g}")
    if mesh.uvs is not None:
        for u, v in mesh.uvs:
            out.append(f"vt {u:.17g} {v:.17g}")
    current = None
    for i, (a, b, c) in enumerate(mesh.faces):
        if mesh.face_material is not None:
            m = mesh.face_material[i]
            if m != current and m is not None:
                out.append(f"usemtl {m}")
            current = m
        if mesh.face_uv_corners is not None:
            ta, tb, tc = mesh.face_uv_corners[i]
            out.append(f"f {a + 1}/{ta + 1} {b + 1}/{tb + 1} {c + 1}/{tc + 1}")
        else:
            out.append(f"f {a + 1} {b + 1} {c + 1}")
    return "\n".join(out) + ("\n" if out else "")


def save_mesh(mesh: IndexedMesh, path: "str | os.PathLike") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_obj(mesh))


# --------------------------------------------------------------------- cleaning


def normalize(mesh: IndexedMesh) -> IndexedMesh:
    """Drop faces with repeated vertices and duplicate faces (first copy wins).

    Two faces are duplicates when they reference the same vertex set, in any
    winding. Vertex positions and surviving windings are untouched; the
    removal counts land in ``result.report``.
    """
    keep = []
    seen = set()
    degenerate = duplicates = 0
    for i, (a, b, c) in enumerate(mesh.faces.tolist()):
        if a == b or b == c or a == c:
            degenerate += 1
            continue
        key = tuple(sorted((a, b, c)))
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        keep.append(i)
    out = mesh.subset(keep)
    return IndexedMesh(
        out.vertices,
        out.faces,
        out.uvs,
        out.face_uv_corners,
        out.face_material,
        {"removed_degenerate": degenerate, "removed_duplicates": duplicates},
    )


def concatenate(meshes: Sequence[IndexedMesh]) -> IndexedMesh:
    """Stack meshes into one; UVs/materials kept only when every part has them."""
    verts, faces, uvs, corners, mats = [], [], [], [], []
    nv = nt = 0
    all_uv = all(m.uvs is not None for m in meshes)
    any_mat = any(m.face_material is not None for m in meshes)
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + nv)
        if all_uv:
            uvs.append(m.uvs)
            corners.append(m.face_uv_corners + nt)
            nt += len(m.uvs)
        mats.extend(m.face_material if m.face_material is not None else [None] * m.n_faces)
        nv += m.n_vertices
    return IndexedMesh(
        np.concatenate(verts) if verts else np.zeros((0, 3)),
        np.concatenate(faces) if faces else np.zeros((0, 3), np.int64),
        np.concatenate(uvs) if all_uv and uvs else None,
        np.concatenate(corners) if all_uv and corners else None,
        tuple(mats) if any_mat else None,
    )
