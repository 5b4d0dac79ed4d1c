"""Sampled symmetric Hausdorff distance between triangle meshes."""
from __future__ import annotations

import numpy as np

from .mesh_io import IndexedMesh


def point_triangle_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Distance from each point in ``p`` (P, 3) to each triangle (T, 3) -> (P, T).

    Closest-point by Voronoi regions of the triangle (vertex, edge, face).
    """
    p = p[:, None, :]
    ab, ac = (b - a)[None], (c - a)[None]
    ap = p - a[None]
    d1 = np.einsum("ptk,ptk->pt", ab, ap)
    d2 = np.einsum("ptk,ptk->pt", ac, ap)
    bp = p - b[None]
    d3 = np.einsum("ptk,ptk->pt", ab, bp)
    d4 = np.einsum("ptk,ptk->pt", ac, bp)
    cp = p - c[None]
    d5 = np.einsum("ptk,ptk->pt", ab, cp)
    d6 = np.einsum("ptk,ptk->pt", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        v = np.where(denom != 0, vb / denom, 0.0)
        w = np.where(denom != 0, vc / denom, 0.0)
        q = a[None] + ab * v[..., None] + ac * w[..., None]
        # edge ab
        t_ab = np.where(d1 - d3 != 0, d1 / (d1 - d3), 0.0)
        m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        q = np.where(m[..., None], a[None] + ab * t_ab[..., None], q)
        # edge ac
        t_ac = np.where(d2 - d6 != 0, d2 / (d2 - d6), 0.0)
        m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        q = np.where(m[..., None], a[None] + ac * t_ac[..., None], q)
        # edge bc
        num = d4 - d3
        t_bc = np.where(num + (d5 - d6) != 0, num / (num + (d5 - d6)), 0.0)
        m = (va <= 0) & (num >= 0) & (d5 - d6 >= 0)
        q = np.where(m[..., None], b[None] + (c - b)[None] * t_bc[..., None], q)
    # vertex regions take precedence
    q = np.where(((d1 <= 0) & (d2 <= 0))[..., None], np.broadcast_to(a[None], q.shape), q)
    q = np.where(((d3 >= 0) & (d4 <= d3))[..., None], np.broadcast_to(b[None], q.shape), q)
    q = np.where(((d6 >= 0) & (d5 <= d6))[..., None], np.broadcast_to(c[None], q.shape), q)
    return np.linalg.norm(p - q, axis=2)


def sample_surface(mesh: IndexedMesh, n: int, seed: int = 0) -> np.ndarray:
    """Area-weighted uniform samples plus every used vertex."""
    rng = np.random.default_rng(seed)
    areas = mesh.face_areas()
    pts = [mesh.vertices[np.unique(mesh.faces)]]
    if n > 0 and areas.sum() > 0:
        f = rng.choice(mesh.n_faces, size=n, p=areas / areas.sum())
        r1, r2 = rng.random(n), rng.random(n)
        s = np.sqrt(r1)
        t = mesh.vertices[mesh.faces[f]]
        pts.append((1 - s)[:, None] * t[:, 0] + (s * (1 - r2))[:, None] * t[:, 1] + (s * r2)[:, None] * t[:, 2])
    return np.vstack(pts)


def one_sided(points: np.ndarray, mesh: IndexedMesh, chunk: int = 256) -> float:
    t = mesh.vertices[mesh.faces]
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    best = 0.0
    for i in range(0, len(points), chunk):
        d = point_triangle_distance(points[i : i + chunk], a, b, c).min(axis=1)
        best = max(best, float(d.max()))
    return best


def hausdorff(a: IndexedMesh, b: IndexedMesh, samples: int = 2000, seed: int = 0) -> float:
    """Symmetric sampled Hausdorff distance (an estimate from below)."""
    if a.n_faces == 0 or b.n_faces == 0:
        raise ValueError("hausdorff distance needs two non-empty meshes")
    return max(one_sided(sample_surface(a, samples, seed), b),
               one_sided(sample_surface(b, samples, seed + 1), a))
