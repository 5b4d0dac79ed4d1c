"""Pure numpy backend of the visibility tracer.

Keep the arithmetic here operation-for-operation identical to ``_tracer.pyx``:
both backends must return bit-identical counts. Nearest hits are found by
brute force over all triangles, which is what the BVH in the compiled backend
accelerates.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0
MAX_DISK_TRIES = 64
POINT_DOMAIN = 0xA5A5A5A5


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed, *fields):
    """Counter-based stream id: a hash of the seed and integer fields."""
    with np.errstate(over="ignore"):
        h = mix64(np.asarray(seed, dtype=np.uint64) + GOLDEN)
        for x in fields:
            h = mix64(h ^ (np.asarray(x, dtype=np.int64).astype(np.uint64) + GOLDEN))
    return h


def draw(key, counter):
    """Uniform double in [0, 1) for draw number ``counter`` of stream ``key``."""
    with np.errstate(over="ignore"):
        h = mix64(key + (np.asarray(counter, dtype=np.uint64) + np.uint64(1)) * GOLDEN)
    return (h >> np.uint64(11)).astype(np.float64) * _INV53


def sample_hemisphere(normal, key, counter):
    """Uniform directions on the hemisphere around unit ``normal``.

    ``normal`` is (R, 3), ``key``/``counter`` are (R,). Returns directions and
    the advanced counters.
    """
    counter = counter.copy()
    z = 1.0 - draw(key, counter)
    counter += 1
    R = len(key)
    x = np.zeros(R)
    y = np.zeros(R)
    s = np.zeros(R)
    todo = np.ones(R, bool)
    for _ in range(MAX_DISK_TRIES):
        if not todo.any():
            break
        idx = np.nonzero(todo)[0]
        xi = 2.0 * draw(key[idx], counter[idx]) - 1.0
        yi = 2.0 * draw(key[idx], counter[idx] + np.uint64(1)) - 1.0
        counter[idx] += 2
        si = xi * xi + yi * yi
        ok = (si > 0.0) & (si <= 1.0)
        acc = idx[ok]
        x[acc], y[acc], s[acc] = xi[ok], yi[ok], si[ok]
        todo[acc] = False
    x[todo], y[todo], s[todo] = 1.0, 0.0, 1.0
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    inv = 1.0 / np.sqrt(s)
    lx = r * (x * inv)
    ly = r * (y * inv)
    nx, ny, nz = normal[:, 0], normal[:, 1], normal[:, 2]
    sign = np.copysign(1.0, nz)
    a = -1.0 / (sign + nz)
    b = nx * ny * a
    t1x = 1.0 + sign * nx * nx * a
    t1y = sign * b
    t1z = -sign * nx
    t2x = b
    t2y = sign + ny * ny * a
    t2z = -ny
    d = np.empty((R, 3))
    d[:, 0] = t1x * lx + t2x * ly + nx * z
    d[:, 1] = t1y * lx + t2y * ly + ny * z
    d[:, 2] = t1z * lx + t2z * ly + nz * z
    return d, counter


def nearest_hits(orig, dirs, ignore, v0, e1, e2, chunk=1 << 22):
    """Two-sided Moller-Trumbore nearest hit; ties go to the lower index.

    Returns (tri index or -1, t).
    """
    R, T = len(orig), len(v0)
    best = -np.ones(R, dtype=np.int64)
    best_t = np.full(R, np.inf)
    if T == 0 or R == 0:
        return best, best_t
    step = max(1, chunk // T)
    for lo in range(0, R, step):
        o = orig[lo : lo + step, None, :]
        d = dirs[lo : lo + step, None, :]
        px = d[..., 1] * e2[None, :, 2] - d[..., 2] * e2[None, :, 1]
        py = d[..., 2] * e2[None, :, 0] - d[..., 0] * e2[None, :, 2]
        pz = d[..., 0] * e2[None, :, 1] - d[..., 1] * e2[None, :, 0]
        det = e1[None, :, 0] * px + e1[None, :, 1] * py + e1[None, :, 2] * pz
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
            tx = o[..., 0] - v0[None, :, 0]
            ty = o[..., 1] - v0[None, :, 1]
            tz = o[..., 2] - v0[None, :, 2]
            u = (tx * px + ty * py + tz * pz) * inv
            qx = ty * e1[None, :, 2] - tz * e1[None, :, 1]
            qy = tz * e1[None, :, 0] - tx * e1[None, :, 2]
            qz = tx * e1[None, :, 1] - ty * e1[None, :, 0]
            v = (d[..., 0] * qx + d[..., 1] * qy + d[..., 2] * qz) * inv
            t = (e2[None, :, 0] * qx + e2[None, :, 1] * qy + e2[None, :, 2] * qz) * inv
            ok = (det != 0.0) & (u >= 0.0) & (u <= 1.0) & (v >= 0.0) & (u + v <= 1.0) & (t > 0.0)
        rows = np.arange(len(o))
        ok[rows, ignore[lo : lo + step]] = False
        t = np.where(ok, t, np.inf)
        # argmin returns the first (lowest index) minimum
        idx = np.argmin(t, axis=1)
        tmin = t[rows, idx]
        hit = np.isfinite(tmin)
        best[lo : lo + step] = np.where(hit, idx, -1)
        best_t[lo : lo + step] = tmin
    return best, best_t


def trace_counts(v0, e1, e2, normals, sample_face, sample_index, sample_point,
                 seed, n_dirs, max_bounces, eps, threads=1):
    """Valid-ray counts per sample: array (S, 2) of [N+, N-]."""
    S = len(sample_face)
    counts = np.zeros((S, 2), dtype=np.int32)
    if S == 0:
        return counts
    side_ix = np.repeat(np.arange(2), n_dirs)
    dir_ix = np.tile(np.arange(n_dirs), 2)
    # one row per (sample, side, direction)
    s_rows = np.repeat(np.arange(S), 2 * n_dirs)
    sides = np.tile(side_ix, S)
    dirs_i = np.tile(dir_ix, S)
    faces = sample_face[s_rows]
    key = stream_key(seed, faces, sample_index[s_rows], sides * n_dirs + dirs_i)
    counter = np.zeros(len(key), dtype=np.uint64)
    normal = normals[faces].copy()
    normal[sides == 1] = -normal[sides == 1]
    orig = sample_point[s_rows].copy()
    ignore = faces.copy()
    d, counter = sample_hemisphere(normal, key, counter)
    valid = np.zeros(len(key), bool)
    active = np.arange(len(key))
    for b in range(max_bounces + 1):
        if len(active) == 0:
            break
        o = orig[active]
        dd = d[active]
        o2 = np.empty_like(o)
        o2[:, 0] = o[:, 0] + eps * dd[:, 0]
        o2[:, 1] = o[:, 1] + eps * dd[:, 1]
        o2[:, 2] = o[:, 2] + eps * dd[:, 2]
        hit, t = nearest_hits(o2, dd, ignore[active], v0, e1, e2)
        esc = hit < 0
        valid[active[esc]] = True
        if b == max_bounces:
            break
        keep = ~esc
        active = active[keep]
        hit = hit[keep]
        t = t[keep]
        o2 = o2[keep]
        dd = dd[keep]
        p = np.empty_like(o2)
        p[:, 0] = o2[:, 0] + t * dd[:, 0]
        p[:, 1] = o2[:, 1] + t * dd[:, 1]
        p[:, 2] = o2[:, 2] + t * dd[:, 2]
        nh = normals[hit].copy()
        facing = (nh[:, 0] * dd[:, 0] + nh[:, 1] * dd[:, 1] + nh[:, 2] * dd[:, 2]) > 0.0
        nh[facing] = -nh[facing]
        nd, c2 = sample_hemisphere(nh, key[active], counter[active])
        counter[active] = c2
        d[active] = nd
        orig[active] = p
        ignore[active] = hit
    v = valid.reshape(S, 2, n_dirs).sum(axis=2)
    counts[:] = v
    return counts
