# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled visibility tracer: BVH traversal plus multi-bounce diffuse rays.

Mirrors ``_tracepy`` operation for operation so both backends agree bit for
bit; only the nearest-hit search differs (BVH here, brute force there).
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt, copysign, INFINITY, fabs
from libc.stdint cimport uint64_t, int64_t, int32_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double INV53 = 1.0 / 9007199254740992.0
cdef int MAX_DISK_TRIES = 64
cdef int STACK = 128


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t stream_key(uint64_t seed, int64_t a, int64_t b, int64_t c) noexcept nogil:
    cdef uint64_t h = mix64(seed + GOLDEN)
    h = mix64(h ^ (<uint64_t>a + GOLDEN))
    h = mix64(h ^ (<uint64_t>b + GOLDEN))
    h = mix64(h ^ (<uint64_t>c + GOLDEN))
    return h


cdef inline double draw(uint64_t key, uint64_t counter) noexcept nogil:
    cdef uint64_t h = mix64(key + (counter + 1) * GOLDEN)
    return <double>(h >> 11) * INV53


cdef inline uint64_t hemisphere(double nx, double ny, double nz, uint64_t key, uint64_t counter,
                                double* out) noexcept nogil:
    cdef double z = 1.0 - draw(key, counter)
    counter += 1
    cdef double x = 1.0, y = 0.0, s = 1.0, xi, yi, si
    cdef int k
    for k in range(MAX_DISK_TRIES):
        xi = 2.0 * draw(key, counter) - 1.0
        yi = 2.0 * draw(key, counter + 1) - 1.0
        counter += 2
        si = xi * xi + yi * yi
        if si > 0.0 and si <= 1.0:
            x = xi
            y = yi
            s = si
            break
    cdef double r = sqrt(max(0.0, 1.0 - z * z))
    cdef double inv = 1.0 / sqrt(s)
    cdef double lx = r * (x * inv)
    cdef double ly = r * (y * inv)
    cdef double sign = copysign(1.0, nz)
    cdef double a = -1.0 / (sign + nz)
    cdef double b = nx * ny * a
    cdef double t1x = 1.0 + sign * nx * nx * a
    cdef double t1y = sign * b
    cdef double t1z = -sign * nx
    cdef double t2x = b
    cdef double t2y = sign + ny * ny * a
    cdef double t2z = -ny
    out[0] = t1x * lx + t2x * ly + nx * z
    out[1] = t1y * lx + t2y * ly + ny * z
    out[2] = t1z * lx + t2z * ly + nz * z
    return counter


cdef inline bint slab(const double* o, const double* inv_d, const double* bmin, const double* bmax,
                      double tmax) noexcept nogil:
    cdef double t0 = 0.0, t1 = tmax, ta, tb, tmp
    cdef int k
    for k in range(3):
        ta = (bmin[k] - o[k]) * inv_d[k]
        tb = (bmax[k] - o[k]) * inv_d[k]
        if ta > tb:
            tmp = ta
            ta = tb
            tb = tmp
        if ta != ta or tb != tb:
            # 0 * inf from an axis-parallel ray touching a slab plane: keep it
            continue
        if ta > t0:
            t0 = ta
        if tb < t1:
            t1 = tb
        if t0 > t1:
            return False
    return True


cdef inline void nearest(const double* o, const double* d, int64_t ignore,
                         const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2,
                         const double[:, ::1] bmin, const double[:, ::1] bmax,
                         const int64_t[::1] left, const int64_t[::1] right,
                         const int64_t[::1] start, const int64_t[::1] count, const int64_t[::1] order,
                         int64_t* best, double* best_t) noexcept nogil:
    cdef int64_t stack[128]
    cdef int sp = 0
    cdef int64_t node, i, j, tri
    cdef double inv_d[3]
    cdef double px, py, pz, det, inv, tx, ty, tz, u, v, qx, qy, qz, t
    inv_d[0] = 1.0 / d[0]
    inv_d[1] = 1.0 / d[1]
    inv_d[2] = 1.0 / d[2]
    best[0] = -1
    best_t[0] = INFINITY
    if left.shape[0] == 0:
        return
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if not slab(o, inv_d, &bmin[node, 0], &bmax[node, 0], best_t[0]):
            continue
        if left[node] < 0:
            for j in range(start[node], start[node] + count[node]):
                tri = order[j]
                if tri == ignore:
                    continue
                px = d[1] * e2[tri, 2] - d[2] * e2[tri, 1]
                py = d[2] * e2[tri, 0] - d[0] * e2[tri, 2]
                pz = d[0] * e2[tri, 1] - d[1] * e2[tri, 0]
                det = e1[tri, 0] * px + e1[tri, 1] * py + e1[tri, 2] * pz
                if det == 0.0:
                    continue
                inv = 1.0 / det
                tx = o[0] - v0[tri, 0]
                ty = o[1] - v0[tri, 1]
                tz = o[2] - v0[tri, 2]
                u = (tx * px + ty * py + tz * pz) * inv
                if not (u >= 0.0 and u <= 1.0):
                    continue
                qx = ty * e1[tri, 2] - tz * e1[tri, 1]
                qy = tz * e1[tri, 0] - tx * e1[tri, 2]
                qz = tx * e1[tri, 1] - ty * e1[tri, 0]
                v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv
                if not (v >= 0.0 and u + v <= 1.0):
                    continue
                t = (e2[tri, 0] * qx + e2[tri, 1] * qy + e2[tri, 2] * qz) * inv
                if not (t > 0.0):
                    continue
                if t < best_t[0] or (t == best_t[0] and tri < best[0]):
                    best_t[0] = t
                    best[0] = tri
        else:
            if sp + 2 <= STACK:
                stack[sp] = right[node]
                stack[sp + 1] = left[node]
                sp += 2


cdef int trace_one(Py_ssize_t r, int n_dirs, int max_bounces, double eps, uint64_t seed,
                   const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2,
                   const double[:, ::1] normals,
                   const int64_t[::1] sample_face, const int64_t[::1] sample_index,
                   const double[:, ::1] sample_point,
                   const double[:, ::1] bmin, const double[:, ::1] bmax,
                   const int64_t[::1] left, const int64_t[::1] right,
                   const int64_t[::1] start, const int64_t[::1] count,
                   const int64_t[::1] order) noexcept nogil:
    cdef double o[3]
    cdef double o2[3]
    cdef double dd[3]
    cdef double n[3]
    cdef double t
    cdef int64_t hit
    cdef int b
    cdef int64_t s = r // (2 * n_dirs)
    cdef int64_t side = (r // n_dirs) % 2
    cdef int64_t di = r % n_dirs
    cdef int64_t face = sample_face[s]
    cdef int64_t ignore = face
    cdef uint64_t key = stream_key(seed, face, sample_index[s], side * n_dirs + di)
    cdef uint64_t counter = 0
    if side == 0:
        n[0] = normals[face, 0]
        n[1] = normals[face, 1]
        n[2] = normals[face, 2]
    else:
        n[0] = -normals[face, 0]
        n[1] = -normals[face, 1]
        n[2] = -normals[face, 2]
    o[0] = sample_point[s, 0]
    o[1] = sample_point[s, 1]
    o[2] = sample_point[s, 2]
    counter = hemisphere(n[0], n[1], n[2], key, counter, dd)
    for b in range(max_bounces + 1):
        o2[0] = o[0] + eps * dd[0]
        o2[1] = o[1] + eps * dd[1]
        o2[2] = o[2] + eps * dd[2]
        nearest(o2, dd, ignore, v0, e1, e2, bmin, bmax, left, right, start, count, order, &hit, &t)
        if hit < 0:
            return 1
        if b == max_bounces:
            return 0
        o[0] = o2[0] + t * dd[0]
        o[1] = o2[1] + t * dd[1]
        o[2] = o2[2] + t * dd[2]
        n[0] = normals[hit, 0]
        n[1] = normals[hit, 1]
        n[2] = normals[hit, 2]
        if (n[0] * dd[0] + n[1] * dd[1] + n[2] * dd[2]) > 0.0:
            n[0] = -n[0]
            n[1] = -n[1]
            n[2] = -n[2]
        counter = hemisphere(n[0], n[1], n[2], key, counter, dd)
        ignore = hit
    return 0


def trace_counts(const double[:, ::1] v0, const double[:, ::1] e1, const double[:, ::1] e2,
                 const double[:, ::1] normals,
                 const int64_t[::1] sample_face, const int64_t[::1] sample_index,
                 const double[:, ::1] sample_point,
                 uint64_t seed, int n_dirs, int max_bounces, double eps,
                 const double[:, ::1] bmin, const double[:, ::1] bmax,
                 const int64_t[::1] left, const int64_t[::1] right,
                 const int64_t[::1] start, const int64_t[::1] count, const int64_t[::1] order,
                 int threads=1):
    """Valid-ray counts per sample as an (S, 2) int32 array of [N+, N-]."""
    cdef Py_ssize_t S = sample_face.shape[0]
    cdef Py_ssize_t n_rays = S * 2 * n_dirs
    valid_arr = np.zeros(n_rays, dtype=np.int32)
    cdef int32_t[::1] valid = valid_arr
    cdef Py_ssize_t r
    if threads < 1:
        threads = 1
    for r in prange(n_rays, nogil=True, schedule="static", num_threads=threads):
        valid[r] = trace_one(r, n_dirs, max_bounces, eps, seed, v0, e1, e2, normals,
                             sample_face, sample_index, sample_point,
                             bmin, bmax, left, right, start, count, order)
    return valid_arr.reshape(S, 2, n_dirs).sum(axis=2).astype(np.int32)
