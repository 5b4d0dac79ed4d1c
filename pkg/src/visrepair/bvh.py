"""Flat median-split BVH over triangles, consumed by the compiled tracer."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF_SIZE = 4


@dataclass(frozen=True)
class BVH:
    bmin: np.ndarray
    bmax: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    count: np.ndarray
    order: np.ndarray


def build_bvh(v0: np.ndarray, v1: np.ndarray, v2: np.ndarray) -> BVH:
    T = len(v0)
    lo = np.minimum(np.minimum(v0, v1), v2)
    hi = np.maximum(np.maximum(v0, v1), v2)
    # pad so rounding inside the hit test can never fall outside a box
    scale = np.abs(np.concatenate([lo, hi])).max() if T else 1.0
    pad = 1e-9 * (np.maximum(hi - lo, 0).max(initial=0.0) + scale) + 1e-300
    lo = lo - pad
    hi = hi + pad
    cent = 0.5 * (lo + hi)
    order = np.arange(T, dtype=np.int64)
    bmin, bmax, left, right, start, count = [], [], [], [], [], []

    def new_node():
        bmin.append(None)
        bmax.append(None)
        left.append(-1)
        right.append(-1)
        start.append(0)
        count.append(0)
        return len(left) - 1

    if T == 0:
        z = np.zeros((0, 3))
        e = np.zeros(0, dtype=np.int64)
        return BVH(z, z, e, e, e, e, order)
    root = new_node()
    stack = [(root, 0, T)]
    while stack:
        node, s, e = stack.pop()
        idx = order[s:e]
        bmin[node] = lo[idx].min(axis=0)
        bmax[node] = hi[idx].max(axis=0)
        if e - s <= LEAF_SIZE:
            start[node], count[node] = s, e - s
            continue
        c = cent[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        # stable sort keeps the build deterministic under ties
        perm = np.argsort(c[:, axis], kind="stable")
        order[s:e] = idx[perm]
        mid = (s + e) // 2
        l, r = new_node(), new_node()
        left[node], right[node] = l, r
        stack.append((r, mid, e))
        stack.append((l, s, mid))
    return BVH(
        np.ascontiguousarray(bmin, dtype=np.float64),
        np.ascontiguousarray(bmax, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(start, dtype=np.int64),
        np.asarray(count, dtype=np.int64),
        order,
    )
