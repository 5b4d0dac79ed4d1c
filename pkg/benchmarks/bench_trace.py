"""Time the compiled and pure-Python ray tracers on the same sample plan.

    python3 benchmarks/bench_trace.py [--n-total N] [--repeat R]
"""
import argparse
import time

import numpy as np

from visrepair import RepairConfig, shapes
from visrepair.config import bbox_diagonal
from visrepair.measures import _compiled, plan_samples, trace_sample_counts


def bench(mesh, cfg, backend, repeat):
    plan = plan_samples(mesh, cfg)
    best, counts = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        counts = trace_sample_counts(mesh, plan, cfg, backend)
        best = min(best, time.perf_counter() - t0)
    return best, counts, len(plan.sample_face)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-total", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["python"] + (["cython"] if _compiled is not None else [])
    print(f"{'mesh':<18}{'faces':>7}{'samples':>9}" + "".join(f"{b:>10}" for b in backends) + f"{'speedup':>9}")
    for name, mesh in [("subdivided_cube", shapes.subdivided_cube()), ("scene", shapes.scene()),
                       ("sphere_32x14", shapes.uv_sphere(32, [180.0 * k / 15 for k in range(1, 15)])),
                       ("mobius", shapes.mobius())]:
        cfg = RepairConfig(n_total=args.n_total).resolve(bbox_diagonal(mesh.vertices))
        times, results = [], []
        for b in backends:
            t, counts, n = bench(mesh, cfg, b, args.repeat)
            times.append(t)
            results.append(counts)
        same = all(np.array_equal(results[0], r) for r in results[1:])
        speed = f"{times[0] / times[-1]:.1f}x" if len(times) > 1 else "-"
        print(f"{name:<18}{mesh.n_faces:>7}{n:>9}" + "".join(f"{t:>9.3f}s" for t in times)
              + f"{speed:>9}" + ("" if same else "  MISMATCH"))


if __name__ == "__main__":
    main()
