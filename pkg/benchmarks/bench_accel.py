"""Compare the numba and numpy code paths for Bessel evaluation and assembly.

Usage: python3 benchmarks/bench_accel.py [--repeat N]
"""
import argparse
import os
import time

import numpy as np

from potspec._kernels import assemble_nb, assemble_np, jv_nb, jv_np
from potspec.domains import Ball, Disc, make_mesh
from potspec.kernels import self_cell_integral


def best_of(fn, repeat):
    fn()  # warm-up (JIT compile on the numba path)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    x = rng.uniform(1e-3, 100.0, 200_000)
    nu = rng.uniform(-0.5, 40.0, x.size)
    cases = [("jv 200k points", lambda: jv_nb(nu, x), lambda: jv_np(nu, x))]
    for label, dom, h in (("log2d disc h=0.03", Disc(1.0), 0.03), ("newton3d ball h=0.1", Ball(1.0), 0.1)):
        mesh = make_mesh(dom, h)
        pts = np.ascontiguousarray(mesh.centroids)
        w = mesh.cell_measure
        d = self_cell_integral(dom.dimension, w)
        log_kernel = dom.dimension == 2
        cases.append((f"assemble {label} n={mesh.included_cell_count}",
                      lambda p=pts, w=w, d=d, lk=log_kernel: assemble_nb(p, w, d, lk),
                      lambda p=pts, w=w, d=d, lk=log_kernel: assemble_np(p, w, d, lk)))

    print(f"threads: {os.environ.get('POTSPEC_THREADS', os.cpu_count())}")
    print(f"{'case':44s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max |diff|':>11s}")
    for label, fast, slow in cases:
        a, b = fast(), slow()
        tf, ts = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{label:44s} {tf:10.4f} {ts:10.4f} {ts / tf:8.1f} {np.max(np.abs(a - b)):11.2e}")


if __name__ == "__main__":
    main()
