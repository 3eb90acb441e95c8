"""Compare the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat 200] [--scenario FILE]

Reports per-kernel micro timings and end-to-end compute_region latency.
"""
import argparse
import time

import numpy as np

from feasregion import kernels
from feasregion.region import RegionRequest, compute_region
from feasregion.scenario import load_scenario, quadruped_scenario


def _time(fn, repeat):
    ts = np.empty(repeat)
    for k in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts[k] = time.perf_counter() - t0
    return ts * 1e3


def _kernel_inputs(rng):
    ang = np.sort(rng.uniform(0, 2 * np.pi, 40))
    outer = np.column_stack([np.cos(ang), np.sin(ang)]) * 2.0
    inner = outer * 0.8
    m, n = 30, 60
    A = rng.normal(size=(m, n))
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = np.abs(A)
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = 1.0
    T[m, :n] = -rng.uniform(0.1, 1.0, n)
    return outer, inner, T, np.arange(n, n + m)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--scenario", default=None)
    args = ap.parse_args(argv)
    sc = load_scenario(args.scenario) if args.scenario else quadruped_scenario()
    rng = np.random.default_rng(0)
    outer, inner, T, basis = _kernel_inputs(rng)
    allowed = np.ones(T.shape[1] - 1, dtype=np.bool_)

    rows = []
    for be in kernels.available_backends():
        kernels.set_backend(be)
        compute_region(RegionRequest(sc, "feasible"))  # JIT warm-up
        kernels.simplex_iterate(T.copy(), basis.copy(), allowed, 1000)
        k_cut = _time(lambda: kernels.cut_areas(outer, inner), args.repeat)
        k_clip = _time(lambda: kernels.clip_halfspace(outer, np.array([1.0, 0.3]), 0.5), args.repeat)
        k_spx = _time(lambda: kernels.simplex_iterate(T.copy(), basis.copy(), allowed, 1000), args.repeat)
        reg = _time(lambda: compute_region(RegionRequest(sc, "feasible")), args.repeat)
        rows.append((be, np.median(k_cut), np.median(k_clip), np.median(k_spx),
                     np.percentile(reg, 50), np.percentile(reg, 99.5)))
    print(f"{'backend':8s} {'cut_areas':>10s} {'clip':>10s} {'simplex':>10s} {'region p50':>11s} {'p99.5':>9s}  [ms]")
    for be, a, b, c, d, e in rows:
        print(f"{be:8s} {a:10.4f} {b:10.4f} {c:10.4f} {d:11.3f} {e:9.3f}")


if __name__ == "__main__":
    main()
