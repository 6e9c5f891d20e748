#!/usr/bin/env python3
"""Benchmark the compiled kernel lane against the numpy fallback.

Times the fused per-mode step update on its own and a full symmetric step of
the production solver under each lane.  Run from the repository root:

    python benchmarks/bench_kernels.py [--sizes 128,256] [--repeat 200]
"""

import argparse
import time

import numpy as np

from liouwave import CouplingConfig, StepperConfig, evolve, kernels, make_torus_grid
from liouwave import random_smooth_field, wave_state_new
from liouwave import _kernels_py

try:
    from liouwave import _kernels as _ext
except ImportError:
    _ext = None


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_combine(n, repeat):
    rng = np.random.default_rng(0)
    ncol = n // 2 + 1
    coef = [np.ascontiguousarray(rng.standard_normal((n, ncol))) for _ in range(4)]
    modes = [
        np.ascontiguousarray(rng.standard_normal((n, ncol)) + 1j * rng.standard_normal((n, ncol)))
        for _ in range(3)
    ]
    uo, vo = np.empty_like(modes[0]), np.empty_like(modes[0])
    rows = []
    py = time_call(lambda: _kernels_py.gautschi_combine(*coef, *modes, uo, vo), repeat)
    rows.append(("python", py))
    if _ext is not None:
        ext = time_call(lambda: _ext.gautschi_combine(*coef, *modes, uo, vo), repeat)
        rows.append(("compiled", ext))
    return rows


def bench_full_step(n, repeat):
    grid = make_torus_grid(n, n)
    cfg = CouplingConfig("sinh_gordon", (4 * np.pi, 4 * np.pi))
    u0 = random_smooth_field(grid, np.random.default_rng(3), 4, 1.0)
    st = wave_state_new(grid, u0, np.zeros((n, n)))
    stepper = StepperConfig(h=1e-3, scheme="symmetric", sample_every=10**9)
    horizon = repeat * 1e-3
    rows = []
    for name in ("python", "ext") if kernels.HAVE_EXT else ("python",):
        kernels.use_backend(name)
        t0 = time.perf_counter()
        evolve(st, horizon, stepper, cfg)
        per_step = (time.perf_counter() - t0) / repeat
        rows.append(("compiled" if name == "ext" else name, per_step))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="128,256")
    parser.add_argument("--repeat", type=int, default=200)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _ext is None:
        print("compiled extension not available: showing the numpy lane only\n")

    original = kernels.backend
    try:
        for n in sizes:
            print(f"== grid {n} x {n}")
            rows = bench_combine(n, args.repeat)
            base = rows[0][1]
            for name, t in rows:
                speed = f"  ({base / t:.2f}x vs python)" if name != "python" else ""
                print(f"  mode-update kernel  {name:>8}: {t * 1e6:8.1f} us{speed}")
            rows = bench_full_step(n, max(20, args.repeat // 4))
            base = rows[0][1]
            for name, t in rows:
                speed = f"  ({base / t:.2f}x vs python)" if name != "python" else ""
                print(f"  full symmetric step {name:>8}: {t * 1e3:8.3f} ms{speed}")
            print()
    finally:
        kernels.use_backend(original)


if __name__ == "__main__":
    main()
