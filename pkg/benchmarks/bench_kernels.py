"""Time the renderer kernels on each available backend.

    python benchmarks/bench_kernels.py [--size 64] [--repeat 50]

Prints one line per (kernel, backend) with the median time per call and the
speed-up of the compiled backend over the NumPy fallback. It also checks that
both backends return the same pixels.
"""
import argparse
import statistics
import time

import numpy as np

from vtrkit import kernels


def _median_time(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def cases(size, rng):
    a = rng.random((size, size, 3), dtype=np.float32)
    b = rng.random((size, size, 3), dtype=np.float32)
    alpha = rng.random((size, size), dtype=np.float32)
    light = rng.random((size, size), dtype=np.float32)
    return {
        "warp_affine": lambda m: m.warp_affine(a, 1.3, 0.4),
        "box_blur": lambda m: m.box_blur(a, 3, 2),
        "composite": lambda m: m.composite(a, b, alpha, 0.9, 1.1, 0.02, 0.3, light),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--repeat", type=int, default=50)
    args = p.parse_args(argv)
    backends = {name: kernels.get_backend(name) for name in kernels.available_backends()}
    if "cython" not in backends:
        print("compiled backend not built; timing the NumPy fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12} {'backend':<8} {'median ms':>10} {'speed-up':>9}")
    for name, fn in cases(args.size, rng).items():
        outs, times = {}, {}
        for b, mod in backends.items():
            outs[b] = fn(mod)
            times[b] = _median_time(lambda: fn(mod), args.repeat)
        for b in backends:
            ratio = times["python"] / times[b]
            print(f"{name:<12} {b:<8} {times[b] * 1e3:10.3f} {ratio:8.1f}x")
        if len(outs) == 2:
            diff = float(np.abs(outs["cython"] - outs["python"]).max())
            print(f"{name:<12} max |cython - python| = {diff:.2e}")


if __name__ == "__main__":
    main()
