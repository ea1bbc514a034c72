"""Compare the pure-Python and compiled sampler backends.

Run as a script; prints a small table of throughput ratios. The two
backends produce bit-identical output, so this is purely about speed.

    python3 benchmarks/bench_samplers.py [--quick]
"""

import argparse
import sys
import time

from vertexlab.dynamics import _samplers_py

try:
    from vertexlab.dynamics import _samplers_cy
except ImportError:
    _samplers_cy = None


def timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def bench_words(mod, n):
    stream = mod.PhiloxStream(2024, 0)
    acc = 0
    for _ in range(n):
        acc ^= stream.next64()
    return acc


def bench_table(mod, n):
    table = mod.CutTable([(1, 7), (2, 7), (3, 7), (1, 7)])
    stream = mod.PhiloxStream(7, 7)
    acc = 0
    for _ in range(n):
        acc += table.sample(stream)
    return acc


def bench_quadrant(mod, size):
    # drive the full row sampler through one backend's primitives
    from vertexlab.dynamics.quadrant import QuadrantSampler

    sampler = QuadrantSampler.__new__(QuadrantSampler)
    from gmpy2 import mpq

    sampler._vertical = mod.CutTable([(7, 10), (3, 10)])
    sampler._horizontal = mod.CutTable([(3, 10), (7, 10)])
    stream = mod.PhiloxStream(16, 0)
    row = bytes(size)
    exited = 0
    for _ in range(size):
        row, out = sampler.step(row, stream)
        exited += out
    return exited


def bench_trajectory(mod, steps):
    from vertexlab.dynamics import steps as step_mod
    from vertexlab.weights import ModelParams

    saved = step_mod.CutTable
    step_mod.CutTable = mod.CutTable
    try:
        params = ModelParams.from_qs("1/2", "-1/3")
        cache = step_mod.LRowCache(params, "4")
        stream = mod.PhiloxStream(3, 0)
        config = step_mod.ParticleConfig({})
        for _ in range(steps):
            config = step_mod.step_x_plus(params, "4", config, stream, cache)
        return config.total
    finally:
        step_mod.CutTable = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    if _samplers_cy is None:
        print("compiled backend not built; nothing to compare")
        return 1

    scale = 10 if args.quick else 1
    cases = [
        ("philox words", bench_words, 400000 // scale),
        ("cut-table draws", bench_table, 150000 // scale),
        ("quadrant rows", bench_quadrant, 600 // scale),
        ("injection steps", bench_trajectory, 3000 // scale),
    ]

    print(f"{'kernel':<18} {'python':>10} {'cython':>10} {'speedup':>9}")
    for name, fn, n in cases:
        out_py, t_py = timed(fn, _samplers_py, n)
        out_cy, t_cy = timed(fn, _samplers_cy, n)
        if name in ("philox words", "cut-table draws"):
            assert out_py == out_cy, name
        print(f"{name:<18} {t_py:>9.3f}s {t_cy:>9.3f}s {t_py / t_cy:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
