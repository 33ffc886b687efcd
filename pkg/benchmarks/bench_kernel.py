"""Compare the compiled and pure-Python walk kernels on the same workloads.

    python3 benchmarks/bench_kernel.py [--repeat 3]

Each workload is built once and then run with both kernels; the escape
prefixes must agree.  Times exclude tree construction.
"""
import argparse
import time

from rotortree import kernel
from rotortree.generators import Bary, Brush, truncate
from rotortree.rules import IID, Constant, IIDRotorLaw
from rotortree.walker import Arena, RotorEngine


def finite_workload():
    tree, cfg = truncate(Bary(2, Constant(0)), 16)

    def run(advance):
        eng = RotorEngine.for_tree(tree, cfg.copy(), advance=advance)
        return eng.run(60000), eng.steps
    return run


def lazy_workload():
    g = Bary(2, IID(IIDRotorLaw.uniform([0, 1]), 1))

    def run(advance):
        eng = RotorEngine(Arena.lazy(g, depth_cap=24, counts=False), track=False, advance=advance)
        return eng.run(20000), eng.steps
    return run


def brush_workload():
    def run(advance):
        eng = RotorEngine(Arena.lazy(Brush(2), depth_cap=2000, counts=False), track=False, advance=advance)
        return eng.run(1500), eng.steps
    return run


WORKLOADS = {
    "binary tree h=16, rotors down, 60000 particles": finite_workload,
    "lazy binary tree, iid rotors, depth 24, 20000 particles": lazy_workload,
    "lazy 2-brush, depth 2000, 1500 particles": brush_workload,
}


def timed(fn, advance, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(advance)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernel.c_advance is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
    print(f"{'workload':<58} {'steps':>11} {'python s':>9} {'cython s':>9} {'speedup':>8}")
    for name, make in WORKLOADS.items():
        fn = make()
        tp, (pp, steps) = timed(fn, kernel.py_advance, args.repeat)
        tc, (pc, _) = timed(fn, kernel.c_advance, args.repeat)
        if pp != pc:
            raise SystemExit(f"kernels disagree on {name!r}")
        print(f"{name:<58} {steps:>11} {tp:>9.3f} {tc:>9.3f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
