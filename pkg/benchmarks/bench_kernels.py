"""Compiled vs pure-Python max-plus kernels.

Times the two kernels on random exact tables, then the whole tree DP on a
caterpillar, once per backend.  Run from the repository root:

    python benchmarks/bench_kernels.py --k 200 --spine 5000
"""
from __future__ import annotations

import argparse
import random
import time
from contextlib import contextmanager

from gmpy2 import mpq

from energyshare import _kernels_py, kernels
from energyshare.generators import caterpillar
from energyshare.tree_solver import compute_tables, preprocess, root_entry

try:
    from energyshare import _kernels
except ImportError:
    _kernels = None


@contextmanager
def backend(mod):
    saved = kernels.maxplus, kernels.window_max
    kernels.maxplus, kernels.window_max = mod.maxplus, mod.window_max
    try:
        yield
    finally:
        kernels.maxplus, kernels.window_max = saved


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=200, help="table length for the kernel timings")
    ap.add_argument("--spine", type=int, default=5000, help="caterpillar spine length")
    ap.add_argument("--agents", type=int, default=50)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    a = [mpq(rng.randint(-50, 50), rng.randint(1, 6)) for _ in range(args.k)]
    b = [mpq(rng.randint(-50, 50), rng.randint(1, 6)) for _ in range(args.k)]
    impls = [("python", _kernels_py)] + ([("compiled", _kernels)] if _kernels else [])
    if _kernels is None:
        print("compiled extension not built; timing the fallback only")

    print(f"{'case':<28}{'backend':<10}{'seconds':>10}")
    rows = {}
    for name, mod in impls:
        t = best_of(lambda: mod.maxplus(a, 0, b, 0, 0, 2 * args.k - 2), args.repeat)
        rows[("maxplus", name)] = t
        print(f"{'maxplus k=%d' % args.k:<28}{name:<10}{t:>10.4f}")
        t = best_of(lambda: mod.window_max(mpq(1), 0, args.k - 1, b, 0, 0, 2 * args.k - 2), args.repeat)
        rows[("window", name)] = t
        print(f"{'window_max k=%d' % args.k:<28}{name:<10}{t:>10.4f}")

    inst = caterpillar(args.spine, args.agents, args.seed)
    tree = preprocess(inst)
    for name, mod in impls:
        with backend(mod):
            t = best_of(lambda: root_entry(compute_tables(tree)), 1)
        rows[("tree", name)] = t
        print(f"{'tree DP %d nodes k=%d' % (2 * args.spine, args.agents):<28}{name:<10}{t:>10.4f}")

    if _kernels:
        for case in ("maxplus", "window", "tree"):
            print(f"speedup {case}: {rows[(case, 'python')] / rows[(case, 'compiled')]:.2f}x")


if __name__ == "__main__":
    main()
