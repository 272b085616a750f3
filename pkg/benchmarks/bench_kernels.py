"""Compare the compiled and pure-Python DAG kernels.

    python benchmarks/bench_kernels.py [--nodes 400] [--repeat 20]
"""

from __future__ import annotations

import argparse
import random
import timeit

from threadmod import _kernels_py

try:
    from threadmod import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def random_dag(n: int, density: float, rng: random.Random):
    src, dst = [], []
    for b in range(1, n):
        for a in rng.sample(range(b), min(b, max(1, int(density * 4)))):
            src.append(a)
            dst.append(b)
    queries = [(rng.randrange(n), rng.sample(range(n), min(n, 16))) for _ in range(8)]
    return src, dst, queries


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, nargs="*", default=[30, 100, 400])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = random.Random(0)
    print(f"{'nodes':>6} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in args.nodes:
        src, dst, qs = random_dag(n, 1.0, rng)
        py = timeit.timeit(lambda: _kernels_py.maximal_predecessors(n, src, dst, qs), number=args.repeat)
        if _kernels is None:
            print(f"{n:>6} {py / args.repeat * 1e3:>10.3f} {'n/a':>10} {'-':>8}")
            continue
        assert _kernels.maximal_predecessors(n, src, dst, qs) == _kernels_py.maximal_predecessors(n, src, dst, qs)
        cy = timeit.timeit(lambda: _kernels.maximal_predecessors(n, src, dst, qs), number=args.repeat)
        print(f"{n:>6} {py / args.repeat * 1e3:>10.3f} {cy / args.repeat * 1e3:>10.3f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
