"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --n 34 100 300 --repeat 5
"""

import argparse
import timeit

import numpy as np

from silencer import _pykernels
from silencer.datasets import load
from silencer.graph import generate_er

try:
    from silencer import _ckernels
except ImportError:
    _ckernels = None


def bench(fn, arg, repeat, *extra):
    times = timeit.repeat(lambda: fn(arg, *extra), number=1, repeat=repeat)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--n", type=int, nargs="+", default=[34, 100, 300])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation` first")

    print(f"{'kernel':<20}{'n':>6}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    graphs = [("karate", load("karate")[0].adjacency)]
    graphs += [("er(p=0.1)", generate_er(n, 0.1, args.seed).adjacency) for n in args.n if n != 34]
    for name, a in graphs:
        tp = bench(_pykernels.greedy_modularity, a, args.repeat)
        tc = bench(_ckernels.greedy_modularity, a, args.repeat)
        assert np.array_equal(_pykernels.greedy_modularity(a)[0], _ckernels.greedy_modularity(a)[0])
        print(f"{'greedy ' + name:<20}{a.shape[0]:>6}{tp * 1e3:>14.2f}{tc * 1e3:>14.2f}{tp / tc:>10.1f}")

    rng = np.random.default_rng(args.seed)
    for n in args.n:
        losses = rng.random((n, n)) * 2
        tp = bench(_pykernels.soft_weight_matrix, losses, args.repeat, 0.7)
        tc = bench(_ckernels.soft_weight_matrix, losses, args.repeat, 0.7)
        print(f"{'soft_weight':<20}{n:>6}{tp * 1e3:>14.3f}{tc * 1e3:>14.3f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
