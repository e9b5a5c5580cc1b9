"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--depth 14]

Prints one row per kernel with the best-of-N wall time for each backend and
the speedup. When the extension is not built only the fallback column is filled.
"""
import argparse
import timeit

import numpy as np

from gibbs_charts.kernels import _fallback
from gibbs_charts.markov import CAT_MAP, build_automorphism, catmap_partition

try:
    from gibbs_charts.kernels import _ckernels
except ImportError:
    _ckernels = None


def cases(depth, rng):
    aut = build_automorphism(CAT_MAP)
    spec = catmap_partition(aut).spec
    lev = spec.level(depth)
    tail = np.ascontiguousarray(lev.tail, dtype=np.int64)
    parent = np.ascontiguousarray(lev.parent, dtype=np.int64)
    n_prev = len(spec.level(depth - 1))
    w = rng.random(tail.size)
    vec = rng.random(tail.size)

    freqs = np.array([[1, 0], [1, 1], [2, -1], [0, 3]], dtype=np.int64)
    a = rng.normal(size=4)
    b = rng.normal(size=4)
    xy = rng.random((200_000, 2))
    base = rng.random((20_000, 2))
    off = rng.random(20_000) * 0.3
    mat = aut.matrix.astype(float)

    label = "level %d, %d words" % (depth, tail.size)
    return [
        ("adjoint_step", label, (w, vec, tail, parent, n_prev)),
        ("transfer_step", label, (w, vec, tail, parent, n_prev)),
        ("trig_eval", "200000 points, 4 terms", (xy, freqs, a, b, 0.1)),
        ("stable_series", "20000 points, 40 terms",
         (base, off, aut.e_s, aut.lambda_s, mat, 40, freqs, a, b)),
    ]


def best(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--depth", type=int, default=14)
    ns = ap.parse_args()
    rng = np.random.default_rng(0)

    print("%-14s %-26s %12s %12s %8s" % ("kernel", "workload", "python [ms]",
                                         "cython [ms]", "speedup"))
    for name, label, args in cases(ns.depth, rng):
        t_py = best(getattr(_fallback, name), args, ns.repeat)
        if _ckernels is None:
            print("%-14s %-26s %12.2f %12s %8s" % (name, label, 1e3 * t_py, "n/a", "n/a"))
            continue
        fc = getattr(_ckernels, name)
        if not np.allclose(fc(*args), getattr(_fallback, name)(*args), rtol=1e-10, atol=1e-12):
            raise SystemExit("backends disagree on %s" % name)
        t_c = best(fc, args, ns.repeat)
        print("%-14s %-26s %12.2f %12.2f %7.1fx" % (name, label, 1e3 * t_py, 1e3 * t_c,
                                                   t_py / t_c))


if __name__ == "__main__":
    main()
