"""Time the numba kernels against their pure-numpy twins.

Usage: python3 benchmarks/bench_backends.py [--repeat 5]

Numba timings exclude the first (compiling) call.  Results of both backends
are compared before timing so a fast wrong kernel cannot slip through.
"""
import argparse
import time

import numpy as np

from hyperinfo import kernels
from hyperinfo.search import group_pointmaps


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    batch = rng.standard_normal((256, 1 << 12))
    tables = rng.integers(0, 2, (20_000, 16), dtype=np.uint8)
    rhos = np.linspace(0.02, 0.9, 10)
    pm4 = group_pointmaps(4)
    vec = rng.standard_normal(1 << 10)
    return {
        "fwht 256 x 2^12": lambda k: k["fwht"](batch.copy()),
        "batch_scores 20000 x n=4 x 10 alphas": lambda k: k["batch_scores"](tables, rhos),
        "enumerate_orbits n=4": lambda k: k["enumerate_orbits"](4, pm4),
        "noise_direct n=10": lambda k: k["noise_direct"](vec, 0.2),
    }


def backend(name):
    return {k: getattr(kernels, f"{k}_{name}")
            for k in ("fwht", "batch_scores", "enumerate_orbits", "noise_direct")}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is unavailable or disabled; nothing to compare")
    np_k, nb_k = backend("numpy"), backend("numba")
    print(f"{'kernel':40s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speedup':>8s}")
    for label, fn in cases(np.random.default_rng(args.seed)).items():
        a, b = fn(np_k), fn(nb_k)  # warm-up and cross-check
        for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            assert np.allclose(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64), atol=1e-12), label
        t_np = best_of(lambda: fn(np_k), args.repeat)
        t_nb = best_of(lambda: fn(nb_k), args.repeat)
        print(f"{label:40s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
