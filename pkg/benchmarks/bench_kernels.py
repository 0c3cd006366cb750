"""Time the numba kernels against their numpy fallbacks.

Run: python benchmarks/bench_kernels.py

The package-level backend switch is SCA_DISABLE_NUMBA=1; this script
calls both implementations directly so the comparison does not depend
on the flag.
"""

import time

import numpy as np

from sca import kernels


def _time(fn, *args, n_warmup=2, n_runs=5):
    for _ in range(n_warmup):
        fn(*args)
    times = []
    for _ in range(n_runs):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return np.mean(times) * 1000, np.std(times) * 1000


def _report(label, numba_fn, numpy_fn, *args):
    mean_nb, std_nb = _time(numba_fn, *args)
    mean_np, std_np = _time(numpy_fn, *args)
    speedup = mean_np / mean_nb if mean_nb > 0 else float("inf")
    print(f"--- {label} ---")
    print(f"numba: {mean_nb:8.3f} +- {std_nb:.3f} ms")
    print(f"numpy: {mean_np:8.3f} +- {std_np:.3f} ms")
    print(f"speedup: {speedup:.2f}x\n")


def main():
    if kernels.numba is None:
        print("numba is not installed; nothing to compare")
        return
    rng = np.random.default_rng(0)

    for n, d in [(500, 5), (1500, 20)]:
        x = rng.normal(size=(n, d))
        _report(f"pairwise squared distances (n={n}, d={d})",
                kernels.nb_pairwise_sq_dists, kernels.np_pairwise_sq_dists, x)

    x = rng.normal(size=(2000, 10))
    q = rng.normal(size=(500, 10))
    _report("cross squared distances (m=500, n=2000, d=10)",
            kernels.nb_cross_sq_dists, kernels.np_cross_sq_dists, q, x)

    coords = rng.normal(size=(5000, 20))
    centroids = rng.normal(size=(60, 20))
    _report("nearest-centroid assignment (n=5000, k=60, d=20)",
            kernels.nb_assign_nearest, kernels.np_assign_nearest, coords, centroids)


if __name__ == "__main__":
    main()
