"""Benchmark the numba kernels against the pure-numpy fallback.

Times the log-count DP, path sampling, last-passage DP, and polymer DP
on both backends and prints a small table.  Run as:

    python benchmarks/run_benchmarks.py [--N 1024] [--paths 20000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from cornergrowth.kernels import _numpy_impl
from cornergrowth.paths import PathEnsemble
from cornergrowth.rng import stream

try:
    from cornergrowth.kernels import _numba_impl
except ImportError:
    _numba_impl = None


def best_of(repeat, fn, *args):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=1024)
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    N = args.N

    allowed = PathEnsemble(N, N).allowed_mask()
    weights = stream(0).standard_normal((N, N))
    uniforms = stream(1).random((args.paths, 2 * N - 2))
    blog = _numpy_impl.backward_log_counts(allowed)

    impls = [("numpy", _numpy_impl)]
    if _numba_impl is not None:
        # warm up the jit compiler outside the timed region
        small = np.ones((4, 4), dtype=bool)
        _numba_impl.forward_log_counts(small)
        _numba_impl.backward_log_counts(small)
        _numba_impl.sample_energies(_numba_impl.backward_log_counts(small),
                                    np.zeros((4, 4)), stream(2).random((2, 6)))
        _numba_impl.sample_steps(_numba_impl.backward_log_counts(small),
                                 stream(2).random((2, 6)))
        _numba_impl.lpp_grid(np.zeros((4, 4)))
        _numba_impl.polymer_log_grid(np.zeros((4, 4)), 1.0)
        impls.append(("numba", _numba_impl))

    cases = [
        ("forward_log_counts", lambda impl: impl.forward_log_counts(allowed)),
        ("sample_energies", lambda impl: impl.sample_energies(blog, weights, uniforms)),
        ("sample_steps", lambda impl: impl.sample_steps(blog, uniforms)),
        ("lpp_grid", lambda impl: impl.lpp_grid(weights)),
        ("polymer_log_grid", lambda impl: impl.polymer_log_grid(weights, 0.5)),
    ]

    print(f"N={N}, paths={args.paths}, best of {args.repeat}")
    header = f"{'kernel':20s}" + "".join(f"{name:>12s}" for name, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for cname, call in cases:
        times = [best_of(args.repeat, call, impl) for _, impl in impls]
        line = f"{cname:20s}" + "".join(f"{t * 1e3:10.1f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
