"""Timing comparison of the numba-compiled likelihood kernels against the
pure-python/numpy reference implementations.

Run directly:

    python benchmarks/bench_recursions.py [--n 2000] [--repeat 200]
"""

import argparse
import timeit

import numpy as np
from scipy.special import gammaln

from bellgarch import recursions, recursions_python
from bellgarch.bell_dist import log_bell_table
from bellgarch.ingarch import IngarchSpec, simulate


def make_inputs(n, seed=0):
    series, _ = simulate(IngarchSpec.linear11(0.6, 0.06, 0.10), n, seed=seed)
    x = series.values
    logbell = np.asarray(log_bell_table(int(x.max())), dtype=float)
    logfact = gammaln(np.arange(int(x.max()) + 1) + 1.0)
    return x, logbell, logfact


def bench(label, fast, slow, args, repeat, number=20):
    fast(*args)  # trigger compilation outside the timer
    t_fast = min(timeit.repeat(lambda: fast(*args), repeat=repeat, number=number))
    t_slow = min(timeit.repeat(lambda: slow(*args), repeat=repeat, number=number))
    ratio = t_slow / t_fast
    print(f"{label:<24s} numba {1e6 * t_fast / number:9.1f} us   "
          f"python {1e6 * t_slow / number:9.1f} us   speedup {ratio:6.1f}x")
    return ratio


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    if not recursions.USING_NUMBA:
        print("numba backend is not active (BELLGARCH_NO_NUMBA set or numba "
              "missing); nothing to compare")
        return

    x, logbell, logfact = make_inputs(args.n)
    dlam0 = np.array([1.0, 0.7, 0.7])
    d2lam0 = np.zeros((3, 3))
    dlam0_nl = np.array([1.0, 0.4, 0.4, 0.0])
    d2lam0_nl = np.zeros((4, 4))

    print(f"series length n = {args.n}\n")
    bench(
        "lambda_path_linear",
        recursions.lambda_path_linear,
        recursions_python.lambda_path_linear,
        (x, 0.5, np.array([0.1]), np.array([0.2]), 0.8),
        args.repeat,
    )
    bench(
        "loglik_from_path",
        recursions.loglik_from_path,
        recursions_python.loglik_from_path,
        (x,
         recursions.lambda_path_linear(x, 0.5, np.array([0.1]),
                                       np.array([0.2]), 0.8),
         0, recursions.FAMILY_BELL, logbell, logfact),
        args.repeat,
    )
    bench(
        "cml_parts_linear11",
        recursions.cml_parts_linear11,
        recursions_python.cml_parts_linear11,
        (x, 0.5, 0.1, 0.2, 0.8, dlam0, d2lam0,
         recursions.FAMILY_BELL, logbell, logfact),
        args.repeat,
    )
    bench(
        "cml_parts_nonlinear11",
        recursions.cml_parts_nonlinear11,
        recursions_python.cml_parts_nonlinear11,
        (x, 0.5, 0.05, 0.2, 0.8, 0.7, dlam0_nl, d2lam0_nl, logbell, logfact),
        args.repeat,
    )


if __name__ == "__main__":
    main()
