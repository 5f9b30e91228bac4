"""Time the numba-compiled run kernel against the pure-Python fallback.

The fallback is measured in a child process started with
``EARLAB_DISABLE_JIT=1``, so every helper runs uncompiled. Both paths get the
same seeds and must return identical results; the script exits non-zero if
they do not.

    python benchmarks/bench_kernels.py --runs 10
"""
import argparse
import json
import os
import subprocess
import sys
import time

from earlab import kernels
from earlab._jit import JIT_ENABLED
from earlab.algorithms import make_streams

CASES = {
    "rls leadingones(101)": (kernels.KIND_LEADINGONES, 101, 1, 0, 50, kernels.VARIANT_RLS, 0, 0.0),
    "rls xdivk(40,2)": (kernels.KIND_XDIVK, 40, 2, 0, 39, kernels.VARIANT_RLS, 0, 0.0),
    "mod-learning ss xdivk(40,2)": (kernels.KIND_XDIVK, 40, 2, 0, 39, kernels.VARIANT_MOD_LEARNING, 1, 0.1),
    "earl ts omd(100,50)": (kernels.KIND_OMD, 100, 1, 50, 50, kernels.VARIANT_EARL, 0, 0.0),
}


def time_case(case, runs, cap):
    kind, n, k, d, p, variant, state, eps = case
    results = []
    start = time.perf_counter()
    for seed in range(runs):
        res = kernels.run_kernel(kind, n, k, d, p, variant, state, 0.5, 0.5, eps, cap, *make_streams(seed))
        results.append([int(res[0]), bool(res[1]), int(res[2]), int(res[3])])
    return time.perf_counter() - start, results


def measure(runs, cap):
    if JIT_ENABLED:
        time_case(next(iter(CASES.values())), 1, 100)  # compile outside the timing
    return {name: time_case(case, runs, cap) for name, case in CASES.items()}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--cap", type=int, default=10**6)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args(argv)

    if args.child:
        json.dump(measure(args.runs, args.cap), sys.stdout)
        return 0
    if not JIT_ENABLED:
        print("numba is disabled in this process; unset EARLAB_DISABLE_JIT to compare", file=sys.stderr)
        return 1

    jit = measure(args.runs, args.cap)
    env = dict(os.environ, EARLAB_DISABLE_JIT="1")
    child = subprocess.run(
        [sys.executable, __file__, "--child", "--runs", str(args.runs), "--cap", str(args.cap)],
        env=env, capture_output=True, text=True, check=True,
    )
    plain = json.loads(child.stdout)

    print(f"{'case':30s} {'evals/run':>10s} {'numba s':>9s} {'python s':>9s} {'speedup':>8s}")
    mismatch = False
    for name in CASES:
        t_jit, res_jit = jit[name]
        t_py, res_py = plain[name]
        mismatch |= res_jit != res_py
        evals = sum(r[0] for r in res_jit) / args.runs
        print(f"{name:30s} {evals:10.0f} {t_jit:9.3f} {t_py:9.3f} {t_py / t_jit:7.0f}x")
    if mismatch:
        print("compiled and Python kernels disagree", file=sys.stderr)
        return 1
    print("results identical on both paths")
    return 0


if __name__ == "__main__":
    sys.exit(main())
