#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Times the hot paths (history quadrature, LSTM forward / gradient, recursive
extrapolation) on both backends and prints a speedup table.  Run:

    python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from memop.kernels import numba_impl, numpy_impl
from memop.lstm import init_model
from memop.problems import DysonParams, ToyParams, dyson_problem, toy_problem
from memop.solver import TimeGrid, solve_ab3


def timeit(fn, min_time=0.3):
    fn()  # warm-up / JIT
    n = 0
    t0 = time.perf_counter()
    while True:
        fn()
        n += 1
        dt = time.perf_counter() - t0
        if dt > min_time and n >= 3:
            return dt / n


def bench_history(rows, quick):
    m = 500 if quick else 2000
    rng = np.random.default_rng(0)
    toy_stack = np.ascontiguousarray(
        0.5 * (rng.normal(size=(m + 1, 2, 2)) + 1j * rng.normal(size=(m + 1, 2, 2)))
    )
    dyson_stack = np.ascontiguousarray(toy_stack[:, :1, :1])
    toy_p = np.array([1.0, 2.0, 2.0, 1.0])
    dyson_p = np.array([-1.0, 1.0])
    for name, kid, params, stack in (
        (f"history toy (m={m})", 0, toy_p, toy_stack),
        (f"history dyson (m={m})", 1, dyson_p, dyson_stack),
    ):
        t_nb = timeit(lambda: numba_impl.history_integral_raw(kid, params, stack, 0.01))
        t_np = timeit(lambda: numpy_impl.history_integral_raw(kid, params, stack, 0.01))
        rows.append((name, t_nb, t_np))


def bench_lstm(rows, quick):
    t_len = 500 if quick else 2000
    model = init_model(8, 64, seed=0)
    rng = np.random.default_rng(1)
    x = rng.normal(size=(t_len, 8))
    y = rng.normal(size=(t_len, 8))
    rows.append((
        f"lstm forward (T={t_len}, H=64)",
        timeit(lambda: numba_impl.seq_forward_infer(*model.packed(), x)),
        timeit(lambda: numpy_impl.seq_forward_infer(*model.packed(), x)),
    ))
    rows.append((
        f"lstm grad (T={t_len}, H=64)",
        timeit(lambda: numba_impl.seq_grad(*model.packed(), x, y, t_len - 1)),
        timeit(lambda: numpy_impl.seq_grad(*model.packed(), x, y, t_len - 1)),
    ))


def bench_extrapolation(rows, quick):
    import memop.backend as backend
    from memop.extrapolation import RnnIntegralProvider, extrapolate

    spec = dyson_problem(DysonParams(-1.0, 1.0))
    n_pre = 200 if quick else 1000
    prefix = solve_ab3(spec, TimeGrid(0.01, n_pre))
    t_final = (3 * n_pre) * 0.01
    model = init_model(2, 64, seed=0)
    t_fast = timeit(lambda: extrapolate(model, prefix, t_final))
    # provider path == what the numpy backend drives per step
    t_slow = timeit(lambda: extrapolate(RnnIntegralProvider(model), prefix, t_final))
    rows.append((f"extrapolate (prefix {n_pre}, +{2 * n_pre} steps)", t_fast, t_slow))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller problem sizes")
    args = parser.parse_args()
    rows = []
    bench_history(rows, args.quick)
    bench_lstm(rows, args.quick)
    bench_extrapolation(rows, args.quick)
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, t_nb, t_np in rows:
        print(f"{name:<{width}}  {t_nb * 1e3:>8.2f}ms  {t_np * 1e3:>8.2f}ms  {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
