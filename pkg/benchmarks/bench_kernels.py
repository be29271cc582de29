"""Compiled kernels against their numpy fallbacks.

Times each kernel on representative inputs and a full model solve with
each backend, checks that the outputs agree, and prints a table.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from beliefape import kernels
from beliefape.lifecycle import GridSpec, LifecycleModel, solve

py = kernels.get_backend("python")
cy = kernels.get_backend("cython")


def best_of(fn, repeat):
    out, best = None, np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def expect_case(rng):
    na, nb, nA, nq = 200, 60, 20, 9
    a = np.ascontiguousarray(np.linspace(0, 60, na) ** 1.5)
    b_grid = np.linspace(-2, 2, nb)
    A_grid = np.linspace(0.1, 3, nA)
    nc = np.ascontiguousarray(rng.uniform(0.5, 5, (nb, nA, na)))
    nv = np.ascontiguousarray(rng.uniform(0.5, 5, (nb, nA, na)))
    return (a, b_grid, A_grid, 1.03, 2.0, 0.2 * rng.standard_normal(nq), 0.1 * rng.standard_normal(nq),
            np.full(nq, 1 / nq), 0.1, 0.2, 1.3, 1 / 0.86, 5.0, 1, nc, nv, a, b_grid, A_grid, 1e-10)


def interp_case(rng):
    m_grid, b_grid, A_grid = np.linspace(0, 10, 200), np.linspace(-2, 2, 60), np.linspace(0, 3, 20)
    f = np.ascontiguousarray(rng.standard_normal((60, 20, 200)))
    n = 200_000
    return (f, m_grid, b_grid, A_grid, rng.uniform(0, 10, n), rng.uniform(-2, 2, n), rng.uniform(0, 3, n))


def lasso_case(rng):
    X = rng.standard_normal((2000, 150))
    y = X[:, :10] @ rng.standard_normal(10) + rng.standard_normal(2000)
    return X.T @ X / 2000, X.T @ y / 2000, float(y @ y / 2000)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    rows = []

    e = expect_case(rng)
    tp, (u1, _) = best_of(lambda: py.expect_working(*e), args.repeat)
    tc, (u2, _) = best_of(lambda: cy.expect_working(*e), args.repeat)
    rows.append(("expect_working", tp, tc, float(np.max(np.abs(u1 - u2) / np.abs(u1)))))

    i = interp_case(rng)
    tp, v1 = best_of(lambda: py.interp3(*i), args.repeat)
    tc, v2 = best_of(lambda: cy.interp3(*i), args.repeat)
    rows.append(("interp3", tp, tc, float(np.max(np.abs(v1 - v2)))))

    G, xy, yy = lasso_case(rng)

    def run(k):
        b = np.zeros(len(xy))
        k.lasso_gram(G, xy, yy, 0.01, b, 1e-10, 100_000)
        return b
    tp, b1 = best_of(lambda: run(py), args.repeat)
    tc, b2 = best_of(lambda: run(cy), args.repeat)
    rows.append(("lasso_gram", tp, tc, float(np.max(np.abs(b1 - b2)))))

    model = LifecycleModel(grid=GridSpec(n_assets=100, n_beliefs=30, n_pension=10, n_quad=7))
    tc, s2 = best_of(lambda: solve(model), 1)
    saved = {n: getattr(kernels, n) for n in ("expect_working", "interp3", "lasso_gram")}
    try:
        for n in saved:
            setattr(kernels, n, getattr(py, n))
        tp, s1 = best_of(lambda: solve(model), 1)
    finally:
        for n, f in saved.items():
            setattr(kernels, n, f)
    diff = max(float(np.max(np.abs(a - b))) for a, b in zip(s1.consume, s2.consume))
    rows.append(("solve (100x30x10 grid)", tp, tc, diff))

    print(f"{'kernel':<24}{'python s':>12}{'cython s':>12}{'speedup':>10}{'max diff':>12}")
    for name, tp, tc, d in rows:
        print(f"{name:<24}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}{d:>12.1e}")


if __name__ == "__main__":
    main()
