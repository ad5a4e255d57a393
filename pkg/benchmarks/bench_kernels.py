"""Timing comparison between the compiled kernels and their numpy twins.

Runs each hot kernel on representative sizes through both implementations
(directly, bypassing the import-time dispatch) and prints median wall
times.  Usage::

    python3 benchmarks/bench_kernels.py [--repeat 9] [--inner 20]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ddflux import _kernels as K


def median_ms(fn, repeat: int, inner: int) -> float:
    fn()  # warm-up: triggers compilation on the numba side
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter() - t0) / inner)
    return 1e3 * float(np.median(samples))


def build_cases(rng):
    cases = []

    n = 4096
    ul = rng.uniform(-2.0, 2.0, n)
    ur = rng.uniform(-2.0, 2.0, n)
    kv = rng.uniform(0.5, 1.5, n)
    roots = np.array([0.0])
    crit = np.zeros((1, 1))
    counts = np.array([1], dtype=np.int64)
    out = np.empty(n)
    cases.append(
        (
            f"flux sweep, quadratic EO (n={n})",
            lambda: K._flux_sweep_nb(ul, ur, kv, 0, 0, 0.0, roots, crit, counts, out),
            lambda: K._flux_sweep_np(ul, ur, kv, 0, 0, 0.0, roots, crit, counts, out),
        )
    )

    u2 = rng.uniform(0.05, 0.95, n)
    v2 = rng.uniform(0.05, 0.95, n)
    crit_rows = rng.uniform(0.2, 0.8, (n, 3))
    row_counts = rng.integers(0, 4, n).astype(np.int64)
    empty = np.empty(0)
    cases.append(
        (
            f"flux sweep, two-phase LLF (n={n})",
            lambda: K._flux_sweep_nb(u2, v2, kv, 3, 1, 0.0, empty, crit_rows, row_counts, out),
            lambda: K._flux_sweep_np(u2, v2, kv, 3, 1, 0.0, empty, crit_rows, row_counts, out),
        )
    )

    u_ext = rng.normal(size=n + 4)
    h = rng.normal(size=n + 1)
    dx = 1.0 / n
    cases.append(
        (
            f"explicit update stencil (n={n})",
            lambda: K._dispersive_update_nb(u_ext, h, 1e-5, dx, 5.0, 20.0 * dx * dx, out),
            lambda: K._dispersive_update_np(u_ext, h, 1e-5, dx, 5.0, 20.0 * dx * dx, out),
        )
    )

    dl = rng.uniform(-1.0, 1.0, n)
    du = rng.uniform(-1.0, 1.0, n)
    dl[0] = du[n - 1] = 0.0
    d = np.sign(rng.standard_normal(n)) * (np.abs(dl) + np.abs(du) + 1.0)
    b = rng.standard_normal(n)
    cp, dp, x = np.empty(n), np.empty(n), np.empty(n)
    cases.append(
        (
            f"tridiagonal solve (n={n})",
            lambda: K._thomas_nb(dl, d, du, b, cp, dp, x),
            lambda: K._thomas_np(dl, d, du, b, cp, dp, x),
        )
    )

    m = 1024
    ncs = 21
    uo_ext = rng.uniform(-1.0, 1.0, m + 2)
    un = rng.uniform(-1.0, 1.0, m)
    kpad = rng.uniform(0.5, 1.5, m + 1)
    hm = rng.normal(size=m + 1)
    fkc = rng.normal(size=(ncs, m + 1))
    cs = np.linspace(-1.0, 1.0, ncs)
    res = np.empty((ncs, m))
    cases.append(
        (
            f"entropy sweep ({ncs} constants, n={m})",
            lambda: K._entropy_sweep_nb(
                uo_ext, un, kpad, hm, fkc, cs, 0.2, 0, 0, 0.0, roots, crit, counts, res
            ),
            lambda: K._entropy_sweep_np(
                uo_ext, un, kpad, hm, fkc, cs, 0.2, 0, 0, 0.0, roots, crit, counts, res
            ),
        )
    )
    return cases


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=9, help="timed repetitions per case")
    parser.add_argument("--inner", type=int, default=20, help="kernel calls per repetition")
    args = parser.parse_args()

    if not K.HAVE_NUMBA:
        print("numba is not installed; the 'compiled' column runs plain Python loops")

    rng = np.random.default_rng(12345)
    width = 44
    print(f"{'kernel':<{width}}  {'numba ms':>10}  {'numpy ms':>10}  {'speedup':>8}")
    for name, fn_nb, fn_np in build_cases(rng):
        t_nb = median_ms(fn_nb, args.repeat, args.inner)
        t_np = median_ms(fn_np, args.repeat, args.inner)
        ratio = t_np / t_nb if t_nb > 0 else float("inf")
        print(f"{name:<{width}}  {t_nb:>10.4f}  {t_np:>10.4f}  {ratio:>7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
