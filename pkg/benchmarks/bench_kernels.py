"""Benchmark the compiled kernels against the pure Python fallbacks.

Run directly::

    python benchmarks/bench_kernels.py
"""
import time

import numpy as np

from htcluster.accel import backends


def make_sweep_problem(n, max_steps, seed):
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 3))
    d = np.sqrt(((pts[:, None] - pts[None]) ** 2).sum(-1))
    iu, ju = np.triu_indices(n, 1)
    w = d[iu, ju]
    order = np.argsort(w, kind="stable")
    r_max = float(w.max())
    r_min = float(w[w > 0].min())
    m = min(int(r_max // r_min), max_steps)
    levels = (r_max / m) * np.arange(m + 1)
    levels[-1] = r_max
    return iu[order].astype(np.int64), ju[order].astype(np.int64), w[order], levels


def timed(fn, *args, repeats=3):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    impls = backends()
    if "compiled" not in impls:
        print("compiled backend unavailable; showing python timings only")
    print(f"{'kernel':<28}{'size':<16}" + "".join(f"{name:<14}" for name in impls))

    for n in (200, 500, 1000):
        i_idx, j_idx, w, levels = make_sweep_problem(n, 10_000, seed=n)
        times = {}
        outputs = {}
        for name, mod in impls.items():
            times[name], outputs[name] = timed(
                mod.threshold_sweep, i_idx, j_idx, w, levels, n, False
            )
        row = f"{'threshold_sweep':<28}{f'n={n} M={len(levels) - 1}':<16}"
        row += "".join(f"{times[name] * 1e3:9.2f} ms  " for name in impls)
        print(row)
        if len(outputs) == 2:
            a, b = outputs.values()
            assert all(np.array_equal(x, y) for x, y in zip(a[:4], b[:4])) and a[4] == b[4]

    rng = np.random.default_rng(0)
    for n in (100, 300, 600):
        wmat = rng.random((n, n))
        wmat = (wmat + wmat.T) / 2
        np.fill_diagonal(wmat, 0.0)
        times = {}
        outputs = {}
        for name, mod in impls.items():
            times[name], outputs[name] = timed(mod.dijkstra_all_sources, wmat, repeats=1)
        row = f"{'dijkstra_all_sources':<28}{f'n={n}':<16}"
        row += "".join(f"{times[name] * 1e3:9.2f} ms  " for name in impls)
        print(row)
        if len(outputs) == 2:
            a, b = outputs.values()
            assert np.array_equal(a, b)


if __name__ == "__main__":
    main()
