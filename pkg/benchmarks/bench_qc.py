"""Time the dilatation kernels and rerun the close-map calibration sweep.

    python3 benchmarks/bench_qc.py [--grid 1024] [--triangles 200000]

The numpy and numba versions are called directly, so FLATLAB_NO_NUMBA has
no effect here beyond hiding the numba rows.
"""

import argparse
import math
from time import perf_counter

import numpy as np

from flatlab import _kernels, qc


def timed(fn, *args, repeat=3):
    best = math.inf
    out = None
    for _ in range(repeat):
        start = perf_counter()
        out = fn(*args)
        best = min(best, perf_counter() - start)
    return best, out


def grid_args(n):
    theta = np.linspace(0.0, 1.0, n, endpoint=False)
    eps = 0.2
    fvals = theta + eps / (2 * np.pi) * np.sin(2 * np.pi * theta)
    fprime = 1 + eps * np.cos(2 * np.pi * theta)
    heights = np.linspace(0.0, 100.0, n)
    return theta, fvals, fprime, heights, 100.0, 130.0, 4.0 / 3.0


def bench_kernels(grid, triangles):
    rng = np.random.default_rng(0)
    angles = np.sort(rng.uniform(0.0, 2 * np.pi, size=(triangles, 3)), axis=1)
    tris = np.stack([np.cos(angles), np.sin(angles)], axis=2)
    cases = [
        ("close_map_grid", _kernels._close_map_grid_np, grid_args(grid)),
        ("triangle_dilatations", _kernels._triangle_dilatations_np, (qc.EQUILATERAL, tris)),
    ]
    print(f"numba available: {_kernels.USING_NUMBA}")
    print(f"{'kernel':<22} {'numpy s':>10} {'numba s':>10} {'compile s':>10} {'max |diff|':>11}")
    for name, np_fn, args in cases:
        t_np, ref = timed(np_fn, *args)
        if not _kernels.USING_NUMBA:
            print(f"{name:<22} {t_np:10.4f} {'-':>10} {'-':>10} {'-':>11}")
            continue
        nb_fn = getattr(_kernels, f"_{name}_nb")
        start = perf_counter()
        nb_fn(*args)
        first = perf_counter() - start
        t_nb, got = timed(nb_fn, *args)
        diff = max(float(np.max(np.abs(np.asarray(a, float) - np.asarray(b, float)))) for a, b in zip(ref, got))
        print(f"{name:<22} {t_np:10.4f} {t_nb:10.4f} {max(first - t_nb, 0.0):10.4f} {diff:11.3g}")


def calibration_sweep():
    """Largest (sup K / e^{2 d0} - 1) / eps over sine-perturbed circle maps."""
    print()
    print(f"{'eps':>6} {'R1':>6} {'R2/R1':>6} {'n':>3} {'alpha':>6} {'excess/eps':>11}")
    worst = 0.0
    for eps in (0.05, 0.1, 0.2):
        f = lambda x, e=eps: x + e / (2 * np.pi) * np.sin(2 * np.pi * x)  # noqa: E731
        fp = lambda x, e=eps: 1 + e * np.cos(2 * np.pi * x)  # noqa: E731
        row = 0.0
        for r1 in (10.0, 100.0):
            for ratio in (1.0, 1.3, 4.0):
                for n in (0, 1, 3):
                    for alpha in (0.0, 0.25, 0.5):
                        rep = qc.close_map_dilatation(r1, ratio * r1, n, alpha, f, fp, grid=(256, 64))
                        row = max(row, rep.excess / eps)
        worst = max(worst, row)
        print(f"{eps:6.2f} {'all':>6} {'all':>6} {'all':>3} {'all':>6} {row:11.4f}")
    print(f"peak excess/eps = {worst:.4f}; frozen constant = {qc.CLOSE_MAP_CONSTANT}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=1024)
    ap.add_argument("--triangles", type=int, default=200_000)
    args = ap.parse_args()
    bench_kernels(args.grid, args.triangles)
    calibration_sweep()


if __name__ == "__main__":
    main()
