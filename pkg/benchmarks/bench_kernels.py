"""Time the numba kernels against their numpy / pure-Python twins.

    python3 benchmarks/bench_kernels.py --h 0.0078125 --repeat 3

Inputs come from the annulus solution (R=1, delta=0.4). The first numba
call of each kernel is made before timing so compilation is excluded.
"""
import argparse
import time

import numpy as np

from linefield import _kernels as K
from linefield._accel import HAVE_NUMBA
from linefield.geometry import DomainSpec, FourierCurve
from linefield.grid import _extension, _fractional_index, rasterize
from linefield.patterns import exact_tubular_solution


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(h):
    spec = DomainSpec(FourierCurve.circle(1.0), 0.4)
    grid = rasterize(spec, h)
    f = exact_tubular_solution(spec, grid)
    P = f.tensor()
    state, Pe = _extension(P, f.mask, grid)
    fx, fy = grid.face_fractions()
    theta = np.where(f.mask, f.theta, 0.0)
    flat = np.ascontiguousarray(np.where(f.mask[..., None], P.reshape(grid.shape + (4,)), 0.0))
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.4, 1.4, size=(200_000, 2))
    fxi, fyi = _fractional_index(grid, pts)
    seed = tuple(int(v[0]) for v in np.nonzero(f.mask))
    m = np.stack([-np.sin(f.theta), np.cos(f.theta)], -1)
    mp = np.where(f.mask[..., None], m, 0.0)
    px, py = np.ascontiguousarray(mp[..., 0]), np.ascontiguousarray(mp[..., 1])
    return grid, [
        ("flux_divergence", K.flux_divergence_nb, K.flux_divergence_np, (Pe, state, fx, fy, h)),
        ("bilinear", K.bilinear_nb, K.bilinear_np, (flat, f.mask, fxi, fyi, False)),
        ("plaquette_winding", K.plaquette_winding_nb, K.plaquette_winding_np, (theta, f.mask)),
        ("lift_bfs", K.lift_bfs_nb, K.lift_bfs_py, (theta, f.mask, seed[0], seed[1], 1.0, np.sin(0.2))),
        ("tree_potential", K.tree_potential_nb, K.tree_potential_py, (px, py, f.mask, seed[0], seed[1], h)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=1 / 128)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not available; both columns time the fallback")
    grid, rows = cases(args.h)
    print(f"grid {grid.nx} x {grid.ny} (h = {args.h:g}), best of {args.repeat}")
    print(f"{'kernel':<20} {'numba [ms]':>12} {'fallback [ms]':>14} {'speed-up':>9}")
    for name, nb, ref, call in rows:
        nb(*call)  # compile
        t_nb = best_of(lambda: nb(*call), args.repeat)
        t_np = best_of(lambda: ref(*call), args.repeat)
        print(f"{name:<20} {1e3 * t_nb:12.2f} {1e3 * t_np:14.2f} {t_np / t_nb:9.1f}")


if __name__ == "__main__":
    main()
