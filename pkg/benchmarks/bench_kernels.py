"""Benchmark the compiled hot kernels against their pure-numpy fallbacks.

Run with:  python3 benchmarks/bench_kernels.py [--L 12] [--reps 20]

The two kernels cover the per-sample inner loops: the oscillatory load
projection and the recursive mode-source build.  The compiled path is
skipped (with a note) when numba is unavailable or disabled via
MMDG_NO_NUMBA=1.
"""

import argparse
import time

import numpy as np

from mmdg import kernels
from mmdg.dg_core import REF_MONOMIAL_MASS, make_quadrature, monomial_values
from mmdg.mesh import build_uniform_mesh


def time_fn(fn, args, reps):
    fn(*args)  # warm up / trigger compilation
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--L", type=int, default=12, help="cells per axis")
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--qf", type=int, default=4)
    args = ap.parse_args()

    mesh = build_uniform_mesh(args.L)
    rng = np.random.default_rng(0)
    quad = make_quadrature(args.qf)
    lowers = mesh.cell_lower(np.arange(mesh.n_cells))
    xi = rng.uniform(-1, 1, mesh.n_cells)
    mono = monomial_values(quad.cell_points)
    load_args = (lowers, mesh.h, xi, 2.0, quad.cell_points,
                 quad.cell_weights, mono)

    nc = mesh.n_cells
    prev = rng.normal(size=(nc, 12)) + 1j * rng.normal(size=(nc, 12))
    prev2 = rng.normal(size=(nc, 12)) + 1j * rng.normal(size=(nc, 12))
    eta = rng.uniform(-1, 1, nc)
    src_args_np = (prev, prev2, eta, 2.0, mesh.h)
    src_args_nb = (prev, prev2, eta, 2.0, mesh.h, REF_MONOMIAL_MASS)

    print(f"L={args.L} ({nc} cells, {12 * nc} dofs), "
          f"q_f={args.qf}, reps={args.reps}")
    print(f"compiled path available: {kernels.USE_NUMBA}")

    cases = [
        ("oscillatory_load", kernels._oscillatory_load_numpy,
         getattr(kernels, "_oscillatory_load_numba", None),
         load_args, load_args),
        ("mode_source", kernels._mode_source_numpy,
         getattr(kernels, "_mode_source_numba", None),
         src_args_np, src_args_nb),
    ]
    for name, np_fn, nb_fn, np_args, nb_args in cases:
        t_np = time_fn(np_fn, np_args, args.reps)
        line = f"{name:20s} numpy {t_np * 1e3:9.3f} ms"
        if kernels.USE_NUMBA and nb_fn is not None:
            t_nb = time_fn(nb_fn, nb_args, args.reps)
            line += f"   numba {t_nb * 1e3:9.3f} ms   speedup {t_np / t_nb:6.2f}x"
        else:
            line += "   (compiled path disabled)"
        print(line)


if __name__ == "__main__":
    main()
