"""Assembly time of the fractional stiffness matrix: numba kernel against the
vectorised numpy path.

    python benchmarks/bench_kernels.py [--np 101 301 786] [--s 0.5] [--repeat 3]

``columns`` runs the compiled per-column kernel (numba), ``nodes`` the numpy
batch over quadrature nodes. Both must agree to round-off; the largest
relative difference is printed next to the timings. Run with
FRACPATH_DISABLE_NUMBA=1 to see the interpreted fallback of ``columns``.
"""

import argparse
import time

import numpy as np

from fracpath._options import USE_NUMBA
from fracpath.fractional_operator import build_fractional_matrix
from fracpath.mesh_fem import assemble_operators, build_mesh


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--np", type=int, nargs="+", default=[101, 301, 786])
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--bc", default="neumann", choices=["dirichlet", "neumann"])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    print(f"numba active: {USE_NUMBA}")
    femops = assemble_operators(build_mesh(0.0, 1.0, 11), args.bc)
    build_fractional_matrix(femops, args.s, loop_order="columns")  # compile outside the timings
    print(f"{'n_p':>6} {'quad nodes':>10} {'columns [s]':>12} {'nodes [s]':>10} {'speedup':>8} {'max rel diff':>13}")
    for n_p in args.np:
        femops = assemble_operators(build_mesh(0.0, 1.0, n_p), args.bc)
        tc, fc = best_time(lambda: build_fractional_matrix(femops, args.s, loop_order="columns"), args.repeat)
        tn, fn = best_time(lambda: build_fractional_matrix(femops, args.s, loop_order="nodes"), args.repeat)
        diff = np.max(np.abs(fc.Ks - fn.Ks)) / np.max(np.abs(fn.Ks))
        nq = fc.params.n_minus + fc.params.n_plus + 1
        print(f"{n_p:>6} {nq:>10} {tc:>12.4f} {tn:>10.4f} {tn / tc:>8.2f} {diff:>13.2e}")


if __name__ == "__main__":
    main()
