"""Self-convergence benchmark for the fractional Poisson problem
(-Delta)^s u = 6x + 2 on (0, 1) with homogeneous Dirichlet data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidMesh
from .fractional_operator import _check_order, build_fractional_matrix
from .mesh_fem import BoundaryCondition, assemble_operators, build_mesh, prolong

REFERENCE_NODES = 500
COARSEST_NODES = 10


def poisson_rhs(x: np.ndarray) -> np.ndarray:
    return 6.0 * x + 2.0


def poisson_exact_s1(x: np.ndarray) -> np.ndarray:
    """Solution of -u'' = 6x + 2, u(0) = u(1) = 0."""
    return -x * (x - 1.0) * (x + 2.0)


def solve_fractional_poisson(n_p: int, s: float):
    """Nodes and nodal solution (boundary zeros included) of -Ks u = f."""
    femops = assemble_operators(build_mesh(0.0, 1.0, n_p), BoundaryCondition.DIRICHLET)
    frac = build_fractional_matrix(femops, s)
    u = np.linalg.solve(-frac.MKs, femops.M @ poisson_rhs(femops.x))
    return femops.mesh.nodes, prolong(u, femops)


def solve_fem_poisson(n_p: int):
    """Plain P1 solve of -u'' = f (the s = 1 limit)."""
    femops = assemble_operators(build_mesh(0.0, 1.0, n_p), BoundaryCondition.DIRICHLET)
    u = np.linalg.solve(femops.K, femops.M @ poisson_rhs(femops.x))
    return femops.mesh.nodes, prolong(u, femops)


@dataclass
class PoissonReport:
    s: float
    n_ref: int
    n_p: list
    h: list
    err: list
    slope: float

    def to_csv(self) -> str:
        rows = ["n_p,h,err"] + [f"{n},{h!r},{e!r}" for n, h, e in zip(self.n_p, self.h, self.err)]
        return "\n".join(rows) + "\n"

    def summary(self) -> dict:
        return {"s": self.s, "slope": self.slope, "n_ref": self.n_ref, "n_p": list(self.n_p)}


def default_np_list(np_max: int) -> list:
    """10, 20, 40, ... below np_max, then np_max itself."""
    if np_max < COARSEST_NODES:
        raise InvalidMesh(f"need np_max >= {COARSEST_NODES}, got {np_max}")
    out, n = [], COARSEST_NODES
    while n < np_max:
        out.append(n)
        n *= 2
    out.append(int(np_max))
    return out


def poisson_self_convergence(s: float, np_max: int = 250, n_ref: int = REFERENCE_NODES,
                             np_list: list | None = None) -> PoissonReport:
    """Discrete L2 error of coarse solutions against a fine reference solution.

    The reference is interpolated (piecewise linearly) onto each coarse grid and
    the error integrated with the trapezoidal rule there.
    """
    s = _check_order(s)
    np_list = default_np_list(np_max) if np_list is None else [int(n) for n in np_list]
    if max(np_list) >= n_ref:
        raise InvalidMesh(f"reference mesh ({n_ref}) must be finer than every test mesh")
    xr, ur = solve_fractional_poisson(n_ref, s)
    hs, errs = [], []
    for n_p in np_list:
        x, u = solve_fractional_poisson(n_p, s)
        d = u - np.interp(x, xr, ur)
        hs.append(1.0 / (n_p - 1))
        errs.append(float(np.sqrt(np.trapezoid(d * d, x))))
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    return PoissonReport(s, n_ref, np_list, hs, errs, slope)
