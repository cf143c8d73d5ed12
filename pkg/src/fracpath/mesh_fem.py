"""Uniform P1 finite elements on an interval.

Mass and stiffness matrices are kept dense (the fractional operator built on
top of them is dense anyway) together with their tridiagonal bands, which the
quadrature kernels consume directly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidDomain, UnsupportedExponent


class BoundaryCondition(str, enum.Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"

    @classmethod
    def parse(cls, value: "BoundaryCondition | str") -> "BoundaryCondition":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"n": "neumann", "d": "dirichlet"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise InvalidDomain(f"unknown boundary condition {value!r}") from None


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Mesh:
    a: float
    b: float
    n_p: int
    nodes: np.ndarray = field(repr=False, compare=False)

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n_p - 1)

    @property
    def length(self) -> float:
        return self.b - self.a


def build_mesh(a: float, b: float, n_p: int) -> Mesh:
    """Uniform grid with ``n_p`` nodes on ``[a, b]``."""
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise InvalidDomain(f"need a < b, got a={a}, b={b}")
    if int(n_p) != n_p or n_p < 3:
        raise InvalidDomain(f"need at least 3 nodes, got n_p={n_p}")
    n_p = int(n_p)
    h = (b - a) / (n_p - 1)
    nodes = a + h * np.arange(n_p)
    nodes[-1] = b
    return Mesh(a, b, n_p, _frozen(nodes))


@dataclass(frozen=True)
class FemOperators:
    mesh: Mesh
    bc: BoundaryCondition
    M: np.ndarray = field(repr=False)
    K: np.ndarray = field(repr=False)
    free_nodes: np.ndarray = field(repr=False)
    # bands of M and K on the active nodes: (diagonal, first off-diagonal)
    M_band: tuple = field(repr=False, compare=False)
    K_band: tuple = field(repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.free_nodes)

    @property
    def x(self) -> np.ndarray:
        """Coordinates of the active nodes."""
        return self.mesh.nodes[self.free_nodes]


def _p1_bands(n_p: int, h: float):
    md = np.full(n_p, 4.0 * h / 6.0)
    md[0] = md[-1] = 2.0 * h / 6.0
    mo = np.full(n_p - 1, h / 6.0)
    kd = np.full(n_p, 2.0 / h)
    kd[0] = kd[-1] = 1.0 / h
    ko = np.full(n_p - 1, -1.0 / h)
    return md, mo, kd, ko


def _dense(diag: np.ndarray, off: np.ndarray) -> np.ndarray:
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def assemble_operators(mesh: Mesh, bc: BoundaryCondition | str) -> FemOperators:
    """Assemble P1 mass/stiffness matrices; Dirichlet nodes are eliminated."""
    bc = BoundaryCondition.parse(bc)
    md, mo, kd, ko = _p1_bands(mesh.n_p, mesh.h)
    if bc is BoundaryCondition.DIRICHLET:
        # interior rows only; the boundary rows never enter the homogeneous problem
        md, mo, kd, ko = md[1:-1], mo[1:-1], kd[1:-1], ko[1:-1]
        free = np.arange(1, mesh.n_p - 1)
    else:
        free = np.arange(mesh.n_p)
    free.flags.writeable = False
    M = _dense(md, mo)
    K = _dense(kd, ko)
    return FemOperators(
        mesh=mesh,
        bc=bc,
        M=_frozen(M),
        K=_frozen(K),
        free_nodes=free,
        M_band=(_frozen(md), _frozen(mo)),
        K_band=(_frozen(kd), _frozen(ko)),
    )


def prolong(u_reduced: np.ndarray, femops: FemOperators) -> np.ndarray:
    """Active-node vector -> full nodal vector (zeros at Dirichlet nodes)."""
    u_reduced = np.asarray(u_reduced, dtype=float)
    if u_reduced.shape != (femops.n,):
        raise DimensionMismatch(f"expected {femops.n} active values, got shape {u_reduced.shape}")
    if femops.bc is BoundaryCondition.NEUMANN:
        return u_reduced.copy()
    full = np.zeros(femops.mesh.n_p)
    full[femops.free_nodes] = u_reduced
    return full


def restrict(u_full: np.ndarray, femops: FemOperators) -> np.ndarray:
    u_full = np.asarray(u_full, dtype=float)
    if u_full.shape != (femops.mesh.n_p,):
        raise DimensionMismatch(f"expected {femops.mesh.n_p} nodal values, got shape {u_full.shape}")
    return u_full[femops.free_nodes].copy()


def norm_Lp(mesh: Mesh, u: np.ndarray, p: int = 2, normalized: bool = True) -> float:
    """Trapezoidal L^p norm of nodal data, optionally divided by |Omega|."""
    if p not in (2, 8):
        raise UnsupportedExponent(f"only p in {{2, 8}} is supported, got {p}")
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_p,):
        raise DimensionMismatch(f"expected {mesh.n_p} nodal values, got shape {u.shape}")
    scale = np.max(np.abs(u))
    if scale == 0.0:
        return 0.0
    # scale first so |u|^8 cannot overflow or underflow
    w = np.abs(u / scale) ** p
    integral = mesh.h * (w.sum() - 0.5 * (w[0] + w[-1]))
    if normalized:
        integral /= mesh.length
    return float(scale * integral ** (1.0 / p))
