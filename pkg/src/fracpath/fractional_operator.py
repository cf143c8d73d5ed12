"""Spectral fractional Laplacian on P1 elements via the Balakrishnan integral.

After the substitution xi = exp(eta), the integral is discretised with a
truncated equispaced (sinc) rule of step kappa on l = -n_minus..n_plus:

    Delta^s u  ~  coeff * sum_l exp(kappa l s) v_l,   (exp(kappa l) M + K) v_l = K u,

with coeff = -kappa sin(s pi) / pi. Testing the rule on every unit vector gives
the dense matrix ``Ks``. Each shifted matrix is tridiagonal, so each node costs
one O(n) factorization plus O(n) per right-hand side.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from . import _kernels
from ._options import USE_NUMBA
from .errors import InvalidMesh, InvalidOrder, InvalidParameter
from .linalg_kernels import minnorm_lstsq
from .mesh_fem import BoundaryCondition, FemOperators, assemble_operators, build_mesh

# A_l is treated as numerically singular below this relative shift
NEAR_SINGULAR_SHIFT = 1e-12
NEAR_SINGULAR_COND = 1e13


def _check_order(s: float) -> float:
    s = float(s)
    if not (0.0 < s < 1.0):
        raise InvalidOrder(f"s must lie in (0,1), got {s}")
    return s


@dataclass(frozen=True)
class QuadratureParams:
    s: float
    kappa: float
    n_plus: int
    n_minus: int

    @property
    def coeff(self) -> float:
        return -self.kappa * math.sin(self.s * math.pi) / math.pi

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(-self.n_minus, self.n_plus + 1)

    @property
    def shifts(self) -> np.ndarray:
        """exp(kappa l) for every quadrature node."""
        return np.exp(self.kappa * self.nodes)

    @property
    def weights(self) -> np.ndarray:
        """coeff * exp(kappa l s) for every quadrature node."""
        return self.coeff * np.exp(self.kappa * self.s * self.nodes)

    def scaled_terms(self) -> tuple:
        """``(c_M, c_K, w)`` with w_l (c_M M + c_K K)^{-1} equal to the node-l term.

        Nodes with kappa l > 0 are divided through by exp(kappa l), which keeps
        every factor finite when s is close to 1 (exp(kappa l) would overflow
        long before the tail becomes negligible).
        """
        y = self.kappa * self.nodes
        pos = y > 0
        c_m = np.where(pos, 1.0, np.exp(np.minimum(y, 0.0)))
        c_k = np.where(pos, np.exp(-np.abs(y)), 1.0)
        w = self.coeff * np.exp(np.where(pos, (self.s - 1.0) * y, self.s * y))
        return c_m, c_k, w


def quadrature_params(h: float, s: float) -> QuadratureParams:
    """Step and truncation that balance sinc and FE errors on a mesh of size h."""
    s = _check_order(s)
    h = float(h)
    if not (0.0 < h < 1.0):
        raise InvalidMesh(f"mesh size must lie in (0,1), got h={h}")
    kappa = -1.0 / math.log(h)
    n_plus = math.ceil(math.pi**2 / (4.0 * (1.0 - s) * kappa**2))
    n_minus = math.ceil(math.pi**2 / (4.0 * s * kappa**2))
    return QuadratureParams(s, kappa, n_plus, n_minus)


def scalar_sinc_power(lam, params: QuadratureParams):
    """The same quadrature applied to a scalar: approximates ``lam ** s``.

    For a pencil eigenpair ``K v = lam M v`` the matrix ``Ks`` acts on ``v`` as
    multiplication by ``-scalar_sinc_power(lam, params)``.
    """
    lam = np.asarray(lam, dtype=float)
    c_m, c_k, w = params.scaled_terms()
    terms = w * (lam[..., None] / (c_m + c_k * lam[..., None]))
    val = -terms.sum(axis=-1)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class FracOperator:
    Ks: np.ndarray = field(repr=False)
    femops: FemOperators = field(repr=False)
    params: QuadratureParams
    build_stats: dict = field(compare=False)

    @property
    def s(self) -> float:
        return self.params.s

    @cached_property
    def MKs(self) -> np.ndarray:
        """Symmetric part of ``M @ Ks`` (the antisymmetric part is roundoff)."""
        A = self.femops.M @ self.Ks
        A = 0.5 * (A + A.T)
        A.flags.writeable = False
        return A


class _ShiftedSystems:
    """Factors of exp(kappa l) M + K for every node, with the Neumann fix-up."""

    def __init__(self, femops: FemOperators, params: QuadratureParams, singular: str):
        if singular not in ("kernel", "minnorm"):
            raise ValueError(f"unknown singular-solve strategy {singular!r}")
        self.femops = femops
        self.params = params
        md, mo = femops.M_band
        kd, ko = femops.K_band
        c_m, c_k, w = params.scaled_terms()
        self.diag = c_m[:, None] * md + c_k[:, None] * kd
        self.off = c_m[:, None] * mo + c_k[:, None] * ko
        n = femops.n
        knorm = np.abs(kd).max() + 2 * np.abs(ko).max()
        mnorm = np.abs(md).max() + 2 * np.abs(mo).max()
        self.flagged = c_m < NEAR_SINGULAR_SHIFT * (knorm / mnorm) * c_k
        self.neumann = femops.bc is BoundaryCondition.NEUMANN
        self.singular = singular
        self.W = self.mW = self.m = None

        if singular == "minnorm":
            # condition estimate of each tridiagonal A_l from its extreme eigenvalues
            for i in np.flatnonzero(~self.flagged):
                ev = sla.eigvalsh_tridiagonal(self.diag[i], self.off[i], select="i", select_range=(0, 0))
                top = sla.eigvalsh_tridiagonal(self.diag[i], self.off[i], select="i", select_range=(n - 1, n - 1))
                if ev[0] <= 0 or top[0] / ev[0] > NEAR_SINGULAR_COND:
                    self.flagged[i] = True
            keep = ~self.flagged
            self.d, self.lo = _kernels.ldl_factor(self.diag[keep], self.off[keep])
            self.weights = w[keep]
            self.all_weights = w
            return

        diag = self.diag.copy()
        if self.neumann:
            # ground the last node; the rank-one correction in the kernels restores
            # the exact solution of the unmodified system (it only needs A 1 ~ M 1)
            diag[:, -1] += kd[-1]
        self.d, self.lo = _kernels.ldl_factor(diag, self.off)
        self.weights = w
        self.all_weights = w
        if self.neumann:
            e_n = np.zeros((len(w), n))
            e_n[:, -1] = 1.0
            self.W = _kernels.ldl_solve_batch(self.d, self.lo, e_n)
            self.m = femops.M.sum(axis=1)
            self.mW = self.W @ self.m

    def weighted_sum(self, Zt: np.ndarray, loop_order: str | None = None) -> np.ndarray:
        """``sum_l weight_l * A_l^{-1} z`` for each row z of ``Zt``."""
        out = _kernels.shifted_sum(self.d, self.lo, self.weights, Zt, self.W, self.mW, self.m, loop_order)
        if self.singular == "minnorm" and self.flagged.any():
            for i in np.flatnonzero(self.flagged):
                A = np.diag(self.diag[i]) + np.diag(self.off[i], 1) + np.diag(self.off[i], -1)
                out += self.all_weights[i] * minnorm_lstsq(A, np.atleast_2d(Zt).T).T
        return out


def build_fractional_matrix(
    femops: FemOperators,
    s: float,
    *,
    singular: str = "kernel",
    loop_order: str | None = None,
) -> FracOperator:
    """Dense matrix ``Ks`` approximating Delta^s = -(-Delta)^s on the active nodes.

    ``singular="kernel"`` (default) solves every shifted system exactly, also
    when exp(kappa l) is far below roundoff relative to K (Neumann). With
    ``singular="minnorm"`` such systems are instead replaced by the minimum-norm
    least-squares solution of the dense shifted matrix; this is slow and only
    meant for comparison on small meshes.
    """
    t0 = time.perf_counter()
    s = _check_order(s)
    params = quadrature_params(femops.mesh.h, s)
    systems = _ShiftedSystems(femops, params, singular)
    # column i of K is K e_i, and K is symmetric, so its rows are the right-hand sides
    KsT = systems.weighted_sum(np.ascontiguousarray(femops.K), loop_order)
    Ks = np.ascontiguousarray(KsT.T)
    Ks.flags.writeable = False
    stats = {
        "num_quadrature_nodes": int(params.n_plus + params.n_minus + 1),
        "num_near_singular": int(systems.flagged.sum()),
        "num_minnorm_fallbacks": int(systems.flagged.sum()) if singular == "minnorm" else 0,
        "loop_order": loop_order or ("columns" if USE_NUMBA else "nodes"),
        "wall_time": time.perf_counter() - t0,
    }
    return FracOperator(Ks, femops, params, stats)


def apply_balakrishnan(femops: FemOperators, s: float, u: np.ndarray, *, singular: str = "kernel") -> np.ndarray:
    """Matrix-free ``Ks @ u`` with the same quadrature."""
    s = _check_order(s)
    u = np.asarray(u, dtype=float)
    params = quadrature_params(femops.mesh.h, s)
    systems = _ShiftedSystems(femops, params, singular)
    return systems.weighted_sum((femops.K @ u)[None, :])[0]


def pencil_eigenvalues(frac: FracOperator) -> np.ndarray:
    """Ascending eigenvalues of (-M Ks, M), i.e. approximations of (-Delta)^s."""
    return sla.eigh(-frac.MKs, frac.femops.M, eigvals_only=True)


def exact_fractional_eigenvalues(bc: BoundaryCondition | str, s: float, length: float, count: int) -> np.ndarray:
    """(j pi / L)^(2s) for the first ``count`` nonzero modes (j >= 1)."""
    j = np.arange(1, count + 1)
    return (j * np.pi / length) ** (2.0 * s)


@dataclass
class ConvergenceReport:
    bc: BoundaryCondition
    s: float
    n_e: int
    n_p: list
    h: list
    err: list
    slope: float

    def to_csv(self) -> str:
        lines = ["n_p,h,err"]
        lines += [f"{n},{h!r},{e!r}" for n, h, e in zip(self.n_p, self.h, self.err)]
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"slope": self.slope, "s": self.s, "bc": self.bc.value, "n_e": self.n_e}


def max_relative_error(frac: FracOperator, n_e: int) -> float:
    """Largest relative error over the first ``n_e`` nonzero eigenvalues."""
    lam_h = pencil_eigenvalues(frac)
    if frac.femops.bc is BoundaryCondition.NEUMANN:
        lam_h = lam_h[1:]  # the constant mode
    exact = exact_fractional_eigenvalues(frac.femops.bc, frac.s, frac.femops.mesh.length, n_e)
    return float(np.max(np.abs(exact - lam_h[:n_e]) / exact))


def eigen_convergence_report(bc, s: float, np_list, n_e: int, a: float = 0.0, b: float = 1.0) -> ConvergenceReport:
    """Maximum relative eigenvalue error on (a, b) for each mesh, plus the
    least-squares slope of log(err) against log(h)."""
    bc = BoundaryCondition.parse(bc)
    s = _check_order(s)
    np_list = [int(n) for n in np_list]
    if n_e < 1 or n_e > min(np_list) - 3:
        raise InvalidParameter(f"n_e={n_e} must lie in [1, min(n_p) - 3]")
    hs, errs = [], []
    for n_p in np_list:
        femops = assemble_operators(build_mesh(a, b, n_p), bc)
        frac = build_fractional_matrix(femops, s)
        hs.append(femops.mesh.h)
        errs.append(max_relative_error(frac, n_e))
    slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0]) if len(np_list) > 1 else float("nan")
    return ConvergenceReport(bc, s, n_e, np_list, hs, errs, slope)
