"""Fractional reaction-diffusion models as residual/Jacobian pairs.

All models follow the convention ``B du/dt = -G(u; mu)`` with ``B`` the
dynamical mass. Nonlinearities are evaluated nodally and multiplied by the
full (consistent) mass matrix, diffusion enters through ``M @ Ks``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, InvalidOrder, InvalidParameter, WrongBC
from .fractional_operator import FracOperator
from .mesh_fem import BoundaryCondition, FemOperators, norm_Lp, prolong

U2_FLOOR = 1e-8


class ModelName(str, enum.Enum):
    ALLEN_CAHN = "allen_cahn"
    SWIFT_HOHENBERG = "swift_hohenberg"
    SCHNAKENBERG = "schnakenberg"


@dataclass(frozen=True)
class ModelParams:
    s: float
    gamma: float = 1.0
    nu: float = 2.0
    d: float = 60.0
    sigma: float = 0.0

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass(eq=False)
class ModelSpec:
    name: ModelName
    n_components: int
    params: ModelParams
    femops: FemOperators = field(repr=False)
    frac: FracOperator = field(repr=False)
    dyn_mass: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.femops.n

    @property
    def size(self) -> int:
        return self.n_components * self.n

    @property
    def bcs(self) -> tuple:
        return (self.femops.bc,) * self.n_components

    @property
    def mesh(self):
        return self.femops.mesh

    def split(self, u: np.ndarray) -> list:
        return [u[i * self.n:(i + 1) * self.n] for i in range(self.n_components)]

    def component(self, u: np.ndarray, i: int = 0) -> np.ndarray:
        """Nodal values of component ``i`` on the full mesh."""
        return prolong(self.split(np.asarray(u, dtype=float))[i], self.femops)

    def norms(self, u: np.ndarray) -> tuple:
        """Normalized L2 and L8 norms of the first component."""
        v = self.component(u, 0)
        return norm_Lp(self.mesh, v, 2), norm_Lp(self.mesh, v, 8)

    # subclasses implement these three
    def residual(self, u: np.ndarray, mu: float) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, u: np.ndarray, mu: float) -> np.ndarray:
        raise NotImplementedError

    def dmu(self, u: np.ndarray, mu: float) -> np.ndarray:
        raise NotImplementedError


class AllenCahn(ModelSpec):
    """du/dt = Delta^s u + mu u + u^3 - gamma u^5, homogeneous Dirichlet."""

    def residual(self, u, mu):
        g = self.params.gamma
        return -self.frac.MKs @ u - self.femops.M @ (mu * u + u**3 - g * u**5)

    def jacobian(self, u, mu):
        g = self.params.gamma
        return -self.frac.MKs - self.femops.M * (mu + 3 * u**2 - 5 * g * u**4)[None, :]

    def dmu(self, u, mu):
        return -self.femops.M @ u


class SwiftHohenberg(ModelSpec):
    """du/dt = -(1 + Delta^s)^2 u + mu u + nu u^3 - u^5 as an algebraic-differential
    pair (u1, u2) = (u, Delta^s u); both components homogeneous Dirichlet."""

    def residual(self, u, mu):
        u1, u2 = self.split(u)
        M, MKs, nu = self.femops.M, self.frac.MKs, self.params.nu
        g1 = MKs @ u2 + M @ (2 * u2 + (1 - mu) * u1 - nu * u1**3 + u1**5)
        g2 = -MKs @ u1 + M @ u2
        return np.concatenate([g1, g2])

    def jacobian(self, u, mu):
        u1, _ = self.split(u)
        M, MKs, nu = self.femops.M, self.frac.MKs, self.params.nu
        n = self.n
        J = np.empty((2 * n, 2 * n))
        J[:n, :n] = M * (1 - mu - 3 * nu * u1**2 + 5 * u1**4)[None, :]
        J[:n, n:] = MKs + 2 * M
        J[n:, :n] = -MKs
        J[n:, n:] = M
        return J

    def dmu(self, u, mu):
        u1, _ = self.split(u)
        return np.concatenate([-self.femops.M @ u1, np.zeros(self.n)])


class Schnakenberg(ModelSpec):
    """Two-species system with diffusion ratio d and the sigma(u1 - 1/u2)^2
    modification; homogeneous Neumann."""

    def _reaction(self, u, mu):
        u1, u2 = self.split(u)
        if np.any(u2 <= U2_FLOOR):
            raise DomainError(f"u2 must stay above {U2_FLOOR:g}; min(u2) = {u2.min():.3e}")
        sig = self.params.sigma
        w = u1 - 1.0 / u2
        f1 = -u1 + u1**2 * u2 + sig * w**2
        f2 = mu - u1**2 * u2 - sig * w**2
        return u1, u2, w, f1, f2

    def residual(self, u, mu):
        u1, u2, _, f1, f2 = self._reaction(u, mu)
        M, MKs, d = self.femops.M, self.frac.MKs, self.params.d
        return np.concatenate([-MKs @ u1 - M @ f1, -d * (MKs @ u2) - M @ f2])

    def jacobian(self, u, mu):
        u1, u2, w, _, _ = self._reaction(u, mu)
        M, MKs, d, sig = self.femops.M, self.frac.MKs, self.params.d, self.params.sigma
        f1_1 = -1 + 2 * u1 * u2 + 2 * sig * w
        f1_2 = u1**2 + 2 * sig * w / u2**2
        n = self.n
        J = np.empty((2 * n, 2 * n))
        J[:n, :n] = -MKs - M * f1_1[None, :]
        J[:n, n:] = -M * f1_2[None, :]
        # f2 = mu - f1 - u1, so its partials follow from those of f1
        J[n:, :n] = M * (f1_1 + 1)[None, :]
        J[n:, n:] = -d * MKs + M * f1_2[None, :]
        return J

    def dmu(self, u, mu):
        return np.concatenate([np.zeros(self.n), -self.femops.M.sum(axis=1)])


def _check_s(frac: FracOperator, params: ModelParams):
    if not (0.0 < params.s < 1.0):
        raise InvalidOrder(f"s must lie in (0,1), got {params.s}")
    if abs(frac.s - params.s) > 1e-14:
        raise InvalidParameter(f"operator built for s={frac.s}, model asks for s={params.s}")


def allen_cahn(femops: FemOperators, frac: FracOperator, params: ModelParams) -> AllenCahn:
    if femops.bc is not BoundaryCondition.DIRICHLET:
        raise WrongBC("the Allen-Cahn model is posed with homogeneous Dirichlet conditions")
    _check_s(frac, params)
    return AllenCahn(ModelName.ALLEN_CAHN, 1, params, femops, frac, femops.M.copy())


def swift_hohenberg(femops: FemOperators, frac: FracOperator, params: ModelParams) -> SwiftHohenberg:
    if femops.bc is not BoundaryCondition.DIRICHLET:
        raise WrongBC("the Swift-Hohenberg model is posed with homogeneous Dirichlet conditions")
    if params.nu <= 0:
        raise InvalidParameter(f"nu must be positive, got {params.nu}")
    _check_s(frac, params)
    n = femops.n
    B = np.zeros((2 * n, 2 * n))
    B[:n, :n] = femops.M
    return SwiftHohenberg(ModelName.SWIFT_HOHENBERG, 2, params, femops, frac, B)


def schnakenberg(femops: FemOperators, frac: FracOperator, params: ModelParams) -> Schnakenberg:
    if femops.bc is not BoundaryCondition.NEUMANN:
        raise WrongBC("the Schnakenberg model is posed with homogeneous Neumann conditions")
    if params.d <= 1:
        raise InvalidParameter(f"d must exceed 1, got {params.d}")
    _check_s(frac, params)
    n = femops.n
    B = np.zeros((2 * n, 2 * n))
    B[:n, :n] = femops.M
    B[n:, n:] = femops.M
    return Schnakenberg(ModelName.SCHNAKENBERG, 2, params, femops, frac, B)


def build_model(name: ModelName | str, femops: FemOperators, frac: FracOperator, params: ModelParams) -> ModelSpec:
    name = ModelName(name)
    factory = {
        ModelName.ALLEN_CAHN: allen_cahn,
        ModelName.SWIFT_HOHENBERG: swift_hohenberg,
        ModelName.SCHNAKENBERG: schnakenberg,
    }[name]
    return factory(femops, frac, params)


def homogeneous_state(model: ModelSpec, mu: float) -> np.ndarray:
    if model.name is ModelName.SCHNAKENBERG:
        if mu <= 0:
            raise InvalidParameter(f"the homogeneous Schnakenberg state needs mu > 0, got {mu}")
        return np.concatenate([np.full(model.n, float(mu)), np.full(model.n, 1.0 / mu)])
    return np.zeros(model.size)


def schnak_critical_mu(d: float) -> float:
    return math.sqrt(d * (3.0 - math.sqrt(8.0)))


def schnak_critical_wavenumber(s: float) -> float:
    if not (0.0 < s <= 1.0):
        raise InvalidOrder(f"s must lie in (0,1], got {s}")
    return (math.sqrt(2.0) - 1.0) ** (1.0 / (2.0 * s))


def schnak_tuned_domain(m: int, s: float) -> tuple:
    """Interval holding exactly m periods of the critical mode."""
    if int(m) != m or m < 1:
        raise InvalidParameter(f"m must be a positive integer, got {m}")
    half = m * math.pi / schnak_critical_wavenumber(s)
    return (-half, half)


def predicted_branch_point(name: ModelName | str, j: int, length: float, params: ModelParams) -> float | None:
    """Closed-form location of the j-th bifurcation from the homogeneous branch
    (None where the formula has no real positive value)."""
    name = ModelName(name)
    q = (j * math.pi / length) ** (2.0 * params.s)
    if name is ModelName.ALLEN_CAHN:
        return q
    if name is ModelName.SWIFT_HOHENBERG:
        return (1.0 - q) ** 2
    val = params.d * (1.0 - q) / (1.0 + q)
    if j < 1 or val <= 0:
        return None
    return math.sqrt(q) * math.sqrt(val)


def predicted_branch_points(model: ModelSpec, j_max: int) -> list:
    """[(j, mu_j)] for j = 1..j_max, skipping modes with no real positive mu_j."""
    out = []
    for j in range(1, j_max + 1):
        mu = predicted_branch_point(model.name, j, model.mesh.length, model.params)
        if mu is not None:
            out.append((j, mu))
    return out
