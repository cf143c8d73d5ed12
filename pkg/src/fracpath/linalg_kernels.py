"""Dense linear algebra used throughout: factor/solve, min-norm least squares,
generalized eigenvalues with infinite-mode filtering, near-null vectors."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, DegenerateKernel, DimensionMismatch, InvalidParameter, SingularMatrix

# above this many unknowns the eigen solvers switch to shift-invert Arnoldi
DENSE_EIG_LIMIT = 1600
SINGULAR_COND = 1e15


class Which(str, enum.Enum):
    SMALLEST_MAGNITUDE = "SmallestMagnitude"
    LARGEST_REAL = "LargestRealPart"


@dataclass(frozen=True)
class Factorization:
    """A factored square matrix. ``solve`` is reentrant."""

    kind: str  # "cholesky" or "lu"
    handle: tuple
    n: int
    cond: float
    indefinite: bool = False

    def solve(self, b: np.ndarray, trans: bool = False) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(f"rhs has {b.shape[0]} rows, factor is {self.n}x{self.n}")
        if self.kind == "cholesky":
            return sla.cho_solve(self.handle, b, check_finite=False)
        return sla.lu_solve(self.handle, b, trans=1 if trans else 0, check_finite=False)

    def logdet_sign(self) -> float:
        """Sign of the determinant of the factored matrix."""
        if self.kind == "cholesky":
            return 1.0
        lu, piv = self.handle
        diag = np.diag(lu)
        sign = np.prod(np.sign(diag))
        swaps = np.count_nonzero(piv != np.arange(len(piv)))
        return float(sign * (-1.0) ** swaps)


def _check_square(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    return A


def _lu(A: np.ndarray, indefinite: bool) -> Factorization:
    with warnings.catch_warnings():
        # exact singularity is reported below as SingularMatrix
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    anorm = np.linalg.norm(A, 1)
    if not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
        raise SingularMatrix("exactly singular matrix")
    rcond, _ = sla.lapack.dgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if cond > SINGULAR_COND:
        raise SingularMatrix(f"condition estimate {cond:.3e} exceeds {SINGULAR_COND:.0e}")
    return Factorization("lu", (lu, piv), A.shape[0], cond, indefinite)


def factor_spd(A: np.ndarray) -> Factorization:
    """Cholesky factorization; falls back to LU (flagged indefinite) on a
    nonpositive pivot."""
    A = _check_square(A)
    scale = max(np.max(np.abs(A)), np.finfo(float).tiny)
    if np.max(np.abs(A - A.T)) > 1e-10 * scale:
        raise InvalidParameter("factor_spd needs a symmetric matrix")
    try:
        c, lower = sla.cho_factor(A, check_finite=False)
    except np.linalg.LinAlgError:
        return _lu(A, indefinite=True)
    rcond, _ = sla.lapack.dpocon(c, np.linalg.norm(A, 1), uplo="L" if lower else "U")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if cond > SINGULAR_COND:
        raise SingularMatrix(f"condition estimate {cond:.3e} exceeds {SINGULAR_COND:.0e}")
    return Factorization("cholesky", (c, lower), A.shape[0], cond)


def factor_general(A: np.ndarray) -> Factorization:
    return _lu(_check_square(A), indefinite=False)


def solve(fact: Factorization, b: np.ndarray) -> np.ndarray:
    return fact.solve(b)


def minnorm_lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution via a truncated SVD.

    Singular values below ``n * eps * sigma_max`` are treated as zero. ``b`` may
    hold several right-hand sides as columns.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    U, sig, Vt = np.linalg.svd(A, full_matrices=False)
    if sig.size == 0 or sig[0] == 0.0:
        return np.zeros((A.shape[1],) + b.shape[1:])
    tol = max(A.shape) * np.finfo(float).eps * sig[0]
    keep = sig > tol
    coef = U[:, keep].T @ b
    coef = coef / (sig[keep] if b.ndim == 1 else sig[keep][:, None])
    return Vt[keep].T @ coef


@dataclass(frozen=True)
class EigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray | None
    which: Which


def _algebraic_rows(B: np.ndarray) -> np.ndarray:
    """Indices whose rows and columns of B vanish identically."""
    zero = ~np.any(B != 0.0, axis=1) & ~np.any(B != 0.0, axis=0)
    return np.flatnonzero(zero)


def _sort(vals, vecs, which: Which, k: int):
    if which is Which.SMALLEST_MAGNITUDE:
        order = np.lexsort((np.imag(vals), -np.real(vals), np.abs(vals)))
    else:
        order = np.lexsort((-np.abs(np.imag(vals)), -np.real(vals)))
    order = order[:k]
    return vals[order], (None if vecs is None else vecs[:, order])


def generalized_eigs(
    A: np.ndarray,
    B: np.ndarray,
    k: int | None = None,
    which: Which | str = Which.SMALLEST_MAGNITUDE,
    *,
    vectors: bool = False,
    sigma: float = 0.0,
    lu: Factorization | None = None,
) -> EigResult:
    """Finite eigenpairs of ``A v = lambda B v``.

    Rows/columns where B vanishes identically are algebraic constraints; they
    are eliminated by a Schur complement, which removes exactly the infinite
    eigenvalues. Symmetric A with symmetric positive definite B goes through
    ``eigh``. Larger nonsymmetric pencils use shift-invert Arnoldi around
    ``sigma`` and return the ``k`` eigenvalues closest to it; ``lu`` may carry
    a factorization of ``A - sigma B`` to reuse.
    """
    which = Which(which)
    A = _check_square(A)
    B = _check_square(B)
    N = A.shape[0]
    if B.shape != A.shape:
        raise DimensionMismatch("A and B must have the same shape")
    k = N if k is None else min(int(k), N)

    alg = _algebraic_rows(B)
    if alg.size:
        dif = np.setdiff1d(np.arange(N), alg)
        A22 = A[np.ix_(alg, alg)]
        try:
            X = np.linalg.solve(A22, A[np.ix_(alg, dif)])
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure("singular algebraic block; pencil has no finite reduction") from exc
        S = A[np.ix_(dif, dif)] - A[np.ix_(dif, alg)] @ X
        res = generalized_eigs(S, B[np.ix_(dif, dif)], k, which, vectors=vectors, sigma=sigma)
        vecs = None
        if vectors and res.eigenvectors is not None:
            vecs = np.zeros((N, res.eigenvectors.shape[1]), dtype=res.eigenvectors.dtype)
            vecs[dif] = res.eigenvectors
            vecs[alg] = -X @ res.eigenvectors
        return EigResult(res.eigenvalues, vecs, which)

    sym = np.allclose(A, A.T, rtol=0, atol=1e-10 * max(np.max(np.abs(A)), 1e-300)) and np.allclose(
        B, B.T, rtol=0, atol=1e-12 * max(np.max(np.abs(B)), 1e-300)
    )
    if sym:
        try:
            if vectors:
                vals, vecs = sla.eigh(0.5 * (A + A.T), 0.5 * (B + B.T), check_finite=False)
            else:
                vals = sla.eigh(0.5 * (A + A.T), 0.5 * (B + B.T), eigvals_only=True, check_finite=False)
                vecs = None
            vals, vecs = _sort(vals.astype(complex), vecs, which, k)
            return EigResult(vals, vecs, which)
        except np.linalg.LinAlgError:
            pass  # B not positive definite: general path below

    if N <= DENSE_EIG_LIMIT:
        if np.allclose(B, B.T, rtol=0, atol=1e-12 * max(np.max(np.abs(B)), 1e-300)):
            # SPD mass: standard Hessenberg-QR on L^{-1} A L^{-T} is several times cheaper than QZ
            try:
                L = np.linalg.cholesky(0.5 * (B + B.T))
            except np.linalg.LinAlgError:
                L = None
            if L is not None:
                C = sla.solve_triangular(L, sla.solve_triangular(L, A.T, lower=True).T, lower=True)
                if vectors:
                    vals, W = np.linalg.eig(C)
                    vecs = sla.solve_triangular(L, W, lower=True, trans="T")
                else:
                    vals, vecs = np.linalg.eigvals(C), None
                vals, vecs = _sort(vals.astype(complex), vecs, which, k)
                return EigResult(vals, vecs, which)
        try:
            out = sla.eig(A, B, right=vectors, homogeneous_eigvals=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(f"QZ iteration failed: {exc}") from exc
        (alpha, beta), vecs = (out if vectors else (out, None))
        bscale = max(np.max(np.abs(B)), 1e-300)
        finite = np.abs(beta) > 1e-12 * np.maximum(np.abs(alpha), bscale)
        vals = alpha[finite] / beta[finite]
        vecs = None if vecs is None else vecs[:, finite]
        vals, vecs = _sort(vals.astype(complex), vecs, which, k)
        return EigResult(vals, vecs, which)

    # shift-invert Arnoldi: eigenvalues nu of (A - sigma B)^{-1} B, lambda = sigma + 1/nu
    if lu is None:
        lu = factor_general(A - sigma * B)
    op = spla.LinearOperator((N, N), matvec=lambda x: lu.solve(B @ x), dtype=float)
    kk = min(k, N - 2)
    v0 = np.cos(np.arange(N) + 0.5)  # deterministic start vector
    try:
        nu, vecs = spla.eigs(op, k=kk, which="LM", v0=v0, ncv=min(N - 1, max(2 * kk + 1, 40)), tol=1e-12)
    except spla.ArpackNoConvergence as exc:
        raise ConvergenceFailure(f"Arnoldi did not converge: {exc}") from exc
    vals = sigma + 1.0 / nu
    vals, vecs = _sort(vals, vecs if vectors else None, which, kk)
    return EigResult(vals, vecs, which)


def near_null_vector(A: np.ndarray, lu: Factorization | None = None, rel_gap: float = 1e-6) -> np.ndarray:
    """Unit right singular vector of the smallest singular value of A."""
    A = _check_square(A)
    N = A.shape[0]
    if N <= DENSE_EIG_LIMIT or lu is None:
        _, sig, Vt = np.linalg.svd(A)
        s1, s2 = sig[-1], sig[-2] if N > 1 else np.inf
        v = Vt[-1]
    else:
        # block inverse iteration on (A^T A)^{-1}, two vectors
        X = np.stack([np.cos(np.arange(N) * 0.37 + 0.1), np.sin(np.arange(N) * 0.11 + 0.3)], axis=1)
        X, _ = np.linalg.qr(X)
        for _ in range(8):
            Y = lu.solve(lu.solve(X, trans=True))
            X, _ = np.linalg.qr(Y)
        _, sig, Vt = np.linalg.svd(A @ X, full_matrices=False)
        s1, s2 = sig[-1], sig[-2]
        v = X @ Vt[-1]
    if abs(s2 - s1) <= rel_gap * max(s2, np.finfo(float).eps * np.linalg.norm(A, 1)):
        raise DegenerateKernel(f"two smallest singular values {s1:.3e}, {s2:.3e} are not separated")
    v = v / np.linalg.norm(v)
    i = np.argmax(np.abs(v))
    return v * np.sign(v[i])
