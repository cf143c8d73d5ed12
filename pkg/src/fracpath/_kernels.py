"""Hot loops of the quadrature assembly: batched tridiagonal LDL^T solves.

Every quadrature node l contributes ``w_l * T_l^{-1} Z`` where ``T_l`` is a
symmetric tridiagonal matrix and ``Z`` holds right-hand sides stored row-wise
(one right-hand side per row). Two loop orders are provided:

* :func:`sum_by_columns` walks right-hand sides in the outer loop and the
  quadrature nodes in the inner one. It is compiled with numba when available.
* :func:`sum_by_nodes` walks quadrature nodes in the outer loop and solves all
  right-hand sides at once with row-vectorised numpy sweeps.

Both accumulate the nodes in ascending ``l`` so the results agree to roundoff
and are independent of the number of threads.

The optional kernel correction handles the Neumann case, where ``T_l`` tends to
the singular stiffness matrix as ``l -> -inf``. The caller passes factors of
``T_l + beta e_n e_n^T``; with ``w_l = (T_l + beta e_n e_n^T)^{-1} e_n`` and
``m = M 1`` the corrected vector ``y - (m.y / m.w_l) w_l`` is the exact
solution of ``T_l v = z`` whenever ``1.z = 0``.
"""

from __future__ import annotations

import numpy as np

from ._options import NUMBA_OPTS, USE_NUMBA

if USE_NUMBA:
    from numba import njit, prange
else:  # pragma: no cover - exercised with FRACPATH_DISABLE_NUMBA=1
    prange = range

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


def ldl_factor(diag: np.ndarray, off: np.ndarray):
    """LDL^T of a batch of symmetric tridiagonal matrices.

    ``diag`` has shape (L, n) and ``off`` shape (L, n-1). Returns the pivots
    ``d`` (L, n) and the unit-lower multipliers ``lo`` (L, n-1).
    """
    diag = np.atleast_2d(np.asarray(diag, dtype=float))
    off = np.atleast_2d(np.asarray(off, dtype=float))
    d = np.empty_like(diag)
    lo = np.empty_like(off)
    d[:, 0] = diag[:, 0]
    for j in range(diag.shape[1] - 1):
        lo[:, j] = off[:, j] / d[:, j]
        d[:, j + 1] = diag[:, j + 1] - lo[:, j] * off[:, j]
    return d, lo


def ldl_solve_batch(d: np.ndarray, lo: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``T_l x_l = rhs_l`` for every l (one right-hand side per factor)."""
    y = np.array(rhs, dtype=float, copy=True)
    n = y.shape[1]
    for j in range(1, n):
        y[:, j] -= lo[:, j - 1] * y[:, j - 1]
    y /= d
    for j in range(n - 2, -1, -1):
        y[:, j] -= lo[:, j] * y[:, j + 1]
    return y


@njit(**NUMBA_OPTS)
def _solve_one(d, lo, y):
    n = y.shape[0]
    for j in range(1, n):
        y[j] -= lo[j - 1] * y[j - 1]
    for j in range(n):
        y[j] /= d[j]
    for j in range(n - 2, -1, -1):
        y[j] -= lo[j] * y[j + 1]


@njit(parallel=USE_NUMBA, **NUMBA_OPTS)
def _columns_kernel(d, lo, weights, Zt, W, mW, m, correct, out):
    n_nodes, n = d.shape
    for c in prange(Zt.shape[0]):
        y = np.empty(n)
        acc = np.zeros(n)
        for l in range(n_nodes):
            for j in range(n):
                y[j] = Zt[c, j]
            _solve_one(d[l], lo[l], y)
            if correct:
                dot = 0.0
                for j in range(n):
                    dot += m[j] * y[j]
                f = dot / mW[l]
                for j in range(n):
                    y[j] -= f * W[l, j]
            wl = weights[l]
            for j in range(n):
                acc[j] += wl * y[j]
        for j in range(n):
            out[c, j] = acc[j]


def _correction_args(n_nodes, n, W, mW, m):
    if W is None:
        return np.zeros((n_nodes, n)), np.ones(n_nodes), np.zeros(n), False
    return np.ascontiguousarray(W), np.ascontiguousarray(mW), np.ascontiguousarray(m), True


def sum_by_columns(d, lo, weights, Zt, W=None, mW=None, m=None) -> np.ndarray:
    """``out[c] = sum_l weights[l] * T_l^{-1} Zt[c]`` with right-hand sides outermost."""
    d = np.ascontiguousarray(d, dtype=float)
    lo = np.ascontiguousarray(lo, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    Zt = np.ascontiguousarray(np.atleast_2d(Zt), dtype=float)
    W, mW, m, correct = _correction_args(d.shape[0], d.shape[1], W, mW, m)
    out = np.empty_like(Zt)
    _columns_kernel(d, lo, weights, Zt, W, mW, m, correct, out)
    return out


def sum_by_nodes(d, lo, weights, Zt, W=None, mW=None, m=None) -> np.ndarray:
    """Same sum as :func:`sum_by_columns`, quadrature nodes outermost (pure numpy)."""
    Zt = np.atleast_2d(np.asarray(Zt, dtype=float))
    n_nodes, n = d.shape
    acc = np.zeros((n, Zt.shape[0]))
    Y = np.empty_like(acc)
    for l in range(n_nodes):
        Y[:] = Zt.T
        dl, ll = d[l], lo[l]
        for j in range(1, n):
            Y[j] -= ll[j - 1] * Y[j - 1]
        Y /= dl[:, None]
        for j in range(n - 2, -1, -1):
            Y[j] -= ll[j] * Y[j + 1]
        if W is not None:
            Y -= np.outer(W[l], (m @ Y) / mW[l])
        acc += weights[l] * Y
    return np.ascontiguousarray(acc.T)


def shifted_sum(d, lo, weights, Zt, W=None, mW=None, m=None, loop_order: str | None = None):
    """Dispatch to the compiled column loop or the numpy node loop."""
    if loop_order is None:
        loop_order = "columns" if USE_NUMBA else "nodes"
    if loop_order == "columns":
        return sum_by_columns(d, lo, weights, Zt, W, mW, m)
    if loop_order == "nodes":
        return sum_by_nodes(d, lo, weights, Zt, W, mW, m)
    raise ValueError(f"unknown loop order {loop_order!r}")
