import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracpath.errors import DimensionMismatch, InvalidDomain, UnsupportedExponent
from fracpath.linalg_kernels import Which, generalized_eigs
from fracpath.mesh_fem import (
    BoundaryCondition,
    assemble_operators,
    build_mesh,
    norm_Lp,
    prolong,
    restrict,
)


def test_three_node_mesh():
    m = build_mesh(0, 1, 3)
    np.testing.assert_array_equal(m.nodes, [0.0, 0.5, 1.0])
    assert m.h == 0.5


@pytest.mark.parametrize(
    "a,b,n_p,h,tol",
    [(-5, 5, 301, 0.0333, 5e-5), (-5 * math.pi, 5 * math.pi, 786, 0.04, 5e-4)],
)
def test_mesh_sizes_used_by_the_models(a, b, n_p, h, tol):
    assert abs(build_mesh(a, b, n_p).h - h) < tol


@pytest.mark.parametrize("a,b,n_p", [(1, 1, 5), (2, 1, 5), (0, 1, 2), (0, 1, 0), (0, math.inf, 5)])
def test_bad_mesh(a, b, n_p):
    with pytest.raises(InvalidDomain):
        build_mesh(a, b, n_p)


def test_neumann_three_node_matrices():
    f = assemble_operators(build_mesh(0, 1, 3), "neumann")
    np.testing.assert_allclose(f.K, [[2, -2, 0], [-2, 4, -2], [0, -2, 2]], atol=1e-15)
    np.testing.assert_allclose(f.M, (0.5 / 6) * np.array([[2, 1, 0], [1, 4, 1], [0, 1, 2]]), atol=1e-15)


def test_dirichlet_three_node_matrices():
    f = assemble_operators(build_mesh(0, 1, 3), BoundaryCondition.DIRICHLET)
    np.testing.assert_allclose(f.K, [[4.0]])
    np.testing.assert_allclose(f.M, [[1.0 / 3.0]])


def test_first_neumann_eigenvalue():
    f = assemble_operators(build_mesh(0, 1, 51), "neumann")
    vals = np.sort(generalized_eigs(f.K, f.M, 2, Which.SMALLEST_MAGNITUDE).eigenvalues.real)
    assert abs(vals[0]) < 1e-10
    assert abs(vals[1] - math.pi**2) / math.pi**2 < 1e-3


def test_neumann_eigenvalues_converge_at_second_order():
    errs = []
    for n_p in (41, 81, 161):
        f = assemble_operators(build_mesh(0, 1, n_p), "neumann")
        vals = np.sort(generalized_eigs(f.K, f.M, 11, Which.SMALLEST_MAGNITUDE).eigenvalues.real)[1:]
        exact = (np.arange(1, 11) * math.pi) ** 2
        errs.append(np.max(np.abs(vals - exact) / exact))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.9)


@given(st.integers(3, 120), st.floats(-10, 10), st.floats(0.1, 20))
def test_neumann_constants_in_kernel_and_symmetry(n_p, a, length):
    f = assemble_operators(build_mesh(a, a + length, n_p), "neumann")
    assert np.max(np.abs(f.K @ np.ones(n_p))) <= 1e-12 * np.max(np.abs(f.K))
    np.testing.assert_array_equal(f.M, f.M.T)
    np.testing.assert_array_equal(f.K, f.K.T)
    np.linalg.cholesky(f.M)


def test_norms_of_simple_functions():
    m = build_mesh(0, 1, 201)
    for p in (2, 8):
        assert norm_Lp(m, np.full(201, -1.5), p) == pytest.approx(1.5, rel=1e-14)
        assert norm_Lp(m, np.zeros(201), p) == 0.0
    assert abs(norm_Lp(m, np.sin(np.pi * m.nodes), 2) - 1 / math.sqrt(2)) < 1e-4


def test_unnormalized_norm_scales_with_length():
    m = build_mesh(0, 4, 11)
    u = np.full(11, 2.0)
    assert norm_Lp(m, u, 2, normalized=False) == pytest.approx(2.0 * math.sqrt(4.0))


def test_norm_rejects_other_exponents():
    with pytest.raises(UnsupportedExponent):
        norm_Lp(build_mesh(0, 1, 5), np.zeros(5), 4)


def test_prolong_restrict():
    fd = assemble_operators(build_mesh(0, 1, 3), "dirichlet")
    np.testing.assert_array_equal(prolong(np.array([1.0]), fd), [0.0, 1.0, 0.0])
    fn = assemble_operators(build_mesh(0, 1, 4), "neumann")
    v = np.array([1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(prolong(v, fn), v)
    np.testing.assert_array_equal(restrict(v, fn), v)
    with pytest.raises(DimensionMismatch):
        prolong(np.ones(3), fd)
    with pytest.raises(DimensionMismatch):
        restrict(np.ones(2), fd)


@given(st.integers(3, 60), st.sampled_from(["dirichlet", "neumann"]), st.data())
def test_restrict_inverts_prolong(n_p, bc, data):
    f = assemble_operators(build_mesh(0, 1, n_p), bc)
    v = np.array(data.draw(st.lists(st.floats(-1e3, 1e3), min_size=f.n, max_size=f.n)))
    np.testing.assert_array_equal(restrict(prolong(v, f), f), v)
