import math

import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from fracpath.errors import InvalidMesh, InvalidOrder, InvalidParameter
from fracpath.fractional_operator import (
    apply_balakrishnan,
    build_fractional_matrix,
    eigen_convergence_report,
    exact_fractional_eigenvalues,
    max_relative_error,
    pencil_eigenvalues,
    quadrature_params,
    scalar_sinc_power,
)
from fracpath.mesh_fem import assemble_operators, build_mesh


def ops(n_p, bc, s, a=0.0, b=1.0, **kw):
    fo = assemble_operators(build_mesh(a, b, n_p), bc)
    return fo, build_fractional_matrix(fo, s, **kw)


def pencil_modes(fo):
    lam, V = sla.eigh(fo.K, fo.M)
    if fo.bc.value == "neumann":
        lam[0] = 0.0  # the constant mode; eigh returns O(1e-12) noise here
    return lam, V


def sinc_powers(lam, params):
    return np.array([scalar_sinc_power(v, params) if v > 0 else 0.0 for v in lam])


# -- quadrature parameters -------------------------------------------------

def test_params_at_s_half():
    p = quadrature_params(0.0333, 0.5)
    assert p.kappa == pytest.approx(1 / abs(math.log(0.0333)))
    assert p.kappa == pytest.approx(0.2940, abs=1e-4)
    # ceil(pi^2 / (4 * 0.5 * kappa^2)) = ceil(57.1)
    assert p.n_plus == p.n_minus == 58
    assert p.coeff == pytest.approx(-p.kappa / math.pi)


def test_params_at_s_03():
    p = quadrature_params(0.04, 0.3)
    assert p.kappa == pytest.approx(0.3107, abs=1e-4)
    assert (p.n_plus, p.n_minus) == (37, 86)


@given(st.floats(1e-4, 0.9), st.floats(0.01, 0.99))
def test_params_formulas(h, s):
    p = quadrature_params(h, s)
    k = -1.0 / math.log(h)
    assert p.kappa == pytest.approx(k)
    assert p.n_plus == math.ceil(math.pi**2 / (4 * (1 - s) * k**2))
    assert p.n_minus == math.ceil(math.pi**2 / (4 * s * k**2))
    assert p.coeff == pytest.approx(-k * math.sin(s * math.pi) / math.pi)


@pytest.mark.parametrize("s", [0.0, 1.0, -0.2, 1.5, math.nan])
def test_params_reject_order(s):
    with pytest.raises(InvalidOrder):
        quadrature_params(0.1, s)


@pytest.mark.parametrize("h", [1.0, 2.5])
def test_params_reject_coarse_mesh(h):
    with pytest.raises(InvalidMesh):
        quadrature_params(h, 0.5)


# -- scalar oracle ---------------------------------------------------------

def test_scalar_power_values():
    p = quadrature_params(0.01, 0.5)
    assert abs(scalar_sinc_power(1.0, p) - 1.0) < 1e-4
    assert abs(scalar_sinc_power(math.pi**2, p) - math.pi) < 1e-3


@given(st.floats(1e-3, 1e5), st.floats(1e-3, 1e5), st.floats(0.05, 0.95))
def test_scalar_power_monotone(a, b, s):
    p = quadrature_params(0.02, s)
    lo, hi = sorted((a, b))
    assert scalar_sinc_power(lo, p) <= scalar_sinc_power(hi, p)


# -- matrix ------------------------------------------------------------------

@pytest.mark.parametrize("s", [0.1, 0.5, 0.9])
def test_neumann_constants_in_kernel(s):
    _, fr = ops(41, "neumann", s)
    assert np.max(np.abs(fr.Ks @ np.ones(41))) <= 1e-10


def test_first_modes_approximate_power():
    fo, fr = ops(101, "neumann", 0.5)
    lam, V = pencil_modes(fo)
    for j in range(1, 11):
        v = V[:, j]
        assert np.linalg.norm(fr.Ks @ v + math.sqrt(lam[j]) * v) <= 2e-3 * math.sqrt(lam[j]) * np.linalg.norm(v)


@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
@pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
def test_spectral_mapping_identity(bc, s):
    fo, fr = ops(51, bc, s)
    lam, V = pencil_modes(fo)
    R = fr.Ks @ V + V * sinc_powers(lam, fr.params)
    scale = np.linalg.norm(fr.Ks, 2)
    assert np.max(np.linalg.norm(R, axis=0) / np.linalg.norm(V, axis=0)) <= 1e-12 * scale


@given(st.sampled_from(["neumann", "dirichlet"]), st.integers(5, 40), st.floats(0.05, 0.95),
       st.floats(-3, 3), st.floats(0.05, 0.95))
def test_self_adjoint_and_semidefinite(bc, n_p, s, a, h):
    fo, fr = ops(n_p, bc, s, a, a + h * (n_p - 1))
    MKs = fr.MKs
    nrm = np.linalg.norm(MKs)
    assert np.linalg.norm(MKs - MKs.T) <= 1e-8 * nrm
    assert np.linalg.eigvalsh(-(MKs + MKs.T) / 2)[0] >= -1e-8 * nrm


@pytest.mark.parametrize("bc", ["neumann", "dirichlet"])
def test_loop_orders_agree(bc):
    fo = assemble_operators(build_mesh(0, 1, 51), bc)
    a = build_fractional_matrix(fo, 0.6, loop_order="columns").Ks
    b = build_fractional_matrix(fo, 0.6, loop_order="nodes").Ks
    assert np.max(np.abs(a - b)) <= 1e-13 * np.max(np.abs(b))


def test_minnorm_variant_also_annihilates_constants():
    fo, fr = ops(41, "neumann", 0.4, singular="minnorm")
    _, ref = ops(41, "neumann", 0.4)
    # truncated-SVD solves amplify the roundoff in K @ 1 somewhat
    assert np.max(np.abs(fr.Ks @ np.ones(41))) <= 1e-8
    np.testing.assert_allclose(fr.Ks, ref.Ks, atol=1e-8 * np.max(np.abs(ref.Ks)))


def test_build_stats():
    _, fr = ops(31, "neumann", 0.5)
    assert fr.build_stats["num_quadrature_nodes"] == fr.params.n_plus + fr.params.n_minus + 1
    assert fr.build_stats["wall_time"] >= 0


def test_build_rejects_order():
    fo = assemble_operators(build_mesh(0, 1, 11), "neumann")
    with pytest.raises(InvalidOrder):
        build_fractional_matrix(fo, 1.0)


# -- matrix-free -------------------------------------------------------------

def test_matrix_free_constant_and_random():
    fo, fr = ops(61, "neumann", 0.7)
    assert np.max(np.abs(apply_balakrishnan(fo, 0.7, np.ones(61)))) <= 1e-10
    u = np.random.default_rng(1).standard_normal(61)
    ref = fr.Ks @ u
    assert np.max(np.abs(apply_balakrishnan(fo, 0.7, u) - ref)) <= 1e-12 * np.max(np.abs(fr.Ks)) * np.abs(u).sum()


def test_matrix_free_eigenvector():
    fo, fr = ops(61, "dirichlet", 0.4)
    lam, V = pencil_modes(fo)
    v = V[:, 3]
    np.testing.assert_allclose(apply_balakrishnan(fo, 0.4, v), -scalar_sinc_power(lam[3], fr.params) * v,
                               atol=1e-12 * np.linalg.norm(fr.Ks, 2))


# -- eigenvalue convergence ---------------------------------------------------

def test_exact_eigenvalues():
    np.testing.assert_allclose(exact_fractional_eigenvalues("neumann", 0.5, 2.0, 3), np.arange(1, 4) * math.pi / 2)


def test_single_mode_report_matches_pipeline():
    rep = eigen_convergence_report("neumann", 0.5, [50], 1)
    fo, fr = ops(50, "neumann", 0.5)
    lam1 = pencil_eigenvalues(fr)[1]
    assert rep.err[0] == pytest.approx(abs(math.pi - lam1) / math.pi, rel=1e-10)
    lam_h, _ = pencil_modes(fo)
    assert lam1 == pytest.approx(scalar_sinc_power(lam_h[1], fr.params), rel=1e-10)


@pytest.mark.parametrize("s", [0.5, 0.9])
def test_neumann_convergence_slope(s):
    rep = eigen_convergence_report("neumann", s, [50, 100, 150, 200, 250], 40)
    assert 1.7 <= rep.slope <= 2.3
    assert rep.err[-1] * 10 <= rep.err[0]


def test_dirichlet_convergence_slope():
    rep = eigen_convergence_report("dirichlet", 0.5, [50, 100, 150, 200, 250], 40)
    assert 1.7 <= rep.slope <= 2.3


def test_report_csv_and_summary():
    rep = eigen_convergence_report("dirichlet", 0.5, [20, 40], 5)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "n_p,h,err" and len(lines) == 3
    assert rep.summary()["bc"] == "dirichlet"


def test_report_rejects_too_many_modes():
    with pytest.raises(InvalidParameter):
        eigen_convergence_report("neumann", 0.5, [20, 40], 18)


def test_max_relative_error_skips_constant_mode():
    _, fr = ops(80, "neumann", 0.5)
    assert max_relative_error(fr, 5) < 1e-2


@pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
@pytest.mark.parametrize("s", [0.001, 0.999])
def test_extreme_orders_stay_finite(bc, s):
    fo = assemble_operators(build_mesh(0.0, 1.0, 81), bc)
    fr = build_fractional_matrix(fo, s)
    assert np.all(np.isfinite(fr.Ks))
    lam = np.sort(pencil_eigenvalues(fr))
    nonzero = lam[1:] if bc == "neumann" else lam
    exact = scalar_sinc_power(np.sort(sla.eigh(fo.K, fo.M, eigvals_only=True))[len(lam) - len(nonzero):],
                              fr.params)
    np.testing.assert_allclose(nonzero, exact, rtol=1e-8)
