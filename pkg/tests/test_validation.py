import numpy as np
import pytest

from fracpath.errors import InvalidMesh, InvalidOrder
from fracpath.validation import (
    default_np_list,
    poisson_exact_s1,
    poisson_self_convergence,
    solve_fem_poisson,
    solve_fractional_poisson,
)


def test_s1_fem_matches_closed_form():
    x, u = solve_fem_poisson(250)
    assert np.max(np.abs(u - poisson_exact_s1(x))) <= 1e-3


def test_closed_form_solves_the_problem():
    x = np.linspace(0, 1, 11)
    assert poisson_exact_s1(x)[0] == 0 and abs(poisson_exact_s1(x)[-1]) < 1e-15
    # -u'' = 6x + 2 for u = -x^3 - x^2 + 2x
    assert np.allclose(-np.polyder(np.poly1d([-1, -1, 2, 0]), 2)(x), 6 * x + 2)


def test_mesh_list():
    assert default_np_list(250) == [10, 20, 40, 80, 160, 250]
    with pytest.raises(InvalidMesh):
        default_np_list(5)


def test_fractional_solution_shape():
    x, u = solve_fractional_poisson(41, 0.5)
    assert u[0] == 0 and u[-1] == 0 and np.all(u[1:-1] > 0)


def test_fractional_solution_tends_to_s1_limit():
    x, u = solve_fractional_poisson(101, 0.999)
    assert np.max(np.abs(u - poisson_exact_s1(x))) < 1e-2


def test_rates():
    assert poisson_self_convergence(0.75, np_max=160).slope >= 1.7
    assert poisson_self_convergence(0.25, np_max=160).slope >= 0.8


def test_reference_must_be_finer():
    with pytest.raises(InvalidMesh):
        poisson_self_convergence(0.5, np_max=600)
    with pytest.raises(InvalidOrder):
        poisson_self_convergence(1.0)
