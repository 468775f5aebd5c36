import numpy as np
import pytest

from ellipticyb.bases import FiniteRep, phi_basis, theta2n_basis
from ellipticyb.core import theta
from ellipticyb.lax import PAULI
from ellipticyb.sklyanin import (
    NotInvariantError,
    casimir_residuals,
    casimir_values,
    cross_relation_residuals,
    generator_S,
    generators,
    j_alpha,
    matrix_rep,
    sklyanin_matrix_residuals,
    sklyanin_relation_residuals,
    structure_constants,
)

G = 0.3 + 0.17j
ELL = 0.37 + 0.1j


def test_structure_constants_identity(params):
    j = structure_constants(params)
    assert abs(j[(1, 2)] + j[(2, 3)] + j[(3, 1)] + j[(1, 2)] * j[(2, 3)] * j[(3, 1)]) < 1e-13
    ja = j_alpha(params)
    assert abs(j[(1, 2)] - (ja[2] - ja[1]) / ja[3]) < 1e-13


@pytest.mark.parametrize("kind,spin", [("plain", ELL), ("modified", G), ("tilde", G)])
def test_relations_as_operators(params, points, test_functions, kind, spin):
    assert sklyanin_relation_residuals(params, spin, kind, test_functions, points).max() < 1e-9


def test_cross_relations(params, points, test_functions):
    assert cross_relation_residuals(params, G, test_functions, points).max() < 1e-9


@pytest.mark.parametrize("kind,spin", [("plain", ELL), ("modified", G), ("tilde", G)])
def test_casimirs_are_scalars(params, points, kind, spin):
    assert casimir_residuals(params, spin, kind, points).max() < 1e-9


def test_casimir_values_even_in_g(params):
    for tilde in (False, True):
        a, b = np.array(casimir_values(params, G, tilde)), np.array(casimir_values(params, -G, tilde))
        assert np.max(np.abs(a - b)) <= 1e-14 * np.max(np.abs(a))


def test_spin_half_is_pauli(params):
    basis = theta2n_basis(params, 1)
    c = theta(1, 2 * params.eta, params.tau)
    for a in range(4):
        assert np.max(np.abs(matrix_rep(generator_S(params, a, 0.5), basis) - c * PAULI[a])) < 1e-10 * abs(c)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_integer_spin_matrices_satisfy_relations(params, n):
    mats = [matrix_rep(generator_S(params, a, n / 2), theta2n_basis(params, n)) for a in range(4)]
    assert sklyanin_matrix_residuals(params, mats).max() < 1e-9


@pytest.mark.parametrize("rep,kind", [(FiniteRep(1, 0), "modified"), (FiniteRep(0, 1), "tilde"),
                                      (FiniteRep(1, 1), "modified"), (FiniteRep(1, 1), "tilde"),
                                      (FiniteRep(2, 0), "modified")])
def test_finite_reps_are_invariant(params, rep, kind):
    mats = [matrix_rep(s, phi_basis(params, rep)) for s in generators(params, rep.spin(params), kind)]
    assert sklyanin_matrix_residuals(params, mats, tilde=kind == "tilde").max() < 1e-9


@pytest.mark.parametrize("rep,kind", [(FiniteRep(0, 1), "modified"), (FiniteRep(1, 0), "tilde")])
def test_other_half_acts_by_s0_only(params, rep, kind):
    mats = [matrix_rep(s, phi_basis(params, rep)) for s in generators(params, rep.spin(params), kind)]
    s0 = np.max(np.abs(mats[0]))
    assert s0 > 1
    assert max(np.max(np.abs(m)) for m in mats[1:]) < 1e-12 * s0


def test_non_invariant_space_detected(params):
    # spin 1/2 plain generators do not preserve Theta_4
    with pytest.raises(NotInvariantError):
        matrix_rep(generator_S(params, 1, 0.5), theta2n_basis(params, 2))


def test_bad_generator_index(params):
    with pytest.raises(ValueError):
        generator_S(params, 4, 0.5)
