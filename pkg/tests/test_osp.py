from fractions import Fraction

import numpy as np
import pytest

from symspin.fock import residual
from symspin.osp import (
    Decomposition,
    IrrepLabel,
    SpinorFormSpace,
    build_osp,
    commutant_check,
    commutant_residual,
    degree_projector,
    dual_coefficients,
    expected_summand_count,
    in_xi,
    osp_relation_residuals,
    nominal_A,
    projection_residuals,
    recursion_coefficients,
    xi,
)


@pytest.fixture(scope="module")
def osp2():
    return build_osp(2, 8)


def test_space_dimension():
    s = SpinorFormSpace(2, 3)
    assert s.dim == 16 * 10
    assert s.degree_dim(2) == 6 * 10


def test_e_plus_is_four_f_plus_squared(osp2):
    g = osp2
    diff = g.Ep - 4 * (g.Fp @ g.Fp)
    assert residual(diff) < 1e-12


def test_f_plus_kills_top_degree(osp2):
    g = osp2
    top = degree_projector(g.space, 4)
    assert residual(g.Fp @ top) == 0


@pytest.mark.parametrize("n", [1, 2])
def test_relations(n):
    res = osp_relation_residuals(build_osp(n, 8))
    assert max(res.values()) < 1e-9


def test_commutant(osp2):
    assert commutant_check(osp2, samples=10, seed=1) < 1e-9
    assert commutant_residual(osp2, np.zeros((4, 4))) == 0


def test_diagonal_element_commutes_with_h(osp2):
    from symspin.fock import commutator, to_symplectic_basis
    from symspin.osp import sp_action_on_E

    A = np.diag([1.0, -2.0])
    X = to_symplectic_basis(np.block([[A, np.zeros((2, 2))], [np.zeros((2, 2)), -A.T]]))
    assert residual(commutator(sp_action_on_E(X, osp2.space), osp2.H)) < 1e-9


def test_xi_membership():
    assert in_xi(2, 1, 1) and not in_xi(2, 1, 2)
    assert in_xi(2, 3, 1) and not in_xi(2, 3, 2)
    assert len(xi(2)) == 1 + 2 + 3 + 2 + 1


@pytest.mark.parametrize("n", [2, 3])
def test_summand_counts(n):
    dec = Decomposition(n)
    for i in range(2 * n + 1):
        assert dec.summand_count(i) == expected_summand_count(n, i)


def test_summand_count_examples():
    assert expected_summand_count(2, 1) == 4
    assert expected_summand_count(2, 3) == 4


@pytest.mark.parametrize("n,i,m", [(2, 0, 5), (2, 2, 1), (1, 1, 1), (3, 1, 5)])
def test_multiplicities(n, i, m):
    assert Decomposition(n).multiplicity(i) == m


def test_projection_properties():
    res = projection_residuals(2, 4, samples=2)
    assert max(res.values()) < 1e-9


def test_projection_outside_xi_is_zero():
    op = Decomposition(2).operator(1, 2, None, 3)
    assert residual(op) == 0


def test_nominal_coefficients():
    for n in (1, 2, 3):
        for i in range(n + 1):
            assert nominal_A(n, i, i) == 0
    assert nominal_A(2, 2, 1) == Fraction(-1, 4)


def test_measured_coefficient_table():
    d = dual_coefficients(2, 0)
    assert d.dimension == 5
    assert d.residual < 1e-12
    measured = [r.real for r in d.measured]
    assert np.allclose(measured, [-0.5, 0.25, -0.25, 0.5], atol=1e-12)
    assert np.allclose(np.imag(d.measured), 0, atol=1e-12)
    # the chain is forced by {f+, f-} = h/2
    assert np.allclose(measured, [float(x) for x in recursion_coefficients(2, 0)], atol=1e-12)
    assert d.nominal == (Fraction(-1, 2), Fraction(0), Fraction(-1, 4), Fraction(1, 4))


def test_irrep_labels():
    lab = IrrepLabel(2, 2, 2, "+")
    assert lab.highest_weight == (Fraction(1, 2), Fraction(1, 2))
    with pytest.raises(ValueError):
        IrrepLabel(2, 1, 2, "+")
    with pytest.raises(ValueError):
        IrrepLabel(2, 1, 1, "x")
