import math

import numpy as np
import pytest

from symspin.fock import difference_residual, residual
from symspin.flat import (
    FlatModel,
    PolynomialModel,
    d_squared_residual,
    dirac_scaling,
    ellipticity_check,
    killing_solve,
    mode_set,
    self_adjointness_residuals,
    spectrum_transfer_check,
    spinor_laplacian,
    forbidden_target_residuals,
    twistor_complex_residuals,
    weitzenboeck_residuals,
)

N, DEG = 5, 2


@pytest.fixture(scope="module")
def fm():
    return FlatModel(2)


def test_mode_set():
    assert len(mode_set(1)) == 9
    sub = mode_set(2, 1, 5, seed=3)
    assert len(sub) == 5 and sub == mode_set(2, 1, 5, seed=3)
    assert set(sub) <= set(mode_set(2))


def test_polynomial_model_size():
    # monomials of degree <= 2 in 4 variables
    assert PolynomialModel(2, 2).dim == math.comb(6, 2)


@pytest.mark.parametrize("n", [1, 2])
def test_d_squared_vanishes(n):
    assert d_squared_residual(n, 4, 3) == 0.0


def test_d_on_linear_monomial_brute_force():
    n = 1
    fm = FlatModel(n)
    model = PolynomialModel(n, 1)
    D = fm.d(3)
    mat = D.polynomial_matrix(model).toarray()
    sp_ = fm.space(3)
    for a in range(2):
        beta = tuple(1 if b == a else 0 for b in range(2))
        col = model.index(beta)
        row = model.index((0, 0))
        block = mat[row * sp_.dim:(row + 1) * sp_.dim, col * sp_.dim:(col + 1) * sp_.dim]
        want = np.kron(np.eye(sp_.fock.dim), sp_.ext.wedge_matrix(a).toarray())
        assert np.abs(block - want).max() < 1e-14


def test_mode_is_symbol_at_scaled_covector(fm):
    D = fm.d(3)
    k = (1, 0, -1, 1)
    assert difference_residual(D.mode(k), D.symbol(2j * math.pi * np.array(k))) == 0


def test_forbidden_targets(fm):
    res = forbidden_target_residuals(fm, N, DEG)
    assert res and max(res.values()) < 1e-9


def test_twistor_complexes(fm):
    res = twistor_complex_residuals(fm, N, DEG)
    assert set(res) == {"T1T0", "T3T2", "T2T1T0", "T3T2T1"}
    assert max(res.values()) < 1e-9


def test_twistor_requires_rank_two():
    with pytest.raises(ValueError):
        twistor_complex_residuals(FlatModel(1), 3, 1)
    with pytest.raises(ValueError):
        FlatModel(2).twistor(4, 3)


def test_spinor_laplacian_modes():
    L = spinor_laplacian(2, 4)
    k = (1, -1, 0, 1)
    Lk = L.mode(k)
    scale = 4 * math.pi**2 * sum(x * x for x in k)
    assert abs(residual(Lk) - scale) < 1e-9


def test_weitzenboeck_metric_convention():
    modes = mode_set(2, 1, 4, seed=0)
    assert max(weitzenboeck_residuals(2, 4, modes).values()) < 1e-9
    assert max(self_adjointness_residuals(2, 4, modes).values()) < 1e-9


def test_weitzenboeck_literal_convention_fails():
    modes = [(1, 0, 0, 0), (0, 1, 1, 0)]
    assert max(weitzenboeck_residuals(2, 4, modes, "literal").values()) > 0.1


def test_killing_only_zero(fm):
    kr = killing_solve(fm, 4, DEG)
    assert kr.only_zero
    assert kr.pencil_kernel_dim == kr.kill_dim
    assert max(kr.inclusion_pencil_in_kill, kr.inclusion_kill_in_pencil) < 1e-9


def test_spectrum_transfer_operator_identity(fm):
    st = spectrum_transfer_check(fm, N, DEG, mode_set(2, 1, 3, seed=1))
    assert st.operator_residual_polynomial < 1e-9
    assert st.operator_residual_modes < 1e-9
    assert st.kernel_residual < 1e-6


def test_dirac_is_multiple_of_symplectic_dirac(fm):
    ds = dirac_scaling(fm, N, DEG)
    assert abs(ds.coefficient) > 1e-3
    assert ds.residual < 1e-9


def test_ellipticity_first_position(fm):
    defects = ellipticity_check(fm, [0.3, -0.2, 0.5, 0.1], 4)
    assert defects[0].position == 0 and defects[0].defect == 0
