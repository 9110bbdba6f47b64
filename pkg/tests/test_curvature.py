from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symspin.curvature import (
    PINNED_VARIANT,
    VARIANTS,
    SymplecticCurvature,
    ProjectionFormulas,
    curvature_from_jet,
    higher_curvature_check,
    jet_for_curvature,
    measured_w_coefficient,
    nominal_w_coefficient,
    random_fedosov_curvature,
    random_symmetric,
    ricci_of,
    ricci_trace,
    ricci_type_curvature,
    sigma_theta_ops,
    spinor_lift,
)
from symspin.fock import FockTruncation, clifford_generator, difference_residual, residual
from symspin.forms import ExteriorBasis, SymplecticData, raise_lower
from symspin.osp import SpinorFormSpace, degree_projector

seeds = st.integers(0, 2**32 - 1)


def curvature_symmetries(R):
    return (
        np.all(R == R.transpose(1, 0, 2, 3))
        and np.all(R == -R.transpose(0, 1, 3, 2))
        and np.all(R + np.einsum("iklj->ijkl", R) + np.einsum("iljk->ijkl", R) == 0)
    )


def test_zero_jet_gives_zero_curvature():
    curv = curvature_from_jet(2, np.zeros((4,) * 4, dtype=int))
    assert all(x == 0 for x in curv.R.ravel())


def test_jet_must_be_symmetric():
    T = np.zeros((2,) * 4, dtype=int)
    T[0, 1, 1, 0] = 1
    with pytest.raises(ValueError):
        curvature_from_jet(1, T)


@given(seeds, st.integers(1, 3))
@settings(max_examples=10)
def test_generated_curvature_symmetries_exact(seed, n):
    curv = random_fedosov_curvature(n, seed)
    assert all(v == 0 for v in curv.symmetry_defects().values())


@given(seeds)
@settings(max_examples=10)
def test_jet_round_trip(seed):
    curv = random_fedosov_curvature(2, seed)
    again = curvature_from_jet(2, jet_for_curvature(curv))
    assert np.all(again.R == curv.R)


@given(seeds)
@settings(max_examples=10)
def test_ricci_trace_brute_force(seed):
    n = 2
    curv = random_fedosov_curvature(n, seed)
    inv = -SymplecticData(n).omega
    brute = np.zeros((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            brute[i, j] = sum(curv.R[m, j, a, i] * inv[m, a] for m in range(4) for a in range(4))
    sigma = ricci_trace(curv.R, n)
    assert np.all(sigma == brute)
    assert np.all(sigma == sigma.T)


@given(seeds)
@settings(max_examples=10)
def test_variant_symmetries(seed):
    n = 2
    curv = random_fedosov_curvature(n, seed)
    corrected = ricci_of(curv, "corrected")
    assert curvature_symmetries(corrected.sigma_tilde)
    assert curvature_symmetries(corrected.W)
    # the Ricci part carries the whole trace
    assert np.all(ricci_trace(corrected.sigma_tilde, n) == corrected.sigma)
    assert not curvature_symmetries(ricci_of(curv, "restored").sigma_tilde)


def test_unknown_variant():
    with pytest.raises(ValueError):
        ricci_of(random_fedosov_curvature(2, 0), "other")


def test_ricci_type_constructor():
    curv = ricci_type_curvature(random_symmetric(2, 3))
    assert ricci_of(curv).is_ricci_type
    with pytest.raises(ValueError):
        ricci_type_curvature(np.arange(16).reshape(4, 4))


def test_spinor_lift_zero_and_additive():
    tr = FockTruncation(2, 3)
    assert residual(spinor_lift(np.zeros((4,) * 4), tr)) == 0
    a = random_fedosov_curvature(2, 1).numeric
    b = random_fedosov_curvature(2, 2).numeric
    lhs = spinor_lift(a + b, tr)
    assert difference_residual(lhs, spinor_lift(a, tr) + spinor_lift(b, tr)) < 1e-12
    assert lhs.window == (-2, 2)


def test_spinor_lift_brute_force_n1():
    n, tr = 1, FockTruncation(1, 4)
    T = random_fedosov_curvature(n, 7).numeric
    Tu = raise_lower(raise_lower(T, 0, "raise"), 1, "raise")
    ext = ExteriorBasis(n)
    big = tr.with_N(5)
    space = SpinorFormSpace(n, tr.N)
    out = np.zeros((SpinorFormSpace(n, tr.N + 2).dim, space.dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            ee = (clifford_generator(i, big) @ clifford_generator(j, tr)).toarray()
            for k in range(2):
                for l in range(2):
                    if Tu[i, j, k, l]:
                        form = (ext.wedge_matrix(k) @ ext.wedge_matrix(l)).toarray()
                        out += 0.5j * Tu[i, j, k, l] * np.kron(ee, form)
    assert np.abs(spinor_lift(T, tr).toarray() - out).max() < 1e-12


@pytest.fixture(scope="module")
def th2():
    return ProjectionFormulas(2, 2)


def test_projection_formulas_zero_curvature(th2):
    zero = SymplecticCurvature(2, np.zeros((4,) * 4, dtype=int))
    for r in th2.run_all(zero):
        assert r.worst == 0


def test_p20_holds_for_n1():
    th = ProjectionFormulas(1, 3)
    for seed in range(3):
        r = th.run(random_fedosov_curvature(1, seed), PINNED_VARIANT)
        assert r.p20 < 1e-8
        assert r.p21 is None and r.p22 is None


def test_exactly_one_variant_with_measured_coefficient(th2):
    c = measured_w_coefficient(2)
    for seed in range(3):
        reports = th2.run_all(random_fedosov_curvature(2, seed), VARIANTS, [c])
        passing = [r.variant for r in reports if r.passes(1e-8)]
        assert passing == [PINNED_VARIANT]


def test_fitted_coefficient_differs_from_nominal_by_a_phase(th2):
    r = th2.run(random_fedosov_curvature(2, 11), PINNED_VARIANT, measured_w_coefficient(2))
    assert abs(r.fitted_w_coefficient - measured_w_coefficient(2)) < 1e-10
    assert nominal_w_coefficient(2) == -1j * measured_w_coefficient(2)
    nominal = th2.run(random_fedosov_curvature(2, 11), PINNED_VARIANT)
    assert nominal.p21 > 1.0


def test_memberships_hold_for_every_variant(th2):
    for r in th2.run_all(random_fedosov_curvature(2, 4)):
        assert r.sigma_membership < 1e-10


def test_sigma_theta_zero_and_degree():
    space = SpinorFormSpace(2, 3)
    Sig, Th = sigma_theta_ops(np.zeros((4, 4)), space)
    assert residual(Sig) == 0 and residual(Th) == 0
    Sig, _ = sigma_theta_ops(random_symmetric(2, 1), space)
    for i in range(4):
        shifted = degree_projector(Sig.tgt, i + 1) @ Sig @ degree_projector(space, i)
        assert difference_residual(shifted, Sig @ degree_projector(space, i)) == 0


def test_sigma_theta_brute_force_n1():
    n = 1
    space = SpinorFormSpace(n, 3)
    sigma = random_symmetric(n, 5).astype(float)
    Sig, Th = sigma_theta_ops(sigma, space)
    mixed = raise_lower(sigma, 0, "raise")
    upper = raise_lower(mixed, 1, "raise")
    tr, big = space.fock, space.fock.with_N(4)
    ext = ExteriorBasis(n)
    S = np.zeros((SpinorFormSpace(n, 4).dim, space.dim), dtype=complex)
    T = np.zeros((SpinorFormSpace(n, 5).dim, space.dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            S += mixed[i, j] * np.kron(clifford_generator(i, tr).toarray(), ext.wedge_matrix(j).toarray())
            ee = (clifford_generator(i, big) @ clifford_generator(j, tr)).toarray()
            T += upper[i, j] * np.kron(ee, np.eye(ext.dim))
    assert np.abs(Sig.toarray() - S).max() < 1e-12
    assert np.abs(Th.toarray() - T).max() < 1e-12


def test_higher_curvature_identity():
    tr = FockTruncation(2, 2)
    zero = SymplecticCurvature(2, np.zeros((4,) * 4, dtype=int))
    assert higher_curvature_check(zero, tr) == 0
    assert higher_curvature_check(ricci_type_curvature(random_symmetric(2, 0)), tr) < 1e-8
    with pytest.raises(ValueError):
        higher_curvature_check(random_fedosov_curvature(2, 0), tr)


def test_exact_storage():
    curv = random_fedosov_curvature(2, 0)
    assert isinstance(curv.R.ravel()[0], Fraction)
