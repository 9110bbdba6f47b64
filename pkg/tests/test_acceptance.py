"""Acceptance criteria, run at their stated sizes and tolerances.

Each test appends one line to ``RESULTS``; the lines are printed in the
terminal summary (see conftest.py) and, with ``-s``, as the tests run.
"""
import json
import time

import numpy as np
import pytest

from classifier_oracle import brute_dimension
from symspin.cli import main
from symspin.curvature import (
    VARIANTS,
    ProjectionFormulas,
    higher_curvature_check,
    measured_w_coefficient,
    nominal_w_coefficient,
    random_fedosov_curvature,
    random_symmetric,
    ricci_type_curvature,
)
from symspin.fock import (
    FockTruncation,
    clifford_generator,
    compact_generator,
    difference_residual,
    identity,
    sp_action,
    to_symplectic_basis,
)
from symspin.flat import (
    FlatModel,
    d_squared_residual,
    killing_solve,
    mode_set,
    spectrum_transfer_check,
    forbidden_target_residuals,
    twistor_complex_residuals,
    weitzenboeck_residuals,
)
from symspin.forms import SymplecticData
from symspin.hodge import STANDARD_ALGEBRAS, HilbertModule, ModuleComplex, hodge_decompose, random_complex
from symspin.osp import Decomposition, build_osp, commutant_check, expected_summand_count, osp_relation_residuals
from symspin.weights import Weight, decompose_tensor, exists_first_order_op, random_triples
from symspin.weyl import WeylElement, clifford_relation_images, commutator

RESULTS: list[str] = []


def record(label: str, passed: bool, detail: str) -> None:
    line = f"{label}: {'PASS' if passed else 'FAIL'} ({detail})"
    RESULTS.append(line)
    print(line)


def test_criterion_1_osp_suite():
    start = time.perf_counter()
    worst_rel, worst_comm = 0.0, 0.0
    for n in (1, 2, 3):
        g = build_osp(n, 12)
        worst_rel = max(worst_rel, max(osp_relation_residuals(g).values()))
        worst_comm = max(worst_comm, commutant_check(g, 50, seed=0))
    elapsed = time.perf_counter() - start
    ok = worst_rel <= 1e-9 and worst_comm <= 1e-9 and elapsed <= 60
    record("criterion 1 osp(1|2) suite", ok, f"relations {worst_rel:.1e}, commutant {worst_comm:.1e}, {elapsed:.0f} s")
    assert ok


def test_criterion_2_decomposition_counts():
    bad = []
    for n in (2, 3):
        dec = Decomposition(n)
        for i in range(2 * n + 1):
            want = 2 * (i + 1) if i <= n else 2 * (2 * n - i + 1)
            if dec.summand_count(i) != want or expected_summand_count(n, i) != want:
                bad.append(("count", n, i))
        for i in range(n + 1):
            if dec.multiplicity(i) != 2 * n - 2 * i + 1:
                bad.append(("multiplicity", n, i))
    record("criterion 2 decomposition counts", not bad, f"mismatches {bad}")
    assert not bad


def test_criterion_3_clifford_weyl_bridge():
    exact_ok = True
    for n in (1, 2, 3):
        one = WeylElement.one(n)
        for i in range(n):
            for j in range(n):
                c = commutator(WeylElement.a(n, i), WeylElement.b(n, j))
                exact_ok &= c == (one.scale(-1) if i == j else WeylElement.zero(n))
        exact_ok &= all(img.is_zero() for img in clifford_relation_images(n).values())
    worst_comm, worst_j = 0.0, 0.0
    for n in (1, 2, 3):
        tr = FockTruncation(n, 8)
        om = SymplecticData(n).omega
        e = [clifford_generator(k, tr) for k in range(2 * n)]
        big = [clifford_generator(k, tr.with_N(9)) for k in range(2 * n)]
        for i in range(2 * n):
            for j in range(2 * n):
                comm = big[i] @ e[j] - big[j] @ e[i]
                worst_comm = max(worst_comm, difference_residual(comm, (-1j * om[i, j]) * identity(tr)))
        J = sp_action(to_symplectic_basis(compact_generator(n)), tr).toarray()[: tr.dim]
        worst_j = max(worst_j, float(np.abs(J - np.diag(-1j * (tr.degrees + n / 2))).max()))
    ok = exact_ok and worst_comm <= 1e-10 and worst_j <= 1e-12
    record("criterion 3 Clifford/Weyl bridge", ok, f"exact {exact_ok}, commutator {worst_comm:.1e}, J0 {worst_j:.1e}")
    assert ok


def _projection_sweep(coefficient):
    start = time.perf_counter()
    counts = []
    for n in (2, 3):
        th = ProjectionFormulas(n, 2)
        c = coefficient(n)
        for seed in range(20):
            reports = th.run_all(random_fedosov_curvature(n, seed), VARIANTS, [c])
            counts.append(sum(r.passes(1e-8) for r in reports))
    hc = 0.0
    for n in (2, 3):
        tr = FockTruncation(n, 2)
        for seed in range(5):
            hc = max(hc, higher_curvature_check(ricci_type_curvature(random_symmetric(n, seed)), tr))
    return counts, hc, time.perf_counter() - start


def test_criterion_4_curvature_projections():
    counts, hc, elapsed = _projection_sweep(measured_w_coefficient)
    ok = all(c == 1 for c in counts) and hc <= 1e-8 and elapsed <= 120
    record(
        "criterion 4 curvature (measured Weyl-part coefficient)",
        ok,
        f"validating variants per seed {sorted(set(counts))}, higher curvature {hc:.1e}, {elapsed:.0f} s",
    )
    assert ok


@pytest.mark.xfail(strict=True, reason="with the nominal Weyl-part coefficient no variant validates")
def test_criterion_4_nominal_coefficient():
    counts, hc, _ = _projection_sweep(nominal_w_coefficient)
    ok = all(c == 1 for c in counts) and hc <= 1e-8
    record("criterion 4 curvature (nominal Weyl-part coefficient)", ok, f"validating variants per seed {sorted(set(counts))}")
    assert ok


@pytest.fixture(scope="module")
def flat2():
    return FlatModel(2)


def test_criterion_5_flat_model(flat2):
    N, d = 8, 3
    dd = d_squared_residual(2, N, d)
    forbidden = max(forbidden_target_residuals(flat2, N, d).values())
    twistor = max(twistor_complex_residuals(flat2, N, d).values())
    weitz = max(weitzenboeck_residuals(2, N, mode_set(2)).values())
    kr = killing_solve(flat2, N, d)
    kernels = max(kr.inclusion_pencil_in_kill, kr.inclusion_kill_in_pencil)
    ok = (
        dd == 0
        and forbidden <= 1e-9
        and twistor <= 1e-9
        and weitz <= 1e-9
        and kr.only_zero
        and kr.pencil_kernel_dim == kr.kill_dim
        and kernels <= 1e-9
    )
    record(
        "criterion 5 flat model",
        ok,
        f"d^2 {dd}, forbidden {forbidden:.1e}, twistor {twistor:.1e}, Weitzenboeck {weitz:.1e}, "
        f"Killing mu {list(kr.eigenvalues)}, kernels {kernels:.1e}",
    )
    assert ok


@pytest.fixture(scope="module")
def transfer(flat2):
    return spectrum_transfer_check(flat2, 8, 3, mode_set(2, 1, 5, seed=0))


def test_criterion_6_operator_identity_recorded(transfer):
    # the operator-level outcome is reported either way; it happens to hold
    assert np.isfinite(transfer.operator_residual_polynomial) and np.isfinite(transfer.operator_residual_modes)
    assert transfer.kernel_residual <= 1e-6


@pytest.mark.xfail(strict=True, reason="compressed eigenpairs of the Dirac operator do not transfer")
def test_criterion_6_spectrum_transfer(transfer):
    worst = transfer.compression_worst()
    ok = worst <= 1e-6
    record(
        "criterion 6 spectrum transfer",
        ok,
        f"compression eigenpairs {worst:.1e}, operator identity {transfer.operator_residual_polynomial:.1e} "
        f"(polynomial) / {transfer.operator_residual_modes:.1e} (modes), kernel pairs {transfer.kernel_residual:.1e}",
    )
    assert ok


def test_criterion_7_hodge_suite():
    start = time.perf_counter()
    worst = 0.0
    for A in STANDARD_ALGEBRAS.values():
        for seed in range(100):
            worst = max(worst, hodge_decompose(random_complex(A, (2, 3, 2), seed)).worst)
    zero = 0.0
    for A in STANDARD_ALGEBRAS.values():
        mods = [HilbertModule.free(A, 2)] * 3
        zero = max(zero, hodge_decompose(ModuleComplex.zero(A, mods)).worst)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and zero == 0 and elapsed <= 60
    record("criterion 7 Hodge suite", ok, f"worst residual {worst:.1e}, zero complex {zero}, {elapsed:.0f} s")
    assert ok


def test_criterion_8_classifier():
    mismatches, nonzero = 0, 0
    for n in (2, 3):
        for src, dst in random_triples(n, 10_000, seed=n):
            got = exists_first_order_op(src, dst)
            want = brute_dimension(
                list(src.weight.varpi), src.c, src.gamma, list(dst.weight.varpi), dst.c, dst.gamma
            )
            mismatches += got != want
            nonzero += got
    summands = len(decompose_tensor(Weight.from_varpi((0, -0.5))))
    ok = mismatches == 0 and summands == 2
    record("criterion 8 classifier", ok, f"mismatches {mismatches} of 20000 ({nonzero} nonzero), spinor summands {summands}")
    assert ok


DETERMINISM_RUNS = [
    ["osp", "--n", "1", "--trunc", "6"],
    ["curvature", "--seeds", "2"],
    ["flat", "--trunc", "4", "--poly-deg", "2", "--modes", "2"],
    ["hodge", "--count", "3"],
    ["classify", "--n", "3", "--sweep", "500"],
]


def test_criterion_9_determinism(tmp_path):
    differing = []
    for argv in DETERMINISM_RUNS:
        outs = []
        for k in range(2):
            path = tmp_path / f"{argv[0]}-{k}.json"
            main(argv + ["--out", str(path)])
            outs.append(path.read_bytes())
        json.loads(outs[0])
        if outs[0] != outs[1]:
            differing.append(argv[0])
    ok = not differing
    record("criterion 9 determinism", ok, f"{len(DETERMINISM_RUNS)} reports, differing {differing}")
    assert ok
