import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symspin.hodge import (
    STANDARD_ALGEBRAS,
    AdjointableMap,
    FiniteCStarAlgebra,
    HilbertModule,
    ModuleComplex,
    adjoint,
    complex_from_dict,
    complex_to_dict,
    export_result,
    hodge_decompose,
    import_complex,
    laplacian,
    random_complex,
)

seeds = st.integers(0, 2**32 - 1)
algebras = st.sampled_from(sorted(STANDARD_ALGEBRAS))


def close(a, b, tol=1e-10):
    return all(np.abs(x - y).max() <= tol for x, y in zip(a, b))


def random_map(A, src, tgt, rng):
    entries = [[A.random_element(rng) for _ in range(src)] for _ in range(tgt)]
    return AdjointableMap.from_entries(A, entries)


@given(algebras, seeds)
def test_adjoint_entrywise_oracle(name, seed):
    A = STANDARD_ALGEBRAS[name]
    rng = np.random.default_rng(seed)
    F = random_map(A, 2, 3, rng)
    Fs = adjoint(F)
    for j in range(3):
        for i in range(2):
            assert close(Fs.entry(i, j), A.star(F.entry(j, i)), 0)


@given(algebras, seeds)
def test_adjoint_pairing(name, seed):
    A = STANDARD_ALGEBRAS[name]
    rng = np.random.default_rng(seed)
    F = random_map(A, 2, 3, rng)
    U, V = HilbertModule.free(A, 2), HilbertModule.free(A, 3)
    u, v = U.random_element(rng), V.random_element(rng)
    assert close(V.inner(F.apply(u), v), U.inner(u, adjoint(F).apply(v)))


@given(algebras, seeds)
def test_maps_are_right_linear(name, seed):
    A = STANDARD_ALGEBRAS[name]
    rng = np.random.default_rng(seed)
    F = random_map(A, 2, 2, rng)
    U = HilbertModule.free(A, 2)
    u, a = U.random_element(rng), A.random_element(rng)
    assert close(F.apply(U.right_act(u, a)), U.right_act(F.apply(u), a))


@given(algebras, seeds)
def test_dagger_axioms(name, seed):
    A = STANDARD_ALGEBRAS[name]
    rng = np.random.default_rng(seed)
    F, G = random_map(A, 2, 3, rng), random_map(A, 3, 2, rng)
    assert close(adjoint(adjoint(F)).blocks, F.blocks, 0)
    assert close(adjoint(G @ F).blocks, (adjoint(F) @ adjoint(G)).blocks)
    assert close(adjoint(F + F).blocks, (2 * adjoint(F)).blocks)


@given(algebras, seeds)
def test_inner_product_axioms(name, seed):
    A = STANDARD_ALGEBRAS[name]
    rng = np.random.default_rng(seed)
    U = HilbertModule.free(A, 3)
    u, v, a = U.random_element(rng), U.random_element(rng), A.random_element(rng)
    assert close(U.inner(u, U.right_act(v, a)), tuple(x @ y for x, y in zip(U.inner(u, v), a)))
    assert close(A.star(U.inner(u, v)), U.inner(v, u))
    assert A.is_positive(U.inner(u, u))
    assert not A.is_positive(tuple(-np.eye(b) for b in A.blocks))


def test_projection_validated():
    A = FiniteCStarAlgebra((1,))
    bad = AdjointableMap(A, 1, 1, (np.array([[2.0]]),))
    with pytest.raises(ValueError):
        HilbertModule(A, 1, bad)
    with pytest.raises(ValueError):
        FiniteCStarAlgebra((0,))


def test_scalar_example_dimensions():
    A = FiniteCStarAlgebra((1,))
    U = HilbertModule.free(A, 2)
    d = AdjointableMap(A, 2, 2, (np.array([[1.0, 0.0], [0.0, 0.0]]),))
    res = hodge_decompose(ModuleComplex((U, U), (d,)))
    assert res.indices[0].dims["harmonic"] == (1,)
    assert res.indices[1].dims["harmonic"] == (1,)
    assert res.worst < 1e-12
    # harmonic projectors are onto e_2 in both degrees
    for ix in res.indices:
        assert np.allclose(ix.harmonic.blocks[0], np.diag([0.0, 1.0]))


def test_zero_complex_exact():
    A = STANDARD_ALGEBRAS["C+M2"]
    mods = [HilbertModule.free(A, m) for m in (2, 1, 3)]
    res = hodge_decompose(ModuleComplex.zero(A, mods))
    assert res.worst == 0.0
    for ix, U in zip(res.indices, mods):
        assert ix.dims["harmonic"] == U.dims()
        assert ix.green.is_zero()


def test_rejects_nonzero_square():
    A = FiniteCStarAlgebra((1,))
    U = HilbertModule.free(A, 1)
    one = AdjointableMap.identity(A, 1)
    with pytest.raises(ValueError):
        ModuleComplex((U, U, U), (one, one))


def test_rejects_map_leaving_submodule():
    A = FiniteCStarAlgebra((1,))
    p = AdjointableMap(A, 2, 2, (np.diag([1.0, 0.0]),))
    U, V = HilbertModule(A, 2, p), HilbertModule.free(A, 2)
    with pytest.raises(ValueError):
        ModuleComplex((V, U), (AdjointableMap.identity(A, 2),))


@given(algebras, seeds)
def test_random_complex_decomposition(name, seed):
    cx = random_complex(STANDARD_ALGEBRAS[name], (2, 3, 2), seed)
    res = hodge_decompose(cx)
    assert res.worst < 1e-9
    for i, ix in enumerate(res.indices):
        lap = laplacian(cx, i)
        assert np.abs((lap @ ix.harmonic).blocks[0]).max() < 1e-9


def test_euler_characteristic():
    cx = random_complex(STANDARD_ALGEBRAS["M2+M3"], (2, 2, 3), 3)
    res = hodge_decompose(cx)
    for b in range(2):
        chi_mod = sum((-1) ** i * ix.dims["module"][b] for i, ix in enumerate(res.indices))
        chi_h = sum((-1) ** i * ix.dims["harmonic"][b] for i, ix in enumerate(res.indices))
        assert chi_mod == chi_h


def test_json_round_trip(tmp_path):
    cx = random_complex(STANDARD_ALGEBRAS["C+M2"], (1, 2), 9)
    again = complex_from_dict(json.loads(json.dumps(complex_to_dict(cx))))
    assert close(again.differentials[0].blocks, cx.differentials[0].blocks, 0)
    path = tmp_path / "cx.json"
    path.write_text(json.dumps(complex_to_dict(cx)))
    assert close(import_complex(path).modules[1].projection.blocks, cx.modules[1].projection.blocks, 0)
    export_result(hodge_decompose(cx), tmp_path / "out.json")
    out = json.loads((tmp_path / "out.json").read_text())
    assert max(out["residuals"].values()) < 1e-9


@pytest.mark.parametrize(
    "data",
    [
        {"modules": []},
        {"algebra": [1], "modules": [{"rank": 1, "projection": [[[1.0]]]}], "differentials": []},
        {"algebra": [1], "modules": [{"rank": 2, "projection": [[[[1, 0]]]]}], "differentials": []},
    ],
)
def test_malformed_json(data):
    with pytest.raises(ValueError):
        complex_from_dict(data)
