"""Hodge theory for complexes of finitely generated projective Hilbert modules.

The coefficient algebra is a finite-dimensional C*-algebra A = M_{n_1} + ... + M_{n_r}.
Since M_m(M_{n_b}) = M_{m n_b}, an A-linear map A^m -> A^k is stored as one
complex (k n_b) x (m n_b) matrix per block b, and a module element of A^m as
one (m n_b) x n_b matrix per block (A acts from the right).  A submodule pA^m is
given by a self-adjoint idempotent p, again one matrix per block.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

CUTOFF = 1e-10
ASSOCIATIVITY_TOL = 1e-12

Blocks = tuple[np.ndarray, ...]


# ---------------------------------------------------------------------------
# algebra


@dataclass(frozen=True)
class FiniteCStarAlgebra:
    blocks: tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(b) for b in self.blocks)
        if not blocks or min(blocks) < 1:
            raise ValueError("block sizes must be positive")
        object.__setattr__(self, "blocks", blocks)

    @property
    def dim(self) -> int:
        return sum(b * b for b in self.blocks)

    def random_element(self, rng: np.random.Generator) -> Blocks:
        return tuple(_gaussian(rng, (b, b)) for b in self.blocks)

    def star(self, a: Blocks) -> Blocks:
        return tuple(x.conj().T for x in a)

    def norm(self, a: Blocks) -> float:
        return max(float(np.linalg.norm(x, 2)) for x in a)

    def is_positive(self, a: Blocks, tol: float = ASSOCIATIVITY_TOL) -> bool:
        for x in a:
            if np.abs(x - x.conj().T).max() > tol * max(1.0, np.abs(x).max()):
                return False
            if np.linalg.eigvalsh((x + x.conj().T) / 2).min() < -tol * max(1.0, np.abs(x).max()):
                return False
        return True

    def label(self) -> str:
        return "+".join("C" if b == 1 else f"M{b}" for b in self.blocks)


def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# ---------------------------------------------------------------------------
# maps and modules


@dataclass(frozen=True)
class AdjointableMap:
    """A-linear map A^src -> A^tgt, one matrix per algebra block."""

    algebra: FiniteCStarAlgebra
    src: int
    tgt: int
    blocks: Blocks

    def __post_init__(self):
        blocks = tuple(np.asarray(x, dtype=complex) for x in self.blocks)
        if len(blocks) != len(self.algebra.blocks):
            raise ValueError("one matrix per algebra block required")
        for x, nb in zip(blocks, self.algebra.blocks):
            if x.shape != (self.tgt * nb, self.src * nb):
                raise ValueError(f"block of shape {x.shape}, expected {(self.tgt * nb, self.src * nb)}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def zero(cls, algebra, src, tgt) -> "AdjointableMap":
        return cls(algebra, src, tgt, tuple(np.zeros((tgt * b, src * b), dtype=complex) for b in algebra.blocks))

    @classmethod
    def identity(cls, algebra, m) -> "AdjointableMap":
        return cls(algebra, m, m, tuple(np.eye(m * b, dtype=complex) for b in algebra.blocks))

    @classmethod
    def from_entries(cls, algebra, entries: Sequence[Sequence[Blocks]]) -> "AdjointableMap":
        """Build from a tgt x src matrix whose entries are algebra elements."""
        tgt, src = len(entries), len(entries[0])
        blocks = []
        for b, nb in enumerate(algebra.blocks):
            M = np.zeros((tgt * nb, src * nb), dtype=complex)
            for j in range(tgt):
                for i in range(src):
                    M[j * nb:(j + 1) * nb, i * nb:(i + 1) * nb] = entries[j][i][b]
            blocks.append(M)
        return cls(algebra, src, tgt, tuple(blocks))

    def entry(self, j: int, i: int) -> Blocks:
        return tuple(x[j * nb:(j + 1) * nb, i * nb:(i + 1) * nb] for x, nb in zip(self.blocks, self.algebra.blocks))

    def __matmul__(self, other: "AdjointableMap") -> "AdjointableMap":
        if other.tgt != self.src:
            raise ValueError("rank mismatch in composition")
        return AdjointableMap(self.algebra, other.src, self.tgt, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def __add__(self, other):
        return AdjointableMap(self.algebra, self.src, self.tgt, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        return AdjointableMap(self.algebra, self.src, self.tgt, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __rmul__(self, c):
        return AdjointableMap(self.algebra, self.src, self.tgt, tuple(c * a for a in self.blocks))

    def apply(self, u: Blocks) -> Blocks:
        return tuple(a @ x for a, x in zip(self.blocks, u))

    def norm(self) -> float:
        return max((float(np.abs(x).max()) if x.size else 0.0) for x in self.blocks)

    def is_zero(self) -> bool:
        return all(not np.any(x) for x in self.blocks)


def adjoint(F: AdjointableMap) -> AdjointableMap:
    return AdjointableMap(F.algebra, F.tgt, F.src, tuple(x.conj().T for x in F.blocks))


@dataclass(frozen=True)
class HilbertModule:
    """The submodule pA^m of A^m with the restricted A-valued inner product."""

    algebra: FiniteCStarAlgebra
    rank: int
    projection: AdjointableMap

    def __post_init__(self):
        p = self.projection
        if p.src != self.rank or p.tgt != self.rank:
            raise ValueError("projection must be a rank x rank map")
        res = max(_max_abs(p - adjoint(p)), _max_abs(p @ p - p))
        if res > 1e-9:
            raise ValueError(f"projection is not a self-adjoint idempotent (residual {res:.2e})")

    @classmethod
    def free(cls, algebra, m) -> "HilbertModule":
        return cls(algebra, m, AdjointableMap.identity(algebra, m))

    def inner(self, u: Blocks, v: Blocks) -> Blocks:
        """(u, v) = sum_i u_i^* v_i, antilinear in u."""
        return tuple(x.conj().T @ y for x, y in zip(u, v))

    def random_element(self, rng) -> Blocks:
        raw = tuple(_gaussian(rng, (self.rank * nb, nb)) for nb in self.algebra.blocks)
        return self.projection.apply(raw)

    def right_act(self, u: Blocks, a: Blocks) -> Blocks:
        return tuple(x @ y for x, y in zip(u, a))

    def dims(self) -> tuple[int, ...]:
        """Complex dimension of the range of p in each block."""
        return tuple(int(round(np.trace(x).real)) for x in self.projection.blocks)


def _max_abs(F: AdjointableMap) -> float:
    return F.norm()


# ---------------------------------------------------------------------------
# complexes


@dataclass(frozen=True)
class ModuleComplex:
    """U^0 -> U^1 -> ... -> U^{L-1}; differentials[i]: U^i -> U^{i+1}."""

    modules: tuple[HilbertModule, ...]
    differentials: tuple[AdjointableMap, ...]
    tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "modules", tuple(self.modules))
        object.__setattr__(self, "differentials", tuple(self.differentials))
        if len(self.differentials) != len(self.modules) - 1:
            raise ValueError("need one differential between consecutive modules")
        for i, d in enumerate(self.differentials):
            U, V = self.modules[i], self.modules[i + 1]
            if d.src != U.rank or d.tgt != V.rank:
                raise ValueError(f"differential {i} has the wrong ranks")
            scale = max(1.0, d.norm())
            if _max_abs(V.projection @ d @ U.projection - d) > 1e-9 * scale:
                raise ValueError(f"differential {i} is not a map between the submodules")
        for i in range(len(self.differentials) - 1):
            dd = self.differentials[i + 1] @ self.differentials[i]
            scale = max(1.0, self.differentials[i + 1].norm() * self.differentials[i].norm())
            if dd.norm() > self.tol * scale:
                raise ValueError(f"d_{i + 1} d_{i} != 0 (residual {dd.norm():.2e})")

    @property
    def algebra(self) -> FiniteCStarAlgebra:
        return self.modules[0].algebra

    @property
    def length(self) -> int:
        return len(self.modules)

    def d(self, i: int) -> AdjointableMap:
        """d_i : U^i -> U^{i+1}, zero outside the stored range."""
        if 0 <= i < len(self.differentials):
            return self.differentials[i]
        src = self.modules[i].rank if 0 <= i < self.length else 0
        tgt = self.modules[i + 1].rank if 0 <= i + 1 < self.length else 0
        return AdjointableMap.zero(self.algebra, src, tgt)

    @classmethod
    def zero(cls, algebra, modules: Sequence[HilbertModule]) -> "ModuleComplex":
        diffs = [AdjointableMap.zero(algebra, modules[i].rank, modules[i + 1].rank) for i in range(len(modules) - 1)]
        return cls(tuple(modules), tuple(diffs))


def laplacian(cx: ModuleComplex, i: int) -> AdjointableMap:
    d, dm = cx.d(i), cx.d(i - 1)
    return adjoint(d) @ d + dm @ adjoint(dm)


# ---------------------------------------------------------------------------
# subspace helpers (blockwise orthogonal projectors)


def _orthonormal_range(M: np.ndarray, cutoff: float) -> np.ndarray:
    if M.size == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    scale = max(1.0, s[0] if s.size else 0.0)
    return U[:, s > cutoff * scale]


def _range_projector(M: np.ndarray, cutoff: float) -> np.ndarray:
    Q = _orthonormal_range(M, cutoff)
    return Q @ Q.conj().T


def _kernel_projector(F: np.ndarray, p: np.ndarray, cutoff: float) -> np.ndarray:
    """Projector onto range(p) intersected with ker F."""
    if not np.any(F):
        return p.copy()
    Q = _orthonormal_range(p, cutoff)
    FQ = F @ Q
    if FQ.size == 0:
        return np.zeros_like(p)
    _, s, Vh = np.linalg.svd(FQ)
    scale = max(1.0, s[0] if s.size else 0.0)
    rank = int((s > cutoff * scale).sum())
    N = Q @ Vh[rank:].conj().T
    return N @ N.conj().T


def _projector_map(algebra, m, blocks) -> AdjointableMap:
    return AdjointableMap(algebra, m, m, tuple(blocks))


def _inclusion_defect(P_small: AdjointableMap, P_big: AdjointableMap) -> float:
    """|| (1 - P_big) P_small ||: zero iff range(P_small) is inside range(P_big)."""
    return max((float(np.abs(s - b @ s).max()) if s.size else 0.0) for s, b in zip(P_small.blocks, P_big.blocks))


def _orthogonality(P: AdjointableMap, Q: AdjointableMap) -> float:
    return (P @ Q).norm()


def _sum_projector(P: AdjointableMap, Q: AdjointableMap, cutoff: float) -> AdjointableMap:
    return _projector_map(P.algebra, P.src, [_range_projector(np.hstack([a, b]), cutoff) for a, b in zip(P.blocks, Q.blocks)])


def _ranks(P: AdjointableMap) -> tuple[int, ...]:
    return tuple(int(round(np.trace(x).real)) for x in P.blocks)


# ---------------------------------------------------------------------------
# decomposition and parametrix


@dataclass
class HodgeIndex:
    harmonic: AdjointableMap  # P_i
    green: AdjointableMap  # G_i
    exact: AdjointableMap  # projector onto Im d_{i-1}
    coexact: AdjointableMap  # projector onto Im d_i^*
    cohomology: AdjointableMap  # idempotent certificate q for H^i
    dims: dict[str, tuple[int, ...]]
    residuals: dict[str, float]


@dataclass
class HodgeResult:
    complex: ModuleComplex
    indices: list[HodgeIndex]
    cutoff: float

    @property
    def worst(self) -> float:
        return max((v for ix in self.indices for v in ix.residuals.values()), default=0.0)

    def residual_table(self) -> dict[str, float]:
        out = {}
        for i, ix in enumerate(self.indices):
            for k, v in ix.residuals.items():
                out[f"{k}[{i}]"] = v
        return out


def green_parametrix(cx: ModuleComplex, cutoff: float = CUTOFF) -> list[tuple[AdjointableMap, AdjointableMap]]:
    """(G_i, P_i): P_i projects onto ker Delta_i, G_i inverts Delta_i on its complement in U^i."""
    out = []
    A = cx.algebra
    for i, U in enumerate(cx.modules):
        lap = laplacian(cx, i)
        Gs, Ps = [], []
        for L, p in zip(lap.blocks, U.projection.blocks):
            if not np.any(L):
                Gs.append(np.zeros_like(L))
                Ps.append(p.copy())
                continue
            Q = _orthonormal_range(p, cutoff)
            Lr = Q.conj().T @ L @ Q
            w, V = np.linalg.eigh((Lr + Lr.conj().T) / 2)
            scale = max(1.0, float(np.abs(w).max()) if w.size else 0.0)
            keep = w > cutoff * scale
            Vk, V0 = Q @ V[:, keep], Q @ V[:, ~keep]
            Gs.append(Vk @ np.diag(1.0 / w[keep]) @ Vk.conj().T)
            Ps.append(V0 @ V0.conj().T)
        out.append((_projector_map(A, U.rank, Gs), _projector_map(A, U.rank, Ps)))
    return out


def hodge_decompose(cx: ModuleComplex, cutoff: float = CUTOFF) -> HodgeResult:
    A = cx.algebra
    gp = green_parametrix(cx, cutoff)
    kers, exacts, coexacts = [], [], []
    for i, U in enumerate(cx.modules):
        m = U.rank
        d, dm = cx.d(i), cx.d(i - 1)
        kers.append(_projector_map(A, m, [_kernel_projector(F, p, cutoff) for F, p in zip(d.blocks, U.projection.blocks)]))
        exacts.append(_projector_map(A, m, [_range_projector(x, cutoff) for x in dm.blocks]))
        coexacts.append(_projector_map(A, m, [_range_projector(x, cutoff) for x in adjoint(d).blocks]))
    # kernels of the adjoints d_i^* on U^{i+1}
    coker = []
    for i in range(cx.length):
        if i + 1 < cx.length:
            V = cx.modules[i + 1]
            ds = adjoint(cx.d(i))
            coker.append(_projector_map(A, V.rank, [_kernel_projector(F, p, cutoff) for F, p in zip(ds.blocks, V.projection.blocks)]))
        else:
            coker.append(None)

    indices = []
    for i, U in enumerate(cx.modules):
        G, P = gp[i]
        lap = laplacian(cx, i)
        p = U.projection
        E, C, K = exacts[i], coexacts[i], kers[i]
        scale = max(1.0, lap.norm())
        res = {
            "parametrix_left": _max_abs(G @ lap + P - p) / scale,
            "parametrix_right": _max_abs(lap @ G + P - p) / scale,
            "laplacian_kills_P": _max_abs(lap @ P) / scale,
            "P_selfadjoint": _max_abs(P - adjoint(P)),
            "P_idempotent": _max_abs(P @ P - P),
            "orth_harmonic_exact": _orthogonality(P, E),
            "orth_harmonic_coexact": _orthogonality(P, C),
            "orth_exact_coexact": _orthogonality(E, C),
            # item 1: U^i = Ker Delta + Im d_{i-1} + Im d_i^*
            "hodge_type": _max_abs(P + E + C - p),
        }
        # item 3: Ker d_i = Ker Delta_i + Im d_{i-1}
        HE = _sum_projector(P, E, cutoff)
        res["ker_d_in_sum"] = _inclusion_defect(K, HE)
        res["sum_in_ker_d"] = _inclusion_defect(HE, K)
        # item 4: Ker d_i^* = Ker Delta_{i+1} + Im d_{i+1}^*
        if coker[i] is not None:
            P1, C1 = gp[i + 1][1], coexacts[i + 1]
            HC = _sum_projector(P1, C1, cutoff)
            res["ker_dstar_in_sum"] = _inclusion_defect(coker[i], HC)
            res["sum_in_ker_dstar"] = _inclusion_defect(HC, coker[i])
            res["orth_item4"] = _orthogonality(P1, C1)
        # item 5: Im Delta_i = Im d_{i-1} + Im d_i^*
        ImL = _projector_map(A, U.rank, [_range_projector(x, cutoff) for x in lap.blocks])
        EC = _sum_projector(E, C, cutoff)
        res["im_laplacian_in_sum"] = _inclusion_defect(ImL, EC)
        res["sum_in_im_laplacian"] = _inclusion_defect(EC, ImL)
        # item 2: Ker Delta_i -> Ker d_i / Im d_{i-1} is bijective and q = P is a projection certificate
        dims = {
            "module": U.dims(),
            "harmonic": _ranks(P),
            "exact": _ranks(E),
            "coexact": _ranks(C),
            "ker_d": _ranks(K),
        }
        res["harmonic_in_ker_d"] = _inclusion_defect(P, K)
        res["cohomology_dim_defect"] = float(
            max(abs(k - h - e) for k, h, e in zip(dims["ker_d"], dims["harmonic"], dims["exact"]))
        )
        indices.append(HodgeIndex(P, G, E, C, P, dims, res))
    return HodgeResult(cx, indices, cutoff)


# ---------------------------------------------------------------------------
# random complexes


def _unitary(rng, m: int) -> np.ndarray:
    Q, R = np.linalg.qr(_gaussian(rng, (m, m)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_complex(algebra: FiniteCStarAlgebra, ranks: Sequence[int], seed: int) -> ModuleComplex:
    """Choose a random three-way splitting per index and wire d_i: coexact_i -> exact_{i+1}."""
    rng = np.random.default_rng(seed)
    L = len(ranks)
    projections = [[] for _ in range(L)]
    diffs = [[] for _ in range(L - 1)]
    for nb in algebra.blocks:
        amb = [m * nb for m in ranks]
        r = [int(rng.integers(1, a + 1)) if a else 0 for a in amb]
        b = [0] * L
        c = [0] * L
        for i in range(L):
            if i + 1 < L:
                c[i] = int(rng.integers(0, min(r[i] - b[i], r[i + 1]) + 1))
                b[i + 1] = c[i]
        frames = []
        for i in range(L):
            U = _unitary(rng, amb[i])
            h = r[i] - b[i] - c[i]
            frames.append((U[:, h:h + b[i]], U[:, h + b[i]:r[i]]))
            projections[i].append(U[:, :r[i]] @ U[:, :r[i]].conj().T)
        for i in range(L - 1):
            B_next, C_here = frames[i + 1][0], frames[i][1]
            k = C_here.shape[1]
            M = _gaussian(rng, (k, k)) / np.sqrt(max(k, 1)) + 2 * np.eye(k)
            diffs[i].append(B_next @ M @ C_here.conj().T)
    modules = tuple(
        HilbertModule(algebra, m, AdjointableMap(algebra, m, m, tuple(projections[i]))) for i, m in enumerate(ranks)
    )
    maps = tuple(AdjointableMap(algebra, ranks[i], ranks[i + 1], tuple(diffs[i])) for i in range(L - 1))
    return ModuleComplex(modules, maps, tol=1e-10)


# ---------------------------------------------------------------------------
# JSON interchange


def _encode(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _decode(rows, shape) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return np.zeros(shape, dtype=complex)
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError("matrices must be nested arrays of [re, im] pairs")
    M = arr[..., 0] + 1j * arr[..., 1]
    if M.shape != shape:
        raise ValueError(f"matrix of shape {M.shape}, expected {shape}")
    return M


def complex_to_dict(cx: ModuleComplex) -> dict:
    return {
        "algebra": list(cx.algebra.blocks),
        "modules": [{"rank": U.rank, "projection": [_encode(x) for x in U.projection.blocks]} for U in cx.modules],
        "differentials": [[_encode(x) for x in d.blocks] for d in cx.differentials],
    }


def complex_from_dict(data: dict) -> ModuleComplex:
    try:
        A = FiniteCStarAlgebra(tuple(data["algebra"]))
        modules = []
        for mod in data["modules"]:
            m = int(mod["rank"])
            blocks = tuple(_decode(x, (m * nb, m * nb)) for x, nb in zip(mod["projection"], A.blocks))
            modules.append(HilbertModule(A, m, AdjointableMap(A, m, m, blocks)))
        diffs = []
        for i, d in enumerate(data["differentials"]):
            src, tgt = modules[i].rank, modules[i + 1].rank
            blocks = tuple(_decode(x, (tgt * nb, src * nb)) for x, nb in zip(d, A.blocks))
            diffs.append(AdjointableMap(A, src, tgt, blocks))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValueError(f"malformed complex description: {exc}") from exc
    return ModuleComplex(tuple(modules), tuple(diffs), tol=1e-10)


def import_complex(path) -> ModuleComplex:
    return complex_from_dict(json.loads(Path(path).read_text()))


def result_to_dict(result: HodgeResult) -> dict:
    out = complex_to_dict(result.complex)
    out["cutoff"] = result.cutoff
    out["indices"] = [
        {
            "harmonic_projection": [_encode(x) for x in ix.harmonic.blocks],
            "green": [_encode(x) for x in ix.green.blocks],
            "dims": {k: list(v) for k, v in ix.dims.items()},
        }
        for ix in result.indices
    ]
    out["residuals"] = result.residual_table()
    return out


def export_result(result: HodgeResult, path) -> None:
    Path(path).write_text(json.dumps(result_to_dict(result), indent=1, sort_keys=True) + "\n")


STANDARD_ALGEBRAS = {
    "C": FiniteCStarAlgebra((1,)),
    "M2": FiniteCStarAlgebra((2,)),
    "C+M2": FiniteCStarAlgebra((1, 2)),
    "M2+M3": FiniteCStarAlgebra((2, 3)),
}
