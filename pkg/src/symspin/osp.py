"""Spinor-valued forms, the osp(1|2) operators and the decomposition of E^i.

The space E = Lambda^* V* (x) S_N is ordered Fock-outer, forms-inner, so
truncating the Hermite degree is a prefix of the basis.

The decomposition of E^i into the summands E^{ij} = (F+)^{i-j} Ker F- |_{E^j}
is computed exactly on finite blocks.  The operator
L = sigma^*(J_0) commutes with every osp(1|2) generator; its eigenspaces
E^i_m (eigenvalue -i(m + n/2)) are finite dimensional and contain
V_q (x) S^(m-q), where V_q is the -iq eigenspace of J_0 acting on Lambda^i and
S^(k) is spanned by Hermite functions of degree exactly k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fock import (
    FockTruncation,
    GradeWindowOperator,
    anticommutator,
    clifford_generator,
    commutator,
    compact_generator,
    difference_residual,
    identity,
    parity_operator,
    residual,
    sp_action,
    to_symplectic_basis,
)
from .forms import ExteriorBasis, SymplecticData

RANK_TOL = 1e-9


@dataclass(frozen=True)
class SpinorFormSpace:
    """Lambda^* V* (x) S_N; ``degrees`` are Hermite degrees of basis vectors."""

    n: int
    N: int

    def __post_init__(self):
        if self.n < 1 or self.N < 0:
            raise ValueError(f"invalid spinor-form space n={self.n}, N={self.N}")

    @property
    def fock(self) -> FockTruncation:
        return FockTruncation(self.n, self.N)

    @property
    def ext(self) -> ExteriorBasis:
        return ExteriorBasis(self.n)

    @property
    def dim(self) -> int:
        return self.fock.dim * 4**self.n

    @property
    def degrees(self) -> np.ndarray:
        return _space_degrees(self.n, self.N)

    @property
    def form_degrees(self) -> np.ndarray:
        return _space_form_degrees(self.n, self.N)

    def with_N(self, N: int) -> "SpinorFormSpace":
        return SpinorFormSpace(self.n, N)

    def prefix(self, N: int) -> int:
        return math.comb(N + self.n, self.n) * 4**self.n if N >= 0 else 0

    def compatible(self, other) -> bool:
        return isinstance(other, SpinorFormSpace) and other.n == self.n

    def degree_dim(self, i: int) -> int:
        return math.comb(2 * self.n, i) * self.fock.dim

    def degree_indices(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.form_degrees == i)

    def index_of(self, subset, alpha) -> int:
        return self.fock.index[tuple(alpha)] * 4**self.n + self.ext.index[tuple(subset)]


@lru_cache(maxsize=None)
def _space_degrees(n, N):
    d = np.repeat(FockTruncation(n, N).degrees, 4**n)
    d.setflags(write=False)
    return d


@lru_cache(maxsize=None)
def _space_form_degrees(n, N):
    d = np.tile(ExteriorBasis(n).degrees, FockTruncation(n, N).dim)
    d.setflags(write=False)
    return d


def lift(fock_op: GradeWindowOperator, form_matrix) -> GradeWindowOperator:
    """fock_op (x) form_matrix as an operator on spinor-valued forms."""
    n = fock_op.src.n
    m = sp.kron(fock_op.matrix, sp.csr_matrix(form_matrix), format="csr")
    return GradeWindowOperator(
        m, SpinorFormSpace(n, fock_op.src.N), SpinorFormSpace(n, fock_op.tgt.N), fock_op.lo, fock_op.hi
    )


def form_operator(space: SpinorFormSpace, form_matrix) -> GradeWindowOperator:
    return lift(identity(space.fock), form_matrix)


def degree_projector(space: SpinorFormSpace, i: int) -> GradeWindowOperator:
    diag = (space.ext.degrees == i).astype(complex)
    return form_operator(space, sp.diags(diag))


def spinor_parity(space: SpinorFormSpace) -> GradeWindowOperator:
    """Parity of the spinor factor (id on forms); its eigenspaces are Lambda (x) S_+-."""
    return lift(parity_operator(space.fock), sp.identity(4**space.n))


def sp_action_on_E(X_symplectic, space: SpinorFormSpace) -> GradeWindowOperator:
    """sigma^*(X) = lambda_*(X) (x) 1 + 1 (x) sigma_*(X)."""
    return lift(sp_action(X_symplectic, space.fock), sp.identity(4**space.n)) + form_operator(
        space, space.ext.action_matrix(X_symplectic)
    )


@dataclass(frozen=True, eq=False)
class OspGenerators:
    space: SpinorFormSpace
    Fp: GradeWindowOperator
    Fm: GradeWindowOperator
    Ep: GradeWindowOperator
    Em: GradeWindowOperator
    H: GradeWindowOperator

    def as_dict(self) -> dict[str, GradeWindowOperator]:
        return {"F+": self.Fp, "F-": self.Fm, "E+": self.Ep, "E-": self.Em, "H": self.H}


def f_plus(space: SpinorFormSpace) -> GradeWindowOperator:
    n = space.n
    out = None
    for a in range(2 * n):
        term = lift(clifford_generator(a, space.fock), space.ext.wedge_matrix(a))
        out = term if out is None else out + term
    return 0.5j * out


def f_minus(space: SpinorFormSpace) -> GradeWindowOperator:
    n = space.n
    om_up = SymplecticData(n).omega_up
    out = None
    for i in range(2 * n):
        for j in range(2 * n):
            if om_up[i, j]:
                term = om_up[i, j] * lift(clifford_generator(j, space.fock), space.ext.contract_matrix(i))
                out = term if out is None else out + term
    return 0.5 * out


def build_osp(n: int, N: int) -> OspGenerators:
    """The osp(1|2) generators on Lambda^* V* (x) S_N, built from F+ and F-."""
    space = SpinorFormSpace(n, N)
    Fp, Fm = f_plus(space), f_minus(space)
    Ep = 2 * anticommutator(Fp, Fp)
    Em = -2 * anticommutator(Fm, Fm)
    H = 0.5 * commutator(Ep, Em)
    return OspGenerators(space, Fp, Fm, Ep, Em, H)


def osp_relation_residuals(g: OspGenerators) -> dict[str, float]:
    """Residuals of the six defining relations (each +- case separately)."""
    Fp, Fm, Ep, Em, H = g.Fp, g.Fm, g.Ep, g.Em, g.H
    return {
        "[h,e+]=e+": residual(commutator(H, Ep) - Ep),
        "[h,e-]=-e-": residual(commutator(H, Em) + Em),
        "[h,f+]=f+/2": residual(commutator(H, Fp) - 0.5 * Fp),
        "[h,f-]=-f-/2": residual(commutator(H, Fm) + 0.5 * Fm),
        "[e+,f-]=-f+": residual(commutator(Ep, Fm) + Fp),
        "[e-,f+]=-f-": residual(commutator(Em, Fp) + Fm),
        "[e+,e-]=2h": residual(commutator(Ep, Em) - 2 * H),
        "{f+,f-}=h/2": residual(anticommutator(Fp, Fm) - 0.5 * H),
        "{f+,f+}=e+/2": residual(anticommutator(Fp, Fp) - 0.5 * Ep),
        "{f-,f-}=-e-/2": residual(anticommutator(Fm, Fm) + 0.5 * Em),
    }


def random_sp_element(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random real element of sp(V, omega) in the symplectic basis."""
    A = rng.normal(size=(n, n))
    B = rng.normal(size=(n, n))
    C = rng.normal(size=(n, n))
    X = np.block([[A, B + B.T], [C + C.T, -A.T]])
    return to_symplectic_basis(X)


def commutant_check(g: OspGenerators, samples: int = 50, seed: int = 0) -> float:
    """max over seeded X and generators of |[sigma^*(X), rho(gen)]| on the safe core."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    gens = g.as_dict().values()
    for _ in range(samples):
        X = random_sp_element(g.space.n, rng)
        S = sp_action_on_E(X, g.space)
        for op in gens:
            worst = max(worst, residual(commutator(S, op)))
    return worst


def commutant_residual(g: OspGenerators, X) -> float:
    S = sp_action_on_E(X, g.space)
    return max(residual(commutator(S, op)) for op in g.as_dict().values())


# ---------------------------------------------------------------------------
# index set Xi and highest weight labels


def in_xi(n: int, i: int, j: int) -> bool:
    if 0 <= i <= n:
        return 0 <= j <= i
    if n < i <= 2 * n:
        return 0 <= j <= 2 * n - i
    return False


def xi(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(2 * n + 1) for j in range(2 * n + 1) if in_xi(n, i, j)]


@dataclass(frozen=True)
class IrrepLabel:
    n: int
    i: int
    j: int
    parity: str

    def __post_init__(self):
        if self.parity not in "+-" or len(self.parity) != 1:
            raise ValueError("parity must be '+' or '-'")
        if not in_xi(self.n, self.i, self.j):
            raise ValueError(f"({self.i}, {self.j}) is not in Xi for n={self.n}")

    @property
    def highest_weight(self) -> tuple[Fraction, ...]:
        """Nominal label tuple; its coordinate system is ambiguous, so both readings are exposed."""
        n, i, j = self.n, self.i, self.j
        if i > n:
            i = 2 * n - i
        sgn = 0 if self.parity == "+" else 1
        half = Fraction(1, 2)
        if i == j == n:
            if self.parity == "+":
                return tuple([half] * n)
            return tuple([half] * (n - 1) + [Fraction(-5, 2)])
        last = -1 + half * (-1) ** (i + j + sgn)
        return tuple([half] * j + [-half] * (n - j - 1) + [last])

    @property
    def highest_weight_from_fundamental(self) -> tuple[Fraction, ...]:
        """The tuple read as fundamental-weight coefficients, converted to eps-coordinates."""
        lam = self.highest_weight
        return tuple(sum(lam[k:], Fraction(0)) for k in range(self.n))


# ---------------------------------------------------------------------------
# exact block decomposition


def _null_space(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    if M.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if M.shape[0] == 0:
        return np.eye(M.shape[1], dtype=complex)
    u, s, vh = np.linalg.svd(M)
    scale = max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


def _rank(M: np.ndarray, tol: float = RANK_TOL) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


@dataclass(frozen=True)
class ChargeSpaces:
    """Eigenspaces V_q (eigenvalue -iq) of the compact generator on Lambda^i V*."""

    n: int
    i: int
    charges: tuple[int, ...]
    bases: tuple[np.ndarray, ...]  # orthonormal columns in the degree-i subset basis
    functionals: tuple[np.ndarray, ...]  # C_q with P_q = Q_q C_q

    @property
    def width(self) -> int:
        return min(self.i, 2 * self.n - self.i)

    def basis(self, q: int) -> np.ndarray:
        return self.bases[self.charges.index(q)]

    def functional(self, q: int) -> np.ndarray:
        return self.functionals[self.charges.index(q)]


@lru_cache(maxsize=None)
def charge_spaces(n: int, i: int) -> ChargeSpaces:
    ext = ExteriorBasis(n)
    J0 = to_symplectic_basis(compact_generator(n))
    sl = ext.degree_slice(i)
    L = ext.action_matrix(J0).toarray()[sl, sl]
    if L.shape[0] == 0:
        return ChargeSpaces(n, i, (), (), ())
    # L is diagonalizable with spectrum in {-iq : |q| <= i}; use Lagrange projectors
    cand = range(-i, i + 1)
    d = L.shape[0]
    I = np.eye(d)
    charges, bases, funcs = [], [], []
    total = np.zeros_like(L)
    for c in cand:
        P = I.astype(complex)
        for c2 in cand:
            if c2 != c:
                P = P @ (L + 1j * c2 * I) / (1j * (c2 - c))
        if np.abs(P).max() < 1e-10:
            continue
        u, sv, _ = np.linalg.svd(P)
        r = int(np.sum(sv > 1e-9 * sv[0]))
        Q = u[:, :r]
        charges.append(c)
        bases.append(Q)
        funcs.append(Q.conj().T @ P)
        total = total + P
        if np.abs(L @ P + 1j * c * P).max() > 1e-9:
            raise ArithmeticError("charge projector is not an eigenprojector")
    if np.abs(total - I).max() > 1e-9:
        raise ArithmeticError("charge projectors do not resolve the identity")
    return ChargeSpaces(n, i, tuple(charges), tuple(bases), tuple(funcs))


def _hermite_level(n: int, k: int) -> list[tuple[int, ...]]:
    return [a for a in FockTruncation(n, k).basis if sum(a) == k] if k >= 0 else []


@dataclass(frozen=True, eq=False)
class Block:
    """Coordinates for E^i_m: columns of ``embed`` are orthonormal in the full space."""

    n: int
    i: int
    m: int
    embed: sp.csr_matrix  # full-space(N) x d
    coords: sp.csr_matrix  # d x full-space(N); embed @ coords = oblique projector onto the block
    parity: np.ndarray  # +-1 per block coordinate (spinor parity)

    @property
    def dim(self) -> int:
        return self.embed.shape[1]


def build_block(n: int, i: int, m: int, N: int) -> Block:
    """E^i_m inside SpinorFormSpace(n, N); requires N >= m + width."""
    cs = charge_spaces(n, i)
    space = SpinorFormSpace(n, N)
    ext = space.ext
    nf = 4**n
    sl = ext.degree_slice(i)
    fock = space.fock
    rows_e, cols_e, vals_e = [], [], []
    rows_c, cols_c, vals_c = [], [], []
    parity = []
    col = 0
    for q, Q, C in zip(cs.charges, cs.bases, cs.functionals):
        k = m - q
        if k < 0:
            continue
        if k > N:
            raise ValueError(f"block m={m} needs Hermite degree {k} > N={N}")
        for alpha in _hermite_level(n, k):
            base = fock.index[alpha] * nf + sl.start
            for r in range(Q.shape[1]):
                for s in range(Q.shape[0]):
                    if Q[s, r] != 0:
                        rows_e.append(base + s)
                        cols_e.append(col + r)
                        vals_e.append(Q[s, r])
                    if C[r, s] != 0:
                        rows_c.append(col + r)
                        cols_c.append(base + s)
                        vals_c.append(C[r, s])
            parity.extend([(-1) ** k] * Q.shape[1])
            col += Q.shape[1]
    embed = sp.csr_matrix((vals_e, (rows_e, cols_e)), shape=(space.dim, col), dtype=complex)
    coords = sp.csr_matrix((vals_c, (rows_c, cols_c)), shape=(col, space.dim), dtype=complex)
    return Block(n, i, m, embed, coords, np.array(parity, dtype=int))


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    """All summands of the U(1)-block m, for every form degree."""

    n: int
    m: int
    blocks: tuple[Block, ...]  # indexed by form degree
    fp: tuple[np.ndarray, ...]  # F+ : block i -> block i+1, i = 0..2n-1
    fm: tuple[np.ndarray, ...]  # F- : block i -> block i-1, i = 1..2n (index i-1)
    primitives: dict  # (j, sign) -> orthonormal basis of Ker F- in block j
    chains: dict  # (i, j, sign) -> (F+)^{i-j} primitives(j, sign)
    projections: dict  # (i, j, sign) -> block projector (d_i x d_i)
    completeness_defect: tuple[int, ...]  # dim block - sum of chain ranks, per degree

    def summands(self, i: int) -> list[tuple[int, str]]:
        return [(j, s) for (ii, j, s), ch in self.chains.items() if ii == i and ch.shape[1] > 0]


def block_decomposition(n: int, m: int, F: OspGenerators | None = None) -> BlockDecomposition:
    """Exact decomposition of the osp-invariant block E_m = sum_i E^i_m."""
    N = max(m + n, 0) + 1
    if F is None or F.space.N < N + 1:
        Fp, Fm = f_plus(SpinorFormSpace(n, N + 1)), f_minus(SpinorFormSpace(n, N + 1))
    else:
        Fp, Fm = F.Fp, F.Fm
    Ntgt = Fp.tgt.N
    blocks = tuple(build_block(n, i, m, N) for i in range(2 * n + 1))
    big = tuple(build_block(n, i, m, Ntgt) for i in range(2 * n + 1))
    src_dim = SpinorFormSpace(n, N).dim

    def restrict(op, a, b):
        mat = op.matrix[:, :src_dim] @ blocks[a].embed
        return np.asarray((big[b].coords @ mat).todense())

    fp = tuple(restrict(Fp, i, i + 1) for i in range(2 * n))
    fm = tuple(restrict(Fm, i, i - 1) for i in range(1, 2 * n + 1))
    primitives = {}
    for j in range(2 * n + 1):
        d = blocks[j].dim
        for sign, s in (("+", 1), ("-", -1)):
            sel = np.flatnonzero(blocks[j].parity == s)
            if j == 0:
                ker = np.eye(len(sel), dtype=complex)
            else:
                ker = _null_space(fm[j - 1][:, sel])
            basis = np.zeros((d, ker.shape[1]), dtype=complex)
            basis[sel] = ker
            primitives[(j, sign)] = basis
    chains, projections, defect = {}, {}, []
    for i in range(2 * n + 1):
        cols, labels = [], []
        for j in range(i + 1):
            for sign in "+-":
                v = primitives[(j, sign)]
                for k in range(j, i):
                    v = fp[k] @ v
                if v.shape[1] and _rank(v) < v.shape[1]:
                    v = v[:, :0]  # (F+)^{i-j} not injective: summand absent in degree i
                chains[(i, j, sign)] = v
                if v.shape[1]:
                    cols.append(v)
                    labels.append((j, sign, v.shape[1]))
        d = blocks[i].dim
        B = np.hstack(cols) if cols else np.zeros((d, 0), dtype=complex)
        defect.append(d - _rank(B) if d else 0)
        if B.shape[1] == d and d and defect[-1] == 0:
            Binv = np.linalg.inv(B)
            start = 0
            for j, sign, w in labels:
                projections[(i, j, sign)] = B[:, start:start + w] @ Binv[start:start + w]
                start += w
    return BlockDecomposition(n, m, blocks, fp, fm, primitives, chains, projections, tuple(defect))


class Decomposition:
    """Projections p^{ij}_+- assembled from the exact blocks, with caching."""

    def __init__(self, n: int):
        self.n = n
        self._cache: dict[int, BlockDecomposition] = {}

    def block(self, m: int) -> BlockDecomposition:
        if m not in self._cache:
            self._cache[m] = block_decomposition(self.n, m)
        return self._cache[m]

    def width(self, i: int) -> int:
        return min(i, 2 * self.n - i)

    def block_range(self, i: int, N: int) -> range:
        w = self.width(i)
        return range(-w, N + w + 1)

    def summand_count(self, i: int, m_max: int | None = None) -> int:
        """Number of (j, +-) with a nonzero summand in degree i, over blocks m <= m_max."""
        m_max = self.default_m_max() if m_max is None else m_max
        found = set()
        for m in range(-self.n, m_max + 1):
            found.update(self.block(m).summands(i))
        return len(found)

    def default_m_max(self) -> int:
        return self.n + 2

    def multiplicity(self, i: int, m_max: int | None = None) -> int:
        """Number of form degrees k in which primitives of degree i survive (F+)^{k-i}."""
        if not 0 <= i <= self.n:
            raise ValueError("primitive degree must lie in 0..n")
        m_max = self.default_m_max() if m_max is None else m_max
        degrees = set()
        for m in range(-self.n, m_max + 1):
            b = self.block(m)
            for k in range(i, 2 * self.n + 1):
                for sign in "+-":
                    if b.chains.get((k, i, sign), np.zeros((0, 0))).shape[1]:
                        degrees.add(k)
        return len(degrees)

    def completeness_defect(self, m_max: int | None = None) -> int:
        m_max = self.default_m_max() if m_max is None else m_max
        return max(max(self.block(m).completeness_defect) for m in range(-self.n, m_max + 1))

    def apply(self, i: int, j: int, parity: str | None, v: np.ndarray, N: int) -> np.ndarray:
        """p^{ij} (or p^{ij}_+-) applied to a vector of SpinorFormSpace(n, N).

        Components outside form degree i are discarded.  The result lives in
        SpinorFormSpace(n, N + 2w).
        """
        w = self.width(i)
        out_space = SpinorFormSpace(self.n, N + 2 * w)
        out = np.zeros(out_space.dim, dtype=complex)
        if not in_xi(self.n, i, j):
            return out
        src = SpinorFormSpace(self.n, N)
        v = np.asarray(v, dtype=complex)
        if v.shape[0] != src.dim:
            raise ValueError("vector does not match the source truncation")
        signs = "+-" if parity is None else parity
        for m in self.block_range(i, N):
            bd = self.block(m)
            blk = build_block(self.n, i, m, N + 2 * w)
            c = blk.coords[:, : src.dim] @ v
            if not np.any(c):
                continue
            for s in signs:
                P = bd.projections.get((i, j, s))
                if P is not None:
                    out += blk.embed @ (P @ c)
        return out

    def operator(self, i: int, j: int, parity: str | None, N: int) -> GradeWindowOperator:
        """p^{ij}_(+-) as a GradeWindowOperator with source S_N and window [-2w, 2w]."""
        w = self.width(i)
        src, tgt = SpinorFormSpace(self.n, N), SpinorFormSpace(self.n, N + 2 * w)
        total = sp.csr_matrix((tgt.dim, src.dim), dtype=complex)
        if in_xi(self.n, i, j):
            signs = "+-" if parity is None else parity
            for m in self.block_range(i, N):
                bd = self.block(m)
                blk = build_block(self.n, i, m, N + 2 * w)
                P = None
                for s in signs:
                    Ps = bd.projections.get((i, j, s))
                    if Ps is not None:
                        P = Ps if P is None else P + Ps
                if P is None:
                    continue
                P = sp.csr_matrix(np.where(np.abs(P) > 1e-14, P, 0))
                total = total + blk.embed @ P @ blk.coords[:, : src.dim]
        total.data[np.abs(total.data) < 1e-14] = 0
        return GradeWindowOperator(total, src, tgt, -2 * w, 2 * w)


def projection_residuals(n: int, N: int, samples: int = 3, seed: int = 0, dec: Decomposition | None = None) -> dict[str, float]:
    """Completeness, orthogonality, parity and equivariance of the p^{ij}_+- on the safe core."""
    dec = dec or Decomposition(n)
    space = SpinorFormSpace(n, N)
    rng = np.random.default_rng(seed)
    elements = [random_sp_element(n, rng) for _ in range(samples)]
    out = {"completeness": 0.0, "orthogonality": 0.0, "idempotence": 0.0, "parity": 0.0, "equivariance": 0.0}
    for i in range(2 * n + 1):
        w = dec.width(i)
        P = {(j, s): dec.operator(i, j, s, N) for j in range(i + 1) if in_xi(n, i, j) for s in "+-"}
        total = None
        for op in P.values():
            total = op if total is None else total + op
        out["completeness"] = max(out["completeness"], difference_residual(total, degree_projector(space, i)))
        big = {k: dec.operator(i, k[0], k[1], N + 2 * w) for k in P}
        for a, pa in P.items():
            for b, pb in big.items():
                prod = pb @ pa
                if a == b:
                    out["idempotence"] = max(out["idempotence"], difference_residual(prod, pa))
                else:
                    out["orthogonality"] = max(out["orthogonality"], residual(prod))
            par = spinor_parity(space.with_N(N + 2 * w))
            out["parity"] = max(out["parity"], difference_residual(par @ pa, pa @ spinor_parity(space)))
            for X in elements:
                S, Sb = sp_action_on_E(X, space), sp_action_on_E(X, space.with_N(N + 2 * w))
                out["equivariance"] = max(out["equivariance"], difference_residual(big[a] @ S, Sb @ pa))
    return out


def expected_summand_count(n: int, i: int) -> int:
    return 2 * (i + 1) if i <= n else 2 * (2 * n - i + 1)


# ---------------------------------------------------------------------------
# dual partner data


def nominal_A(n: int, i: int, j: int) -> Fraction:
    """The nominal closed-form coefficient A(n, i, j), evaluated exactly."""
    even = (i - j) % 2 == 0
    a = Fraction(2 if even else 0, 16) * (j - i)
    b = Fraction(0 if even else 2, 16) * (i + j - 2 * n - 1)
    return a + b


@dataclass(frozen=True)
class DualPartnerData:
    n: int
    i: int
    dimension: int
    measured: tuple[complex, ...]  # F+ b_j = r_j b_{j+1}, j = i..2n-i-1
    nominal: tuple[Fraction, ...]  # A(n, i+1, j)
    residual: float  # max deviation of F- b_j = b_{j-1} and F+ b_j = r_j b_{j+1}

    @property
    def discrepancies(self) -> tuple[float, ...]:
        return tuple(abs(complex(r) - float(a)) for r, a in zip(self.measured, self.nominal))


def dual_coefficients(n: int, i: int, m: int | None = None, sign: str = "+") -> DualPartnerData:
    """Measure the osp(1|2) action on the chain through one primitive vector."""
    if not 0 <= i <= n:
        raise ValueError("i must lie in 0..n")
    dec = Decomposition(n)
    ms = [m] if m is not None else range(-n, n + 4)
    for mm in ms:
        bd = dec.block(mm)
        prim = bd.primitives[(i, sign)]
        if prim.shape[1] and all(bd.chains[(k, i, sign)].shape[1] for k in range(i, 2 * n - i + 1)):
            break
    else:
        raise ValueError("no block contains a full chain")
    chain = [prim[:, :1]]
    for k in range(i, 2 * n - i):
        chain.append(bd.fp[k] @ chain[-1])
    # rescale so that F- b_j = b_{j-1}
    b = [chain[0]]
    for k in range(1, len(chain)):
        v = chain[k]
        w = bd.fm[i + k - 1] @ v
        c = (np.vdot(b[-1], w) / np.vdot(b[-1], b[-1])).item()
        b.append(v / c)
    res = 0.0
    for k in range(1, len(b)):
        res = max(res, float(np.abs(bd.fm[i + k - 1] @ b[k] - b[k - 1]).max()))
    ratios = []
    for k in range(len(b) - 1):
        img = bd.fp[i + k] @ b[k]
        r = (np.vdot(b[k + 1], img) / np.vdot(b[k + 1], b[k + 1])).item()
        res = max(res, float(np.abs(img - r * b[k + 1]).max()))
        ratios.append(complex(r))
    last = bd.fp[2 * n - i] @ b[-1] if i > 0 else np.zeros(1)
    res = max(res, float(np.abs(last).max()) if last.size else 0.0)
    nominal = tuple(nominal_A(n, i + 1, j) for j in range(i, 2 * n - i))
    return DualPartnerData(n, i, 2 * n - 2 * i + 1, tuple(ratios), nominal, res)


def recursion_coefficients(n: int, i: int) -> tuple[Fraction, ...]:
    """Coefficients r_j forced by {f+, f-} = h/2 on the chain (h = (deg - n)/2)."""
    out = []
    prev = Fraction(0)
    for k in range(2 * n - 2 * i):
        h = Fraction(i + k - n, 2)
        r = h / 2 - prev
        out.append(r)
        prev = r
    return tuple(out)
