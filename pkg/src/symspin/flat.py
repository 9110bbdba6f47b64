"""The flat model: spinor-valued forms over R^{2n} (polynomial fields) and T^{2n} (Fourier modes).

On the flat model the symplectic spinor connection is the trivial one, so
every operator considered here has constant coefficients:
``FieldOperator`` stores it as a map from derivative multi-indices alpha
(over the 2n coordinates) to fiber operators F_alpha.  The same operator
acts on

* polynomial fields of degree <= d, as sum_alpha d^alpha (x) F_alpha;
* a Fourier mode exp(2 pi i <k, x>), as sum_alpha (2 pi i k)^alpha F_alpha.

Fiber operators are ``GradeWindowOperator``s on Lambda^* (x) S_N (or on S_N
for the purely spinorial operators), so every identity is checked on the
safe core of the Hermite truncation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .fock import (
    FockTruncation,
    GradeWindowOperator,
    clifford_mult,
    difference_residual,
    identity,
    residual,
)
from .forms import SymplecticData
from .osp import (
    Decomposition,
    SpinorFormSpace,
    degree_projector,
    f_minus,
    f_plus,
    form_operator,
    in_xi,
    lift,
)

Multi = tuple[int, ...]
NULL_TOL = 1e-9


def _unit(m: int, a: int, times: int = 1) -> Multi:
    return tuple(times if b == a else 0 for b in range(m))


def _add(a: Multi, b: Multi) -> Multi:
    return tuple(x + y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# constant-coefficient operators


@dataclass(frozen=True, eq=False)
class FieldOperator:
    """sum_alpha d^alpha (x) F_alpha with fiber operators F_alpha."""

    n: int
    terms: dict = field(default_factory=dict)

    @classmethod
    def constant(cls, n: int, op: GradeWindowOperator) -> "FieldOperator":
        return cls(n, {(0,) * (2 * n): op})

    @property
    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    @property
    def src_N(self) -> int:
        return min(op.src.N for op in self.terms.values())

    @property
    def tgt_N(self) -> int:
        return max(op.tgt.N for op in self.terms.values())

    def __matmul__(self, other: "FieldOperator") -> "FieldOperator":
        out: dict = {}
        for a, F in self.terms.items():
            for b, G in other.terms.items():
                key = _add(a, b)
                prod = F @ G
                out[key] = prod if key not in out else out[key] + prod
        return FieldOperator(self.n, out)

    def __add__(self, other: "FieldOperator") -> "FieldOperator":
        out = dict(self.terms)
        for b, G in other.terms.items():
            out[b] = G if b not in out else out[b] + G
        return FieldOperator(self.n, out)

    def __mul__(self, c) -> "FieldOperator":
        return FieldOperator(self.n, {a: c * F for a, F in self.terms.items()})

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1) * other

    def aligned(self, src_N: int | None = None, tgt_N: int | None = None) -> dict:
        """Terms restricted to a common source and padded to a common target."""
        src_N = self.src_N if src_N is None else src_N
        ops = {a: F.restrict_source(src_N) for a, F in self.terms.items()}
        tgt_N = max(F.tgt.N for F in ops.values()) if tgt_N is None else tgt_N
        return {a: F.pad_target(tgt_N) for a, F in ops.items()}

    def symbol(self, xi, principal: bool = False) -> GradeWindowOperator:
        """sum_alpha xi^alpha F_alpha (only |alpha| = order if ``principal``)."""
        xi = np.asarray(xi, dtype=complex)
        ops = self.aligned()
        out = None
        top = self.order
        for a, F in ops.items():
            if principal and sum(a) != top:
                continue
            c = complex(np.prod([xi[b] ** e for b, e in enumerate(a)]))
            term = c * F
            out = term if out is None else out + term
        if out is None:
            out = 0 * next(iter(ops.values()))
        return out

    def mode(self, k) -> GradeWindowOperator:
        """Action on the Fourier mode exp(2 pi i <k, x>)."""
        return self.symbol(2j * math.pi * np.asarray(k, dtype=float))

    def polynomial_matrix(
        self, model: "PolynomialModel", src_N: int | None = None, tgt_N: int | None = None, src_forms=None
    ) -> sp.csr_matrix:
        """Assembled matrix on polynomial fields (monomial-outer, fiber-inner ordering).

        ``src_forms`` optionally restricts source columns to the given form degree.
        """
        ops = self.aligned(src_N, tgt_N)
        F0 = next(iter(ops.values()))
        mat = sp.csr_matrix((model.dim * F0.tgt.dim, model.dim * F0.src.dim), dtype=complex)
        for a, F in ops.items():
            P = model.derivative(a)
            if P.nnz:
                mat = mat + sp.kron(P, F.matrix, format="csr")
        if src_forms is not None:
            cols = model.fiber_columns(F0.src, src_forms)
            mat = mat[:, cols]
        return mat.tocsr()

    def polynomial_residual(self, model: "PolynomialModel") -> float:
        m = self.polynomial_matrix(model)
        return float(abs(m).max()) if m.nnz else 0.0


# ---------------------------------------------------------------------------
# field models


@lru_cache(maxsize=None)
def _monomials(m: int, d: int) -> tuple[Multi, ...]:
    out = []
    for deg in range(d + 1):
        for c in itertools.combinations_with_replacement(range(m), deg):
            out.append(tuple(c.count(a) for a in range(m)))
    return tuple(out)


@dataclass(frozen=True)
class PolynomialModel:
    """Polynomials of degree <= d in the 2n coordinates x^a."""

    n: int
    d: int

    @property
    def monomials(self) -> tuple[Multi, ...]:
        return _monomials(2 * self.n, self.d)

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def index(self, beta: Multi) -> int:
        return _monomial_index(2 * self.n, self.d)[tuple(beta)]

    def derivative(self, alpha: Multi) -> sp.csr_matrix:
        return _derivative_matrix(2 * self.n, self.d, tuple(alpha))

    def fiber_columns(self, fiber, form_degree: int) -> np.ndarray:
        keep = np.flatnonzero(_fiber_form_degrees(fiber) == form_degree)
        return (np.arange(self.dim)[:, None] * fiber.dim + keep[None, :]).ravel()


@lru_cache(maxsize=None)
def _monomial_index(m: int, d: int) -> dict:
    return {b: k for k, b in enumerate(_monomials(m, d))}


@lru_cache(maxsize=None)
def _derivative_matrix(m: int, d: int, alpha: Multi) -> sp.csr_matrix:
    mons = _monomials(m, d)
    idx = _monomial_index(m, d)
    rows, cols, vals = [], [], []
    for col, beta in enumerate(mons):
        if all(b >= a for a, b in zip(alpha, beta)):
            coef = 1
            for a, b in zip(alpha, beta):
                coef *= math.perm(b, a)
            rows.append(idx[tuple(b - a for a, b in zip(alpha, beta))])
            cols.append(col)
            vals.append(coef)
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(mons), len(mons)), dtype=complex)


def _fiber_form_degrees(fiber) -> np.ndarray:
    if isinstance(fiber, SpinorFormSpace):
        return fiber.form_degrees
    return np.zeros(fiber.dim, dtype=int)


@dataclass(frozen=True)
class PolySpinorForm:
    """A polynomial spinor-valued form: coefficients[monomial, fiber basis]."""

    model: PolynomialModel
    fiber: object
    coefficients: np.ndarray

    def __post_init__(self):
        if self.coefficients.shape != (self.model.dim, self.fiber.dim):
            raise ValueError("coefficient array does not match the model and fiber")

    def apply(self, op: FieldOperator) -> "PolySpinorForm":
        ops = op.aligned(self.fiber.N)
        F0 = next(iter(ops.values()))
        out = np.zeros((self.model.dim, F0.tgt.dim), dtype=complex)
        for a, F in ops.items():
            out += self.model.derivative(a) @ (self.coefficients @ F.matrix.T)
        return PolySpinorForm(self.model, F0.tgt, out)


@dataclass(frozen=True)
class FourierModeField:
    """A finite sum of Fourier modes, one fiber vector per mode."""

    modes: tuple[tuple[int, ...], ...]
    fiber: object
    coefficients: np.ndarray

    def __post_init__(self):
        if self.coefficients.shape != (len(self.modes), self.fiber.dim):
            raise ValueError("coefficient array does not match the modes and fiber")

    def apply(self, op: FieldOperator) -> "FourierModeField":
        rows = []
        tgt = None
        for k, v in zip(self.modes, self.coefficients):
            M = op.mode(k).restrict_source(self.fiber.N)
            rows.append(M.matrix @ v)
            tgt = M.tgt
        return FourierModeField(self.modes, tgt, np.array(rows))


def mode_set(n: int, radius: int = 1, count: int | None = None, seed: int = 0) -> list[tuple[int, ...]]:
    """Integer modes in the box [-radius, radius]^{2n}; a seeded subset if ``count`` is given."""
    box = list(itertools.product(range(-radius, radius + 1), repeat=2 * n))
    if count is None or count >= len(box):
        return box
    rng = np.random.default_rng(seed)
    pick = sorted(rng.choice(len(box), size=count, replace=False))
    return [box[i] for i in pick]


# ---------------------------------------------------------------------------
# the operators


class FlatModel:
    """Operator builders on the flat model of dimension 2n; ``N`` is always a source truncation."""

    def __init__(self, n: int, decomposition: Decomposition | None = None):
        self.n = n
        self.dec = decomposition or Decomposition(n)
        self._proj: dict = {}

    # fiber pieces
    def space(self, N: int) -> SpinorFormSpace:
        return SpinorFormSpace(self.n, N)

    def projection(self, i: int, j: int, N: int) -> GradeWindowOperator:
        key = (i, j, N)
        if key not in self._proj:
            self._proj[key] = self.dec.operator(i, j, None, N)
        return self._proj[key]

    def width(self, i: int) -> int:
        return self.dec.width(i)

    def d(self, N: int) -> FieldOperator:
        """Exterior spinor derivative sum_a eps^a ^ d_a."""
        sp_ = self.space(N)
        m = 2 * self.n
        return FieldOperator(self.n, {_unit(m, a): form_operator(sp_, sp_.ext.wedge_matrix(a)) for a in range(m)})

    def block_operator(self, i: int, j: int, k: int, N: int) -> FieldOperator:
        """D^{ij}_{i+1,k} = p^{i+1,k} d p^{ij} on fields with fiber truncation N."""
        n = self.n
        if not (in_xi(n, i, j) and in_xi(n, i + 1, k)):
            src = self.space(N)
            return FieldOperator.constant(n, 0 * identity(src))
        Nm = N + 2 * self.width(i)
        P = FieldOperator.constant(n, self.projection(i, j, N))
        Q = FieldOperator.constant(n, self.projection(i + 1, k, Nm))
        return Q @ self.d(Nm) @ P

    def twistor(self, i: int, N: int) -> FieldOperator:
        n = self.n
        if not 0 <= i < 2 * n:
            raise ValueError("twistor index must lie in 0..2n-1")
        if i < n:
            return self.block_operator(i, i, i + 1, N)
        return self.block_operator(i, 2 * n - i, 2 * n - i - 1, N)

    def dirac(self, N: int) -> FieldOperator:
        """F- o D^{00}_{10}."""
        D = self.block_operator(0, 0, 0, N)
        return FieldOperator.constant(self.n, f_minus(self.space(D.tgt_N))) @ D

    def rarita_schwinger(self, N: int) -> FieldOperator:
        """F- o D^{11}_{21}."""
        D = self.block_operator(1, 1, 1, N)
        return FieldOperator.constant(self.n, f_minus(self.space(D.tgt_N))) @ D

    def f_plus(self, N: int) -> FieldOperator:
        return FieldOperator.constant(self.n, f_plus(self.space(N)))

    def form_degree_projector(self, i: int, N: int) -> FieldOperator:
        return FieldOperator.constant(self.n, degree_projector(self.space(N), i))


# purely spinorial operators (fiber S_N)


def symplectic_dirac(n: int, N: int) -> FieldOperator:
    """D = sum_{ij} omega^{ij} e_i . nabla_{e_j} on spinor fields."""
    up = SymplecticData(n).omega_up
    trunc = FockTruncation(n, N)
    m = 2 * n
    return FieldOperator(n, {_unit(m, j): clifford_mult(up[:, j], trunc) for j in range(m)})


def second_dirac(n: int, N: int, convention: str = "metric") -> FieldOperator:
    """The second symplectic Dirac operator.

    ``literal``: sum_i (J e_i) . nabla_{e_i}; ``metric``: sum_i (J e_i) . nabla_{J e_i},
    the metric contraction sum_{ab} g^{ab} e_a . nabla_{e_b}.
    """
    J = SymplecticData(n).J
    trunc = FockTruncation(n, N)
    m = 2 * n
    terms: dict = {}
    for i in range(m):
        mult = clifford_mult(J[:, i], trunc)
        dirs = {i: 1} if convention == "literal" else {c: J[c, i] for c in range(m) if J[c, i]}
        if convention not in ("literal", "metric"):
            raise ValueError("convention must be 'literal' or 'metric'")
        for c, w in dirs.items():
            key = _unit(m, c)
            terms[key] = w * mult if key not in terms else terms[key] + w * mult
    return FieldOperator(n, terms)


def p_operator(n: int, N: int, convention: str = "metric") -> FieldOperator:
    """P = i [D~, D] on spinor fields with fiber S_N."""
    D_in = symplectic_dirac(n, N)
    Dt_in = second_dirac(n, N, convention)
    return 1j * (second_dirac(n, N + 1, convention) @ D_in - symplectic_dirac(n, N + 1) @ Dt_in)


def spinor_laplacian(n: int, N: int) -> FieldOperator:
    """(nabla^S)^* nabla^S = -sum_a d_a^2 in the unitary frame (g = identity)."""
    g = SymplecticData(n).g
    if not np.array_equal(g, np.eye(2 * n, dtype=int)):
        raise ArithmeticError("the symplectic frame is not unitary")
    I = identity(FockTruncation(n, N))
    m = 2 * n
    return FieldOperator(n, {_unit(m, a, 2): -1 * I for a in range(m)})


# ---------------------------------------------------------------------------
# checks


def d_squared_residual(n: int, N: int, d: int) -> float:
    fm = FlatModel(n)
    D = fm.d(N)
    return (D @ D).polynomial_residual(PolynomialModel(n, d))


def forbidden_target_residuals(flat: FlatModel, N: int, d: int) -> dict[tuple[int, int, int], float]:
    """|p^{i+1,k} d p^{ij}| on polynomial fields for every forbidden target |k - j| >= 2."""
    n = flat.n
    model = PolynomialModel(n, d)
    out = {}
    for i in range(2 * n):
        for j in range(2 * n + 1):
            if not in_xi(n, i, j):
                continue
            for k in range(2 * n + 1):
                if in_xi(n, i + 1, k) and abs(k - j) >= 2:
                    out[(i, j, k)] = flat.block_operator(i, j, k, N).polynomial_residual(model)
    return out


def twistor_complex_residuals(flat: FlatModel, N: int, d: int) -> dict[str, float]:
    """Compositions of consecutive twistor operators on polynomial fields, plus the gap splice."""
    n = flat.n
    if n < 2:
        raise ValueError("the twistor complexes require n > 1")
    model = PolynomialModel(n, d)

    def chain(indices):
        op = None
        for i in indices:
            t = flat.twistor(i, N if op is None else op.tgt_N)
            op = t if op is None else t @ op
        return op

    out = {}
    for i in list(range(0, n - 1)) + list(range(n, 2 * n - 1)):
        out[f"T{i + 1}T{i}"] = chain([i, i + 1]).polynomial_residual(model)
    if n >= 2:
        out[f"T{n}T{n - 1}T{n - 2}"] = chain([n - 2, n - 1, n]).polynomial_residual(model)
    if n + 1 <= 2 * n - 1:
        out[f"T{n + 1}T{n}T{n - 1}"] = chain([n - 1, n, n + 1]).polynomial_residual(model)
    return out


def weitzenboeck_residuals(n: int, N: int, modes, convention: str = "metric") -> dict[tuple, float]:
    """Per-mode |P_k - Delta_k| / max(1, |Delta_k|) on S_N."""
    P = p_operator(n, N, convention)
    L = spinor_laplacian(n, N)
    out = {}
    for k in modes:
        Pk, Lk = P.mode(k), L.mode(k)
        out[tuple(k)] = difference_residual(Pk, Lk) / max(1.0, residual(Lk))
    return out


def self_adjointness_residuals(n: int, N: int, modes, convention: str = "metric") -> dict[tuple, float]:
    P = p_operator(n, N, convention)
    out = {}
    for k in modes:
        Pk = P.mode(k)
        out[tuple(k)] = difference_residual(Pk.adjoint(), Pk) / max(1.0, residual(Pk))
    return out


@dataclass(frozen=True)
class DiracScaling:
    coefficient: complex  # c in  F- o D^{00}_{10} = c * (symplectic Dirac operator D) on degree-0 forms
    residual: float


def dirac_scaling(flat: FlatModel, N: int, d: int) -> DiracScaling:
    """Fit F- o D^{00}_{10} against the symplectic Dirac operator on polynomial fields."""
    n = flat.n
    model = PolynomialModel(n, d)
    ours = flat.dirac(N)
    e00 = sp.csr_matrix(([1.0], ([0], [0])), shape=(4**n, 4**n))
    H = symplectic_dirac(n, N)
    theirs = FieldOperator(n, {a: lift(F, e00) for a, F in H.terms.items()})
    top = max(ours.tgt_N, theirs.tgt_N)
    A = ours.polynomial_matrix(model, N, top, src_forms=0)
    B = theirs.polynomial_matrix(model, N, top, src_forms=0)
    den = abs(B).power(2).sum()
    c = complex(B.conj().multiply(A).sum() / den)
    diff = A - c * B
    return DiracScaling(c, float(abs(diff).max()) if diff.nnz else 0.0)


def _null_space_gram(M: sp.spmatrix, tol: float = NULL_TOL) -> np.ndarray:
    """Orthonormal null space of M via the Gram matrix M^H M."""
    G = (M.conj().T @ M).toarray()
    w, V = sla.eigh(G)
    scale = max(1.0, float(w[-1])) if w.size else 1.0
    return V[:, w <= tol**2 * scale]


def _subspace_gap(A: np.ndarray, B: np.ndarray) -> float:
    """max |(1 - P_B) a| over the orthonormal columns a of A."""
    if A.shape[1] == 0:
        return 0.0
    if B.shape[1] == 0:
        return 1.0
    return float(np.abs(A - B @ (B.conj().T @ A)).max())


@dataclass(frozen=True)
class KillingReport:
    n: int
    N: int
    d: int
    eigenvalues: tuple[complex, ...]  # distinct mu admitting nonzero solutions
    solution_dims: tuple[int, ...]
    pencil_kernel_dim: int
    kill_dim: int  # dim Ker T0 n Ker D
    inclusion_pencil_in_kill: float
    inclusion_kill_in_pencil: float
    covariant_constancy: float  # max |d phi| over solutions
    filtration_defect: float  # |order-zero part of B^+ A|; zero means mu = 0 is the only candidate
    min_singular_off_zero: float  # smallest singular value of A + mu B over probe mu != 0

    @property
    def only_zero(self) -> bool:
        return all(abs(m) <= NULL_TOL for m in self.eigenvalues)


def killing_solve(flat: FlatModel, N: int, d: int, probes: int = 3, seed: int = 0) -> KillingReport:
    """Solve (nabla^S + 2 i mu F+) phi = 0 for spinor fields (form degree 0), polynomial model.

    Writing the pencil as (A + mu B) phi = 0 with A = d and B = 2i F+, B is
    injective, so mu must be an eigenvalue of K = -B^+ A.  K is a constant
    coefficient operator whose terms are recorded by derivative order; the
    spectrum on polynomial fields is that of its order-zero part (K is block
    triangular in the polynomial-degree filtration).
    """
    n = flat.n
    model = PolynomialModel(n, d)
    space = flat.space(N)
    deg0 = np.flatnonzero(space.form_degrees == 0)
    Fp = f_plus(space)
    Bf = 2j * Fp.matrix[:, deg0].toarray()
    if np.linalg.matrix_rank(Bf, tol=1e-9) != Bf.shape[1]:
        raise ArithmeticError("F+ is not injective on the truncated spinors")
    Bpinv = np.linalg.pinv(Bf)
    D = flat.d(N)
    K: dict = {}
    for a, F in D.aligned(N, Fp.tgt.N).items():
        K[a] = -Bpinv @ F.matrix[:, deg0].toarray()
    order0 = [M for a, M in K.items() if sum(a) == 0]
    filtration = max((float(np.abs(M).max()) for M in order0), default=0.0)
    mus: list[complex] = []
    for M in order0 or [np.zeros((deg0.size, deg0.size))]:
        for ev in np.linalg.eigvals(M):
            if all(abs(ev - m) > 1e-7 for m in mus):
                mus.append(complex(ev))
    tgt = max(D.tgt_N, Fp.tgt.N)
    B = FieldOperator.constant(n, 2j * Fp)
    Am = D.polynomial_matrix(model, N, tgt, src_forms=0)
    Bm = B.polynomial_matrix(model, N, tgt, src_forms=0)
    eigen, dims = [], []
    pencil = np.zeros((Am.shape[1], 0))
    for mu in mus:
        ns = _null_space_gram(Am + mu * Bm)
        if ns.shape[1]:
            eigen.append(mu)
            dims.append(ns.shape[1])
            if abs(mu) <= NULL_TOL:
                pencil = ns
    rng = np.random.default_rng(seed)
    smin = math.inf
    for _ in range(probes):
        mu = complex(rng.normal(), rng.normal())
        M = Am + mu * Bm
        w = sla.eigvalsh((M.conj().T @ M).toarray())
        smin = min(smin, float(np.sqrt(max(w[0], 0.0))))
    T0 = flat.twistor(0, N)
    Dr = flat.dirac(N)
    top = max(T0.tgt_N, Dr.tgt_N)
    stack = sp.vstack(
        [T0.polynomial_matrix(model, N, top, src_forms=0), Dr.polynomial_matrix(model, N, top, src_forms=0)]
    ).tocsr()
    kill = _null_space_gram(stack)
    cov = float(np.abs(Am @ pencil).max()) if pencil.shape[1] else 0.0
    return KillingReport(
        n,
        N,
        d,
        tuple(eigen),
        tuple(dims),
        pencil.shape[1],
        kill.shape[1],
        _subspace_gap(pencil, kill),
        _subspace_gap(kill, pencil),
        cov,
        filtration,
        smin,
    )


@dataclass(frozen=True)
class Eigenpair:
    mode: tuple[int, ...]
    mu: complex
    t0_norm: float
    leak: float  # |D phi - mu phi| without compression
    residual: float  # |R(T0 phi) - ((n-1)/n) mu T0 phi| / |T0 phi|


@dataclass(frozen=True)
class SpectrumTransferReport:
    n: int
    N: int
    d: int
    operator_residual_polynomial: float
    operator_residual_modes: float
    compression_pairs: tuple[Eigenpair, ...]
    kernel_pairs: int  # polynomial eigenvectors (mu = 0) with T0 phi != 0
    kernel_residual: float  # max |R T0 phi| over them

    def compression_worst(self, t0_tol: float = 1e-8) -> float:
        vals = [p.residual for p in self.compression_pairs if p.t0_norm > t0_tol]
        return max(vals, default=0.0)


def spectrum_transfer_check(flat: FlatModel, N: int, d: int, modes, t0_tol: float = 1e-8) -> SpectrumTransferReport:
    n = flat.n
    if n < 2:
        raise ValueError("spectrum transfer requires n > 1")
    c = (n - 1) / n
    T0 = flat.twistor(0, N)
    Dr = flat.dirac(N)
    R_on_T0 = flat.rarita_schwinger(T0.tgt_N) @ T0
    T0_on_D = flat.twistor(0, Dr.tgt_N) @ Dr
    P0 = flat.form_degree_projector(0, N)
    diff = (R_on_T0 - c * T0_on_D) @ P0
    model = PolynomialModel(n, d)
    op_poly = diff.polynomial_residual(model)
    op_modes = 0.0
    pairs = []
    fdim = FockTruncation(n, N).dim
    deg0 = np.flatnonzero(flat.space(N).form_degrees == 0)
    R_big = flat.rarita_schwinger(T0.tgt_N)
    for k in modes:
        op_modes = max(op_modes, residual(diff.mode(k)))
        Dk = Dr.mode(k).restrict_source(N)
        full = Dk.matrix[:, deg0].toarray()  # S_N -> Lambda^0 (x) S_{N+1}
        rows = np.flatnonzero(Dk.tgt.form_degrees == 0)
        comp = full[rows[:fdim], :]
        w, V = np.linalg.eig(comp)
        T0k = T0.mode(k).restrict_source(N)
        Rk = R_big.mode(k).restrict_source(T0k.tgt.N)
        for mu, v in zip(w, V.T):
            phi = np.zeros(flat.space(N).dim, dtype=complex)
            phi[deg0] = v
            emb = np.zeros(Dk.tgt.dim, dtype=complex)
            emb[: phi.size] = phi
            leak = float(np.linalg.norm(Dk.matrix @ phi - mu * emb))
            t = T0k.matrix @ phi
            tn = float(np.linalg.norm(t))
            res = 0.0
            if tn > t0_tol:
                tt = np.zeros(Rk.src.dim, dtype=complex)
                tt[: t.size] = t
                r = Rk.matrix @ tt
                r[: t.size] -= c * mu * t
                res = float(np.linalg.norm(r)) / tn
            pairs.append(Eigenpair(tuple(k), complex(mu), tn, leak, res))
    # genuine eigenvectors of the polynomial model: D is nilpotent there, so mu = 0 and phi in Ker D
    Dm = Dr.polynomial_matrix(model, N, None, src_forms=0)
    ker = _null_space_gram(Dm)
    cols = model.fiber_columns(flat.space(N), 0)
    Tm = T0.polynomial_matrix(model, N)
    Rm = flat.rarita_schwinger(T0.tgt_N).polynomial_matrix(model, T0.tgt_N)
    full = np.zeros((Tm.shape[1], ker.shape[1]), dtype=complex)
    full[cols, :] = ker
    T_phi = Tm @ full
    norms = np.linalg.norm(T_phi, axis=0)
    sel = norms > t0_tol
    kr = 0.0
    if sel.any():
        pad = _regrid(T_phi[:, sel], model, Rm.shape[1] // model.dim)
        kr = float((np.linalg.norm(Rm @ pad, axis=0) / norms[sel]).max())
    return SpectrumTransferReport(n, N, d, op_poly, op_modes, tuple(pairs), int(sel.sum()), kr)


def _regrid(X: np.ndarray, model: PolynomialModel, new_fiber_dim: int) -> np.ndarray:
    """Re-embed monomial-outer vectors into a larger fiber truncation."""
    old = X.shape[0] // model.dim
    Y = np.zeros((model.dim, new_fiber_dim, X.shape[1]), dtype=complex)
    Y[:, :old, :] = X.reshape(model.dim, old, X.shape[1])
    return Y.reshape(model.dim * new_fiber_dim, X.shape[1])


# ---------------------------------------------------------------------------
# symbols and ellipticity


def twistor_symbol(flat: FlatModel, i: int, xi, N: int) -> GradeWindowOperator:
    """sigma(T_i, xi) = p^{i+1, .} o (xi ^ .) o p^{i, .} on Lambda^* (x) S_N."""
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise ValueError("the symbol is only defined for nonzero covectors")
    return flat.twistor(i, N).symbol(xi, principal=True)


def _range_basis(M: np.ndarray, tol: float = NULL_TOL) -> np.ndarray:
    if M.shape[1] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((M.shape[0], 0), dtype=complex)
    return U[:, s > tol * s[0]]


def _summand(n: int, i: int) -> int:
    return i if i <= n else 2 * n - i


@dataclass(frozen=True)
class ExactnessDefect:
    position: int  # form degree of the middle term
    kernel_dim: int
    defect: int  # dim ker - dim(ker n im); 0 means exact on the core


def ellipticity_check(flat: FlatModel, xi, N: int, lookahead: int | None = None) -> list[ExactnessDefect]:
    """Exactness defects of the twistor symbol sequences at one covector.

    The middle term at position i is p^{i,.}(Lambda^i (x) S_N); images are
    taken from sources truncated at N + ``lookahead`` (default 2 + 2 * width).
    Positions follow the elliptic statements: 0..n-2 for the lower complex and
    n+1..2n for the upper one (surjectivity at 2n).
    """
    n = flat.n
    if n < 2:
        raise ValueError("the twistor complexes require n > 1")
    out = []
    positions = list(range(0, n - 1)) + list(range(n + 1, 2 * n + 1))
    for i in positions:
        w = flat.width(i)
        Pi = flat.projection(i, _summand(n, i), N)
        dom = _range_basis(Pi.toarray())
        big = N + 2 * w
        if i < 2 * n:
            S = twistor_symbol(flat, i, xi, big)
            Sm = S.matrix[:, : dom.shape[0]].toarray()
            ker = dom @ _null_dense(Sm @ dom)
        else:
            ker = dom
        if i in (0, n):
            img = np.zeros((dom.shape[0], 0), dtype=complex)
        else:
            la = (2 + 2 * w) if lookahead is None else lookahead
            Np = N + la
            Pp = flat.projection(i - 1, _summand(n, i - 1), Np)
            pre = _range_basis(Pp.toarray())
            Sp = twistor_symbol(flat, i - 1, xi, Pp.tgt.N)
            imgfull = Sp.matrix[:, : pre.shape[0]].toarray() @ pre
            rows = max(imgfull.shape[0], ker.shape[0])
            img = _range_basis(np.pad(imgfull, ((0, rows - imgfull.shape[0]), (0, 0))))
            ker = np.pad(ker, ((0, rows - ker.shape[0]), (0, 0)))
        kd = ker.shape[1]
        if img.shape[1] == 0:
            inter = 0
        else:
            rk_sum = np.linalg.matrix_rank(np.hstack([ker, img]), tol=1e-7)
            inter = kd + img.shape[1] - rk_sum
        out.append(ExactnessDefect(i, kd, kd - inter))
    return out


def _null_dense(M: np.ndarray, tol: float = NULL_TOL) -> np.ndarray:
    if M.shape[1] == 0:
        return np.zeros((0, 0))
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int((s > tol * scale).sum())
    return Vh[rank:].conj().T
