"""Truncated Hermite realization of the Schwartz fiber.

Functions on R^n are represented by coefficient vectors over the Hermite
functions h_alpha with |alpha| <= N, normalized with h_0(x) = 2^(1/4) exp(-pi x^2).
Every operator carries its source/target truncation and the window of
Hermite-degree shifts it can produce; composing operators shrinks the source
truncation so that no result is ever cut off by the truncation.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

DEFAULT_TOL = 1e-9
HERMITE_VALIDATION_TOL = 1e-10


class TruncationError(ValueError):
    pass


@lru_cache(maxsize=None)
def hermite_basis(n: int, N: int) -> tuple[tuple[int, ...], ...]:
    """Multi-indices with |alpha| <= N, total degree first, then lexicographic."""
    if n < 1 or N < 0:
        raise ValueError(f"invalid truncation n={n}, N={N}")
    out = []
    for d in range(N + 1):
        out.extend(sorted(a for a in itertools.product(range(d + 1), repeat=n) if sum(a) == d))
    return tuple(out)


@dataclass(frozen=True)
class FockTruncation:
    n: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.N < 0:
            raise TruncationError(f"negative truncation N={self.N}")

    @property
    def basis(self) -> tuple[tuple[int, ...], ...]:
        return hermite_basis(self.n, self.N)

    @property
    def dim(self) -> int:
        return math.comb(self.N + self.n, self.n)

    @property
    def degrees(self) -> np.ndarray:
        return _fock_degrees(self.n, self.N)

    @property
    def index(self) -> dict[tuple[int, ...], int]:
        return _fock_index(self.n, self.N)

    @property
    def fock(self) -> "FockTruncation":
        return self

    def with_N(self, N: int) -> "FockTruncation":
        return FockTruncation(self.n, N)

    def prefix(self, N: int) -> int:
        """Number of basis vectors with Hermite degree <= N."""
        return math.comb(N + self.n, self.n) if N >= 0 else 0

    def compatible(self, other) -> bool:
        return isinstance(other, FockTruncation) and other.n == self.n


@lru_cache(maxsize=None)
def _fock_degrees(n: int, N: int) -> np.ndarray:
    d = np.array([sum(a) for a in hermite_basis(n, N)], dtype=int)
    d.setflags(write=False)
    return d


@lru_cache(maxsize=None)
def _fock_index(n: int, N: int) -> dict:
    return {a: k for k, a in enumerate(hermite_basis(n, N))}


@dataclass(frozen=True)
class GradedFockVector:
    trunc: FockTruncation
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.trunc.dim,):
            raise ValueError(f"expected {self.trunc.dim} coefficients, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def basis_vector(cls, trunc: FockTruncation, alpha: Sequence[int]) -> "GradedFockVector":
        c = np.zeros(trunc.dim, dtype=complex)
        c[trunc.index[tuple(alpha)]] = 1.0
        return cls(trunc, c)

    def __getitem__(self, alpha) -> complex:
        alpha = tuple(alpha)
        if sum(alpha) > self.trunc.N:
            return 0j
        return self.coeffs[self.trunc.index[alpha]]


@dataclass(frozen=True, eq=False)
class GradeWindowOperator:
    """Sparse linear map between truncations with a Hermite-degree shift window.

    Invariant: ``tgt.N >= src.N + hi`` so that images are never truncated.
    ``src``/``tgt`` are any space objects exposing ``n``, ``N``, ``dim``,
    ``degrees``, ``prefix`` and ``with_N`` (Fock truncations or spinor-form
    spaces).
    """

    matrix: sp.csr_matrix
    src: object
    tgt: object
    lo: int
    hi: int

    def __post_init__(self):
        m = self.matrix
        if not (sp.isspmatrix_csr(m) and m.dtype == complex):
            m = sp.csr_matrix(m, dtype=complex)
        m.eliminate_zeros()
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.tgt.dim, self.src.dim):
            raise ValueError(f"matrix shape {m.shape} does not match spaces ({self.tgt.dim}, {self.src.dim})")
        if self.lo > self.hi:
            raise ValueError("empty window")
        if self.tgt.N < self.src.N + self.hi:
            raise TruncationError("target truncation too small for the shift window")
        if m.nnz:
            rows = np.repeat(np.arange(m.shape[0]), np.diff(m.indptr))
            shift = self.tgt.degrees[rows] - self.src.degrees[m.indices]
            if shift.min() < self.lo or shift.max() > self.hi:
                raise ValueError(f"entries outside window [{self.lo}, {self.hi}]")

    @classmethod
    def _trusted(cls, matrix, src, tgt, lo, hi) -> "GradeWindowOperator":
        """Construct without validation; used where the window follows from the inputs."""
        op = object.__new__(cls)
        for k, v in (("matrix", matrix), ("src", src), ("tgt", tgt), ("lo", lo), ("hi", hi)):
            object.__setattr__(op, k, v)
        return op

    @property
    def window(self) -> tuple[int, int]:
        return self.lo, self.hi

    @property
    def width(self) -> int:
        return max(self.hi, 0) - min(self.lo, 0)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def restrict_source(self, N: int) -> "GradeWindowOperator":
        """Drop source basis vectors above Hermite degree N."""
        if N > self.src.N:
            raise TruncationError(f"cannot enlarge source from {self.src.N} to {N}")
        if N < 0:
            raise TruncationError("safe core is empty; increase the truncation")
        src = self.src.with_N(N)
        tgt = self.tgt.with_N(max(N + self.hi, 0)) if N + self.hi < self.tgt.N else self.tgt
        m = _prefix(self.matrix, tgt.dim, src.dim)
        return GradeWindowOperator._trusted(m, src, tgt, self.lo, self.hi)

    def pad_target(self, N: int) -> "GradeWindowOperator":
        if N < self.tgt.N:
            raise TruncationError("pad_target cannot shrink")
        tgt = self.tgt.with_N(N)
        m = self.matrix
        indptr = np.concatenate([m.indptr, np.full(tgt.dim - self.tgt.dim, m.indptr[-1])])
        m = sp.csr_matrix((m.data, m.indices, indptr), shape=(tgt.dim, self.src.dim))
        return GradeWindowOperator._trusted(m, self.src, tgt, self.lo, self.hi)

    def __matmul__(self, other: "GradeWindowOperator") -> "GradeWindowOperator":
        if not isinstance(other, GradeWindowOperator):
            return NotImplemented
        if not self.src.compatible(other.tgt):
            raise ValueError("incompatible spaces in composition")
        k = min(self.src.N, other.tgt.N)
        b = other
        if k < other.src.N + other.hi:
            b = other.restrict_source(min(other.src.N, k - other.hi))
        a = self.restrict_source(min(self.src.N, b.tgt.N))
        if a.src.N < b.tgt.N:
            b = b.restrict_source(a.src.N - b.hi)
        # rows of b above a.src.N are zero by the window invariant
        m = a.matrix @ _prefix(b.matrix, a.src.dim, b.matrix.shape[1])
        lo, hi = a.lo + b.lo, a.hi + b.hi
        tgt = a.tgt.with_N(min(a.tgt.N, max(b.src.N + hi, 0)))
        return GradeWindowOperator._trusted(_prefix(m.tocsr(), tgt.dim, m.shape[1]), b.src, tgt, lo, hi)

    def _common(self, other):
        if not self.src.compatible(other.src) or not self.tgt.compatible(other.tgt):
            raise ValueError("incompatible spaces")
        n_src = min(self.src.N, other.src.N)
        a, b = self.restrict_source(n_src), other.restrict_source(n_src)
        n_tgt = max(a.tgt.N, b.tgt.N)
        return a.pad_target(n_tgt), b.pad_target(n_tgt)

    def __add__(self, other: "GradeWindowOperator") -> "GradeWindowOperator":
        if not isinstance(other, GradeWindowOperator):
            return NotImplemented
        a, b = self._common(other)
        return GradeWindowOperator._trusted(
            (a.matrix + b.matrix).tocsr(), a.src, a.tgt, min(a.lo, b.lo), max(a.hi, b.hi)
        )

    def __sub__(self, other):
        return self + (-1) * other

    def __neg__(self):
        return (-1) * self

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return GradeWindowOperator._trusted(
            (self.matrix * c).astype(complex), self.src, self.tgt, self.lo, self.hi
        )

    __rmul__ = __mul__

    def adjoint(self) -> "GradeWindowOperator":
        """Adjoint w.r.t. the L^2 inner product (orthonormal Hermite basis)."""
        s = min(self.tgt.N, self.src.N + self.lo)
        if s < 0:
            raise TruncationError("adjoint has empty safe core")
        src = self.tgt.with_N(s)
        m = self.matrix.conj().T.tocsr()[:, : src.dim]
        return GradeWindowOperator(m, src, self.src, -self.hi, -self.lo)

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] > self.src.dim:
            raise TruncationError("vector exceeds source truncation")
        if v.shape[0] < self.src.dim:
            pad = np.zeros((self.src.dim - v.shape[0],) + v.shape[1:], dtype=complex)
            v = np.concatenate([v, pad])
        return self.matrix @ v


def _prefix(m: sp.csr_matrix, rows: int, cols: int) -> sp.csr_matrix:
    """Leading rows x cols submatrix of a CSR matrix."""
    if m.shape == (rows, cols):
        return m
    indptr = m.indptr[: rows + 1]
    data, indices = m.data[: indptr[-1]], m.indices[: indptr[-1]]
    if cols < m.shape[1]:
        keep = indices < cols
        cs = np.concatenate([[0], np.cumsum(keep)])
        indptr = cs[indptr - indptr[0]]
        data, indices = data[keep], indices[keep]
    else:
        indptr = indptr - indptr[0]
    return sp.csr_matrix((data, indices, indptr), shape=(rows, cols))


def commutator(a: GradeWindowOperator, b: GradeWindowOperator) -> GradeWindowOperator:
    return a @ b - b @ a


def anticommutator(a: GradeWindowOperator, b: GradeWindowOperator) -> GradeWindowOperator:
    return a @ b + b @ a


def residual(op: GradeWindowOperator) -> float:
    """Largest absolute matrix entry (entrywise sup norm)."""
    return float(abs(op.matrix).max()) if op.matrix.nnz else 0.0


def difference_residual(a: GradeWindowOperator, b: GradeWindowOperator) -> float:
    return residual(a - b)


def identity(space, N: int | None = None) -> GradeWindowOperator:
    s = space if N is None else space.with_N(N)
    return GradeWindowOperator(sp.identity(s.dim, dtype=complex, format="csr"), s, s, 0, 0)


def zero_operator(space, lo: int = 0, hi: int = 0) -> GradeWindowOperator:
    tgt = space.with_N(space.N + max(hi, 0))
    return GradeWindowOperator(sp.csr_matrix((tgt.dim, space.dim), dtype=complex), space, tgt, lo, hi)


# ---------------------------------------------------------------------------
# one-dimensional Hermite data and the quadrature oracle


def hermite_function(m: int) -> Callable[[np.ndarray], np.ndarray]:
    """Evaluator of h_m built literally from the Rodrigues-type definition."""
    return _hermite_function(m)


@lru_cache(maxsize=None)
def _hermite_function(m: int):
    import sympy

    x = sympy.symbols("x", real=True)
    expr = (
        sympy.Integer(2) ** sympy.Rational(1, 4)
        / sympy.sqrt(sympy.factorial(m))
        * (-1 / (2 * sympy.sqrt(sympy.pi))) ** m
        * sympy.exp(sympy.pi * x**2)
        * sympy.diff(sympy.exp(-2 * sympy.pi * x**2), x, m)
    )
    # exp(pi x^2) * exp(-2 pi x^2) -> polynomial * exp(-pi x^2)
    poly = sympy.expand(sympy.simplify(expr * sympy.exp(sympy.pi * x**2)))
    p = sympy.lambdify(x, poly, "numpy")
    return lambda t: np.asarray(p(np.asarray(t, dtype=float)), dtype=float) * np.exp(-np.pi * np.asarray(t, dtype=float) ** 2)


def hermite_derivative(m: int) -> Callable[[np.ndarray], np.ndarray]:
    return _hermite_derivative(m)


@lru_cache(maxsize=None)
def _hermite_derivative(m: int):
    import sympy

    x = sympy.symbols("x", real=True)
    expr = (
        sympy.Integer(2) ** sympy.Rational(1, 4)
        / sympy.sqrt(sympy.factorial(m))
        * (-1 / (2 * sympy.sqrt(sympy.pi))) ** m
        * sympy.exp(sympy.pi * x**2)
        * sympy.diff(sympy.exp(-2 * sympy.pi * x**2), x, m)
    )
    d = sympy.diff(expr, x)
    poly = sympy.expand(sympy.simplify(d * sympy.exp(sympy.pi * x**2)))
    p = sympy.lambdify(x, poly, "numpy")
    return lambda t: np.asarray(p(np.asarray(t, dtype=float)), dtype=float) * np.exp(-np.pi * np.asarray(t, dtype=float) ** 2)


def gauss_hermite_nodes(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights in x for integrals of p(x) exp(-2 pi x^2), deg p <= degree (exact)."""
    k = degree // 2 + 1
    y, w = np.polynomial.hermite.hermgauss(k)
    s = math.sqrt(2 * math.pi)
    return y / s, w / s


def quadrature_inner_product(f, g, degree: int, n: int = 1) -> complex:
    """Gauss-Hermite value of int conj(f) g over R^n.

    ``f`` and ``g`` take an array of shape (n, K) of points.  The rule is
    exact when conj(f) g = p(x) exp(-2 pi |x|^2) with deg p <= ``degree``
    in each variable.
    """
    x, w = gauss_hermite_nodes(degree)
    grids = np.meshgrid(*([x] * n), indexing="ij")
    pts = np.stack([g_.ravel() for g_ in grids])
    weights = np.ones(pts.shape[1])
    for wg in np.meshgrid(*([w] * n), indexing="ij"):
        weights = weights * wg.ravel()
    gauss = np.exp(2 * np.pi * np.sum(pts**2, axis=0))
    vals = np.conj(np.asarray(f(pts))) * np.asarray(g(pts)) * gauss
    return complex(np.sum(weights * vals))


def _position_1d(M: int) -> sp.csr_matrix:
    """x acting on span{h_0..h_M} -> span{h_0..h_{M+1}}."""
    rows, cols, vals = [], [], []
    c = 1.0 / (2.0 * math.sqrt(math.pi))
    for m in range(M + 1):
        rows.append(m + 1)
        cols.append(m)
        vals.append(c * math.sqrt(m + 1))
        if m > 0:
            rows.append(m - 1)
            cols.append(m)
            vals.append(c * math.sqrt(m))
    return sp.csr_matrix((vals, (rows, cols)), shape=(M + 2, M + 1))


def _derivative_1d(M: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    c = math.sqrt(math.pi)
    for m in range(M + 1):
        rows.append(m + 1)
        cols.append(m)
        vals.append(-c * math.sqrt(m + 1))
        if m > 0:
            rows.append(m - 1)
            cols.append(m)
            vals.append(c * math.sqrt(m))
    return sp.csr_matrix((vals, (rows, cols)), shape=(M + 2, M + 1))


_VALIDATED: set[int] = set()


def validate_hermite_tables(M: int, tol: float = HERMITE_VALIDATION_TOL) -> float:
    """Cross-check the recurrence matrices against quadrature; raise on mismatch."""
    worst = 0.0
    X, D = _position_1d(M).toarray(), _derivative_1d(M).toarray()
    for m in range(M + 1):
        hm, dhm = hermite_function(m), hermite_derivative(m)
        for k in range(max(0, m - 1), m + 2):
            hk = hermite_function(k)
            deg = k + m + 1
            xv = quadrature_inner_product(lambda p: hk(p[0]), lambda p: p[0] * hm(p[0]), deg)
            dv = quadrature_inner_product(lambda p: hk(p[0]), lambda p: dhm(p[0]), deg)
            worst = max(worst, abs(xv - X[k, m]), abs(dv - D[k, m]))
    if worst > tol:
        raise ArithmeticError(f"Hermite recurrence mismatch {worst:.3e} exceeds {tol:.1e}")
    return worst


def _ensure_validated(M: int) -> None:
    if M in _VALIDATED or any(v >= M for v in _VALIDATED):
        return
    validate_hermite_tables(M)
    _VALIDATED.add(M)


def _lift_1d(matrix_builder, i: int, trunc: FockTruncation) -> sp.csr_matrix:
    """Embed a 1-d tridiagonal-in-degree matrix acting on coordinate i."""
    N = trunc.N
    tgt = trunc.with_N(N + 1)
    one = matrix_builder(N).tocoo()
    tindex = tgt.index
    rows, cols, vals = [], [], []
    entries: dict[int, list[tuple[int, float]]] = {}
    for r, c, v in zip(one.row, one.col, one.data):
        entries.setdefault(int(c), []).append((int(r), float(v)))
    for col, alpha in enumerate(trunc.basis):
        for r, v in entries.get(alpha[i], ()):
            beta = alpha[:i] + (r,) + alpha[i + 1:]
            rows.append(tindex[beta])
            cols.append(col)
            vals.append(v)
    return sp.csr_matrix((vals, (rows, cols)), shape=(tgt.dim, trunc.dim), dtype=complex)


def position_operator(i: int, trunc: FockTruncation) -> GradeWindowOperator:
    """Multiplication by x^i (0-based coordinate index) in the Hermite basis."""
    if not 0 <= i < trunc.n:
        raise IndexError(f"coordinate {i} out of range for n={trunc.n}")
    _ensure_validated(trunc.N)
    return GradeWindowOperator(_lift_1d(_position_1d, i, trunc), trunc, trunc.with_N(trunc.N + 1), -1, 1)


def derivative_operator(i: int, trunc: FockTruncation) -> GradeWindowOperator:
    """Partial derivative in x^i (0-based) in the Hermite basis."""
    if not 0 <= i < trunc.n:
        raise IndexError(f"coordinate {i} out of range for n={trunc.n}")
    _ensure_validated(trunc.N)
    return GradeWindowOperator(_lift_1d(_derivative_1d, i, trunc), trunc, trunc.with_N(trunc.N + 1), -1, 1)


# ---------------------------------------------------------------------------
# symplectic Clifford multiplication and the metaplectic Lie algebra action


def clifford_generator(k: int, trunc: FockTruncation) -> GradeWindowOperator:
    """e_k . (0-based k in 0..2n-1).

    e_i . f = i x^i f for the first n vectors and e_{n+i} . f = d f / d x^{n-i+1}
    (1-based), i.e. e_{2n-1-j} acts as d/dx^j in 0-based labels.
    """
    n = trunc.n
    if not 0 <= k < 2 * n:
        raise IndexError(f"Clifford index {k} out of range for 2n={2 * n}")
    if k < n:
        return 1j * position_operator(k, trunc)
    return derivative_operator(2 * n - 1 - k, trunc)


def clifford_mult(v: Sequence[complex], trunc: FockTruncation) -> GradeWindowOperator:
    v = np.asarray(v, dtype=complex)
    if v.shape != (2 * trunc.n,):
        raise ValueError(f"expected a vector of length {2 * trunc.n}, got shape {v.shape}")
    out = zero_operator(trunc, -1, 1)
    for k, c in enumerate(v):
        if c != 0:
            out = out + c * clifford_generator(k, trunc)
    return out


def lie_action(A, B, C, trunc: FockTruncation, tol: float = 1e-12) -> GradeWindowOperator:
    """Metaplectic Lie algebra action of X = [[A, B], [C, -A^T]] (canonical basis).

    B and C must be symmetric.
    """
    n = trunc.n
    A, B, C = (np.atleast_2d(np.asarray(m, dtype=float)) for m in (A, B, C))
    for name, m in (("A", A), ("B", B), ("C", C)):
        if m.shape != (n, n):
            raise ValueError(f"block {name} must be {n}x{n}")
    if not np.allclose(B, B.T, atol=tol) or not np.allclose(C, C.T, atol=tol):
        raise ValueError("B and C blocks must be symmetric")
    x = [position_operator(i, trunc) for i in range(n)]
    d = [derivative_operator(i, trunc) for i in range(n)]
    xx = [position_operator(i, trunc.with_N(trunc.N + 1)) for i in range(n)]
    dd = [derivative_operator(i, trunc.with_N(trunc.N + 1)) for i in range(n)]
    out = zero_operator(trunc, -2, 2)
    for i in range(n):
        for j in range(n):
            if B[i, j]:
                out = out + (B[i, j] / (4j * math.pi)) * (dd[i] @ d[j])
            if C[i, j]:
                out = out + (-1j * math.pi * C[i, j]) * (xx[i] @ x[j])
            if A[i, j]:
                out = out + (-A[i, j]) * (xx[j] @ d[i])
    tr = float(np.trace(A))
    if tr:
        out = out + (-0.5 * tr) * identity(trunc)
    return out


def parity_operator(trunc: FockTruncation) -> GradeWindowOperator:
    diag = np.where(trunc.degrees % 2 == 0, 1.0, -1.0).astype(complex)
    return GradeWindowOperator(sp.diags(diag, format="csr"), trunc, trunc, 0, 0)


def number_operator(trunc: FockTruncation) -> GradeWindowOperator:
    return GradeWindowOperator(sp.diags(trunc.degrees.astype(complex), format="csr"), trunc, trunc, 0, 0)


@lru_cache(maxsize=None)
def fourier_phase(nodes: int = 120, m_check: int = 6) -> tuple[complex, complex, float]:
    """Numerically determine c with F h_m = c^m h_m.

    Returns (snapped c, raw quadrature estimate, worst deviation over m <= m_check).
    The transform is (F f)(y) = int exp(-2 pi i x y) f(x) dx.
    """
    t, w = np.polynomial.hermite.hermgauss(nodes)
    s = math.sqrt(2 * math.pi)
    x, wx = t / s, w / s
    gauss = np.exp(2 * np.pi * x**2)

    def transform(m, y):
        h = hermite_function(m)(x) * gauss
        return np.array([np.sum(wx * np.exp(-2j * np.pi * x * yy) * h) for yy in np.atleast_1d(y)])

    def coefficient(m):
        # <h_m, F h_m>; F h_m is again Gaussian-decaying, integrate against h_m
        hm = hermite_function(m)(x)
        return complex(np.sum(wx * gauss * hm * transform(m, x)))

    raw = coefficient(1)
    roots = [1, 1j, -1, -1j]
    c = min(roots, key=lambda r: abs(r - raw))
    worst = max(abs(coefficient(m) - c**m) for m in range(m_check + 1))
    return complex(c), raw, worst


def fourier_operator(trunc: FockTruncation) -> GradeWindowOperator:
    c, _, worst = fourier_phase()
    if worst > 1e-8:
        raise ArithmeticError(f"Fourier transform not diagonal to tolerance ({worst:.2e})")
    diag = np.array([c**d for d in trunc.degrees], dtype=complex)
    return GradeWindowOperator(sp.diags(diag, format="csr"), trunc, trunc, 0, 0)


# ---------------------------------------------------------------------------
# symplectic-basis form of the Lie algebra action


def canonical_frame(n: int) -> np.ndarray:
    """Matrix P sending canonical (q, p) coordinates to symplectic-basis coordinates.

    q_j -> e_{2n+1-j} / sqrt(2 pi) and p_j -> sqrt(2 pi) e_j (1-based), fixed by
    requiring [sigma_*(X), v.] = (P X P^{-1} v). for the Clifford rules above.
    """
    s = math.sqrt(2 * math.pi)
    P = np.zeros((2 * n, 2 * n))
    for j in range(n):
        P[2 * n - 1 - j, j] = 1 / s
        P[j, n + j] = s
    return P


def to_symplectic_basis(X_canonical: np.ndarray) -> np.ndarray:
    X = np.asarray(X_canonical)
    P = canonical_frame(X.shape[0] // 2)
    return P @ X @ np.linalg.inv(P)


def to_canonical_blocks(X_symplectic: np.ndarray):
    X = np.asarray(X_symplectic)
    n = X.shape[0] // 2
    P = canonical_frame(n)
    Xc = np.linalg.inv(P) @ X @ P
    A, B, C = Xc[:n, :n], Xc[:n, n:], Xc[n:, :n]
    return A, (B + B.T) / 2, (C + C.T) / 2


def compact_generator(n: int) -> np.ndarray:
    """J_0 = [[0, -1], [1, 0]] in canonical block form."""
    I, Z = np.eye(n), np.zeros((n, n))
    return np.block([[Z, -I], [I, Z]])


def is_symplectic_algebra_element(X: np.ndarray, tol: float = 1e-10) -> bool:
    X = np.asarray(X)
    n = X.shape[0] // 2
    K = np.fliplr(np.eye(n))
    Z = np.zeros((n, n))
    Om = np.block([[Z, K], [-K, Z]])
    return bool(np.abs(X.T @ Om + Om @ X).max() <= tol * max(1.0, np.abs(X).max()))


def sp_action(X_symplectic: np.ndarray, trunc: FockTruncation) -> GradeWindowOperator:
    """sigma_*(X) for X in sp(V, omega) written in the symplectic basis."""
    X = np.real_if_close(np.asarray(X_symplectic))
    if np.iscomplexobj(X):
        re = sp_action(X.real, trunc)
        im = sp_action(X.imag, trunc)
        return re + 1j * im
    if not is_symplectic_algebra_element(X):
        raise ValueError("X is not in sp(V, omega)")
    return lie_action(*to_canonical_blocks(X), trunc)


def clifford_quadratic(X_symplectic: np.ndarray, trunc: FockTruncation) -> GradeWindowOperator:
    """-(i/2) sum_ab (X Omega)_ab e_a e_b, an independent route to sigma_*(X)."""
    X = np.asarray(X_symplectic)
    n = trunc.n
    K = np.fliplr(np.eye(n))
    Z = np.zeros((n, n))
    S = X @ np.block([[Z, K], [-K, Z]])
    outer = [clifford_generator(a, trunc.with_N(trunc.N + 1)) for a in range(2 * n)]
    inner = [clifford_generator(b, trunc) for b in range(2 * n)]
    out = zero_operator(trunc, -2, 2)
    for a in range(2 * n):
        for b in range(2 * n):
            if S[a, b] != 0:
                out = out + (-0.5j * S[a, b]) * (outer[a] @ inner[b])
    return out
