"""Exterior algebra over the symplectic vector space (V, omega).

The basis e_1..e_2n is symplectic in the anti-diagonal convention:
omega(e_i, e_j) = delta_{i, 2n+1-j} for i <= n (and minus that for i > n).
Indices are 0-based in code.  Exact elements (``ExteriorElement``) use
dictionaries of sorted index tuples; ``ExteriorBasis`` provides sparse
matrices of the same operators on the full algebra for the numerical modules.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from numbers import Number
from typing import Mapping

import numpy as np
import scipy.sparse as sp


def symplectic_form(n: int) -> np.ndarray:
    """omega_{ij} in the anti-diagonal symplectic basis (integer matrix)."""
    if n < 1:
        raise ValueError("n must be positive")
    K = np.fliplr(np.eye(n, dtype=int))
    Z = np.zeros((n, n), dtype=int)
    return np.block([[Z, K], [-K, Z]])


def standard_complex_structure(n: int) -> np.ndarray:
    """J with J e_b = e_{2n+1-b} (b <= n) and J e_b = -e_{2n+1-b} (b > n)."""
    m = 2 * n
    J = np.zeros((m, m), dtype=int)
    for b in range(m):
        J[m - 1 - b, b] = 1 if b < n else -1
    return J


@dataclass(frozen=True)
class SymplecticData:
    n: int
    omega: np.ndarray = field(init=False, repr=False)
    omega_up: np.ndarray = field(init=False, repr=False)
    J: np.ndarray = field(init=False, repr=False)
    g: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        om = symplectic_form(self.n)
        # sum_k omega_{ik} omega^{jk} = delta_i^j  <=>  omega_up = (omega^{-1})^T
        up = np.rint(np.linalg.inv(om).T).astype(int)
        J = standard_complex_structure(self.n)
        g = om @ J
        m = 2 * self.n
        if not np.array_equal(om @ up.T, np.eye(m, dtype=int)):
            raise ArithmeticError("omega^{ij} is not the inverse of omega_{ij}")
        if not np.array_equal(J @ J, -np.eye(m, dtype=int)):
            raise ArithmeticError("J^2 != -1")
        if not np.array_equal(g, g.T) or np.linalg.eigvalsh(g).min() <= 0:
            raise ArithmeticError("g(v, w) = omega(v, Jw) is not positive definite")
        for name, val in (("omega", om), ("omega_up", up), ("J", J), ("g", g)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def omega_of(self, v, w):
        return np.asarray(v) @ self.omega @ np.asarray(w)


def raise_lower(tensor: np.ndarray, slot: int, direction: str, n: int | None = None) -> np.ndarray:
    """Raise (K^i = sum_c omega^{ic} K_c) or lower (K_i = sum_t K^t omega_{ti}) one slot."""
    t = np.asarray(tensor)
    n = t.shape[slot] // 2 if n is None else n
    data = SymplecticData(n)
    if direction == "raise":
        mat = data.omega_up  # new index i, old index c: omega^{ic}
    elif direction == "lower":
        mat = data.omega.T  # new index i, old index t: omega_{ti}
    else:
        raise ValueError("direction must be 'raise' or 'lower'")
    moved = np.moveaxis(t, slot, 0)
    out = np.tensordot(mat, moved, axes=([1], [0]))
    return np.moveaxis(out, 0, slot)


# ---------------------------------------------------------------------------
# exact exterior algebra


def _merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """Sign of the shuffle sorting a + b (0 if they overlap)."""
    if set(a) & set(b):
        return 0
    inv = sum(1 for x in a for y in b if x > y)
    return -1 if inv % 2 else 1


@dataclass(frozen=True)
class ExteriorElement:
    """Homogeneous element of Lambda^degree V* with coefficients on eps^{I}."""

    n: int
    degree: int
    coeffs: Mapping[tuple[int, ...], Number]

    def __post_init__(self):
        clean = {}
        for key, c in self.coeffs.items():
            key = tuple(key)
            if len(key) != self.degree:
                raise ValueError(f"index set {key} does not have degree {self.degree}")
            if list(key) != sorted(set(key)):
                raise ValueError(f"index set {key} must be strictly increasing")
            if any(not 0 <= k < 2 * self.n for k in key):
                raise IndexError(f"index set {key} out of range")
            if c != 0:
                clean[key] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def basis(cls, n: int, *indices: int) -> "ExteriorElement":
        """eps^{i_1} ^ ... ^ eps^{i_k} in any index order."""
        idx = tuple(indices)
        if len(set(idx)) < len(idx):
            return cls(n, len(idx), {})
        return cls(n, len(idx), {tuple(sorted(idx)): _permutation_sign(idx)})

    @classmethod
    def zero(cls, n: int, degree: int) -> "ExteriorElement":
        return cls(n, degree, {})

    def __add__(self, other: "ExteriorElement") -> "ExteriorElement":
        if (self.n, self.degree) != (other.n, other.degree):
            raise ValueError("cannot add forms of different degree or dimension")
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return ExteriorElement(self.n, self.degree, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "ExteriorElement":
        return ExteriorElement(self.n, self.degree, {k: c * v for k, v in self.coeffs.items()})

    def __eq__(self, other):
        return (
            isinstance(other, ExteriorElement)
            and (self.n, self.degree) == (other.n, other.degree)
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.n, self.degree, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs


def _permutation_sign(seq) -> int:
    inv = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


def wedge(a: ExteriorElement, b: ExteriorElement) -> ExteriorElement:
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    out: dict = {}
    for ka, ca in a.coeffs.items():
        for kb, cb in b.coeffs.items():
            s = _merge_sign(ka, kb)
            if s:
                key = tuple(sorted(ka + kb))
                out[key] = out.get(key, 0) + s * ca * cb
    return ExteriorElement(a.n, a.degree + b.degree, out)


def contract(v, alpha: ExteriorElement) -> ExteriorElement:
    """Interior product iota_v alpha for a vector v given by its 2n coordinates."""
    v = list(v)
    if len(v) != 2 * alpha.n:
        raise ValueError("vector dimension mismatch")
    if alpha.degree == 0:
        return ExteriorElement.zero(alpha.n, 0)
    out: dict = {}
    for key, c in alpha.coeffs.items():
        for pos, a in enumerate(key):
            if v[a] != 0:
                rest = key[:pos] + key[pos + 1:]
                sign = -1 if pos % 2 else 1
                out[rest] = out.get(rest, 0) + sign * v[a] * c
    return ExteriorElement(alpha.n, alpha.degree - 1, out)


def sp_form_action(X, alpha: ExteriorElement) -> ExteriorElement:
    """Derivation extension of the dual action X . eps = -eps o X."""
    X = np.asarray(X, dtype=object)
    m = 2 * alpha.n
    if X.shape != (m, m):
        raise ValueError(f"X must be {m}x{m}")
    out: dict = {}
    for key, c in alpha.coeffs.items():
        for pos, a in enumerate(key):
            # eps^a -> -sum_b X[a, b] eps^b
            for b in range(m):
                x = X[a, b]
                if x == 0:
                    continue
                new = key[:pos] + (b,) + key[pos + 1:]
                if len(set(new)) < len(new):
                    continue
                sign = _permutation_sign(new)
                skey = tuple(sorted(new))
                out[skey] = out.get(skey, 0) - sign * x * c
    return ExteriorElement(alpha.n, alpha.degree, out)


# ---------------------------------------------------------------------------
# sparse matrices on the full exterior algebra


@dataclass(frozen=True)
class ExteriorBasis:
    """Subsets of {0..2n-1} ordered by degree, then lexicographically."""

    n: int

    @property
    def subsets(self) -> tuple[tuple[int, ...], ...]:
        return _subsets(self.n)

    @property
    def dim(self) -> int:
        return 2 ** (2 * self.n)

    @property
    def degrees(self) -> np.ndarray:
        return _subset_degrees(self.n)

    @property
    def index(self) -> dict:
        return _subset_index(self.n)

    def degree_slice(self, i: int) -> slice:
        from math import comb

        start = sum(comb(2 * self.n, k) for k in range(i))
        return slice(start, start + comb(2 * self.n, i))

    def wedge_matrix(self, a: int) -> sp.csr_matrix:
        return _wedge_matrix(self.n, a)

    def contract_matrix(self, a: int) -> sp.csr_matrix:
        return _contract_matrix(self.n, a)

    def action_matrix(self, X) -> sp.csr_matrix:
        """Matrix of the derivation extension of eps -> -eps o X."""
        X = np.asarray(X)
        m = 2 * self.n
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for a in range(m):
            for b in range(m):
                if X[a, b] != 0:
                    out = out + (-X[a, b]) * (self.wedge_matrix(b) @ self.contract_matrix(a))
        return out.tocsr()

    def to_vector(self, alpha: ExteriorElement) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        for k, c in alpha.coeffs.items():
            v[self.index[k]] = complex(c)
        return v


@lru_cache(maxsize=None)
def _subsets(n: int):
    m = 2 * n
    return tuple(s for d in range(m + 1) for s in itertools.combinations(range(m), d))


@lru_cache(maxsize=None)
def _subset_degrees(n: int):
    d = np.array([len(s) for s in _subsets(n)], dtype=int)
    d.setflags(write=False)
    return d


@lru_cache(maxsize=None)
def _subset_index(n: int):
    return {s: k for k, s in enumerate(_subsets(n))}


@lru_cache(maxsize=None)
def _wedge_matrix(n: int, a: int) -> sp.csr_matrix:
    idx = _subset_index(n)
    rows, cols, vals = [], [], []
    for col, s in enumerate(_subsets(n)):
        if a in s:
            continue
        sign = -1 if sum(1 for t in s if t < a) % 2 else 1
        rows.append(idx[tuple(sorted(s + (a,)))])
        cols.append(col)
        vals.append(sign)
    N = 4**n
    return sp.csr_matrix((vals, (rows, cols)), shape=(N, N), dtype=complex)


@lru_cache(maxsize=None)
def _contract_matrix(n: int, a: int) -> sp.csr_matrix:
    # iota_{e_a} is the transpose of eps^a wedge in the orthonormal subset basis
    return _wedge_matrix(n, a).T.tocsr()
