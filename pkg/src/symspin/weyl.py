"""Exact Weyl algebra W_n, symplectic Clifford algebra and the Heisenberg Lie algebra.

W_n is generated by a_1..a_n, b_1..b_n with a_i b_j - b_j a_i = -delta_ij.
Elements are stored in normal order (all a's left of all b's) as maps
(alpha, beta) -> coefficient with exact Gaussian-rational coefficients
(``sympy`` QQ_I).  Indices are 0-based in code.

The Clifford generators e_0..e_{2n-1} map to W_n by
e_{n+i} -> -a_i and e_{n-1-i} -> i b_i (0-based i), which respects
e_k e_l - e_l e_k = -i omega_{kl}.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np
import sympy
from sympy.polys.domains import QQ_I

from .fock import FockTruncation, GradeWindowOperator, clifford_generator, derivative_operator, position_operator
from .forms import SymplecticData

Multi = tuple[int, ...]
I_UNIT = QQ_I(0, 1)


def gaussian(value) -> object:
    """Convert ints, Fractions, complex-rational sympy numbers or QQ_I elements to QQ_I."""
    if isinstance(value, type(I_UNIT)):
        return value
    if isinstance(value, complex):
        if value.real != int(value.real) or value.imag != int(value.imag):
            raise TypeError("only integral Python complex numbers are converted exactly")
        return QQ_I(int(value.real), int(value.imag))
    return QQ_I.from_sympy(sympy.nsimplify(value) if isinstance(value, float) else sympy.sympify(value))


def _clean(coeffs: Mapping) -> dict:
    return {k: v for k, v in coeffs.items() if v != QQ_I.zero}


# ---------------------------------------------------------------------------
# Weyl algebra


@dataclass(frozen=True)
class WeylElement:
    n: int
    coeffs: Mapping[tuple[Multi, Multi], object]

    def __post_init__(self):
        clean = {}
        for (a, b), c in self.coeffs.items():
            a, b = tuple(a), tuple(b)
            if len(a) != self.n or len(b) != self.n or min(a + b, default=0) < 0:
                raise ValueError(f"bad monomial {(a, b)}")
            c = gaussian(c)
            if c != QQ_I.zero:
                clean[(a, b)] = clean.get((a, b), QQ_I.zero) + c
        object.__setattr__(self, "coeffs", _clean(clean))

    @classmethod
    def one(cls, n: int) -> "WeylElement":
        z = (0,) * n
        return cls(n, {(z, z): QQ_I.one})

    @classmethod
    def zero(cls, n: int) -> "WeylElement":
        return cls(n, {})

    @classmethod
    def a(cls, n: int, i: int) -> "WeylElement":
        z = (0,) * n
        return cls(n, {(_e(n, i), z): QQ_I.one})

    @classmethod
    def b(cls, n: int, i: int) -> "WeylElement":
        z = (0,) * n
        return cls(n, {(z, _e(n, i)): QQ_I.one})

    def __add__(self, other: "WeylElement") -> "WeylElement":
        _same(self, other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, QQ_I.zero) + c
        return WeylElement(self.n, out)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "WeylElement":
        c = gaussian(c)
        return WeylElement(self.n, {k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, WeylElement):
            return normal_product(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree(self) -> int:
        return max((sum(a) + sum(b) for a, b in self.coeffs), default=0)


def _e(n: int, i: int) -> Multi:
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for n={n}")
    return tuple(1 if k == i else 0 for k in range(n))


def _same(u, v):
    if u.n != v.n:
        raise ValueError("elements of different Weyl algebras")


@lru_cache(maxsize=None)
def _reorder(m: int, k: int) -> tuple[tuple[int, int, int], ...]:
    """b^m a^k = sum_r c_r a^{k-r} b^{m-r} with c_r = C(m, r) k! / (k - r)!  (single index)."""
    return tuple((math.comb(m, r) * math.perm(k, r), k - r, m - r) for r in range(min(m, k) + 1))


def normal_product(u: WeylElement, v: WeylElement) -> WeylElement:
    """u v in normal order, via the closed-form reordering of b^m a^k per index."""
    _same(u, v)
    n = u.n
    out: dict = {}
    for (a1, b1), c1 in u.coeffs.items():
        for (a2, b2), c2 in v.coeffs.items():
            per_index = [_reorder(b1[i], a2[i]) for i in range(n)]
            for choice in itertools.product(*per_index):
                coef = c1 * c2
                a = list(a1)
                b = list(b2)
                for i, (c, ka, mb) in enumerate(choice):
                    coef = coef * c
                    a[i] += ka
                    b[i] += mb
                key = (tuple(a), tuple(b))
                out[key] = out.get(key, QQ_I.zero) + coef
    return WeylElement(n, out)


def commutator(u: WeylElement, v: WeylElement) -> WeylElement:
    return normal_product(u, v) - normal_product(v, u)


def word_normal_form(n: int, word: tuple[tuple[str, int], ...], coeff=1) -> WeylElement:
    """Independent oracle: rewrite a word in the letters ('a', i), ('b', i) by b_i a_i -> a_i b_i + 1."""
    out: dict = {}
    stack = [(tuple(word), gaussian(coeff))]
    while stack:
        w, c = stack.pop()
        for pos in range(len(w) - 1):
            (x, i), (y, j) = w[pos], w[pos + 1]
            if x == "b" and y == "a":
                swapped = w[:pos] + (w[pos + 1], w[pos]) + w[pos + 2:]
                stack.append((swapped, c))
                if i == j:
                    stack.append((w[:pos] + w[pos + 2:], c))
                break
        else:
            a = [0] * n
            b = [0] * n
            for x, i in w:
                (a if x == "a" else b)[i] += 1
            key = (tuple(a), tuple(b))
            out[key] = out.get(key, QQ_I.zero) + c
    return WeylElement(n, out)


def random_weyl_element(n: int, rng: np.random.Generator, terms: int = 3, max_degree: int = 2) -> WeylElement:
    coeffs = {}
    for _ in range(terms):
        a = tuple(int(x) for x in rng.integers(0, max_degree + 1, size=n))
        b = tuple(int(x) for x in rng.integers(0, max_degree + 1, size=n))
        coeffs[(a, b)] = QQ_I(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
    return WeylElement(n, coeffs)


# ---------------------------------------------------------------------------
# polynomial representation  a_i -> q^i,  b_i -> d/dq^i


@dataclass(frozen=True)
class Polynomial:
    n: int
    coeffs: Mapping[Multi, object]

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            k = tuple(k)
            if len(k) != self.n:
                raise ValueError("exponent length mismatch")
            c = gaussian(c)
            if c != QQ_I.zero:
                clean[k] = clean.get(k, QQ_I.zero) + c
        object.__setattr__(self, "coeffs", _clean(clean))

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))


def polynomial_action(w: WeylElement, p: Polynomial) -> Polynomial:
    """Apply w (normal order: derivatives act first, then multiplication)."""
    if w.n != p.n:
        raise ValueError("dimension mismatch")
    out: dict = {}
    for (a, b), c in w.coeffs.items():
        for e, pc in p.coeffs.items():
            if any(ei < bi for ei, bi in zip(e, b)):
                continue
            coef = c * pc
            for ei, bi in zip(e, b):
                coef = coef * math.perm(ei, bi)
            key = tuple(ei - bi + ai for ei, bi, ai in zip(e, b, a))
            out[key] = out.get(key, QQ_I.zero) + coef
    return Polynomial(p.n, out)


def random_polynomial(n: int, rng: np.random.Generator, terms: int = 3, max_degree: int = 3) -> Polynomial:
    coeffs = {}
    for _ in range(terms):
        e = tuple(int(x) for x in rng.integers(0, max_degree + 1, size=n))
        coeffs[e] = QQ_I(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
    return Polynomial(n, coeffs)


# ---------------------------------------------------------------------------
# symplectic Clifford algebra


@dataclass(frozen=True)
class CliffordWord:
    """Formal linear combination of words in e_0..e_{2n-1}."""

    n: int
    coeffs: Mapping[tuple[int, ...], object]

    def __post_init__(self):
        clean = {}
        for w, c in self.coeffs.items():
            w = tuple(w)
            if any(not 0 <= k < 2 * self.n for k in w):
                raise IndexError(f"letter out of range in {w}")
            c = gaussian(c)
            if c != QQ_I.zero:
                clean[w] = clean.get(w, QQ_I.zero) + c
        object.__setattr__(self, "coeffs", _clean(clean))

    @classmethod
    def letter(cls, n: int, k: int) -> "CliffordWord":
        return cls(n, {(k,): QQ_I.one})

    @classmethod
    def one(cls, n: int) -> "CliffordWord":
        return cls(n, {(): QQ_I.one})

    def __add__(self, other):
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, QQ_I.zero) + c
        return CliffordWord(self.n, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        c = gaussian(c)
        return CliffordWord(self.n, {k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, CliffordWord):
            out: dict = {}
            for w1, c1 in self.coeffs.items():
                for w2, c2 in other.coeffs.items():
                    out[w1 + w2] = out.get(w1 + w2, QQ_I.zero) + c1 * c2
            return CliffordWord(self.n, out)
        return self.scale(other)


def clifford_letter_image(n: int, k: int) -> WeylElement:
    """e_{n+i} -> -a_i and e_{n-1-i} -> i b_i."""
    if n <= k < 2 * n:
        return WeylElement.a(n, k - n).scale(-1)
    if 0 <= k < n:
        return WeylElement.b(n, n - 1 - k).scale(I_UNIT)
    raise IndexError(f"letter {k} out of range")


def scliff_to_weyl(word: CliffordWord) -> WeylElement:
    n = word.n
    out = WeylElement.zero(n)
    for w, c in word.coeffs.items():
        acc = WeylElement.one(n)
        for k in w:
            acc = normal_product(acc, clifford_letter_image(n, k))
        out = out + acc.scale(c)
    return out


def weyl_to_scliff(w: WeylElement) -> CliffordWord:
    """Inverse on generators: a_i -> -e_{n+i}, b_i -> -i e_{n-1-i} (a's written left of b's)."""
    n = w.n
    out: dict = {}
    for (a, b), c in w.coeffs.items():
        letters: list[int] = []
        coef = c
        for i, e in enumerate(a):
            letters += [n + i] * e
            coef = coef * QQ_I(-1, 0) ** e
        for i, e in enumerate(b):
            letters += [n - 1 - i] * e
            coef = coef * QQ_I(0, -1) ** e
        key = tuple(letters)
        out[key] = out.get(key, QQ_I.zero) + coef
    return CliffordWord(n, out)


def clifford_relation_images(n: int) -> dict[tuple[int, int], WeylElement]:
    """Images of e_k e_l - e_l e_k + i omega_{kl} (all should vanish)."""
    om = SymplecticData(n).omega
    out = {}
    for k in range(2 * n):
        for l in range(2 * n):
            ek, el = CliffordWord.letter(n, k), CliffordWord.letter(n, l)
            rel = ek * el - el * ek + CliffordWord.one(n).scale(QQ_I(0, int(om[k, l])))
            out[(k, l)] = scliff_to_weyl(rel)
    return out


def ordered_monomials(n: int, max_length: int) -> list[tuple[int, ...]]:
    """Sorted words e_{k_1} ... e_{k_r}, k_1 <= ... <= k_r, r <= max_length (a PBW spanning set)."""
    out = []
    for r in range(max_length + 1):
        out += list(itertools.combinations_with_replacement(range(2 * n), r))
    return out


def injectivity_rank(n: int, max_length: int = 3) -> tuple[int, int]:
    """(rank of the images of ordered monomials in normal-form coordinates, number of monomials)."""
    words = ordered_monomials(n, max_length)
    images = [scliff_to_weyl(CliffordWord(n, {w: 1})) for w in words]
    keys = sorted({k for im in images for k in im.coeffs})
    col = {k: j for j, k in enumerate(keys)}
    M = sympy.zeros(len(words), len(keys))
    for r, im in enumerate(images):
        for k, c in im.coeffs.items():
            M[r, col[k]] = QQ_I.to_sympy(c)
    return int(M.rank()), len(words)


# ---------------------------------------------------------------------------
# Heisenberg Lie algebra


HEISENBERG_SYMBOLS = ("t", "q", "p")


def heisenberg_basis(n: int) -> list[tuple[str, int]]:
    return [("t", 0)] + [("q", i) for i in range(n)] + [("p", i) for i in range(n)]


def heisenberg_bracket(n: int, x: tuple[str, int], y: tuple[str, int]) -> dict[tuple[str, int], int]:
    """[d_q^i, d_p_j] = -delta_ij d_t, all other basis brackets zero."""
    if x[0] == "q" and y[0] == "p" and x[1] == y[1]:
        return {("t", 0): -1}
    if x[0] == "p" and y[0] == "q" and x[1] == y[1]:
        return {("t", 0): 1}
    return {}


def heisenberg_embed(n: int, symbol: tuple[str, int]) -> WeylElement:
    """d_t -> 1, d_q^i -> a_i, d_p_i -> b_i."""
    kind, i = symbol
    if kind == "t":
        return WeylElement.one(n)
    if kind == "q":
        return WeylElement.a(n, i)
    if kind == "p":
        return WeylElement.b(n, i)
    raise ValueError(f"unknown Heisenberg symbol {symbol!r}")


def heisenberg_to_scliff(n: int, symbol: tuple[str, int], convention: str = "consistent") -> CliffordWord:
    """Embedding of the Heisenberg algebra into sCliff.

    ``literal``: d_q^i -> -e_{n+i}, d_p_i -> i e_{n-1-i};
    ``consistent``: d_p_i -> -i e_{n-1-i}, the preimage of b_i, which makes the
    embedding agree with ``heisenberg_embed`` through ``scliff_to_weyl``.
    """
    kind, i = symbol
    if kind == "t":
        return CliffordWord.one(n)
    if kind == "q":
        return CliffordWord.letter(n, n + i).scale(-1)
    if kind == "p":
        phase = QQ_I(0, 1) if convention == "literal" else QQ_I(0, -1)
        if convention not in ("literal", "consistent"):
            raise ValueError("convention must be 'literal' or 'consistent'")
        return CliffordWord.letter(n, n - 1 - i).scale(phase)
    raise ValueError(f"unknown Heisenberg symbol {symbol!r}")


def heisenberg_homomorphism_defect(n: int, image) -> int:
    """Number of basis pairs (x, y) with image([x, y]) != [image(x), image(y)] (exact)."""
    basis = heisenberg_basis(n)
    bad = 0
    for x in basis:
        for y in basis:
            lhs = WeylElement.zero(n)
            for z, c in heisenberg_bracket(n, x, y).items():
                lhs = lhs + image(z).scale(c)
            if lhs != commutator(image(x), image(y)):
                bad += 1
    return bad


# ---------------------------------------------------------------------------
# bridge to the Fock realization


def fock_generator(n: int, kind: str, i: int, trunc: FockTruncation) -> GradeWindowOperator:
    """a_i -> -d/dx^{n-1-i}, b_i -> x^{n-1-i}: the images of -e_{n+i} and -i e_{n-1-i} under clifford_mult."""
    if kind == "a":
        return -1 * derivative_operator(n - 1 - i, trunc)
    if kind == "b":
        return position_operator(n - 1 - i, trunc)
    raise ValueError("kind must be 'a' or 'b'")


def _to_complex(c) -> complex:
    return complex(QQ_I.to_sympy(c))


def weyl_on_fock(w: WeylElement, trunc: FockTruncation) -> GradeWindowOperator:
    """Route 1: normal-ordered monomials as products of position/derivative matrices."""
    n = w.n
    total = None
    width = max(w.degree(), 0)
    for (a, b), c in w.coeffs.items():
        letters = [("a", i) for i, e in enumerate(a) for _ in range(e)] + [
            ("b", i) for i, e in enumerate(b) for _ in range(e)
        ]
        op = _product([(lambda t, x=x: fock_generator(n, x[0], x[1], t)) for x in letters], trunc, width)
        term = _to_complex(c) * op
        total = term if total is None else total + term
    return total if total is not None else 0 * _product([], trunc, width)


def scliff_on_fock(word: CliffordWord, trunc: FockTruncation) -> GradeWindowOperator:
    """Route 2: Clifford words as products of clifford generators."""
    total = None
    width = max((len(w) for w in word.coeffs), default=0)
    for w, c in word.coeffs.items():
        op = _product([(lambda t, k=k: clifford_generator(k, t)) for k in w], trunc, width)
        term = _to_complex(c) * op
        total = term if total is None else total + term
    return total if total is not None else 0 * _product([], trunc, width)


def _product(builders, trunc: FockTruncation, width: int) -> GradeWindowOperator:
    """Apply builders right-to-left starting from S_N; pad to the common target N + width."""
    from .fock import identity

    op = identity(trunc)
    for build in reversed(builders):
        op = build(op.tgt) @ op
    if op.tgt.N < trunc.N + width:
        op = op.pad_target(trunc.N + width)
    return op
