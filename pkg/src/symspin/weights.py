"""sp(2n) weight arithmetic, the bounded-multiplicity set A and the first-order operator classifier.

Weights are stored with exact rational coordinates in the fundamental-weight
basis (varpi_1..varpi_n).  The epsilon basis is epsilon_1 = varpi_1,
epsilon_i = varpi_i - varpi_{i-1}, so a weight sum mu_i epsilon_i has
varpi-coordinates lambda_i = mu_i - mu_{i+1} (i < n), lambda_n = mu_n.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

HALF = Fraction(1, 2)


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Weight:
    n: int
    varpi: tuple[Fraction, ...]

    def __post_init__(self):
        coords = tuple(_frac(x) for x in self.varpi)
        if len(coords) != self.n:
            raise ValueError(f"expected {self.n} coordinates, got {len(coords)}")
        object.__setattr__(self, "varpi", coords)

    @classmethod
    def from_varpi(cls, coords: Sequence) -> "Weight":
        return cls(len(coords), tuple(coords))

    @classmethod
    def from_epsilon(cls, mu: Sequence) -> "Weight":
        mu = [_frac(x) for x in mu]
        n = len(mu)
        lam = [mu[i] - mu[i + 1] for i in range(n - 1)] + [mu[-1]]
        return cls(n, tuple(lam))

    @property
    def epsilon(self) -> tuple[Fraction, ...]:
        # mu_i = lambda_i + ... + lambda_n
        out, acc = [], Fraction(0)
        for x in reversed(self.varpi):
            acc += x
            out.append(acc)
        return tuple(reversed(out))

    def __add__(self, other: "Weight") -> "Weight":
        _same(self, other)
        return Weight(self.n, tuple(a + b for a, b in zip(self.varpi, other.varpi)))

    def __sub__(self, other: "Weight") -> "Weight":
        _same(self, other)
        return Weight(self.n, tuple(a - b for a, b in zip(self.varpi, other.varpi)))

    def __neg__(self):
        return Weight(self.n, tuple(-a for a in self.varpi))

    def scale(self, c) -> "Weight":
        c = _frac(c)
        return Weight(self.n, tuple(c * a for a in self.varpi))

    def __str__(self) -> str:
        return "(" + ", ".join(str(x) for x in self.varpi) + ")"


def _same(a: Weight, b: Weight):
    if a.n != b.n:
        raise ValueError("weights of different rank")


def fundamental(n: int, i: int) -> Weight:
    """varpi_i for 1 <= i <= n."""
    if not 1 <= i <= n:
        raise IndexError(f"fundamental weight index {i} out of range")
    return Weight(n, tuple(1 if k == i - 1 else 0 for k in range(n)))


def epsilon(n: int, i: int) -> Weight:
    """epsilon_i for 1 <= i <= n."""
    if not 1 <= i <= n:
        raise IndexError(f"epsilon index {i} out of range")
    return Weight.from_epsilon(tuple(1 if k == i - 1 else 0 for k in range(n)))


def rho(n: int) -> Weight:
    """Sum of the fundamental weights."""
    return Weight(n, (1,) * n)


# ---------------------------------------------------------------------------
# invariant form


def sp_basis(n: int) -> list[np.ndarray]:
    """Integer basis of sp(2n, C) = {X : X^T Omega + Omega X = 0}, Omega = [[0, I], [-I, 0]]."""
    m = 2 * n
    out = []
    for i in range(n):
        for j in range(n):
            X = np.zeros((m, m), dtype=int)
            X[i, j], X[n + j, n + i] = 1, -1
            out.append(X)
    for i in range(n):
        for j in range(i, n):
            B = np.zeros((m, m), dtype=int)
            B[i, n + j] = B[j, n + i] = 1
            C = np.zeros((m, m), dtype=int)
            C[n + i, j] = C[n + j, i] = 1
            out += [B, C]
    return out


def killing_dual_on_epsilon(n: int) -> np.ndarray:
    """(4n+4) times the dual Killing form in the epsilon basis, from traces of ad."""
    basis = sp_basis(n)
    flat = np.array([X.ravel() for X in basis], dtype=float).T
    ad = []
    for X in basis:
        cols = [np.linalg.lstsq(flat, (X @ Y - Y @ X).ravel().astype(float), rcond=None)[0] for Y in basis]
        ad.append(np.array(cols).T)
    # Cartan elements H_i = E_ii - E_{n+i, n+i} are the first diagonal basis entries
    cartan = [ad[i * n + i] for i in range(n)]
    kappa = np.array([[np.trace(a @ b) for b in cartan] for a in cartan])
    # epsilon_i(H_j) = delta_ij, so the dual form in the epsilon basis is kappa^{-1}
    return (4 * n + 4) * np.linalg.inv(kappa)


@lru_cache(maxsize=None)
def validate_normalization(n: int = 2, tol: float = 1e-12) -> float:
    """Check that (4n+4) kappa^* is the epsilon-orthonormal form; returns the deviation."""
    dev = float(np.abs(killing_dual_on_epsilon(n) - np.eye(n)).max())
    if dev > tol:
        raise ArithmeticError(f"invariant form normalization off by {dev:.3e}")
    return dev


def inner_product(mu: Weight, nu: Weight) -> Fraction:
    _same(mu, nu)
    validate_normalization(2)
    return sum((a * b for a, b in zip(mu.epsilon, nu.epsilon)), Fraction(0))


def conformal_weight(lam: Weight, nu: Weight, mu: Weight) -> Fraction:
    """c^mu_{lam nu} = ([lam, lam + 2 rho] + [nu, nu + 2 rho] - [mu, mu + 2 rho]) / 2."""
    d2 = rho(lam.n).scale(2)

    def cas(x):
        return inner_product(x, x + d2)

    return (cas(lam) + cas(nu) - cas(mu)) / 2


# ---------------------------------------------------------------------------
# the set A and tensor products with C^{2n}


def in_A(lam: Weight) -> bool:
    v = lam.varpi
    n = lam.n
    if any(x.denominator != 1 or x < 0 for x in v[:-1]):
        return False
    if v[-1].denominator != 2:
        return False
    prev = v[-2] if n >= 2 else Fraction(0)
    return v[-1] + 2 * prev + 3 > 0


def neighbor_set(mu: Weight) -> list[Weight]:
    """A intersected with {mu +- epsilon_i}, ordered by (i, +, -)."""
    out = []
    for i in range(1, mu.n + 1):
        e = epsilon(mu.n, i)
        for cand in (mu + e, mu - e):
            if in_A(cand) and cand not in out:
                out.append(cand)
    return out


def decompose_tensor(mu: Weight) -> list[Weight]:
    """Highest weights of the summands of L(mu) tensor C^{2n}."""
    if not in_A(mu):
        raise ValueError(f"{mu} is not in A")
    return neighbor_set(mu)


@dataclass(frozen=True)
class ModuleTriple:
    weight: Weight
    c: Fraction | complex
    gamma: int

    def __post_init__(self):
        if self.gamma not in (0, 1):
            raise ValueError("gamma must be 0 or 1")
        if not isinstance(self.c, complex):
            object.__setattr__(self, "c", _frac(self.c))


def exists_first_order_op(src: ModuleTriple, dst: ModuleTriple) -> int:
    """Dimension (0 or 1) of invariant first-order operators, modulo zeroth order."""
    lam, mu = src.weight, dst.weight
    if mu not in neighbor_set(lam):
        return 0
    if src.gamma != dst.gamma:
        return 0
    target = conformal_weight(lam, fundamental(lam.n, 1), mu)
    return int(src.c == dst.c - 1 and src.c == target)


def weights_in_box(n: int, bound: int) -> list[Weight]:
    """All weights of A with 0 <= lambda_i <= bound (i < n) and |lambda_n| <= bound + 1/2."""
    last = [Fraction(2 * k + 1, 2) for k in range(-bound - 1, bound + 1)]
    out = []
    for head in itertools.product(range(bound + 1), repeat=n - 1):
        for x in last:
            w = Weight(n, tuple(head) + (x,))
            if in_A(w):
                out.append(w)
    return out


def classifier_table(n: int, bound: int, gamma: int = 0) -> list[dict]:
    """For each lambda in the box and each mu in A_lambda: the forced conformal weights."""
    rows = []
    for lam in weights_in_box(n, bound):
        for mu in neighbor_set(lam):
            c = conformal_weight(lam, fundamental(n, 1), mu)
            dim = exists_first_order_op(ModuleTriple(lam, c, gamma), ModuleTriple(mu, c + 1, gamma))
            rows.append(
                {"lambda": [str(x) for x in lam.varpi], "mu": [str(x) for x in mu.varpi], "c": str(c), "d": str(c + 1), "dim": dim}
            )
    return rows


def random_triples(n: int, count: int, seed: int, bound: int = 3) -> Iterable[tuple[ModuleTriple, ModuleTriple]]:
    """Seeded pairs of triples, biased so that about half hit a neighbouring weight and the forced c."""
    rng = np.random.default_rng(seed)
    pool = weights_in_box(n, bound)
    for _ in range(count):
        lam = pool[int(rng.integers(len(pool)))]
        if rng.random() < 0.6:
            i = int(rng.integers(1, n + 1))
            mu = lam + epsilon(n, i).scale(1 if rng.random() < 0.5 else -1)
        else:
            mu = pool[int(rng.integers(len(pool)))]
        c = conformal_weight(lam, fundamental(n, 1), mu)
        if rng.random() < 0.3:
            c += Fraction(int(rng.integers(-2, 3)), 2)
        d = c + 1 if rng.random() < 0.8 else c + Fraction(int(rng.integers(-2, 3)))
        g1 = int(rng.integers(2))
        g2 = g1 if rng.random() < 0.8 else 1 - g1
        yield ModuleTriple(lam, c, g1), ModuleTriple(mu, d, g2)
