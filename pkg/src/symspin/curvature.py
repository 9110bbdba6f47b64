"""Curvature of a torsion-free symplectic connection at a point, and its spinor lifts.

Tensors are dense (2n)^4 arrays in the symplectic basis of ``forms``.  Exact
data (connection jets, curvature, Ricci trace) are integer or ``Fraction``
object arrays; the spinor operators use their float images.

Conventions (0-based):

* a connection 1-jet is T[a, b, c, d] = d/dx^d Gamma_{abc} at the origin, with
  Gamma_{abc} = omega(nabla_{e_a} e_b, e_c) symmetric in (a, b, c);
* R_{ijkl} = omega(R(e_k, e_l) e_j, e_i) = T[l, j, i, k] - T[k, j, i, l];
* sigma_{ij} = sum_{m, a} R_{m j a i} (omega^{-1})_{m a}, the trace of
  V -> R(V, e_i) e_j;
* upper indices are raised with omega^{ij} on the leading slots.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .fock import (
    FockTruncation,
    GradeWindowOperator,
    clifford_generator,
    difference_residual,
    residual,
)
from .forms import SymplecticData
from .osp import (
    Decomposition,
    SpinorFormSpace,
    build_osp,
    degree_projector,
    form_operator,
    lift,
    sp_action_on_E,
)

VARIANTS = ("literal", "restored", "corrected")
PINNED_VARIANT = "corrected"
RICCI_TYPE_TOL = 1e-12


def _exact(a) -> np.ndarray:
    """Object array of Fractions."""
    a = np.asarray(a, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx in np.ndindex(a.shape):
        out[idx] = Fraction(a[idx])
    return out


def _omega_inverse(n: int) -> np.ndarray:
    # omega^2 = -1 in the anti-diagonal basis
    return -SymplecticData(n).omega


def _sym3(T: np.ndarray) -> np.ndarray:
    return sum(np.transpose(T, p + (3,)) for p in itertools.permutations(range(3)))


# ---------------------------------------------------------------------------
# exact tensors


@dataclass(frozen=True, eq=False)
class SymplecticCurvature:
    n: int
    R: np.ndarray  # exact (object) array R_{ijkl}

    def __post_init__(self):
        m = 2 * self.n
        if self.R.shape != (m, m, m, m):
            raise ValueError(f"curvature must have shape {(m,) * 4}")
        object.__setattr__(self, "R", _exact(self.R))

    @property
    def numeric(self) -> np.ndarray:
        return self.R.astype(float)

    def symmetry_defects(self) -> dict[str, Fraction]:
        """Exact maxima of the three symmetry defects (all zero for a curvature tensor)."""
        R = self.R
        sym_ij = R - R.transpose(1, 0, 2, 3)
        anti_kl = R + R.transpose(0, 1, 3, 2)
        bianchi = R + np.einsum("iklj->ijkl", R) + np.einsum("iljk->ijkl", R)
        return {
            "sym_ij": max(abs(x) for x in sym_ij.ravel()),
            "antisym_kl": max(abs(x) for x in anti_kl.ravel()),
            "bianchi": max(abs(x) for x in bianchi.ravel()),
        }


def curvature_from_jet(n: int, T) -> SymplecticCurvature:
    """Curvature at the origin of the connection with Christoffel symbols Gamma_{abc} = T_{abc,d} x^d."""
    T = _exact(T)
    m = 2 * n
    if T.shape != (m, m, m, m):
        raise ValueError("jet must have shape (2n,)*4")
    for p in itertools.permutations(range(3)):
        if np.any(np.transpose(T, p + (3,)) != T):
            raise ValueError("jet is not symmetric in its first three slots (not torsion-free symplectic)")
    R = np.einsum("ljik->ijkl", T) - np.einsum("kjil->ijkl", T)
    return SymplecticCurvature(n, R)


def jet_for_curvature(curv: SymplecticCurvature) -> np.ndarray:
    """A connection 1-jet realizing a given curvature tensor: T = -(1/8) sym_{abc} R_{abcd}."""
    return _sym3(curv.R) * Fraction(-1, 8)


def random_fedosov_curvature(n: int, seed: int, spread: int = 3) -> SymplecticCurvature:
    """Curvature of a seeded integer 1-jet of a torsion-free symplectic connection."""
    rng = np.random.default_rng(seed)
    m = 2 * n
    T = rng.integers(-spread, spread + 1, size=(m, m, m, m))
    return curvature_from_jet(n, _sym3(T))


def ricci_trace(R: np.ndarray, n: int) -> np.ndarray:
    """sigma_{ij} = Tr(V -> R(V, e_i) e_j)."""
    return np.einsum("mjai,ma->ij", R, _omega_inverse(n).astype(object))


def sigma_tilde(sigma: np.ndarray, n: int, variant: str) -> np.ndarray:
    """The Ricci part built from sigma.

    ``literal`` keeps the nominal formula, whose pair omega_{jl} sigma_{ik}
    cancels; ``restored`` replaces the second member of that pair by
    omega_{jk} sigma_{il}; ``corrected`` is the unique combination with the
    symmetries of a curvature tensor and Ricci trace sigma.
    """
    w = SymplecticData(n).omega.astype(object)
    s = _exact(sigma)
    if variant == "literal":
        t = np.einsum("il,jk->ijkl", w, s) - np.einsum("ij,lk->ijkl", w, s)
    elif variant == "restored":
        t = (
            np.einsum("il,jk->ijkl", w, s)
            - np.einsum("ij,lk->ijkl", w, s)
            + np.einsum("jl,ik->ijkl", w, s)
            - np.einsum("jk,il->ijkl", w, s)
        )
    elif variant == "corrected":
        t = (
            np.einsum("il,jk->ijkl", w, s)
            - np.einsum("ik,jl->ijkl", w, s)
            + np.einsum("jl,ik->ijkl", w, s)
            - np.einsum("jk,il->ijkl", w, s)
        )
    else:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    t = t + 2 * np.einsum("ij,kl->ijkl", s, w)
    return t * Fraction(1, 2 * (n + 1))


@dataclass(frozen=True, eq=False)
class RicciData:
    n: int
    variant: str
    sigma: np.ndarray
    sigma_tilde: np.ndarray
    W: np.ndarray

    @property
    def is_ricci_type(self) -> bool:
        return all(x == 0 for x in self.W.ravel())


def ricci_of(curv: SymplecticCurvature, variant: str = PINNED_VARIANT) -> RicciData:
    n = curv.n
    s = ricci_trace(curv.R, n)
    if any(x != 0 for x in (s - s.T).ravel()):
        raise ArithmeticError("Ricci trace is not symmetric")
    st = sigma_tilde(s, n, variant)
    return RicciData(n, variant, s, st, curv.R - st)


def ricci_type_curvature(sigma) -> SymplecticCurvature:
    """The Ricci-type curvature sigma~(sigma) (corrected reading) for a symmetric sigma."""
    s = _exact(sigma)
    if any(x != 0 for x in (s - s.T).ravel()):
        raise ValueError("sigma must be symmetric")
    n = s.shape[0] // 2
    return SymplecticCurvature(n, sigma_tilde(s, n, "corrected"))


def random_symmetric(n: int, seed: int, spread: int = 3) -> np.ndarray:
    rng = np.random.default_rng(seed)
    s = rng.integers(-spread, spread + 1, size=(2 * n, 2 * n))
    return s + s.T


# ---------------------------------------------------------------------------
# spinor operators


def _raise(T: np.ndarray, slots: int) -> np.ndarray:
    """Raise the leading ``slots`` indices with omega^{ij}."""
    up = SymplecticData(T.shape[0] // 2).omega_up.astype(float)
    out = np.asarray(T, dtype=complex)
    for s in range(slots):
        out = np.moveaxis(np.tensordot(up, np.moveaxis(out, s, 0), axes=([1], [0])), 0, s)
    return out


@lru_cache(maxsize=8)
def _clifford_words(n: int, N: int, length: int) -> np.ndarray:
    """Dense products e_{a_1} ... e_{a_k}: array (2n,)*length + (dim S_{N+k}, dim S_N)."""
    m = 2 * n
    gens = {M: [clifford_generator(a, FockTruncation(n, M)).toarray() for a in range(m)] for M in range(N, N + length)}
    src_dim = FockTruncation(n, N).dim
    out = np.zeros((m,) * length + (FockTruncation(n, N + length).dim, src_dim), dtype=complex)
    for letters in itertools.product(range(m), repeat=length):
        v = np.eye(src_dim, dtype=complex)
        for depth, a in enumerate(reversed(letters)):
            v = gens[N + depth][a] @ v
        out[letters] = v
    out.setflags(write=False)
    return out


def _two_form_operator(n: int, N: int, A: np.ndarray, length: int) -> GradeWindowOperator:
    """sum_{k != l} eps^k ^ eps^l (x) A[k, l] on Lambda^* (x) S_N (A[k, l] acts on S_N)."""
    space = SpinorFormSpace(n, N)
    tgt = space.with_N(N + length)
    ext = space.ext
    mat = sp.csr_matrix((tgt.dim, space.dim), dtype=complex)
    m = 2 * n
    for k in range(m):
        for l in range(m):
            if k != l and np.any(A[k, l]):
                mat = mat + sp.kron(sp.csr_matrix(A[k, l]), ext.wedge_matrix(k) @ ext.wedge_matrix(l), format="csr")
    return GradeWindowOperator(mat.tocsr(), space, tgt, -length, length)


def spinor_lift(T, trunc: FockTruncation) -> GradeWindowOperator:
    """phi -> (i/2) sum T^{ij}_{kl} eps^k ^ eps^l (x) e_i e_j phi, tensored over all form degrees."""
    Tu = _raise(np.asarray(T, dtype=float), 2)
    A = 0.5j * np.einsum("ijkl,ijxy->klxy", Tu, _clifford_words(trunc.n, trunc.N, 2))
    return _two_form_operator(trunc.n, trunc.N, A, 2)


def _weyl_term(W, trunc: FockTruncation) -> GradeWindowOperator:
    """sum W^{ijk}_l eps^a ^ eps^l (x) e_a e_k e_i e_j."""
    Wu = _raise(np.asarray(W, dtype=float), 3)
    A = np.einsum("ijkl,akijxy->alxy", Wu, _clifford_words(trunc.n, trunc.N, 4))
    return _two_form_operator(trunc.n, trunc.N, A, 4)


def _sigma_term(sigma, trunc: FockTruncation) -> GradeWindowOperator:
    """(i/(n+1)) sum sigma^{ij} eps^k ^ eps^l (x) (omega_{il} e_k e_j - omega_{kl}/(2n) e_i e_j)."""
    n = trunc.n
    w = SymplecticData(n).omega.astype(float)
    su = _raise(np.asarray(sigma, dtype=float), 2)
    E2 = _clifford_words(n, trunc.N, 2)
    A = np.einsum("ij,il,kjxy->klxy", su, w, E2) - np.einsum("ij,kl,ijxy->klxy", su, w, E2) / (2 * n)
    return _two_form_operator(n, trunc.N, (1j / (n + 1)) * A, 2)


def _p20_term(sigma, trunc: FockTruncation) -> GradeWindowOperator:
    """(i/(2n)) sum omega_{kl} sigma^{ij} eps^k ^ eps^l (x) e_i e_j."""
    n = trunc.n
    w = SymplecticData(n).omega.astype(float)
    su = _raise(np.asarray(sigma, dtype=float), 2)
    A = np.einsum("kl,ij,ijxy->klxy", w, su, _clifford_words(n, trunc.N, 2))
    return _two_form_operator(n, trunc.N, (1j / (2 * n)) * A, 2)


def _relative(a: GradeWindowOperator, b: GradeWindowOperator, scale: float) -> float:
    return difference_residual(a, b) / max(1.0, scale)


@dataclass(frozen=True)
class ProjectionReport:
    n: int
    N: int
    variant: str
    w_coefficient: complex  # coefficient c in p21 = sigma-term + c * W-term, p22 = W^S - c * W-term
    scale: float  # sup norm of R^S on the core
    p20: float
    p21: float | None  # None for n = 1, where E21 = E22 = 0
    p22: float | None
    sigma_membership: float  # |p22 sigma^S| (sigma^S in E20 + E21)
    weyl_membership: float  # |p20 W^S| (W^S in E21 + E22)
    fitted_w_coefficient: complex | None  # least-squares c from p21 W^S against the W-term

    @property
    def worst(self) -> float:
        vals = [self.p20, self.sigma_membership, self.weyl_membership]
        if self.n > 1:
            vals += [self.p21, self.p22]
        return max(vals)

    def passes(self, tol: float) -> bool:
        return self.worst <= tol


def nominal_w_coefficient(n: int) -> complex:
    """The nominal W-term coefficient of p21 (and minus that of p22)."""
    return -1j / (1 - n)


def measured_w_coefficient(n: int) -> complex:
    """The W-term coefficient realized by the projections in these conventions."""
    return 1 / (1 - n)


class ProjectionFormulas:
    """Projection operators shared across seeds and variants."""

    def __init__(self, n: int, N: int, decomposition: Decomposition | None = None):
        self.n, self.N = n, N
        self.trunc = FockTruncation(n, N)
        self.dec = decomposition or Decomposition(n)
        self.P0 = degree_projector(SpinorFormSpace(n, N), 0)
        self.proj = {j: self.dec.operator(2, j, None, N + 2) for j in range(3) if j <= 2 * n - 2}

    def project(self, j: int, op: GradeWindowOperator) -> GradeWindowOperator:
        if j not in self.proj:
            return 0 * (self.proj[0] @ op)
        return self.proj[j] @ op

    def run_all(
        self, curv: SymplecticCurvature, variants=VARIANTS, w_coefficients=None
    ) -> list[ProjectionReport]:
        """Reports for every (coefficient, variant) pair; shared operators are built once.

        ``w_coefficients`` defaults to the nominal coefficient only.
        """
        n, N = self.n, self.N
        if curv.n != n:
            raise ValueError("dimension mismatch")
        if n == 1:
            coeffs = [0j]
        elif w_coefficients is None:
            coeffs = [nominal_w_coefficient(n)]
        else:
            coeffs = list(w_coefficients)
        R = curv.numeric
        RS = spinor_lift(R, self.trunc) @ self.P0
        scale = residual(RS)
        pR = {j: self.project(j, RS) for j in range(3)}
        sig = ricci_trace(curv.R, n).astype(float)
        p20 = _relative(pR[0], _p20_term(sig, self.trunc) @ self.P0, scale)
        if n > 1:
            st_op = _sigma_term(sig, self.trunc) @ self.P0
            wt_R = _weyl_term(R, self.trunc) @ self.P0
        out = []
        for variant in variants:
            rd = ricci_of(curv, variant)
            st = rd.sigma_tilde.astype(float)
            SS = spinor_lift(st, self.trunc) @ self.P0
            WS = RS - SS
            sigma_m = residual(self.project(2, SS)) / max(1.0, scale)
            weyl_m = residual(pR[0] - self.project(0, SS)) / max(1.0, scale)
            fitted = None
            if n > 1:
                wt = wt_R - _weyl_term(st, self.trunc) @ self.P0
                a, b = (pR[1] - self.project(1, SS))._common(wt)
                den = abs(b.matrix).power(2).sum()
                if den > 0:
                    fitted = complex(b.matrix.conj().multiply(a.matrix).sum() / den)
            for c in coeffs:
                p21 = p22 = None
                if n > 1:
                    p21 = _relative(pR[1], st_op + c * wt, scale)
                    p22 = _relative(pR[2], WS - c * wt, scale)
                out.append(
                    ProjectionReport(n, N, variant, complex(c), scale, p20, p21, p22, sigma_m, weyl_m, fitted)
                )
        return out

    def run(self, curv: SymplecticCurvature, variant: str, w_coefficient: complex | None = None) -> ProjectionReport:
        coeffs = None if w_coefficient is None else [w_coefficient]
        return self.run_all(curv, (variant,), coeffs)[0]


def curvature_projection_residuals(
    curv: SymplecticCurvature,
    trunc: FockTruncation,
    variant: str = PINNED_VARIANT,
    w_coefficient: complex | None = None,
) -> ProjectionReport:
    """Residuals of the three projection formulas for R^S on S_N (relative to |R^S|).

    ``w_coefficient`` defaults to the nominal value; pass
    ``measured_w_coefficient(n)`` for the coefficient realized numerically.
    """
    return ProjectionFormulas(trunc.n, trunc.N).run(curv, variant, w_coefficient)


def sigma_theta_ops(sigma, space: SpinorFormSpace) -> tuple[GradeWindowOperator, GradeWindowOperator]:
    """Sigma^sigma(alpha (x) s) = sum sigma^i_j eps^j ^ alpha (x) e_i s and Theta^sigma = sum sigma^{ij} e_i e_j."""
    n, N = space.n, space.N
    m = 2 * n
    s = np.asarray(sigma, dtype=float)
    mixed = _raise(s, 1)
    upper = _raise(s, 2)
    fock = space.fock
    gens = [clifford_generator(a, fock) for a in range(m)]
    outer = [clifford_generator(a, fock.with_N(N + 1)) for a in range(m)]
    ext = space.ext
    Sig = None
    for i in range(m):
        for j in range(m):
            if mixed[i, j] != 0:
                t = mixed[i, j] * lift(gens[i], ext.wedge_matrix(j))
                Sig = t if Sig is None else Sig + t
    Th = None
    for i in range(m):
        for j in range(m):
            if upper[i, j] != 0:
                t = upper[i, j] * lift(outer[i] @ gens[j], sp.identity(ext.dim))
                Th = t if Th is None else Th + t
    if Sig is None:
        tgt = space.with_N(N + 1)
        Sig = GradeWindowOperator(sp.csr_matrix((tgt.dim, space.dim), dtype=complex), space, tgt, -1, 1)
    if Th is None:
        tgt = space.with_N(N + 2)
        Th = GradeWindowOperator(sp.csr_matrix((tgt.dim, space.dim), dtype=complex), space, tgt, -2, 2)
    return Sig, Th


def curvature_endomorphism(R: np.ndarray, k: int, l: int) -> np.ndarray:
    """R(e_k, e_l) as a matrix in sp(V, omega): (R_kl)_{dj} = sum_i R_{ijkl} (omega^{-1})_{id}."""
    n = R.shape[0] // 2
    return np.einsum("ij,id->dj", np.asarray(R, dtype=float)[:, :, k, l], _omega_inverse(n).astype(float))


def curvature_on_forms(R: np.ndarray, space: SpinorFormSpace) -> GradeWindowOperator:
    """R^E = sum_{k,l} eps^k ^ eps^l ^ sigma^*(R(e_k, e_l)), acting on both tensor factors."""
    n = space.n
    ext = space.ext
    out = None
    for k in range(2 * n):
        for l in range(k + 1, 2 * n):
            X = curvature_endomorphism(R, k, l)
            if not np.any(X):
                continue
            act = sp_action_on_E(X, space)
            term = 2 * (form_operator(act.tgt, ext.wedge_matrix(k) @ ext.wedge_matrix(l)) @ act)
            out = term if out is None else out + term
    if out is None:
        tgt = space.with_N(space.N + 2)
        out = GradeWindowOperator(sp.csr_matrix((tgt.dim, space.dim), dtype=complex), space, tgt, -2, 2)
    return out


def higher_curvature_check(curv: SymplecticCurvature, trunc: FockTruncation, tol: float = RICCI_TYPE_TOL) -> float:
    """Relative |R^E - (E+ Theta + 2 F+ Sigma)/(n+1)| for a Ricci-type curvature."""
    n, N = trunc.n, trunc.N
    rd = ricci_of(curv, PINNED_VARIANT)
    W = rd.W.astype(float)
    if np.abs(W).max() > tol * max(1.0, np.abs(curv.numeric).max()):
        raise ValueError("curvature is not of Ricci type (W != 0)")
    space = SpinorFormSpace(n, N)
    RE = curvature_on_forms(curv.numeric, space)
    Sig, Th = sigma_theta_ops(rd.sigma.astype(float), space)
    g = build_osp(n, N + 2)
    rhs = (1 / (n + 1)) * (g.Ep @ Th + 2 * (g.Fp @ Sig))
    return difference_residual(RE, rhs) / max(1.0, residual(RE))
