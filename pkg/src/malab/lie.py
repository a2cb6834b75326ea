"""Compact Lie algebra arithmetic at desk scale.

Algebras are stored densely: a basis, structure constants
``c[i, j, k]`` with ``[e_i, e_j] = sum_k c[i, j, k] e_k``, the Killing form
``B(e_i, e_j) = tr(ad_{e_i} ad_{e_j})`` and a faithful matrix realization
used by the finite-difference oracles.

Basis conventions
-----------------
``so(n)``
    ``A_ij = E_ij - E_ji`` for ``i > j`` (0-based), ordered
    lexicographically in ``(i, j)``: ``(1,0), (2,0), (2,1), (3,0), ...``.
    For ``so(3)`` this gives the cyclic relations ``[e1, e2] = e3``.
    Killing form ``B = -2 (n - 2) I``.
``su(n)``
    For each pair ``j < k`` (lexicographic) the two elements
    ``i (E_jk + E_kj) / sqrt 2`` and ``(E_jk - E_kj) / sqrt 2``, followed by
    the diagonal elements ``i diag(1, .., 1, -l, 0, ..) / sqrt(l (l + 1))``.
    Every element has ``tr(e_a e_b) = -delta_ab``, so ``B = -2n I``.  For
    ``su(2)`` the basis is ``{i sigma_1, i sigma_2, i sigma_3} / sqrt 2``.

Spectral calculus
-----------------
``ad_X`` is skew with respect to the positive definite form ``-B``.  After
a Cholesky change of coordinates it is a real antisymmetric matrix ``S``;
``i S`` is Hermitian and is diagonalized with ``eigh``.  Analytic functions
are evaluated on the purely imaginary spectrum and mapped back.
"""

from dataclasses import dataclass, field
from functools import cached_property
import itertools
import re

import numpy as np
import scipy.linalg

from .errors import NumericalDegeneracyError, UnsupportedModelError

__all__ = [
    "LieAlgebraData",
    "Subspace",
    "build_algebra",
    "bracket",
    "ad_matrix",
    "killing_form",
    "jacobi_residual",
    "orth_complement",
    "analytic_ad",
    "analytic_ads",
    "AD_FUNCTIONS",
    "principal_angles",
    "span_distance",
]

SUPPORTED = {"so": range(3, 7), "su": range(2, 5)}


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    name: str
    dim: int
    basis_labels: tuple
    structure_constants: np.ndarray
    killing: np.ndarray
    matrices: np.ndarray = field(repr=False)

    @property
    def ad_basis(self):
        """Array ``ad[i]`` holding the matrix of ``ad_{e_i}`` (column = image of ``e_j``)."""
        # (ad_{e_i})_{kj} = c[i, j, k]
        return np.transpose(self.structure_constants, (0, 2, 1))

    @property
    def metric(self):
        """Positive definite inner product ``-B``."""
        return -self.killing

    @cached_property
    def metric_factor(self):
        """``(R, R^-1)`` with ``-B = R^T R``."""
        R = np.linalg.cholesky(self.metric).T
        return R, np.linalg.inv(R)

    def to_matrix(self, X):
        """Matrix realization ``sum_i X_i M_i`` of a coordinate vector."""
        return np.tensordot(np.asarray(X), self.matrices, axes=(0, 0))

    def from_matrix(self, M):
        """Coordinates of a matrix lying in the realized algebra (least squares)."""
        A = self.matrices.reshape(self.dim, -1).T
        b = np.asarray(M).reshape(-1)
        A = np.concatenate([A.real, A.imag])
        b = np.concatenate([b.real, b.imag])
        coords, *_ = np.linalg.lstsq(A, b, rcond=None)
        return coords


def _parse(spec):
    if isinstance(spec, tuple):
        return spec
    m = re.fullmatch(r"\s*(so|su)\s*\(\s*(\d+)\s*\)\s*", str(spec).lower())
    if not m:
        raise UnsupportedModelError(f"unsupported model: {spec!r}")
    return m.group(1), int(m.group(2))


def _so_matrices(n):
    mats, labels = [], []
    for i in range(n):
        for j in range(i):
            M = np.zeros((n, n))
            M[i, j], M[j, i] = 1.0, -1.0
            mats.append(M)
            labels.append(f"A{i}{j}")
    return np.array(mats, dtype=complex), labels


def _su_matrices(n):
    mats, labels = [], []
    r2 = np.sqrt(2.0)
    for j, k in itertools.combinations(range(n), 2):
        S = np.zeros((n, n), dtype=complex)
        S[j, k] = S[k, j] = 1j / r2
        A = np.zeros((n, n), dtype=complex)
        A[j, k], A[k, j] = 1 / r2, -1 / r2
        mats += [S, A]
        labels += [f"S{j}{k}", f"A{j}{k}"]
    for l in range(1, n):
        d = np.zeros(n)
        d[:l] = 1.0
        d[l] = -l
        mats.append(1j * np.diag(d) / np.sqrt(l * (l + 1)))
        labels.append(f"H{l}")
    return np.array(mats, dtype=complex), labels


def _from_matrices(name, mats, labels):
    dim = len(mats)
    flat = mats.reshape(dim, -1).T
    A = np.concatenate([flat.real, flat.imag])
    comms = np.array([[mats[i] @ mats[j] - mats[j] @ mats[i] for j in range(dim)]
                      for i in range(dim)]).reshape(dim * dim, -1).T
    b = np.concatenate([comms.real, comms.imag])
    c, *_ = np.linalg.lstsq(A, b, rcond=None)
    c = c.T.reshape(dim, dim, dim)
    c[np.abs(c) < 1e-15] = 0.0
    ad = np.transpose(c, (0, 2, 1))
    killing = np.einsum("ikl,jlk->ij", ad, ad)
    return LieAlgebraData(
        name=name,
        dim=dim,
        basis_labels=tuple(labels),
        structure_constants=_frozen(c),
        killing=_frozen(0.5 * (killing + killing.T)),
        matrices=mats,
    )


def build_algebra(spec):
    """Build ``so(n)`` (3 <= n <= 6) or ``su(n)`` (2 <= n <= 4).

    ``spec`` is a string such as ``"so(4)"`` or a tuple ``("su", 2)``.
    """
    family, n = _parse(spec)
    if family not in SUPPORTED or n not in SUPPORTED[family]:
        raise UnsupportedModelError(f"unsupported model: {family}({n})")
    mats, labels = _so_matrices(n) if family == "so" else _su_matrices(n)
    return _from_matrices(f"{family}({n})", mats, labels)


def bracket(L, X, Y):
    return np.einsum("i,j,ijk->k", np.asarray(X, float), np.asarray(Y, float),
                     L.structure_constants)


def ad_matrix(L, X):
    """Matrix of ``ad_X`` acting on coordinate vectors."""
    return np.tensordot(np.asarray(X, float), L.ad_basis, axes=(0, 0))


def killing_form(L, X, Y):
    return float(np.asarray(X) @ L.killing @ np.asarray(Y))


def jacobi_residual(L, X, Y, W):
    """Max-norm of ``[X,[Y,W]] + [Y,[W,X]] + [W,[X,Y]]``."""
    r = (bracket(L, X, bracket(L, Y, W)) + bracket(L, Y, bracket(L, W, X))
         + bracket(L, W, bracket(L, X, Y)))
    return float(np.max(np.abs(r)))


@dataclass(frozen=True, eq=False)
class Subspace:
    """Subspace of ``L`` spanned by the columns of ``basis_matrix``."""

    parent: LieAlgebraData
    basis_matrix: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis_matrix, float).reshape(self.parent.dim, -1)
        if B.shape[1]:
            s = np.linalg.svd(B, compute_uv=False)
            if s[-1] <= 1e-10 * max(s[0], 1.0):
                raise NumericalDegeneracyError(
                    "subspace basis is numerically dependent", condition=s[0] / s[-1])
        object.__setattr__(self, "basis_matrix", _frozen(B))

    @property
    def dim(self):
        return self.basis_matrix.shape[1]

    @classmethod
    def span(cls, L, vectors, tol=1e-10):
        """Subspace spanned by possibly dependent columns (rank-revealing)."""
        V = np.asarray(vectors, float).reshape(L.dim, -1)
        if V.shape[1] == 0:
            return cls(L, np.zeros((L.dim, 0)))
        U, s, _ = np.linalg.svd(V, full_matrices=False)
        r = int(np.sum(s > tol * max(s[0], 1.0))) if s.size else 0
        return cls(L, U[:, :r])

    def orthonormal(self):
        """Basis orthonormal for ``-B``."""
        if self.dim == 0:
            return self.basis_matrix
        G = self.basis_matrix.T @ self.parent.metric @ self.basis_matrix
        C = np.linalg.cholesky(G)
        return self.basis_matrix @ np.linalg.inv(C).T

    def projector(self):
        """``-B``-orthogonal projector onto the subspace, in algebra coordinates."""
        Q = self.orthonormal()
        return Q @ Q.T @ self.parent.metric

    def __add__(self, other):
        return Subspace.span(self.parent, np.hstack([self.basis_matrix, other.basis_matrix]))


def orth_complement(L, S, within=None):
    """``B``-orthogonal complement of ``S`` (optionally inside ``within``)."""
    W = np.eye(L.dim) if within is None else within.basis_matrix
    if S.dim == 0:
        return Subspace.span(L, W)
    G = S.basis_matrix.T @ L.killing @ W
    null = scipy.linalg.null_space(G, rcond=1e-10)
    out = Subspace.span(L, W @ null)
    expected = W.shape[1] - np.linalg.matrix_rank(G, tol=1e-10)
    if out.dim != expected:
        raise NumericalDegeneracyError("rank loss while forming complement")
    return out


def _metric_coords(L):
    # -B = R^T R ; coordinates y = R x make ad_X antisymmetric
    return L.metric_factor


def _ratio(num, w, small, series):
    w = np.asarray(w)
    out = np.empty_like(w, dtype=complex)
    tiny = np.abs(w) < small
    out[tiny] = series(w[tiny])
    out[~tiny] = num(w[~tiny])
    return out


# f(z) evaluated at z = -i w, w real (the spectrum of ad_X is purely imaginary).
AD_FUNCTIONS = {
    "cos": lambda w: np.cosh(w).astype(complex),
    "sinc": lambda w: _ratio(lambda x: np.sinh(x) / x, w, 1e-6, lambda x: 1 + x**2 / 6),
    "T": lambda w: _ratio(lambda x: x / np.tanh(x), w, 1e-6, lambda x: 1 + x**2 / 3),
    "T_inv": lambda w: _ratio(lambda x: np.tanh(x) / x, w, 1e-6, lambda x: 1 - x**2 / 3),
    # (1 - exp(-z)) / z, the left-trivialized differential of exp
    "dexp": lambda w: _ratio(lambda x: np.expm1(1j * x) / (1j * x), w, 1e-8,
                             lambda x: 1 + 0.5j * x - x**2 / 6),
}


def analytic_ad(L, X, fn):
    """Evaluate an analytic function of ``ad_X`` by spectral calculus.

    ``fn`` is one of ``"T"`` (``(sin ad / ad)^-1 cos ad``), ``"T_inv"``,
    ``"sinc"`` (``sin ad / ad``), ``"cos"`` or ``"dexp"``
    (``(1 - e^{-ad}) / ad``).  Returns a real ``dim x dim`` matrix.
    """
    return analytic_ads(L, X, (fn,))[0]


def analytic_ads(L, X, fns):
    """Several functions of the same ``ad_X`` from one eigendecomposition."""
    try:
        fs = [AD_FUNCTIONS[fn] for fn in fns]
    except KeyError as exc:
        raise ValueError(f"unknown function id {exc.args[0]!r}") from None
    R, Rinv = _metric_coords(L)
    S = R @ ad_matrix(L, X) @ Rinv
    S = 0.5 * (S - S.T)
    w, U = np.linalg.eigh(1j * S)
    # S = U diag(-i w) U^H
    out = []
    for f in fs:
        F = (U * f(w)) @ U.conj().T
        if np.max(np.abs(F.imag)) > 1e-8 * max(1.0, np.max(np.abs(F.real))):
            raise NumericalDegeneracyError("spectral calculus produced a non-real result")
        out.append(Rinv @ F.real @ R)
    return out


def principal_angles(L, A, B):
    """Principal angles between two subspaces, measured in the ``-B`` metric."""
    R, _ = _metric_coords(L)
    a = A.basis_matrix if isinstance(A, Subspace) else np.asarray(A)
    b = B.basis_matrix if isinstance(B, Subspace) else np.asarray(B)
    if a.shape[1] == 0 or b.shape[1] == 0:
        return np.zeros(0)
    return scipy.linalg.subspace_angles(R @ a, R @ b)


def span_distance(L, A, B):
    """Zero iff the two subspaces coincide; otherwise the largest principal angle
    (``pi/2`` when dimensions differ)."""
    da = A.dim if isinstance(A, Subspace) else np.asarray(A).shape[1]
    db = B.dim if isinstance(B, Subspace) else np.asarray(B).shape[1]
    if da != db:
        return np.pi / 2
    if da == 0:
        return 0.0
    return float(np.max(principal_angles(L, A, B)))
