"""Rank-one symmetric pairs and the decomposition of the isotropy complement.

Constructed pairs
-----------------
``sphere(n)``, ``rproj(n)`` (2 <= n <= 4)
    ``g = so(n+1)``, ``k = so(n)`` fixing the first standard basis vector,
    ``p = span{A_i0}``.  ``rproj(n)`` shares the pair of ``sphere(n)``; the
    double cover ``S^n -> RP^n`` is recorded in ``cover_of`` only.
``cproj(1)``
    ``g = su(2)``, ``k = span{i sigma_3}``, ``p = span{i sigma_1, i sigma_2}``.

Bases of ``k`` and ``p`` are orthonormal for ``-B``, and ``X0`` is the first
basis vector of ``p``.  Chart coordinates on ``p`` are taken in this basis,
so ``-B(v, v)`` is the Euclidean norm squared of the coordinate vector.
"""

from dataclasses import dataclass
from functools import cached_property
import re

import numpy as np
import scipy.linalg

from .errors import CertificateFailure, NumericalDegeneracyError, UnsupportedModelError
from .lie import (Subspace, ad_matrix, bracket, build_algebra, orth_complement,
                  span_distance)

__all__ = [
    "SymmetricPairData",
    "MprimeDecomposition",
    "build_pair",
    "cartan_residuals",
    "rank_one_kernel_dim",
    "mprime_decomposition",
    "verify_lemma33",
    "random_unit_p",
]

PAIR_RANGES = {"sphere": range(2, 5), "rproj": range(2, 5), "cproj": range(1, 2)}


@dataclass(frozen=True, eq=False)
class SymmetricPairData:
    name: str
    algebra: object
    k_sub: Subspace
    p_sub: Subspace
    X0: np.ndarray
    involution: np.ndarray  # matrix S with sigma(M) = S M S^{-1} in the matrix realization
    cover_of: str = ""

    @property
    def n(self):
        """Real dimension of ``p`` (= dimension of ``G/K``)."""
        return self.p_sub.dim

    @property
    def P(self):
        return self.p_sub.basis_matrix

    @property
    def K(self):
        return self.k_sub.basis_matrix

    @cached_property
    def Pk(self):
        """``-B``-orthogonal projector onto ``k``."""
        return self.k_sub.projector()

    @cached_property
    def Pp(self):
        return self.p_sub.projector()

    def p_coords(self, X):
        """Coordinates in the ``-B``-orthonormal basis of ``p``."""
        return self.P.T @ self.algebra.metric @ np.asarray(X)

    def k_coords(self, X):
        return self.K.T @ self.algebra.metric @ np.asarray(X)


def _parse_pair(name):
    m = re.fullmatch(r"\s*(sphere|rproj|cproj)\s*\(\s*(\d+)\s*\)\s*", str(name).lower())
    if not m:
        raise UnsupportedModelError(f"unsupported model: {name!r}")
    family, n = m.group(1), int(m.group(2))
    if n not in PAIR_RANGES[family]:
        raise UnsupportedModelError(f"unsupported model: {family}({n})")
    return family, n


def _unit(L, X):
    return X / np.sqrt(X @ L.metric @ X)


def build_pair(name):
    """Build ``sphere(n)``, ``rproj(n)`` (2 <= n <= 4) or ``cproj(1)``."""
    family, n = _parse_pair(name)
    if family in ("sphere", "rproj"):
        L = build_algebra(f"so({n + 1})")
        p_idx = [i for i, lab in enumerate(L.basis_labels) if lab.endswith("0")]
        S = np.diag([-1.0] + [1.0] * n)
    else:
        L = build_algebra("su(2)")
        p_idx = [0, 1]
        S = np.diag([1.0, -1.0])
    k_idx = [i for i in range(L.dim) if i not in p_idx]
    E = np.eye(L.dim)
    P = np.column_stack([_unit(L, E[:, i]) for i in p_idx])
    K = np.column_stack([_unit(L, E[:, i]) for i in k_idx])
    return SymmetricPairData(
        name=f"{family}({n})",
        algebra=L,
        k_sub=Subspace(L, K),
        p_sub=Subspace(L, P),
        X0=P[:, 0].copy(),
        involution=S,
        cover_of=f"sphere({n})" if family == "rproj" else "",
    )


def cartan_residuals(pair):
    """Max residuals of ``[k,k] in k``, ``[k,p] in p``, ``[p,p] in k``."""
    L = pair.algebra
    Pk = pair.k_sub.projector()
    Pp = pair.p_sub.projector()
    out = {}
    for label, A, Bm, target in (("kk", pair.K, pair.K, Pk), ("kp", pair.K, pair.P, Pp),
                                 ("pp", pair.P, pair.P, Pk)):
        r = 0.0
        for x in A.T:
            for y in Bm.T:
                z = bracket(L, x, y)
                r = max(r, float(np.max(np.abs(z - target @ z))))
        out[label] = r
    return out


def rank_one_kernel_dim(pair, X0=None, tol=1e-10):
    """Numerical dimension of ``ker(ad_X0) ∩ p``."""
    X0 = pair.X0 if X0 is None else np.asarray(X0)
    M = ad_matrix(pair.algebra, X0) @ pair.P
    s = np.linalg.svd(M, compute_uv=False)
    scale = max(np.max(s), 1.0)
    return int(pair.n - np.sum(s > tol * scale))


def random_unit_p(pair, rng):
    v = rng.standard_normal(pair.n)
    return pair.P @ (v / np.linalg.norm(v))


@dataclass(frozen=True, eq=False)
class MprimeDecomposition:
    X0: np.ndarray
    l_sub: Subspace
    p1: Subspace
    p2: Subspace
    mprime: Subspace

    @property
    def dims(self):
        return {"l": self.l_sub.dim, "p1": self.p1.dim, "p2": self.p2.dim,
                "mprime": self.mprime.dim}


def mprime_decomposition(pair, X0=None):
    """Isotropy ``l = k ∩ ker ad_X0``, ``p1 = p ∩ X0^perp``, ``p2 = ad_X0(p1)``,
    ``m' = p1 + p2``."""
    L = pair.algebra
    X0 = pair.X0 if X0 is None else np.asarray(X0, float)
    adX = ad_matrix(L, X0)
    ker_k = scipy.linalg.null_space(adX @ pair.K, rcond=1e-10)
    l_sub = Subspace.span(L, pair.K @ ker_k)
    p1 = orth_complement(L, Subspace(L, X0[:, None]), within=pair.p_sub)
    p2 = Subspace.span(L, adX @ p1.basis_matrix)
    if p2.dim != p1.dim:
        raise NumericalDegeneracyError("ad_X0 is not injective on p ∩ X0^perp (rank > 1?)")
    mprime = p1 + p2
    if mprime.dim != L.dim - l_sub.dim - 1:
        raise NumericalDegeneracyError(
            f"dimension count failed: dim m' = {mprime.dim}, "
            f"expected {L.dim - l_sub.dim - 1}")
    return MprimeDecomposition(X0=X0, l_sub=l_sub, p1=p1, p2=p2, mprime=mprime)


def verify_lemma33(pair, X0=None, tol=1e-10):
    """Check ``m' = (l + R X0)^perp`` and ``ad_X0(p2) = p1``.

    Returns a report dict; raises :class:`CertificateFailure` with the
    offending residuals when a check exceeds ``tol``.
    """
    L = pair.algebra
    dec = mprime_decomposition(pair, X0)
    lx = dec.l_sub + Subspace(L, dec.X0[:, None])
    complement = orth_complement(L, lx)
    adX = ad_matrix(L, dec.X0)
    image = Subspace.span(L, adX @ dec.p2.basis_matrix)
    gram = dec.l_sub.basis_matrix.T @ L.killing @ dec.p2.basis_matrix
    report = {
        "dims": dec.dims,
        "mprime_vs_complement": span_distance(L, dec.mprime, complement),
        "ad_p2_vs_p1": span_distance(L, image, dec.p1),
        "B_l_p2": float(np.max(np.abs(gram))) if gram.size else 0.0,
    }
    bad = {k: v for k, v in report.items() if k != "dims" and v > tol}
    if bad:
        raise CertificateFailure(f"decomposition check failed: {bad}", details=report)
    return report
