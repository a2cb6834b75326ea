"""Stenzel's invariant complex structure on ``T(G/K) = G x_K p`` in slice charts.

Tangent vectors at ``[(g, X)]`` are represented by pairs ``(Y, V)`` with
``Y`` in ``g`` (left-invariant: ``Y|_g = d/ds g exp(sY)``) and ``V`` in
``p``; the pair ``(W, -[W, X])`` with ``W`` in ``k`` represents zero (gauge).

The structure is

    J(Y, V) = (T_X^{-1}(ad_X Y^k - V), T_X Y^p),   T_X = (sin ad_X / ad_X)^{-1} cos ad_X,

obtained by differentiating ``(g, X) -> g exp(iX) K^C``.  The factor in front
of ``ad_X Y^k`` must be ``T_X^{-1}`` for the formula to descend to the
quotient; with it ``J^2 = -1`` modulo gauge.

The chart is ``psi(a, v) = [(exp(a), v)]`` with ``a, v`` in ``p`` (coordinates
in the ``-B``-orthonormal basis of the pair).
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .chart import ChartModel
from .errors import ChartError, NumericalDegeneracyError
from .lie import ad_matrix, analytic_ad, analytic_ads
from .symmetric import build_pair

__all__ = [
    "ChartPoint",
    "TangentRep",
    "StenzelModel",
    "chart_tangent_basis",
    "stenzel_J",
    "gauge_basis",
    "canonical_rep",
    "gauge_distance",
    "J_in_chart",
    "nijenhuis_residual",
    "nijenhuis_max",
    "translate_point",
    "chart_condition",
]


@dataclass(frozen=True, eq=False)
class ChartPoint:
    pair: object
    a: np.ndarray
    v: np.ndarray

    @classmethod
    def from_array(cls, pair, p):
        p = np.asarray(p, float)
        return cls(pair, p[: pair.n], p[pair.n:])

    @property
    def array(self):
        return np.concatenate([self.a, self.v])


@dataclass(frozen=True, eq=False)
class TangentRep:
    Y: np.ndarray  # algebra coordinates
    V: np.ndarray  # algebra coordinates, lies in p

    def __add__(self, other):
        return TangentRep(self.Y + other.Y, self.V + other.V)

    def __mul__(self, c):
        return TangentRep(c * self.Y, c * self.V)

    __rmul__ = __mul__

    def __neg__(self):
        return TangentRep(-self.Y, -self.V)

    def stacked(self):
        return np.concatenate([self.Y, self.V])


def chart_tangent_basis(pair, point, radius=1.0):
    """Representatives of ``d/da_i`` and ``d/dv_j`` at ``[(e, X)]``, ``X = v``.

    ``d/da_i`` is ``((1 - e^{-ad_a}) / ad_a) e_i`` in the left trivialization
    (left translation by ``exp(-a)`` leaves the ``(Y, V)`` pair unchanged).
    """
    if not isinstance(point, ChartPoint):
        point = ChartPoint.from_array(pair, point)
    if np.linalg.norm(point.a) > radius:
        raise ChartError(f"|a| = {np.linalg.norm(point.a):.3g} exceeds chart radius {radius}")
    L = pair.algebra
    A = pair.P @ point.a
    D = analytic_ad(L, A, "dexp") @ pair.P
    zero = np.zeros(L.dim)
    basis = [TangentRep(D[:, i], zero) for i in range(pair.n)]
    basis += [TangentRep(zero, pair.P[:, j]) for j in range(pair.n)]
    return basis


def _operators(pair, X):
    L = pair.algebra
    return (ad_matrix(L, X), *analytic_ads(L, X, ("T", "T_inv")))


def stenzel_J(pair, X, w, _ops=None):
    """Apply the complex structure at ``[(g, X)]`` to the representative ``w``."""
    adX, T, Tinv = _ops if _ops is not None else _operators(pair, X)
    Yk = pair.Pk @ w.Y
    Yp = pair.Pp @ w.Y
    return TangentRep(Tinv @ (adX @ Yk - w.V), T @ Yp)


def gauge_basis(pair, X):
    """Columns ``(W, -[W, X])`` for ``W`` in the basis of ``k``."""
    adX = ad_matrix(pair.algebra, X)
    return np.vstack([pair.K, adX @ pair.K])


def _product_metric(pair):
    G = pair.algebra.metric
    return scipy.linalg.block_diag(G, G)


def canonical_rep(pair, X, w):
    """Representative of ``w`` orthogonal (for ``-B`` on both factors) to the
    gauge directions."""
    Gm = gauge_basis(pair, X)
    M = _product_metric(pair)
    z = w.stacked()
    c = np.linalg.solve(Gm.T @ M @ Gm, Gm.T @ M @ z)
    z = z - Gm @ c
    d = pair.algebra.dim
    return TangentRep(z[:d], z[d:])


def gauge_distance(pair, X, w1, w2):
    """Max-norm of ``w1 - w2`` modulo gauge."""
    diff = canonical_rep(pair, X, TangentRep(w1.Y - w2.Y, w1.V - w2.V))
    return float(np.max(np.abs(diff.stacked())))


def J_in_chart(pair, point, radius=1.0, return_cond=False):
    """Matrix of ``J`` in the chart basis ``(d/da, d/dv)`` at ``point``."""
    if not isinstance(point, ChartPoint):
        point = ChartPoint.from_array(pair, point)
    X = pair.P @ point.v
    basis = chart_tangent_basis(pair, point, radius)
    ops = _operators(pair, X)
    L = pair.algebra
    # rows: Y (dim g) + V in p-coordinates (n); columns: 2n chart vectors + k gauge
    to_p = pair.P.T @ L.metric
    def rows(w):
        return np.concatenate([w.Y, to_p @ w.V])
    Gm = gauge_basis(pair, X)
    M = np.column_stack([rows(w) for w in basis]
                        + [np.concatenate([Gm[: L.dim, i], to_p @ Gm[L.dim:, i]])
                           for i in range(pair.k_sub.dim)])
    rhs = np.column_stack([rows(stenzel_J(pair, X, w, ops)) for w in basis])
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e10:
        raise NumericalDegeneracyError("singular gauge-reduction system", condition=cond)
    C = np.linalg.solve(M, rhs)
    Jm = C[: 2 * pair.n]
    return (Jm, cond) if return_cond else Jm


class StenzelModel(ChartModel):
    """``T(G/K)`` with Stenzel's structure and ``tau = -B(v, v)`` in the slice chart."""

    ma_kind = "sqrt_tau"

    def __init__(self, pair, radius=1.0):
        if isinstance(pair, str):
            pair = build_pair(pair)
        self.pair = pair
        self.name = pair.name
        self.n = pair.n
        self.radius = radius

    def J(self, p):
        return J_in_chart(self.pair, p, radius=np.inf)

    def tau(self, p):
        v = np.asarray(p, float)[self.n:]
        return float(v @ v)

    def tau_grad(self, p):
        p = np.asarray(p, float)
        return np.concatenate([np.zeros(self.n), 2.0 * p[self.n:]])


def chart_condition(model, points):
    """Worst condition number of the chart reduction system over ``points``."""
    worst = 0.0
    for p in points:
        _, c = J_in_chart(model.pair, p, radius=model.radius, return_cond=True)
        worst = max(worst, c)
    return worst


def _dJ(model, p, h):
    p = np.asarray(p, float)
    out = []
    for l in range(model.dim):
        e = np.zeros(model.dim)
        e[l] = h
        out.append((model.J(p + e) - model.J(p - e)) / (2 * h))
    return np.array(out)  # out[l] = d J / dx_l


def _nijenhuis_from(J, dJ, i, j):
    # coordinate fields commute; A = J d_i, B = J d_j
    A, B = J[:, i], J[:, j]
    dA = np.einsum("l,lk->k", B, dJ[:, :, i])  # (B . grad) A
    dB = np.einsum("l,lk->k", A, dJ[:, :, j])  # (A . grad) B
    return (dB - dA) + J @ dJ[j][:, i] - J @ dJ[i][:, j]


def nijenhuis_residual(model, p, i, j, h=1e-3):
    """Max-norm of ``N(d_i, d_j) = [Jd_i, Jd_j] - J[Jd_i, d_j] - J[d_i, Jd_j]``
    by central differences of the J-matrix field."""
    model.require(p, margin=2 * h)
    return float(np.max(np.abs(_nijenhuis_from(model.J(p), _dJ(model, p, h), i, j))))


def nijenhuis_max(model, p, h=1e-3):
    """Max of the residual over all coordinate pairs ``i < j``."""
    model.require(p, margin=2 * h)
    J = model.J(p)
    dJ = _dJ(model, p, h)
    return max(float(np.max(np.abs(_nijenhuis_from(J, dJ, i, j))))
               for i in range(model.dim) for j in range(i + 1, model.dim))


def translate_point(pair, g, p):
    """Chart coordinates of ``g . psi(p)`` using the matrix realization.

    ``g exp(a) = exp(a') k`` is solved through ``exp(2a') = h sigma(h)^{-1}``
    with ``h = g exp(a)`` and ``sigma`` the Cartan involution.
    """
    L = pair.algebra
    n = pair.n
    p = np.asarray(p, float)
    A = L.to_matrix(pair.P @ p[:n])
    h = g @ scipy.linalg.expm(A)
    S = pair.involution
    A2 = scipy.linalg.logm(h @ np.linalg.inv(S @ h @ np.linalg.inv(S))) / 2
    a_new = pair.p_coords(L.from_matrix(A2))
    k = scipy.linalg.expm(-L.to_matrix(pair.P @ a_new)) @ h
    Vm = k @ L.to_matrix(pair.P @ p[n:]) @ np.linalg.inv(k)
    v_new = pair.p_coords(L.from_matrix(Vm))
    return np.concatenate([a_new, v_new])
