"""Closed-form reference model: ``C^n`` with ``tau = |z|^2``.

Chart coordinates are ``p = (x, y)`` with ``z = x + i y``, so the structure is
the constant block matrix of :func:`malab.chart.flat_J`.  All numerical
operators are calibrated here; the constant :data:`DDC_CONSTANT` is the
value of ``H_tau`` (a multiple of the identity) under the convention
``beta(X) = -du(JX)``, ``H(X, Y) = dd^c u(X, JY)``.
"""

import numpy as np

from .chart import ChartModel, flat_J
from .errors import UnsupportedModelError, UsageError
from .pluripotential import HermitianSample, hermitian_from_ddc

__all__ = [
    "EuclideanModel",
    "DDC_CONSTANT",
    "LOG_SLOPE",
    "realify",
    "analytic_ddc",
    "log_singularity_probe",
]

#: ``dd^c |z|^2 (X, JX) = DDC_CONSTANT |X|^2``
DDC_CONSTANT = 4.0
#: slope of ``log tau(r w)`` against ``log r``
LOG_SLOPE = 2.0


def realify(A):
    """Real ``2n x 2n`` matrix of the complex-linear map ``w -> A w`` in
    ``(x, y)`` block coordinates."""
    A = np.asarray(A, complex)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def to_complex(p):
    p = np.asarray(p, float)
    n = p.size // 2
    return p[:n] + 1j * p[n:]


def from_complex(z):
    z = np.asarray(z, complex)
    return np.concatenate([z.real, z.imag])


class EuclideanModel(ChartModel):
    """``C^n`` (``2 <= n <= 4``) with the standard structure and ``tau = |z|^2``."""

    ma_kind = "log_tau"
    radius = np.inf

    def __init__(self, n=2):
        if int(n) != n or not 2 <= n <= 4:
            raise UnsupportedModelError(f"unsupported model: euclidean({n})")
        self.n = int(n)
        self.name = f"euclidean({self.n})"
        self._J = flat_J(self.n)
        self._J.setflags(write=False)

    def J(self, p):
        return self._J

    def tau(self, p):
        p = np.asarray(p, float)
        return float(p @ p)

    def tau_grad(self, p):
        return 2.0 * np.asarray(p, float)


def _levi(kind, z):
    """Complex Hessian ``d^2 u / dz_j dz-bar_k`` of the named exhaustion."""
    z = np.asarray(z, complex)
    t = float(np.vdot(z, z).real)
    if kind == "tau":
        return np.eye(z.size, dtype=complex)
    if kind == "log_tau":
        if t == 0.0:
            raise UsageError("log tau is singular at z = 0")
        return np.eye(z.size) / t - np.outer(z.conj(), z) / t**2
    raise UsageError(f"no closed form for kind {kind!r}")


def analytic_ddc(kind, z):
    """Exact :class:`HermitianSample` of ``tau`` or ``log tau`` at ``z``.

    ``z`` is a complex vector or a real chart point of even length.
    """
    z = np.asarray(z)
    if not np.iscomplexobj(z):
        z = to_complex(z)
    n = z.size
    # the real form of w -> h w is the Hermitian form Re(conj(X)^T h Y) with
    # h_jk = d^2u / dz-bar_j dz_k, the transpose of the Levi matrix
    H = DDC_CONSTANT * realify(_levi(kind, z).T)
    J = flat_J(n)
    # H = Omega J  =>  Omega = -H J
    ddc = -H @ J
    return hermitian_from_ddc(from_complex(z), ddc, J)


def log_singularity_probe(direction, radii):
    """Fit ``log tau(r w)`` against ``log r`` along the ray through ``w``.

    Returns a dict with ``slope``, ``intercept``, the remainder bound
    ``max |log tau - slope log r - intercept|`` and ``slope_ok`` (within 1 %
    of :data:`LOG_SLOPE`).
    """
    w = np.asarray(direction)
    if not np.iscomplexobj(w):
        w = to_complex(w) if w.size % 2 == 0 and w.size >= 4 else w.astype(complex)
    w = w / np.linalg.norm(w)
    r = np.asarray(radii, float)
    if np.any(r <= 0) or np.any(r > 1):
        raise UsageError("radii must lie in (0, 1]")
    u = np.array([np.log(float(np.vdot(ri * w, ri * w).real)) for ri in r])
    slope, intercept = np.polyfit(np.log(r), u, 1)
    remainder = float(np.max(np.abs(u - slope * np.log(r) - intercept)))
    return {
        "slope": float(slope),
        "intercept": float(intercept),
        "remainder": remainder,
        "slope_ok": bool(abs(slope - LOG_SLOPE) <= 0.01 * LOG_SLOPE),
    }
