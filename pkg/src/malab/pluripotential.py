"""Finite-difference ``dd^c`` of exhaustions and the psh / Monge-Ampère certificates.

For a function ``u`` on a chart with structure field ``J(p)``:

    beta(X) = -du(JX),          i.e.  beta = -J(p)^T grad u(p)
    dd^c u  = d beta,           Omega_ij = d_i beta_j - d_j beta_i
    H(X, Y) = dd^c u(X, JY),    H = sym(Omega J)

Coordinate fields commute, so no bracket term appears.  With this sign
``H`` is positive for strictly plurisubharmonic ``u``; on the flat model
``H_tau = 4 I`` (see :mod:`malab.euclidean`).
"""

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ChartError, UsageError
from .report import DEFAULT_TOLERANCES, CertificateReport

__all__ = [
    "ExhaustionField",
    "HermitianSample",
    "hermitian_from_ddc",
    "ddc_form",
    "ddc_richardson",
    "psh_certificate",
    "ma_certificate",
    "ma_profile",
    "kernel_alignment",
    "export_spectra",
    "KINDS",
]

KINDS = ("tau", "sqrt_tau", "log_tau", "custom")


class ExhaustionField:
    """``u = f(tau)`` for the named kinds, or an arbitrary callable.

    ``custom`` fields take ``func`` (chart point -> float) and optionally
    ``grad``.  :meth:`compose` builds ``f o tau`` with the chain-rule gradient.
    """

    def __init__(self, model, kind="tau", func=None, grad=None):
        if kind not in KINDS:
            raise UsageError(f"unknown exhaustion kind {kind!r}")
        if (kind == "custom") != (func is not None):
            raise UsageError("func is required for (and only for) kind='custom'")
        self.model = model
        self.kind = kind
        self._func = func
        self._grad = grad

    @classmethod
    def compose(cls, model, f, fprime):
        """``u = f(tau)``; ``fprime`` is used for the analytic gradient when
        the model provides ``tau_grad``."""
        def func(p):
            return f(model.tau(p))

        grad = None
        if model.tau_grad(np.zeros(model.dim)) is not None:
            def grad(p):
                return fprime(model.tau(p)) * model.tau_grad(p)
        return cls(model, "custom", func=func, grad=grad)

    @property
    def singular_at_zero(self):
        return self.kind in ("sqrt_tau", "log_tau")

    def __call__(self, p):
        if self.kind == "custom":
            return float(self._func(p))
        t = self.model.tau(p)
        if self.kind == "tau":
            return t
        if t <= 0.0:
            raise ChartError(f"{self.kind} undefined at tau = {t}")
        return float(np.sqrt(t)) if self.kind == "sqrt_tau" else float(np.log(t))

    def grad(self, p, h=None):
        """Gradient in chart coordinates; analytic when available, otherwise
        central differences with step ``h``."""
        g = self._analytic_grad(p)
        if g is not None:
            return g
        if h is None:
            raise UsageError("no analytic gradient; pass a finite-difference step")
        p = np.asarray(p, float)
        out = np.empty(p.size)
        for i in range(p.size):
            e = np.zeros(p.size)
            e[i] = h
            out[i] = (self(p + e) - self(p - e)) / (2 * h)
        return out

    def _analytic_grad(self, p):
        if self.kind == "custom":
            return None if self._grad is None else np.asarray(self._grad(p), float)
        tg = self.model.tau_grad(p)
        if tg is None:
            return None
        if self.kind == "tau":
            return tg
        t = self.model.tau(p)
        if t <= 0.0:
            raise ChartError(f"{self.kind} undefined at tau = {t}")
        return tg / (2 * np.sqrt(t)) if self.kind == "sqrt_tau" else tg / t


@dataclass(frozen=True, eq=False)
class HermitianSample:
    point: np.ndarray
    ddc: np.ndarray  # antisymmetric 2-form in the chart basis
    H: np.ndarray  # symmetrized dd^c u(., J .)
    eigenvalues: np.ndarray  # ascending
    asymmetry: float  # |Omega J - (Omega J)^T| / |H|
    j_defect: float  # |J^T H J - H| / |H|
    fd_error: float = float("nan")  # |Omega(h) - Omega(h/2)| when extrapolated

    @property
    def mean(self):
        """``trace(H) / 2n``, the scale used by relative tolerances."""
        return float(np.trace(self.H)) / self.H.shape[0]


def hermitian_from_ddc(point, ddc, J, fd_error=float("nan")):
    ddc = 0.5 * (ddc - ddc.T)
    HJ = ddc @ J
    H = 0.5 * (HJ + HJ.T)
    scale = max(float(np.max(np.abs(H))), np.finfo(float).tiny)
    return HermitianSample(
        point=np.asarray(point, float),
        ddc=ddc,
        H=H,
        eigenvalues=np.linalg.eigvalsh(H),
        asymmetry=float(np.max(np.abs(HJ - HJ.T))) / scale,
        j_defect=float(np.max(np.abs(J.T @ H @ J - H))) / scale,
        fd_error=fd_error,
    )


def _check_domain(field, p, h):
    model = field.model
    model.require(p, margin=2 * h)
    if field.singular_at_zero and np.sqrt(model.tau(p)) < 4 * h:
        raise ChartError(f"point too close to tau = 0 for kind {field.kind} "
                         f"(sqrt tau = {np.sqrt(model.tau(p)):.3g}, h = {h})")


def _beta(field, p, h):
    return -field.model.J(p).T @ field.grad(p, h)


def _ddc_raw(field, p, h):
    p = np.asarray(p, float)
    D = np.empty((p.size, p.size))
    for i in range(p.size):
        e = np.zeros(p.size)
        e[i] = h
        D[i] = (_beta(field, p + e, h) - _beta(field, p - e, h)) / (2 * h)
    return D - D.T


def ddc_form(field, point, h=1e-3):
    """Central-difference :class:`HermitianSample` of ``dd^c u`` at ``point``."""
    _check_domain(field, point, h)
    return hermitian_from_ddc(point, _ddc_raw(field, point, h), field.model.J(point))


def ddc_richardson(field, point, h=1e-3):
    """``dd^c u`` extrapolated from steps ``h`` and ``h/2``; ``fd_error`` holds
    the max-norm difference between the two raw estimates."""
    _check_domain(field, point, h)
    O1 = _ddc_raw(field, point, h)
    O2 = _ddc_raw(field, point, h / 2)
    return hermitian_from_ddc(point, (4 * O2 - O1) / 3, field.model.J(point),
                              fd_error=float(np.max(np.abs(O1 - O2))))


def _tols(overrides):
    tol = dict(DEFAULT_TOLERANCES)
    if overrides:
        unknown = set(overrides) - set(tol)
        if unknown:
            raise UsageError(f"unknown tolerance(s): {sorted(unknown)}")
        tol.update(overrides)
    return tol


def _sample(field, p, h, richardson):
    return ddc_richardson(field, p, h) if richardson else ddc_form(field, p, h)


def psh_certificate(model, points, h=1e-3, richardson=True):
    """Strict plurisubharmonicity of ``tau``: ``min eig H_tau > 0`` at every point."""
    field = ExhaustionField(model, "tau")
    rep = CertificateReport("psh")
    mins, spectra = [], []
    for idx, p in enumerate(points):
        s = _sample(field, p, h, richardson)
        spectra.append((np.asarray(p, float), s.eigenvalues))
        mins.append(float(s.eigenvalues[0]))
        if s.eigenvalues[0] <= 0:
            rep.failures.append({"index": idx, "point": list(map(float, p)),
                                 "eigenvalues": list(map(float, s.eigenvalues))})
    margin = min(mins) if mins else float("nan")
    rep.add("min_eigenvalue", margin, 0.0, ">")
    rep.data.update(samples=len(mins), spectra=spectra)
    return rep


def ma_profile(sample, tol=None):
    """Eigenvalue profile of one sample: counts and the normalized determinant."""
    tol = _tols(tol)
    lam = sample.eigenvalues
    mean = sample.mean
    m = abs(mean) if mean != 0 else 1.0
    null = int(np.sum(np.abs(lam) < tol["eps_null"] * m))
    pos = int(np.sum(lam > tol["eps_pos"] * m))
    det_ratio = float(abs(np.prod(lam / m)))
    ok = (mean > 0 and null == 2 and pos == lam.size - 2
          and det_ratio < tol["eps_det"] and lam[0] >= -tol["eps_null"] * m)
    return {"mean": mean, "null": null, "positive": pos, "det_ratio": det_ratio,
            "min_scaled": float(lam[0] / m), "ok": bool(ok)}


def ma_certificate(model, kind, points, h=1e-3, tolerances=None, negative_control=False,
                   richardson=True):
    """Degenerate Monge-Ampère profile of ``u = f(tau)`` at every point.

    ``kind`` must match ``model.ma_kind`` (``log_tau`` for the flat model,
    ``sqrt_tau`` for tangent bundles) unless ``negative_control`` is set, in
    which case the mismatched kind is evaluated and is expected to fail.
    """
    if kind not in ("sqrt_tau", "log_tau"):
        raise UsageError(f"Monge-Ampère kind must be sqrt_tau or log_tau, got {kind!r}")
    if kind != model.ma_kind and not negative_control:
        raise UsageError(f"kind {kind} does not solve the equation on {model.name} "
                         f"(expected {model.ma_kind}); use negative_control=True")
    tol = _tols(tolerances)
    field = ExhaustionField(model, kind)
    rep = CertificateReport(f"ma[{kind}]")
    worst_det, worst_neg, spectra = 0.0, 0.0, []
    for idx, p in enumerate(points):
        s = _sample(field, p, h, richardson)
        prof = ma_profile(s, tol)
        spectra.append((np.asarray(p, float), s.eigenvalues))
        worst_det = max(worst_det, prof["det_ratio"])
        worst_neg = min(worst_neg, prof["min_scaled"])
        if not prof["ok"]:
            rep.failures.append({"index": idx, "point": list(map(float, p)),
                                 "eigenvalues": list(map(float, s.eigenvalues)), **prof})
    rep.add("profile_violations", len(rep.failures), 0, "==")
    rep.add("det_ratio", worst_det, tol["eps_det"], "<")
    rep.add("min_scaled_eigenvalue", worst_neg, -tol["eps_null"], ">=")
    rep.data.update(samples=len(spectra), spectra=spectra, negative_control=negative_control)
    return rep


def kernel_alignment(model, point, h=1e-3, kind=None):
    """Largest principal angle between the near-null eigenspace of ``H_u`` and
    ``span{Z, JZ}``."""
    from .foliation import solve_Z

    field = ExhaustionField(model, kind or model.ma_kind)
    s = ddc_richardson(field, point, h)
    w, V = np.linalg.eigh(s.H)
    null = V[:, np.argsort(np.abs(w))[:2]]
    frame = solve_Z(model, point, h)
    Zspan = np.column_stack([frame.Zvec, frame.JZvec])
    return float(np.max(scipy.linalg.subspace_angles(null, Zspan)))


def export_spectra(spectra, path):
    """Write ``(point, eigenvalues)`` rows as comma-separated text."""
    spectra = list(spectra)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if spectra:
            d, m = spectra[0][0].size, spectra[0][1].size
            w.writerow(["index"] + [f"x{i}" for i in range(d)] + [f"lambda{i}" for i in range(m)])
        for idx, (p, lam) in enumerate(spectra):
            w.writerow([idx] + [repr(float(x)) for x in p] + [repr(float(x)) for x in lam])
