"""The Monge-Ampère field ``Z``, its flows, and leaf certificates.

``Z`` is the solution of ``dd^c tau(JZ, JX) = X(tau)`` for all ``X``, i.e.

    (J^T Omega J)^T Z = grad tau,

and ``H`` (the normal distribution) is the ``dd^c tau``-orthogonal complement
of ``span{Z, JZ}``.  The system matrix is antisymmetric, so ``Z(tau) = 0``
holds exactly for the computed field, not only up to finite-difference error.

Flows use the classical fourth-order Runge-Kutta scheme with a fixed step.
Two normalizations of the field are available: ``raw`` (as defined above)
and ``kahler`` (divided by its ``H_tau``-length).  On the flat model the raw
``Z`` generates ``z -> e^{-is/2} z``; on tangent bundles the raw field is
``sqrt(tau)`` times a fundamental field, and the unit-length field is the one
whose ``JZ``-flow is the complexified one-parameter group.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ChartError, NumericalDegeneracyError, UsageError
from .pluripotential import ExhaustionField, _tols, ddc_form, ddc_richardson
from .report import CertificateReport

__all__ = [
    "FoliationFrame",
    "LeafTrace",
    "solve_Z",
    "field_vector",
    "integrate_flow",
    "rk4_ratio",
    "z_bracket_residual",
    "leaf_harmonicity_certificate",
    "export_traces",
    "default_normalization",
]


@dataclass(frozen=True, eq=False)
class FoliationFrame:
    point: np.ndarray
    Zvec: np.ndarray
    JZvec: np.ndarray
    Hbasis: np.ndarray  # 2n x (2n-2), columns span the normal distribution
    residual: float
    condition: float
    Htau: np.ndarray
    cross_block: float  # relative |H_tau(Z-span, H-span)|


def solve_Z(model, point, h=1e-3, richardson=True, permutation=None):
    """Solve the defining system for ``Z`` at ``point``.

    ``permutation`` reorders the chart coordinates before solving and maps
    the answer back; the result must not depend on it.
    """
    f = ExhaustionField(model, "tau")
    s = ddc_richardson(f, point, h) if richardson else ddc_form(f, point, h)
    J = model.J(point)
    g = f.grad(point, h)
    M = (J.T @ s.ddc @ J).T
    dim = M.shape[0]
    perm = np.arange(dim) if permutation is None else np.asarray(permutation)
    P = np.eye(dim)[:, perm]  # x = P y
    Mp = P.T @ M @ P
    cond = float(np.linalg.cond(Mp))
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalDegeneracyError("dd^c tau is degenerate at this point", condition=cond)
    Z = P @ np.linalg.solve(Mp, P.T @ g)
    residual = float(np.max(np.abs(M @ Z - g)))
    JZ = J @ Z
    Hb = scipy.linalg.null_space(np.vstack([Z @ s.ddc, JZ @ s.ddc]))
    if Hb.shape[1] != dim - 2:
        raise NumericalDegeneracyError("Z and JZ are not independent for dd^c tau")
    Zs = np.column_stack([Z, JZ])
    scale = float(np.linalg.norm(s.H, 2) * np.linalg.norm(Zs, 2))
    cross = float(np.max(np.abs(Zs.T @ s.H @ Hb))) / scale
    return FoliationFrame(np.asarray(point, float), Z, JZ, Hb, residual, cond, s.H, cross)


def default_normalization(model):
    return "kahler" if model.ma_kind == "sqrt_tau" else "raw"


def field_vector(model, p, which="Z", normalize="raw", h=1e-3, richardson=True):
    """``Z`` or ``JZ`` at ``p`` under the chosen normalization."""
    if which not in ("Z", "JZ"):
        raise UsageError(f"field must be 'Z' or 'JZ', got {which!r}")
    if normalize not in ("raw", "kahler"):
        raise UsageError(f"unknown normalization {normalize!r}")
    fr = solve_Z(model, p, h, richardson)
    v = fr.Zvec if which == "Z" else fr.JZvec
    if normalize == "kahler":
        v = v / np.sqrt(fr.Zvec @ fr.Htau @ fr.Zvec)
    return v


@dataclass
class LeafTrace:
    seed: np.ndarray
    field: str
    normalize: str
    dt: float
    t: np.ndarray
    points: np.ndarray
    tau: np.ndarray
    order: int = 4
    truncated: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def sqrt_tau(self):
        return np.sqrt(self.tau)


def _rk4_step(F, p, dt):
    k1 = F(p)
    k2 = F(p + 0.5 * dt * k1)
    k3 = F(p + 0.5 * dt * k2)
    k4 = F(p + dt * k3)
    return p + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_flow(model, which, seed, t_max, dt, normalize=None, h=1e-3, richardson=True):
    """Fixed-step RK4 trace of the flow of ``Z`` or ``JZ`` from ``seed``.

    ``t_max`` may be negative (backward flow).  The trace is truncated and
    flagged when the next step, or one of its stages, would leave the chart
    (with the FD margin) or come within the finite-difference stencil of
    ``tau = 0``.
    """
    normalize = normalize or default_normalization(model)
    if dt <= 0:
        raise UsageError("dt must be positive")
    steps = int(round(abs(t_max) / dt))
    if steps == 0 or not np.isclose(steps * dt, abs(t_max), rtol=1e-9, atol=0):
        raise UsageError("t_max must be a nonzero multiple of dt")
    sgn = np.sign(t_max)
    seed = np.asarray(seed, float)
    model.require(seed, margin=2 * h)

    def inside(p):
        return model.in_chart(p, margin=4 * h) and np.sqrt(model.tau(p)) > 8 * h

    def F(p):
        # stages must obey the same guard: past tau = 0 the field changes sign
        if not inside(p):
            raise ChartError("Runge-Kutta stage left the admissible region")
        return field_vector(model, p, which, normalize, h, richardson)

    pts, ts = [seed], [0.0]
    truncated = False
    p = seed
    for k in range(steps):
        try:
            q = _rk4_step(F, p, sgn * dt)
        except (ChartError, NumericalDegeneracyError):
            truncated = True
            break
        if not inside(q):
            truncated = True
            break
        p = q
        pts.append(p)
        ts.append(sgn * (k + 1) * dt)
    pts = np.array(pts)
    return LeafTrace(seed=seed, field=which, normalize=normalize, dt=dt, t=np.array(ts),
                     points=pts, tau=np.array([model.tau(x) for x in pts]),
                     truncated=truncated, meta={"h": h, "richardson": richardson})


def rk4_ratio(model, which, seed, t_max, dt, normalize=None, h=1e-3):
    """Endpoint differences ``|x_dt - x_dt/2| / |x_dt/2 - x_dt/4|`` (about 16
    for a fourth-order scheme)."""
    ends = []
    for d in (dt, dt / 2, dt / 4):
        tr = integrate_flow(model, which, seed, t_max, d, normalize, h)
        if tr.truncated:
            raise UsageError("trace left the chart during the step-halving check")
        ends.append(tr.points[-1])
    e1 = float(np.max(np.abs(ends[0] - ends[1])))
    e2 = float(np.max(np.abs(ends[1] - ends[2])))
    return {"e1": e1, "e2": e2, "ratio": e1 / e2 if e2 > 0 else float("inf")}


def z_bracket_residual(model, point, h=1e-3, step=1e-3):
    """Part of ``[Z, JZ]`` (central differences of the raw fields) lying
    outside ``span{Z, JZ}``, relative to ``max(|[Z, JZ]|, |Z|^2)``."""
    p = np.asarray(point, float)
    dim = p.size
    DZ = np.empty((dim, dim))
    DJ = np.empty((dim, dim))
    for l in range(dim):
        e = np.zeros(dim)
        e[l] = step
        DZ[:, l] = (field_vector(model, p + e, "Z", h=h) - field_vector(model, p - e, "Z", h=h)) / (2 * step)
        DJ[:, l] = (field_vector(model, p + e, "JZ", h=h) - field_vector(model, p - e, "JZ", h=h)) / (2 * step)
    fr = solve_Z(model, p, h)
    Z, JZ = fr.Zvec, fr.JZvec
    br = DJ @ Z - DZ @ JZ
    S = np.column_stack([Z, JZ])
    coef, *_ = np.linalg.lstsq(S, br, rcond=None)
    out = br - S @ coef
    scale = max(float(np.linalg.norm(br)), float(Z @ Z))
    return {"bracket": br, "outside": float(np.linalg.norm(out)) / scale,
            "coefficients": coef}


def leaf_harmonicity_certificate(model, seeds, t_max=1.0, dt=0.05, h=1e-3, kind=None,
                                 tolerances=None, ratio_seed=None):
    """``u = f(tau)`` affine along ``JZ``-flows and ``tau`` constant along ``Z``-flows.

    ``f`` is ``sqrt`` for ``kind='sqrt_tau'`` and ``log`` for ``'log_tau'``
    (default: the model's Monge-Ampère kind).  One step-halving RK4 check is
    made on the ``Z``-flow from ``ratio_seed`` (default: first seed).
    """
    tol = _tols(tolerances)
    kind = kind or model.ma_kind
    f = {"sqrt_tau": np.sqrt, "log_tau": np.log}.get(kind)
    if f is None:
        raise UsageError(f"unsupported kind {kind!r}")
    norm = default_normalization(model)
    rep = CertificateReport(f"leaf[{kind}]")
    worst_aff, worst_drift, monotone, traces = 0.0, 0.0, True, []
    for idx, s in enumerate(seeds):
        tj = integrate_flow(model, "JZ", s, t_max, dt, norm, h)
        tz = integrate_flow(model, "Z", s, t_max, dt, norm, h)
        traces += [tj, tz]
        g = f(tj.tau)
        if len(g) >= 3:
            c = np.polyfit(tj.t, g, 1)
            rng_g = float(np.ptp(g))
            dev = float(np.max(np.abs(g - np.polyval(c, tj.t)))) / (rng_g or 1.0)
            worst_aff = max(worst_aff, dev)
        monotone &= bool(np.all(np.diff(tj.tau) > 0))
        drift = float(np.max(np.abs(tz.tau - tz.tau[0])))
        worst_drift = max(worst_drift, drift)
        if tj.truncated or tz.truncated:
            rep.failures.append({"index": idx, "truncated": True})
    rep.add("affine_deviation", worst_aff, tol["affine"], "<")
    rep.add("z_flow_tau_drift", worst_drift, tol["z_drift"], "<")
    rep.add("monotone_jz", int(monotone), 1, "==")
    rs = seeds[0] if ratio_seed is None else ratio_seed
    r = rk4_ratio(model, "Z", rs, t_max, 4 * dt, norm, h)
    rep.add("rk4_ratio", r["ratio"], (tol["rk4_lo"], tol["rk4_hi"]), "in")
    rep.data.update(traces=traces, rk4=r)
    return rep


def export_traces(traces, path):
    """Write traces as comma-separated rows ``(trace, field, t, coords..., tau, sqrt_tau)``."""
    traces = list(traces)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if traces:
            d = traces[0].points.shape[1]
            w.writerow(["trace", "field", "t"] + [f"x{i}" for i in range(d)] + ["tau", "sqrt_tau"])
        for k, tr in enumerate(traces):
            for t, p, tau in zip(tr.t, tr.points, tr.tau):
                w.writerow([k, tr.field, repr(float(t))] + [repr(float(x)) for x in p]
                           + [repr(float(tau)), repr(float(np.sqrt(tau)))])
