"""Certificate suites and the deterministic batch run behind the command line.

Every suite draws its samples from ``numpy.random.default_rng([seed, k])``
where ``k`` is the suite's fixed index in :data:`SUITES`, so a suite's
samples do not depend on which other suites are selected.
"""

from dataclasses import dataclass, field
import os
import time

import numpy as np

from .catalog import (catalog, check_entry, export_catalog, load_catalog,
                      rows_without_quadric_counterpart)
from .chart import sample_points
from .deformation import (DeformedStructure, boundedness_probe, conj_bump_map,
                          deformation_tensor, identity_map, leaf_phi_field,
                          leafwise_rotation, require_leaf_premise, unitary_map)
from .errors import MalabError, PremiseViolation, UsageError
from .euclidean import EuclideanModel, analytic_ddc
from .foliation import leaf_harmonicity_certificate, solve_Z, z_bracket_residual
from .lie import AD_FUNCTIONS, analytic_ad, bracket, jacobi_residual
from .models import load_model
from .pluripotential import (ExhaustionField, ddc_form, ddc_richardson, kernel_alignment,
                             ma_certificate, psh_certificate)
from .report import DEFAULT_TOLERANCES, CertificateReport
from .stenzel import (J_in_chart, TangentRep, chart_tangent_basis, gauge_distance,
                      nijenhuis_max, stenzel_J)
from .symmetric import cartan_residuals, rank_one_kernel_dim, random_unit_p, verify_lemma33

__all__ = ["SUITES", "RunConfig", "RunReport", "run", "default_suites", "load_tolerance_file",
           "SCHEMA", "TOLERANCE_ENV"]

SCHEMA = "malab-report/1"
TOLERANCE_ENV = "MALAB_TOLERANCES"
SUITES = ("algebra", "lemma33", "structure", "psh", "ma", "foliation", "deformation", "catalog")

# sample counts used when --samples is not given
DEFAULT_SAMPLES = {"algebra": 20, "lemma33": 20, "structure": 100, "psh": 200, "ma": 200,
                   "foliation": 20, "deformation": 20}
# |v| lower bound for Monge-Ampère sampling (keeps the stencil off tau = 0)
VMIN = 0.2


def default_suites(model):
    if isinstance(model, EuclideanModel):
        return ("psh", "ma", "foliation", "deformation", "catalog")
    return ("algebra", "lemma33", "structure", "psh", "ma", "foliation", "catalog")


def load_tolerance_file(path):
    """``KEY=VALUE`` lines; ``#`` starts a comment."""
    out = {}
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{ln}: expected KEY=VALUE")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = float(v)
    return out


@dataclass
class RunConfig:
    model: str = "euclidean(2)"
    suites: tuple = ()  # empty: the model's defaults
    samples: int = None  # None: per-suite defaults
    h: float = 1e-3
    dt: float = 0.05
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    ma_kind: str = None
    out: str = None

    def resolved_tolerances(self):
        tol = dict(DEFAULT_TOLERANCES)
        path = os.environ.get(TOLERANCE_ENV)
        if path:
            tol.update(load_tolerance_file(path))
        tol.update(self.tolerances)
        unknown = set(tol) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise UsageError(f"unknown tolerance(s): {sorted(unknown)}")
        return tol


@dataclass
class RunReport:
    config: RunConfig
    tolerances: dict
    suites: dict  # name -> CertificateReport
    timings: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.suites.values())

    def lines(self, timings=False):
        c = self.config
        out = [f"schema={SCHEMA}",
               f"config.model={c.model}",
               f"config.suites={','.join(self.suites)}",
               f"config.samples={'default' if c.samples is None else c.samples}",
               f"config.h={c.h!r}",
               f"config.dt={c.dt!r}",
               f"config.seed={c.seed}",
               f"config.ma_kind={c.ma_kind or 'default'}"]
        out += [f"tol.{k}={v!r}" for k, v in sorted(self.tolerances.items())]
        for name, rep in self.suites.items():
            out.append(f"suite.{name}.status={'pass' if rep.passed else 'fail'}")
            for chk in rep.checks:
                pre = f"suite.{name}.check.{chk.name}"
                out += [f"{pre}.value={_fmt(chk.value)}", f"{pre}.op={chk.op}",
                        f"{pre}.limit={_fmt(chk.limit)}",
                        f"{pre}.passed={int(chk.passed)}"]
            out.append(f"suite.{name}.failures={len(rep.failures)}")
            for i, f in enumerate(rep.failures[:20]):
                out.append(f"suite.{name}.failure.{i}={_fmt_failure(f)}")
            if timings and name in self.timings:
                out.append(f"suite.{name}.wall_time={self.timings[name]:.3f}")
        out.append(f"status={'pass' if self.passed else 'fail'}")
        return out

    def text(self, timings=False):
        return "\n".join(self.lines(timings)) + "\n"


def _fmt(v):
    if isinstance(v, tuple):
        return ":".join(_fmt(x) for x in v)
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _fmt_failure(f):
    parts = []
    for k, v in f.items():
        if isinstance(v, (list, tuple)):
            v = "[" + " ".join(_fmt(x) for x in v) + "]"
        elif isinstance(v, (int, float, np.floating, np.integer, bool)):
            v = _fmt(v)
        parts.append(f"{k}:{v}")
    return ";".join(parts)


# ---------------------------------------------------------------- suites

def _rng(cfg, suite):
    return np.random.default_rng([cfg.seed, SUITES.index(suite)])


def _count(cfg, suite):
    return cfg.samples if cfg.samples is not None else DEFAULT_SAMPLES[suite]


def _require_pair(model, suite):
    if isinstance(model, EuclideanModel):
        raise UsageError(f"suite {suite!r} needs a symmetric-pair model, not {model.name}")
    return model.pair


def suite_algebra(model, cfg, tol):
    pair = _require_pair(model, "algebra")
    L = pair.algebra
    rng = _rng(cfg, "algebra")
    rep = CertificateReport("algebra")
    c = L.structure_constants
    ad = L.ad_basis
    trace_killing = np.einsum("ikl,jlk->ij", ad, ad)
    jac, even, comm, pres = 0.0, 0.0, 0.0, 0.0
    for _ in range(_count(cfg, "algebra")):
        X, Y, W = rng.standard_normal((3, L.dim))
        jac = max(jac, jacobi_residual(L, X, Y, W))
        V = pair.P @ rng.standard_normal(pair.n)
        T = analytic_ad(L, V, "T")
        even = max(even, float(np.max(np.abs(T - analytic_ad(L, -V, "T")))))
        adV = np.tensordot(V, ad, axes=(0, 0))
        comm = max(comm, float(np.max(np.abs(T @ adV - adV @ T))))
        pres = max(pres, float(np.max(np.abs(pair.Pp @ T @ pair.K))),
                   float(np.max(np.abs(pair.Pk @ T @ pair.P))))
        for fn in AD_FUNCTIONS:
            if not np.all(np.isfinite(analytic_ad(L, V, fn))):
                rep.failures.append({"function": fn})
    rep.add("antisymmetry", float(np.max(np.abs(c + c.transpose(1, 0, 2)))), tol["cartan"])
    rep.add("jacobi", jac, tol["cartan"])
    rep.add("killing_trace", float(np.max(np.abs(L.killing - trace_killing))), tol["cartan"])
    rep.add("killing_max_eigenvalue", float(np.linalg.eigvalsh(L.killing)[-1]), 0.0)
    for k, v in cartan_residuals(pair).items():
        rep.add(f"cartan_{k}", v, tol["cartan"])
    rep.add("rank_one_kernel_dim", rank_one_kernel_dim(pair), 1, "==")
    rep.add("T_even", even, 1e-10)
    rep.add("T_commutes_with_ad", comm, 1e-10)
    rep.add("T_preserves_k_p", pres, 1e-10)
    return rep


def suite_lemma33(model, cfg, tol):
    pair = _require_pair(model, "lemma33")
    rng = _rng(cfg, "lemma33")
    rep = CertificateReport("lemma33")
    worst = {"mprime_vs_complement": 0.0, "ad_p2_vs_p1": 0.0, "B_l_p2": 0.0}
    X0s = [pair.X0] + [random_unit_p(pair, rng) for _ in range(_count(cfg, "lemma33"))]
    for i, X0 in enumerate(X0s):
        try:
            r = verify_lemma33(pair, X0, tol=np.inf)
        except MalabError as exc:
            rep.failures.append({"index": i, "error": str(exc)})
            continue
        for k in worst:
            worst[k] = max(worst[k], r[k])
    for k, v in worst.items():
        rep.add(k, v, tol["lemma33"])
    rep.data["x0_count"] = len(X0s)
    return rep


def suite_structure(model, cfg, tol):
    pair = _require_pair(model, "structure")
    rng = _rng(cfg, "structure")
    rep = CertificateReport("structure")
    pts = sample_points(model, rng, _count(cfg, "structure"), delta=tol["delta"])
    sq, gauge, nij, cond = 0.0, 0.0, 0.0, 0.0
    L = pair.algebra
    for p in pts:
        Jm, c = J_in_chart(pair, p, model.radius, return_cond=True)
        cond = max(cond, c)
        sq = max(sq, float(np.max(np.abs(Jm @ Jm + np.eye(model.dim)))))
        X = pair.P @ p[model.n:]
        for w in chart_tangent_basis(pair, p, model.radius):
            W = pair.K @ rng.standard_normal(pair.k_sub.dim)
            shifted = TangentRep(w.Y + W, w.V - bracket(L, W, X))
            gauge = max(gauge, gauge_distance(pair, X, stenzel_J(pair, X, w),
                                              stenzel_J(pair, X, shifted)))
    ratios = []
    for p in pts:
        r1 = nijenhuis_max(model, p, cfg.h)
        nij = max(nij, r1)
        if len(ratios) < 5:
            r2 = nijenhuis_max(model, p, cfg.h / 2)
            if r2 > 0:
                ratios.append(r1 / r2)
    rep.add("j_squared", sq, tol["j_squared"])
    rep.add("gauge_invariance", gauge, tol["gauge"])
    rep.add("nijenhuis", nij, tol["nijenhuis"])
    ratio = float(np.median(ratios)) if ratios else float("nan")
    rep.add("nijenhuis_ratio", ratio, (tol["ratio_lo"], tol["ratio_hi"]), "in")
    rep.add("chart_condition", cond, 1e10)
    return rep


def _ma_points(model, cfg, suite, tol):
    return sample_points(model, _rng(cfg, suite), _count(cfg, suite), delta=VMIN)


def suite_psh(model, cfg, tol):
    rep = psh_certificate(model, _ma_points(model, cfg, "psh", tol), cfg.h)
    if isinstance(model, EuclideanModel):
        # golden calibration against the closed forms
        rng = _rng(cfg, "psh")
        worst = 0.0
        for p in sample_points(model, rng, 10, delta=VMIN):
            # raw differences for tau; log tau through the extrapolated form
            # the certificates use (its raw error grows like h^2 / |z|^4)
            fd = ddc_form(ExhaustionField(model, "tau"), p, cfg.h)
            worst = max(worst, float(np.max(np.abs(fd.H - analytic_ddc("tau", p).H))))
            fd = ddc_richardson(ExhaustionField(model, "log_tau"), p, cfg.h)
            worst = max(worst, float(np.max(np.abs(fd.H - analytic_ddc("log_tau", p).H))))
        rep.add("calibration", worst, tol["calibration"])
    return rep


def suite_ma(model, cfg, tol):
    kind = cfg.ma_kind or model.ma_kind
    pts = _ma_points(model, cfg, "ma", tol)
    neg = kind != model.ma_kind
    rep = ma_certificate(model, kind, pts, cfg.h, tolerances=tol, negative_control=neg)
    rep.name = "ma"
    if neg:
        rep.data["negative_control"] = True
        return rep
    other = "log_tau" if kind == "sqrt_tau" else "sqrt_tau"
    if not isinstance(model, EuclideanModel):
        ctrl = ma_certificate(model, other, pts[:20], cfg.h, tolerances=tol, negative_control=True)
        rep.add("negative_control_rejected", int(not ctrl.passed), 1, "==")
    return rep


def suite_foliation(model, cfg, tol):
    rng = _rng(cfg, "foliation")
    rep = CertificateReport("foliation")
    pts = sample_points(model, rng, _count(cfg, "foliation"), delta=VMIN)
    res, cross, angle = 0.0, 0.0, 0.0
    for p in pts:
        fr = solve_Z(model, p, cfg.h)
        res = max(res, fr.residual)
        cross = max(cross, fr.cross_block)
        angle = max(angle, kernel_alignment(model, p, cfg.h))
    rep.add("solve_z_residual", res, tol["solve_z"])
    rep.add("cross_block", cross, 1e-5)
    rep.add("kernel_alignment", angle, tol["alignment"])
    br = max(z_bracket_residual(model, p, cfg.h)["outside"] for p in pts[:3])
    rep.add("bracket_outside_span", br, 1e-4)
    # seeds kept well inside the chart so the Z-flow over t in [0, 1] does not exit
    seeds = sample_points(model, rng, 3, delta=VMIN, a_fraction=0.3)
    leaf = leaf_harmonicity_certificate(model, seeds, 1.0, cfg.dt, cfg.h, tolerances=tol)
    rep.checks += leaf.checks
    rep.failures += leaf.failures
    rep.data["traces"] = leaf.data["traces"]
    return rep


def suite_deformation(model, cfg, tol):
    if not isinstance(model, EuclideanModel):
        raise UsageError("the deformation suite runs on euclidean(n) models only")
    n = model.n
    rng = _rng(cfg, "deformation")
    rep = CertificateReport("deformation")
    pts = sample_points(model, rng, _count(cfg, "deformation"), delta=VMIN)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    samples = []
    for label, cmap in (("identity", identity_map(n)), ("unitary", unitary_map(Q))):
        d = DeformedStructure(model, cmap)
        worst = 0.0
        for p in pts:
            s = deformation_tensor(model, d, p, cfg.h)
            worst = max(worst, float(np.max(np.abs(s.phi))) if s.regular else np.inf)
        rep.add(f"phi_{label}", worst, tol["phi_zero"])
    rot = DeformedStructure(model, leafwise_rotation(n))
    rep.add("rotation_premise", require_leaf_premise(model, rot, pts, cfg.h, tol["premise"]),
            tol["premise"], "<=")
    mx = 0.0
    for p in pts:
        s = deformation_tensor(model, rot, p, cfg.h)
        samples.append(s)
        mx = max(mx, float(np.max(np.abs(s.phi))) if s.regular else 0.0)
    rep.add("phi_rotation_max", mx, tol["phi_min"], ">")
    fld = leaf_phi_field(model, rot, pts[0], h=cfg.h)
    probe = boundedness_probe(model, rot, pts[0], field=fld)
    rep.add("phi_rotation_variation", probe["variation"], tol["phi_variation"])
    rep.add("cr_residual", probe["cr_residual"], tol["cr"])
    rep.add("sup_norm", probe["sup_norm"], 0.0, ">")
    rep.data["frame_drift"] = probe["frame_drift"]
    try:
        require_leaf_premise(model, DeformedStructure(model, conj_bump_map(n)), pts, cfg.h,
                             tol["premise"])
        rejected = 0
    except PremiseViolation:
        rejected = 1
    rep.add("non_holomorphic_rejected", rejected, 1, "==")
    rep.data["phi_samples"] = samples
    return rep


def suite_catalog(model, cfg, tol):
    rep = CertificateReport("catalog")
    entries = load_catalog(export_catalog())
    rep.add("roundtrip", int(entries == catalog()), 1, "==")
    rep.add("mixed_rows", sum(e.family == "MixedType" for e in entries), 8, "==")
    rep.add("mn_rows", sum(e.family == "MorimotoNagano" for e in entries), 5, "==")
    for e in entries:
        for prob in check_entry(e):
            rep.failures.append({"row": e.source_row, "problem": prob})
    rep.add("no_quadric_counterpart", ",".join(rows_without_quadric_counterpart(entries)) == "II,III",
            1, "==")
    return rep


SUITE_FUNCS = {"algebra": suite_algebra, "lemma33": suite_lemma33, "structure": suite_structure,
               "psh": suite_psh, "ma": suite_ma, "foliation": suite_foliation,
               "deformation": suite_deformation, "catalog": suite_catalog}


def run(cfg):
    """Run the configured suites.  Usage problems raise :class:`UsageError` /
    ``UnsupportedModelError``; numerical trouble inside a suite marks it failed."""
    model = load_model(cfg.model)
    tol = cfg.resolved_tolerances()
    if cfg.ma_kind not in (None, "sqrt_tau", "log_tau"):
        raise UsageError(f"unknown Monge-Ampère kind {cfg.ma_kind!r}")
    suites = tuple(cfg.suites) or default_suites(model)
    for s in suites:
        if s not in SUITES:
            raise UsageError(f"unknown suite {s!r}; choose from {', '.join(SUITES)}")
    if isinstance(model, EuclideanModel) and {"algebra", "lemma33", "structure"} & set(suites):
        raise UsageError("algebra/lemma33/structure suites need a symmetric-pair model")
    if not isinstance(model, EuclideanModel) and "deformation" in suites:
        raise UsageError("the deformation suite runs on euclidean(n) models only")
    reports, timings = {}, {}
    for s in dict.fromkeys(suites):
        t0 = time.perf_counter()
        try:
            reports[s] = SUITE_FUNCS[s](model, cfg, tol)
        except UsageError:
            raise
        except (MalabError, ArithmeticError, np.linalg.LinAlgError) as exc:
            r = CertificateReport(s)
            r.failures.append({"error": f"{type(exc).__name__}: {exc}"})
            reports[s] = r
        timings[s] = time.perf_counter() - t0
    return RunReport(cfg, tol, reports, timings)
