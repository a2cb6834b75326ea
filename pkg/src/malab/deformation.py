"""Pulled-back structures and their deformation tensors.

Given a diffeomorphism ``F`` of the chart domain, the pulled-back structure is
``JJ(p) = DF(p)^{-1} J(F(p)) DF(p)``.  Its (0,1) space is the graph of a
Beltrami tensor ``mu: T^{01} -> T^{10}`` over the reference (0,1) space
whenever the projection of ``T'^{01}`` onto ``T^{01}`` along ``T^{10}`` is
invertible.  The deformation tensor ``phi`` is ``mu`` restricted to the
normal part ``H^{01}``; its values are split into the ``H^{10}`` and
``Z^{10}`` components (``Z^{10} = Z - i JZ``).

Complex (0,1) vectors are the ``-i`` eigenvectors of ``J``; the projector
onto them is ``(I + iJ) / 2``.
"""

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalDegeneracyError, PremiseViolation, UsageError
from .euclidean import from_complex, realify, to_complex
from .foliation import integrate_flow, solve_Z
from .report import DEFAULT_TOLERANCES

__all__ = [
    "ComplexMap",
    "DeformedStructure",
    "DeformationSample",
    "LeafPhiField",
    "identity_map",
    "unitary_map",
    "leafwise_rotation",
    "conj_bump_map",
    "eigenspace_split",
    "deformation_tensor",
    "premise_residual",
    "require_leaf_premise",
    "leaf_phi_field",
    "leafwise_cr_residual",
    "cr_residual_grid",
    "boundedness_probe",
    "export_phi",
]


def _antilinear_real(B):
    # real matrix of w -> B conj(w) in (x, y) blocks
    B = np.asarray(B, complex)
    return np.block([[B.real, B.imag], [B.imag, -B.real]])


@dataclass(frozen=True)
class ComplexMap:
    """A smooth map of ``C^n`` with Wirtinger derivatives ``A = dF/dz`` and
    ``B = dF/dz-bar`` (callables of ``z``)."""

    name: str
    F: object
    A: object
    B: object

    def __call__(self, p):
        return from_complex(self.F(to_complex(p)))

    def jacobian(self, p):
        z = to_complex(p)
        return realify(self.A(z)) + _antilinear_real(self.B(z))


def identity_map(n):
    return ComplexMap("identity", lambda z: z, lambda z: np.eye(n, dtype=complex),
                      lambda z: np.zeros((n, n), complex))


def unitary_map(U):
    U = np.asarray(U, complex)
    n = U.shape[0]
    return ComplexMap("unitary", lambda z: U @ z, lambda z: U,
                      lambda z: np.zeros((n, n), complex))


def leafwise_rotation(n, eps=0.5):
    """``z -> exp(i theta) z`` with ``theta = eps |z_1|^2 / |z|^2``.

    ``theta`` is constant on each complex line through 0, so the map
    preserves the lines and is holomorphic on each of them, but it is not
    holomorphic transversally.
    """
    def theta(z):
        return eps * abs(z[0]) ** 2 / np.vdot(z, z).real

    def dtheta_dz(z):
        t = np.vdot(z, z).real
        g = -eps * abs(z[0]) ** 2 * z.conj() / t**2
        g[0] += eps * z[0].conj() / t
        return g

    def F(z):
        return np.exp(1j * theta(z)) * z

    def A(z):
        return np.exp(1j * theta(z)) * (np.eye(n) + 1j * np.outer(z, dtheta_dz(z)))

    def B(z):
        return np.exp(1j * theta(z)) * 1j * np.outer(z, dtheta_dz(z).conj())

    return ComplexMap("leafwise_rotation", F, A, B)


def conj_bump_map(n, eps=0.1):
    """``z -> z + eps conj(z) exp(-|z|^2)``: not holomorphic along the leaves."""
    def b(z):
        return np.exp(-np.vdot(z, z).real)

    def F(z):
        return z + eps * z.conj() * b(z)

    def A(z):
        return np.eye(n) - eps * b(z) * np.outer(z.conj(), z.conj())

    def B(z):
        return eps * b(z) * (np.eye(n) - np.outer(z.conj(), z))

    return ComplexMap("conj_bump", F, A, B)


class DeformedStructure:
    """Pull-back of ``model.J`` by ``diffeo``.

    ``diffeo`` maps chart points to chart points; ``jacobian`` is a callable
    or ``None`` (central differences with step ``fd_step``).
    """

    def __init__(self, model, diffeo, jacobian=None, name=None, fd_step=1e-6):
        self.model = model
        self.diffeo = diffeo
        if jacobian is None and hasattr(diffeo, "jacobian"):
            jacobian = diffeo.jacobian
        self._jac = jacobian
        self.name = name or getattr(diffeo, "name", "deformation")
        self.fd_step = fd_step

    def jacobian(self, p):
        if self._jac is not None:
            return np.asarray(self._jac(p), float)
        p = np.asarray(p, float)
        D = np.empty((p.size, p.size))
        for i in range(p.size):
            e = np.zeros(p.size)
            e[i] = self.fd_step
            D[:, i] = (np.asarray(self.diffeo(p + e)) - np.asarray(self.diffeo(p - e))) / (2 * self.fd_step)
        return D

    def Jprime(self, p):
        D = self.jacobian(p)
        cond = np.linalg.cond(D)
        if not np.isfinite(cond) or cond > 1e10:
            raise NumericalDegeneracyError("deformation is not a local diffeomorphism here",
                                           condition=cond)
        return np.linalg.solve(D, self.model.J(self.diffeo(p)) @ D)

    def square_defect(self, p):
        Jp = self.Jprime(p)
        return float(np.max(np.abs(Jp @ Jp + np.eye(Jp.shape[0]))))


def _orth(V, rank, what):
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    if s.size < rank or s[rank - 1] <= 1e-8 * s[0] or (s.size > rank and s[rank] > 1e-8 * s[0]):
        raise NumericalDegeneracyError(f"{what}: eigenvalue clustering failure")
    return U[:, :rank]


def eigenspace_split(Jm, Hbasis=None):
    """Bases ``(H10, H01)`` of the ``+i`` / ``-i`` eigenspaces of ``Jm`` on the
    span of ``Hbasis`` (whole space by default), as complex chart vectors."""
    Jm = np.asarray(Jm, float)
    dim = Jm.shape[0]
    Hb = np.eye(dim) if Hbasis is None else np.asarray(Hbasis, float)
    JH = np.linalg.lstsq(Hb, Jm @ Hb, rcond=None)[0]
    if np.max(np.abs(Hb @ JH - Jm @ Hb)) > 1e-8 * max(1.0, np.max(np.abs(Jm))):
        raise NumericalDegeneracyError("subspace is not invariant under the structure")
    if np.max(np.abs(JH @ JH + np.eye(JH.shape[0]))) > 1e-8:
        raise NumericalDegeneracyError("structure does not square to -1 on the subspace")
    P01 = 0.5 * (np.eye(dim) + 1j * Jm)
    H01 = _orth(P01 @ Hb, Hb.shape[1] // 2, "(0,1) space")
    return H01.conj(), H01


@dataclass(frozen=True, eq=False)
class DeformationSample:
    point: np.ndarray
    frame: np.ndarray  # H^{01} basis, 2n x (n-1) complex
    phi: np.ndarray  # n x (n-1): rows H^{10} frame (n-1), then Z^{10}
    regular: bool
    condition: float
    premise: float = float("nan")

    @property
    def phi_normal(self):
        """The ``H^{10}``-valued block, ``(n-1) x (n-1)``."""
        return None if self.phi is None else self.phi[:-1]

    @property
    def phi_leaf(self):
        return None if self.phi is None else self.phi[-1]


def premise_residual(model, deformed, point, h=1e-3, frame=None):
    """``max(|(JJ - J) Z|, |(JJ - J) JZ|) / |Z|``: zero for leaf-preserving,
    leafwise holomorphic maps."""
    fr = frame or solve_Z(model, point, h)
    D = deformed.Jprime(point) - model.J(point)
    r = max(np.linalg.norm(D @ fr.Zvec), np.linalg.norm(D @ fr.JZvec))
    return float(r / np.linalg.norm(fr.Zvec))


def require_leaf_premise(model, deformed, points, h=1e-3, tol=None):
    """Raise :class:`PremiseViolation` unless ``JJ = J`` on ``span{Z, JZ}``
    at every point."""
    tol = DEFAULT_TOLERANCES["premise"] if tol is None else tol
    worst = 0.0
    for p in points:
        r = premise_residual(model, deformed, p, h)
        worst = max(worst, r)
        if r > tol:
            raise PremiseViolation(
                f"{deformed.name}: deformed structure differs from J on the leaf "
                f"directions (residual {r:.3g} > {tol:g})")
    return worst


def deformation_tensor(model, deformed, point, h=1e-3, frame=None, check_premise=True,
                       max_condition=1e8):
    """:class:`DeformationSample` at ``point``.

    ``frame`` optionally fixes the ``H^{01}`` basis (used for frames carried
    along a leaf); it is otherwise computed from the normal distribution.
    """
    p = np.asarray(point, float)
    fr = solve_Z(model, p, h)
    premise = premise_residual(model, deformed, p, h, fr)
    if check_premise and premise > DEFAULT_TOLERANCES["premise"]:
        raise PremiseViolation(f"{deformed.name}: JJ differs from J on span(Z, JZ) "
                               f"(residual {premise:.3g})")
    J = model.J(p)
    Jp = deformed.Jprime(p)
    T10, T01 = eigenspace_split(J)
    _, T01p = eigenspace_split(Jp)
    n = T01.shape[1]
    coef = np.linalg.solve(np.hstack([T10, T01]), T01p)
    X, C = coef[:n], coef[n:]
    cond = float(np.linalg.cond(C))
    if frame is None:
        _, frame = eigenspace_split(J, fr.Hbasis)
    if not np.isfinite(cond) or cond > max_condition:
        return DeformationSample(p, frame, None, False, cond, premise)
    mu = X @ np.linalg.inv(C)  # T01-coordinates -> T10-coordinates
    c_in = np.linalg.lstsq(T01, frame, rcond=None)[0]
    images = T10 @ (mu @ c_in)
    Z10 = fr.Zvec - 1j * fr.JZvec
    out = np.column_stack([frame.conj(), Z10])
    phi = np.linalg.lstsq(out, images, rcond=None)[0]
    return DeformationSample(p, frame, phi, True, cond, premise)


def cr_residual_grid(values, ds, dt):
    """Max of ``|(d/ds + i d/dt) f| / 2`` at interior nodes of a grid
    ``values[j, k, ...] = f(s_j, t_k)`` (central differences)."""
    v = np.asarray(values)
    d_s = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * ds)
    d_t = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * dt)
    return float(np.max(np.abs(0.5 * (d_s + 1j * d_t)))) if d_s.size else 0.0


@dataclass
class LeafPhiField:
    seed: np.ndarray
    s: np.ndarray
    t: np.ndarray
    points: np.ndarray  # (len s, len t, 2n)
    phi: np.ndarray  # (len s, len t, n, n-1)
    samples: list
    frame_drift: float


def _flow_map(model, seed, s, t, dt, h):
    # the Z-flow for time s, then the JZ-flow for time t (raw fields)
    p = np.asarray(seed, float)
    for which, T in (("Z", s), ("JZ", t)):
        if T != 0.0:
            steps = max(1, int(np.ceil(abs(T) / dt - 1e-9)))
            tr = integrate_flow(model, which, p, T, abs(T) / steps, "raw", h)
            if tr.truncated:
                raise UsageError("leaf grid leaves the chart")
            p = tr.points[-1]
    return p


def leaf_phi_field(model, deformed, seed, spacing=0.05, half_width=2, dt=0.025, h=1e-3,
                   flow_eps=1e-5):
    """Deformation tensor on a grid ``(s, t)`` of the leaf through ``seed``,
    in an ``H^{01}`` frame carried by the ``Z``/``JZ`` flows.

    The frame at each node is the pushforward of the seed frame by the
    (finite-difference) differential of the flow map, projected back onto
    ``H^{01}``; the largest discarded fraction is reported as drift.
    """
    seed = np.asarray(seed, float)
    k = np.arange(-half_width, half_width + 1) * spacing
    base = deformation_tensor(model, deformed, seed, h)
    frame0 = base.frame
    dim = seed.size
    pts = np.empty((k.size, k.size, dim))
    phis, samples, drift = [], [], 0.0
    for j, s in enumerate(k):
        row = []
        for l, t in enumerate(k):
            q = _flow_map(model, seed, s, t, dt, h)
            pts[j, l] = q
            D = np.empty((dim, dim))
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = flow_eps
                D[:, i] = (_flow_map(model, seed + e, s, t, dt, h)
                           - _flow_map(model, seed - e, s, t, dt, h)) / (2 * flow_eps)
            pushed = D @ frame0.real + 1j * (D @ frame0.imag)
            fr = solve_Z(model, q, h)
            J = model.J(q)
            T10, T01 = eigenspace_split(J)
            _, H01 = eigenspace_split(J, fr.Hbasis)
            Z01 = fr.Zvec + 1j * fr.JZvec
            basis = np.column_stack([H01, Z01[:, None], T10])
            c = np.linalg.solve(basis, pushed)
            m = H01.shape[1]
            frame = H01 @ c[:m]
            drift = max(drift, float(np.linalg.norm(pushed - frame) / np.linalg.norm(pushed)))
            smp = deformation_tensor(model, deformed, q, h, frame=frame)
            if not smp.regular:
                raise NumericalDegeneracyError("deformation tensor is not regular on the leaf grid",
                                               condition=smp.condition)
            samples.append(smp)
            row.append(smp.phi)
        phis.append(row)
    return LeafPhiField(seed, k, k.copy(), pts, np.array(phis), samples, drift)


def leafwise_cr_residual(model, deformed, seed, **kw):
    """Cauchy-Riemann residual of the components of ``phi`` in the leaf
    coordinate ``zeta = s + i t`` (``s``: ``Z``-flow time, ``t``: ``JZ``-flow
    time).  Returns ``(residual, field)``."""
    fld = kw.pop("field", None) or leaf_phi_field(model, deformed, seed, **kw)
    return cr_residual_grid(fld.phi, fld.s[1] - fld.s[0], fld.t[1] - fld.t[0]), fld


def _hermitian_norm(Htau, frame, out, phi):
    G_in = frame.conj().T @ Htau @ frame
    img = out @ phi
    G_out = img.conj().T @ Htau @ img
    G_in = 0.5 * (G_in + G_in.conj().T)
    G_out = 0.5 * (G_out + G_out.conj().T)
    w = scipy.linalg.eigh(G_out, G_in, eigvals_only=True)
    return float(np.sqrt(max(w[-1], 0.0)))


def boundedness_probe(model, deformed, seed, **kw):
    """Sup of ``|phi|`` (operator norm for the Hermitian form of ``H_tau``)
    over a leaf grid, and the max variation of ``phi`` from its value at the
    seed.  Also returns the CR residual of the same grid."""
    fld = kw.pop("field", None) or leaf_phi_field(model, deformed, seed, **kw)
    norms = []
    for smp in fld.samples:
        fr = solve_Z(model, smp.point)
        Z10 = fr.Zvec - 1j * fr.JZvec
        out = np.column_stack([smp.frame.conj(), Z10])
        norms.append(_hermitian_norm(fr.Htau, smp.frame, out, smp.phi))
    c = fld.phi.shape[0] // 2
    variation = float(np.max(np.abs(fld.phi - fld.phi[c, c])))
    cr = cr_residual_grid(fld.phi, fld.s[1] - fld.s[0], fld.t[1] - fld.t[0])
    return {"sup_norm": max(norms), "variation": variation, "cr_residual": cr,
            "frame_drift": fld.frame_drift, "nodes": len(norms)}


def export_phi(samples, path):
    """Comma-separated rows ``(point..., regular, condition, Re/Im phi entries...)``."""
    samples = list(samples)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for smp in samples:
            entries = []
            if smp.phi is not None:
                for z in np.ravel(smp.phi):
                    entries += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow([repr(float(x)) for x in smp.point]
                       + [int(smp.regular), repr(float(smp.condition))] + entries)
