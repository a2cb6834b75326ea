"""Small result containers shared by the certificates and the batch driver."""

from dataclasses import dataclass, field

from .errors import CertificateFailure

__all__ = ["Check", "CertificateReport", "DEFAULT_TOLERANCES"]

#: named tolerances; every certificate reads its thresholds from here unless
#: overridden (relative ones are scaled by ``trace(H) / 2n`` at the sample)
DEFAULT_TOLERANCES = {
    "eps_null": 1e-4,
    "eps_pos": 1e-2,
    "eps_det": 1e-6,
    "delta": 0.05,
    "j_squared": 1e-9,
    "gauge": 1e-10,
    "nijenhuis": 1e-4,
    "ratio_lo": 3.0,
    "ratio_hi": 5.0,
    "lemma33": 1e-10,
    "cartan": 1e-12,
    "solve_z": 1e-8,
    "alignment": 1e-3,
    "z_drift": 1e-8,
    "affine": 1e-5,
    "rk4_lo": 12.0,
    "rk4_hi": 20.0,
    "calibration": 1e-6,
    "phi_zero": 1e-12,
    "phi_min": 1e-3,
    "phi_variation": 1e-6,
    "cr": 1e-5,
    "premise": 1e-8,
}


@dataclass
class Check:
    name: str
    value: float
    limit: float
    op: str = "<"  # "<", ">", "==", "in"

    @property
    def passed(self):
        v, lim = self.value, self.limit
        if self.op == "<":
            return bool(v < lim)
        if self.op == ">":
            return bool(v > lim)
        if self.op == "<=":
            return bool(v <= lim)
        if self.op == ">=":
            return bool(v >= lim)
        if self.op == "==":
            return bool(v == lim)
        if self.op == "in":
            return bool(lim[0] <= v <= lim[1])
        raise ValueError(f"unknown comparison {self.op!r}")


@dataclass
class CertificateReport:
    name: str
    checks: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks) and not self.failures

    def add(self, name, value, limit, op="<"):
        c = Check(name, value, limit, op)
        self.checks.append(c)
        return c

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def raise_if_failed(self):
        if not self.passed:
            bad = {c.name: c.value for c in self.checks if not c.passed}
            raise CertificateFailure(f"{self.name} failed: {bad}",
                                     details={"checks": bad, "failures": self.failures})
        return self
