"""Common interface for the chart-level complex manifolds used by the verifiers.

A point is a flat array ``p = (a, v)`` of length ``2n``.  The first block is
the "real" (zero-section) direction and the second block the fiber
direction; at the origin every model has ``J = [[0, -I], [I, 0]]``.
"""

import numpy as np

from .errors import ChartError

__all__ = ["ChartModel", "flat_J", "sample_points"]


def flat_J(n):
    Z = np.zeros((n, n))
    I = np.eye(n)
    return np.block([[Z, -I], [I, Z]])


class ChartModel:
    """Base class.  Subclasses set ``name``, ``n``, ``radius`` and implement
    :meth:`J` and :meth:`tau`."""

    name = "model"
    n = 1
    radius = np.inf
    #: exhaustion kind solving the homogeneous Monge-Ampère equation
    ma_kind = "sqrt_tau"

    @property
    def dim(self):
        return 2 * self.n

    def J(self, p):
        raise NotImplementedError

    def tau(self, p):
        raise NotImplementedError

    def tau_grad(self, p):
        """Analytic gradient of ``tau`` if available, else ``None``."""
        return None

    def split(self, p):
        p = np.asarray(p, float)
        return p[: self.n], p[self.n:]

    def in_chart(self, p, margin=0.0):
        a, _ = self.split(p)
        return bool(np.linalg.norm(a) + margin <= self.radius)

    def require(self, p, margin=0.0):
        if not self.in_chart(p, margin):
            raise ChartError(f"point {np.round(p, 6)} leaves the chart (margin {margin})")


def sample_points(model, rng, count, delta=0.05, vmax=1.0, a_fraction=0.8):
    """Seeded chart samples: ``a`` uniform in the ball of radius
    ``a_fraction * radius`` (1.0 when the chart is unbounded), ``|v|``
    uniform in ``[delta, vmax]`` with a uniform direction."""
    n = model.n
    r_a = a_fraction * (model.radius if np.isfinite(model.radius) else 1.0)
    pts = np.empty((count, 2 * n))
    for k in range(count):
        d = rng.standard_normal(n)
        a = d / np.linalg.norm(d) * r_a * rng.uniform() ** (1.0 / n)
        d = rng.standard_normal(n)
        v = d / np.linalg.norm(d) * rng.uniform(delta, vmax)
        pts[k] = np.concatenate([a, v])
    return pts
