"""Center manifolds: round spheres and stereographic caps in R^n.

Both live in the coordinate plane spanned by the first k+1 axes of the
ambient space.  Projections are closed form; tube volume elements use the
exact offset Jacobian (1 + a/R)^k where a is the radial component of the
normal offset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve, project_to_curve
from .errors import AmbiguousProjectionError, ProjectionError
from .quadrature import ball_rule, sphere_rule

__all__ = ["Sphere", "StereographicCap", "stereographic_chart", "nearest_point_project"]


def _pad_cols(rows, ambient):
    rows = np.atleast_2d(rows)
    out = np.zeros((rows.shape[0], ambient))
    out[:, : rows.shape[1]] = rows
    return out


def _axis_rows(ambient, start, count, m):
    """(m, count, ambient) stack of standard basis rows e_start..e_{start+count-1}."""
    E = np.zeros((count, ambient))
    for i in range(count):
        E[i, start + i] = 1.0
    return np.broadcast_to(E, (m, count, ambient)).copy()


@dataclass(frozen=True)
class Sphere:
    """Round k-sphere of given radius, embedded in the first k+1 coordinates."""

    dim: int
    radius: float
    ambient: int

    def __post_init__(self):
        if not 1 <= self.dim < self.ambient:
            raise ValueError("need 1 <= dim < ambient")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def name(self):
        return f"sphere(k={self.dim},R={self.radius:g})"

    @property
    def has_boundary(self):
        return False

    @property
    def reach(self):
        return float(self.radius)

    def chart(self, x):
        """Stereographic chart R^k -> sphere (misses one pole)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = 1.0 + (x * x).sum(axis=1)
        rows = np.concatenate([2.0 * x, (q - 2.0)[:, None]], axis=1) / q[:, None]
        return _pad_cols(self.radius * rows, self.ambient)

    def chart_tangent(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        m, k = x.shape
        q = 1.0 + (x * x).sum(axis=1)
        T = np.zeros((m, k, self.ambient))
        for j in range(k):
            T[:, j, :k] = -4.0 * x[:, j, None] * x / q[:, None] ** 2
            T[:, j, j] += 2.0 / q
            T[:, j, k] = 4.0 * x[:, j] / q**2
        return self.radius * T

    def chart_measure(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = 1.0 + (x * x).sum(axis=1)
        return (2.0 * self.radius / q) ** self.dim

    def project(self, points, strict=True):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        s = pts[:, : self.dim + 1]
        ns = np.linalg.norm(s, axis=1)
        ok = ns > 1e-8 * self.radius
        if strict and not ok.all():
            raise AmbiguousProjectionError(
                "point sits on the focal set of the sphere; projection undefined"
            )
        safe = np.where(ok, ns, 1.0)
        feet = np.zeros_like(pts)
        feet[:, : self.dim + 1] = self.radius * s / safe[:, None]
        return feet, pts - feet, ok

    def normal_basis(self, feet):
        feet = np.atleast_2d(np.asarray(feet, dtype=float))
        m = len(feet)
        out = np.zeros((m, self.ambient - self.dim, self.ambient))
        out[:, 0, :] = feet / self.radius
        out[:, 1:, :] = _axis_rows(self.ambient, self.dim + 1, self.ambient - self.dim - 1, m)
        return out

    def tube_jacobian(self, feet, offsets):
        a = np.einsum("ij,ij->i", np.atleast_2d(offsets), np.atleast_2d(feet)) / self.radius
        return (1.0 + a / self.radius) ** self.dim

    def surface_rule(self, polar=16, angular=32):
        pts, w = sphere_rule(self.dim + 1, polar, angular)
        return _pad_cols(self.radius * pts, self.ambient), w * self.radius**self.dim

    def boundary_rule(self, polar=16, angular=32):
        return None


@dataclass(frozen=True)
class StereographicCap:
    """Open cap of the unit k-sphere covered by a stereographic chart.

    The chart x |-> (2x, |x|^2 - 1)/(|x|^2 + 1) maps the ball |x| < chart_radius
    onto a cap around the pole (0, ..., 0, -1, 0, ...).  chart_radius = 1 gives
    the open lower hemisphere.
    """

    dim: int
    chart_radius: float
    ambient: int

    def __post_init__(self):
        if not 1 <= self.dim < self.ambient:
            raise ValueError("need 1 <= dim < ambient")
        if self.chart_radius <= 0:
            raise ValueError("chart radius must be positive")

    @property
    def name(self):
        return f"stereographic-cap(k={self.dim},r={self.chart_radius:g})"

    @property
    def has_boundary(self):
        return True

    @property
    def reach(self):
        return 1.0

    def chart(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = 1.0 + (x * x).sum(axis=1)
        rows = np.concatenate([2.0 * x, (q - 2.0)[:, None]], axis=1) / q[:, None]
        return _pad_cols(rows, self.ambient)

    def chart_tangent(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        m, k = x.shape
        q = 1.0 + (x * x).sum(axis=1)
        T = np.zeros((m, k, self.ambient))
        for j in range(k):
            T[:, j, :k] = -4.0 * x[:, j, None] * x / q[:, None] ** 2
            T[:, j, j] += 2.0 / q
            T[:, j, k] = 4.0 * x[:, j] / q**2
        return T

    def chart_measure(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        q = 1.0 + (x * x).sum(axis=1)
        return (2.0 / q) ** self.dim

    def chart_inverse(self, feet):
        feet = np.atleast_2d(np.asarray(feet, dtype=float))
        denom = 1.0 - feet[:, self.dim]
        if np.any(denom <= 1e-12):
            raise ProjectionError("foot point at or beyond the chart pole")
        return feet[:, : self.dim] / denom[:, None]

    def project(self, points, strict=True):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        s = pts[:, : self.dim + 1]
        ns = np.linalg.norm(s, axis=1)
        ok = ns > 1e-8
        if strict and not ok.all():
            raise AmbiguousProjectionError(
                "point sits on the focal set of the sphere; projection undefined"
            )
        safe = np.where(ok, ns, 1.0)
        feet = np.zeros_like(pts)
        feet[:, : self.dim + 1] = s / safe[:, None]
        # the foot must stay inside the chart for the cap projection to exist
        denom = 1.0 - feet[:, self.dim]
        inside = denom > 1e-12
        c2 = np.zeros(len(pts))
        c2[inside] = (feet[inside, : self.dim] ** 2).sum(axis=1) / denom[inside] ** 2
        ok = ok & inside & (c2 <= self.chart_radius**2 * (1.0 + 1e-12))
        if strict and not ok.all():
            raise ProjectionError("nearest sphere point lies outside the cap")
        return feet, pts - feet, ok

    def normal_basis(self, feet):
        feet = np.atleast_2d(np.asarray(feet, dtype=float))
        m = len(feet)
        out = np.zeros((m, self.ambient - self.dim, self.ambient))
        out[:, 0, :] = feet
        out[:, 1:, :] = _axis_rows(self.ambient, self.dim + 1, self.ambient - self.dim - 1, m)
        return out

    def tube_jacobian(self, feet, offsets):
        a = np.einsum("ij,ij->i", np.atleast_2d(offsets), np.atleast_2d(feet))
        return (1.0 + a) ** self.dim

    def surface_rule(self, radial=12, polar=16, angular=32):
        """Quadrature over the cap: chart ball rule times the metric density."""
        x, w = ball_rule(self.dim, self.chart_radius, radial, polar, angular)
        return self.chart(x), w * self.chart_measure(x)

    def boundary_rule(self, polar=16, angular=32):
        """Rim quadrature: nodes, (k-1)-measure weights, outward conormals."""
        r = self.chart_radius
        omega, w = sphere_rule(self.dim, polar, angular)
        xs = r * omega
        nodes = self.chart(xs)
        T = self.chart_tangent(xs)
        conormal = np.einsum("mj,mjn->mn", omega, T)
        conormal /= np.linalg.norm(conormal, axis=1, keepdims=True)
        rim_w = w * (2.0 / (1.0 + r * r)) ** (self.dim - 1) * r ** (self.dim - 1)
        return nodes, rim_w, conormal


def stereographic_chart(dim, chart_radius, ambient):
    """Stereographic cap of the unit k-sphere as a center manifold."""
    return StereographicCap(dim, float(chart_radius), ambient)


def nearest_point_project(center, points, strict=True):
    """Uniform nearest-point projection onto a curve or manifold center.

    Returns ``(feet, offsets, ok)``.  Curve projection runs the seeded Newton
    iteration with a dense scan; manifold projection is closed form.  Points
    beyond the reach raise (strict) or come back masked.
    """
    if isinstance(center, Curve):
        _, feet, off, ok = project_to_curve(center, points, strict=strict)
        return feet, off, ok
    return center.project(points, strict=strict)
