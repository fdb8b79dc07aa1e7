"""Multiplier vector fields on tubes and their sup-norm deviation bounds.

Three tube-adapted fields plus the classical position field:

* curve-tube field     v(gamma(t) + psi) = t gamma'(t)(1 - psi . gamma'') + psi
* curve projection     v(x) = x - p(x),   p the nearest curve point
* manifold projection  v(x) = x - p_k(x), p_k the nearest manifold point
* position             v(x) = x

Each field has a target divergence m (n, n-1, n-k, n respectively); the
deviation bounds measure how far div v and the quadratic form (sym Dv) xi . xi
stray from their centerline values m and |xi|^2 over a tube grid.  For the
projection-type fields only the upper quadratic deviation matters (the form
degenerates in tangent directions by construction, which is harmless), so
mu_quad is one-sided for them and two-sided for the other two fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import Curve, project_to_curve
from .errors import ProjectionError

__all__ = [
    "CurveTubeField",
    "CurveProjectionField",
    "ManifoldProjectionField",
    "PositionField",
    "FieldBounds",
    "make_field",
    "evaluate_field",
    "field_jacobian",
    "sup_deviations",
    "min_boundary_flux",
]


@dataclass(frozen=True)
class CurveTubeField:
    """Axial-plus-normal multiplier adapted to an open or closed curve tube."""

    curve: Curve

    kind = "curve-field-v"
    two_sided_quadratic = True

    @property
    def ambient(self):
        return self.curve.ambient

    @property
    def target_divergence(self):
        return self.curve.ambient

    @property
    def geometry(self):
        return self.curve.name

    def evaluate_masked(self, points, seeds=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        t, foot, off, ok = project_to_curve(self.curve, pts, seeds=seeds, strict=False)
        vel = self.curve.velocity(t)
        acc = self.curve.acceleration(t)
        scale = t * (1.0 - np.einsum("ij,ij->i", off, acc))
        vals = scale[:, None] * vel + off
        if not ok.all():
            vals = np.where(ok[:, None], vals, np.nan)
        return vals, ok

    def evaluate(self, points, seeds=None):
        vals, ok = self.evaluate_masked(points, seeds)
        if not ok.all():
            raise ProjectionError("field evaluated outside its tube domain")
        return vals


@dataclass(frozen=True)
class CurveProjectionField:
    """Normal-offset multiplier x - p(x) for a curve center."""

    curve: Curve

    kind = "projection-field"
    two_sided_quadratic = False

    @property
    def ambient(self):
        return self.curve.ambient

    @property
    def target_divergence(self):
        return self.curve.ambient - 1

    @property
    def geometry(self):
        return self.curve.name

    def evaluate_masked(self, points, seeds=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        _, _, off, ok = project_to_curve(self.curve, pts, seeds=seeds, strict=False)
        if not ok.all():
            off = np.where(ok[:, None], off, np.nan)
        return off, ok

    def evaluate(self, points, seeds=None):
        vals, ok = self.evaluate_masked(points, seeds)
        if not ok.all():
            raise ProjectionError("field evaluated outside its tube domain")
        return vals


@dataclass(frozen=True)
class ManifoldProjectionField:
    """Normal-offset multiplier x - p_k(x) for a manifold center."""

    manifold: object

    kind = "manifold-field"
    two_sided_quadratic = False

    @property
    def ambient(self):
        return self.manifold.ambient

    @property
    def target_divergence(self):
        return self.manifold.ambient - self.manifold.dim

    @property
    def geometry(self):
        return self.manifold.name

    def evaluate_masked(self, points, seeds=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        _, off, ok = self.manifold.project(pts, strict=False)
        if not ok.all():
            off = np.where(ok[:, None], off, np.nan)
        return off, ok

    def evaluate(self, points, seeds=None):
        vals, ok = self.evaluate_masked(points, seeds)
        if not ok.all():
            raise ProjectionError("field evaluated outside its tube domain")
        return vals


@dataclass(frozen=True)
class PositionField:
    """Classical multiplier v(x) = x, exact for balls and shells."""

    ambient: int

    kind = "position"
    two_sided_quadratic = True
    geometry = "origin"

    @property
    def target_divergence(self):
        return self.ambient

    def evaluate_masked(self, points, seeds=None):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return pts.copy(), np.ones(len(pts), dtype=bool)

    def evaluate(self, points, seeds=None):
        return np.atleast_2d(np.asarray(points, dtype=float)).copy()


def make_field(kind, center, ambient=None):
    """Factory mapping a field-kind string to a field over the given center."""
    if kind == "curve-field-v":
        return CurveTubeField(center)
    if kind == "projection-field":
        return CurveProjectionField(center)
    if kind == "manifold-field":
        return ManifoldProjectionField(center)
    if kind == "position":
        n = ambient if ambient is not None else getattr(center, "ambient", None)
        if n is None:
            raise ValueError("position field needs an ambient dimension")
        return PositionField(n)
    raise ValueError(f"unknown field kind {kind!r}")


def evaluate_field(field_obj, points, seeds=None):
    return field_obj.evaluate(points, seeds=seeds)


def field_jacobian(field_obj, points, step=1e-5, seeds=None):
    """Jacobian J[a, i, j] = dv_i/dx_j by central differences.

    Stencil points the field cannot evaluate (beyond the tube caps or the
    reach) trigger a one-sided second-order fallback for that direction; the
    returned boolean flags mark nodes where any fallback fired.  A node with
    no valid side in some direction raises ProjectionError.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    m, n = pts.shape
    h = float(step)
    eye = np.eye(n)
    seeds_rep = None if seeds is None else np.repeat(np.asarray(seeds, dtype=float), n)

    plus = (pts[:, None, :] + h * eye).reshape(-1, n)
    minus = (pts[:, None, :] - h * eye).reshape(-1, n)
    vp, okp = field_obj.evaluate_masked(plus, seeds_rep)
    vm, okm = field_obj.evaluate_masked(minus, seeds_rep)
    J = ((vp - vm) / (2.0 * h)).reshape(m, n, n)
    okp = okp.reshape(m, n)
    okm = okm.reshape(m, n)
    good = okp & okm
    flags = ~good.all(axis=1)

    if flags.any():
        vp = vp.reshape(m, n, n)
        vm = vm.reshape(m, n, n)
        for a, j in zip(*np.where(~good)):
            seed = None if seeds is None else seeds[a]
            x0 = pts[a]
            v0, ok0 = field_obj.evaluate_masked(x0[None], seed)
            if not ok0[0]:
                raise ProjectionError("grid node itself is outside the field domain")
            if okp[a, j]:
                far, okf = field_obj.evaluate_masked((x0 + 2.0 * h * eye[j])[None], seed)
                if okf[0]:
                    J[a, j] = (-3.0 * v0[0] + 4.0 * vp[a, j] - far[0]) / (2.0 * h)
                else:
                    J[a, j] = (vp[a, j] - v0[0]) / h
            elif okm[a, j]:
                far, okf = field_obj.evaluate_masked((x0 - 2.0 * h * eye[j])[None], seed)
                if okf[0]:
                    J[a, j] = (3.0 * v0[0] - 4.0 * vm[a, j] + far[0]) / (2.0 * h)
                else:
                    J[a, j] = (v0[0] - vm[a, j]) / h
            else:
                raise ProjectionError(
                    f"finite-difference stencil cannot fit inside the domain "
                    f"at node {x0} (step {h:g})"
                )
    # J currently holds rows indexed by direction; swap to dv_i/dx_j
    return J.transpose(0, 2, 1), flags


@dataclass(frozen=True)
class FieldBounds:
    """Grid sup-deviations of a multiplier field on one tube.

    mu_div bounds |div v - m|, mu_quad the quadratic-form deviation described
    in the module docstring, flux_min the smallest boundary flux v . nu.
    """

    geometry: str
    field_kind: str
    epsilon: float
    mu_div: float
    mu_quad: float
    flux_min: float
    target_divergence: int
    fd_step: float
    resolution: dict = field(default_factory=dict)
    fallback_count: int = 0


def sup_deviations(field_obj, tube, target_m=None, step=None):
    """Measure mu_div, mu_quad and flux_min for a field on a tube grid.

    The sup over div v and the quadratic form runs over the interior nodes;
    flux_min is taken over the boundary nodes.  The FD step defaults to
    min(1e-5, epsilon/50) so stencils stay well inside the normal disks.
    ``target_m`` overrides the field's own target divergence (rarely useful
    outside of experiments).
    """
    eps = float(tube.epsilon)
    h = float(step) if step is not None else min(1e-5, eps / 50.0)
    J, flags = field_jacobian(
        field_obj, tube.interior_nodes, step=h, seeds=tube.interior_seeds
    )
    div = np.einsum("aii->a", J)
    sym = 0.5 * (J + J.transpose(0, 2, 1))
    evals = np.linalg.eigvalsh(sym)
    m_t = float(target_m if target_m is not None else field_obj.target_divergence)
    mu_div = float(np.abs(div - m_t).max())
    if field_obj.two_sided_quadratic:
        mu_quad = float(np.abs(evals - 1.0).max())
    else:
        mu_quad = max(0.0, float(evals.max()) - 1.0)
    return FieldBounds(
        geometry=getattr(field_obj, "geometry", "?"),
        field_kind=field_obj.kind,
        epsilon=eps,
        mu_div=mu_div,
        mu_quad=mu_quad,
        flux_min=min_boundary_flux(field_obj, tube),
        target_divergence=int(m_t),
        fd_step=h,
        resolution=dict(tube.resolution),
        fallback_count=int(flags.sum()),
    )


def min_boundary_flux(field_obj, tube):
    """Smallest v . nu over the boundary nodes of a tube grid."""
    vals = field_obj.evaluate(tube.boundary_nodes, seeds=tube.boundary_seeds)
    flux = np.einsum("ij,ij->i", vals, tube.boundary_normals)
    return float(flux.min())
