"""Integral identity checks and nonexistence certificates.

The identity under test, for a multiplier field v, a nonlinearity f with
primitive F, and a function u vanishing on the boundary, reads

    1/2 * surface_int |Du|^2 (v . nu)
        = volume_int Dv[Du] . Du  +  volume_int div v (F(u) - 1/2 |Du|^2).

For supercritical growth t f(t) >= p F(t) >= 0 the right side is bounded by

    [1 - m/2 + m/p + mu_quad + mu_div (1/2 + 1/p)] * volume_int |Du|^2

where m is the target divergence of the field and mu_quad, mu_div its grid
deviation bounds.  A strictly negative bracket together with a nonnegative
boundary flux certifies that no nontrivial solution exists; everything else
stays inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GrowthConditionError
from .fields import field_jacobian, make_field, sup_deviations
from .tubes import build_tube_grid

__all__ = [
    "Nonlinearity",
    "power_nonlinearity",
    "linear_nonlinearity",
    "tabulated_nonlinearity",
    "GrowthReport",
    "check_growth_condition",
    "critical_exponent",
    "ScalarTestFunction",
    "radial_test_function",
    "IdentityReport",
    "identity_residual",
    "Certificate",
    "nonexistence_certificate",
    "SweepResult",
    "certificate_sweep",
]

VARIANTS = ("2.1", "2.4", "3.4")


@dataclass(frozen=True)
class Nonlinearity:
    """Right-hand side f with its primitive F and declared growth exponent p."""

    f: Callable = field(repr=False)
    primitive: Callable = field(repr=False)
    p: float
    name: str = "nonlinearity"


def power_nonlinearity(p):
    """f(t) = |t|^{p-2} t, the model supercritical nonlinearity."""
    if p <= 1:
        raise ValueError("power exponent must exceed 1")

    def f(s):
        s = np.asarray(s, dtype=float)
        return np.abs(s) ** (p - 2.0) * s

    def F(s):
        s = np.asarray(s, dtype=float)
        return np.abs(s) ** p / p

    return Nonlinearity(f, F, float(p), name=f"power(p={p:g})")


def linear_nonlinearity(lam=1.0, p=2.0):
    """f(t) = lam t with declared exponent p (fails the growth test for p > 2)."""
    return Nonlinearity(
        lambda s: lam * np.asarray(s, dtype=float),
        lambda s: 0.5 * lam * np.asarray(s, dtype=float) ** 2,
        float(p),
        name=f"linear(lam={lam:g})",
    )


def tabulated_nonlinearity(s_values, f_values, p, name="tabulated"):
    """Cubic-spline nonlinearity through sample data; F integrates from 0."""
    s_values = np.asarray(s_values, dtype=float)
    f_values = np.asarray(f_values, dtype=float)
    spline = CubicSpline(s_values, f_values)
    anti = spline.antiderivative()
    shift = float(anti(0.0))
    return Nonlinearity(spline, lambda s: anti(s) - shift, float(p), name=name)


@dataclass(frozen=True)
class GrowthReport:
    ok: bool
    worst_margin: float
    worst_at: float
    primitive_min: float


def check_growth_condition(nl, s_max=10.0, samples=2001, tol=1e-10):
    """Sample the condition t f(t) >= p F(t) >= 0 on [-s_max, s_max]."""
    s = np.linspace(-s_max, s_max, samples)
    fs = np.asarray(nl.f(s), dtype=float)
    Fs = np.asarray(nl.primitive(s), dtype=float)
    margin = s * fs - nl.p * Fs
    scale = max(1.0, float(np.abs(Fs).max()))
    i = int(np.argmin(margin))
    ok = margin[i] >= -tol * scale and Fs.min() >= -tol * scale
    return GrowthReport(
        ok=bool(ok),
        worst_margin=float(margin[i]),
        worst_at=float(s[i]),
        primitive_min=float(Fs.min()),
    )


def require_growth_condition(nl, **kw):
    rep = check_growth_condition(nl, **kw)
    if not rep.ok:
        raise GrowthConditionError(
            f"{nl.name} violates t f(t) >= p F(t) >= 0 near t = {rep.worst_at:.4g} "
            f"(margin {rep.worst_margin:.3e})"
        )
    return rep


def critical_exponent(m):
    """2m/(m-2), the exponent at which the certificate bracket hits zero."""
    if m <= 2:
        raise ValueError("critical exponent undefined for effective dimension <= 2")
    return 2.0 * m / (m - 2.0)


@dataclass(frozen=True)
class ScalarTestFunction:
    """Scalar function with analytic gradient, evaluated on point batches."""

    values: Callable = field(repr=False)
    gradients: Callable = field(repr=False)
    name: str = "u"


def radial_test_function(profile, dprofile, ambient, name="radial"):
    """u(x) = profile(|x|) with gradient dprofile(|x|) x/|x|."""

    def values(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(profile(np.linalg.norm(pts, axis=1)), dtype=float)

    def gradients(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.linalg.norm(pts, axis=1)
        safe = np.where(r > 1e-14, r, 1.0)
        du = np.asarray(dprofile(r), dtype=float)
        g = (du / safe)[:, None] * pts
        return np.where(r[:, None] > 1e-14, g, 0.0)

    return ScalarTestFunction(values, gradients, name)


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of the identity on one grid, with bookkeeping."""

    lhs: float
    rhs_jacobian: float
    rhs_divergence: float
    residual: float
    relative_residual: float
    gradient_l2: float
    fd_step: float
    fallback_count: int
    warnings: tuple
    domain: str = ""
    field_kind: str = ""
    nonlinearity: str = ""

    @property
    def rhs(self):
        return self.rhs_jacobian + self.rhs_divergence


def identity_residual(u, nl, tube, field_obj, step=None):
    """Evaluate both sides of the identity for u on a tube grid.

    ``u`` must provide values and gradients; a missing gradient callable is
    rejected outright rather than silently differenced.  If u fails to vanish
    on the boundary beyond 1e-4 a warning is attached, since the surface term
    then misses the F(u) contribution.
    """
    if not callable(getattr(u, "gradients", None)) or not callable(
        getattr(u, "values", None)
    ):
        raise TypeError("test function must expose callable values and gradients")

    eps = float(tube.epsilon)
    h = float(step) if step is not None else min(1e-5, eps / 50.0 if eps > 0 else 1e-5)

    b_pts = tube.boundary_nodes
    b_grad = np.atleast_2d(u.gradients(b_pts))
    b_vals = np.asarray(u.values(b_pts), dtype=float)
    v_b = field_obj.evaluate(b_pts, seeds=tube.boundary_seeds)
    vdotnu = np.einsum("ij,ij->i", v_b, tube.boundary_normals)
    grad2_b = np.einsum("ij,ij->i", b_grad, b_grad)
    lhs = 0.5 * math.fsum(tube.boundary_weights * grad2_b * vdotnu)

    warnings = []
    u_boundary_max = float(np.abs(b_vals).max()) if len(b_vals) else 0.0
    if u_boundary_max > 1e-4:
        warnings.append(
            f"u does not vanish on the boundary (max |u| = {u_boundary_max:.3e}); "
            "the surface term omits its F(u) contribution"
        )

    i_pts = tube.interior_nodes
    grad = np.atleast_2d(u.gradients(i_pts))
    vals = np.asarray(u.values(i_pts), dtype=float)
    J, flags = field_jacobian(field_obj, i_pts, step=h, seeds=tube.interior_seeds)
    div = np.einsum("aii->a", J)
    jac_term = np.einsum("aij,aj,ai->a", J, grad, grad)
    grad2 = np.einsum("ij,ij->i", grad, grad)
    Fu = np.asarray(nl.primitive(vals), dtype=float)

    w = tube.interior_weights
    rhs_jac = math.fsum(w * jac_term)
    rhs_div = math.fsum(w * div * (Fu - 0.5 * grad2))
    gradient_l2 = math.fsum(w * grad2)

    residual = lhs - (rhs_jac + rhs_div)
    denom = max(abs(lhs), abs(rhs_jac + rhs_div), gradient_l2, 1e-300)
    return IdentityReport(
        lhs=lhs,
        rhs_jacobian=rhs_jac,
        rhs_divergence=rhs_div,
        residual=residual,
        relative_residual=abs(residual) / denom,
        gradient_l2=gradient_l2,
        fd_step=h,
        fallback_count=int(flags.sum()),
        warnings=tuple(warnings),
        domain=tube.name,
        field_kind=field_obj.kind,
        nonlinearity=nl.name,
    )


@dataclass(frozen=True)
class Certificate:
    """Outcome of the coefficient test for one (geometry, field, p, epsilon)."""

    theorem: str
    n: int
    k: int
    m: int
    p: float
    epsilon: float | None
    base_coefficient: float
    mu_div: float
    mu_quad: float
    flux_min: float
    total: float
    verdict: str
    reason: str = ""
    geometry: str = ""
    field_kind: str = ""
    stability: dict | None = None


def nonexistence_certificate(
    n, p, variant, k=1, bounds=None, epsilon=None, geometry="", field_kind=""
):
    """Assemble the certificate for one exponent and one set of bounds.

    ``variant`` picks the effective dimension m: "2.1" uses m = n (curve-tube
    field), "2.4" uses m = n - 1 (curve projection field), "3.4" uses
    m = n - k (manifold projection field).  With ``bounds=None`` the
    deviation terms are zero: the centerline limit of the tube family.
    """
    n = int(n)
    k = int(k)
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if p <= 1.0:
        raise ValueError("growth exponent must exceed 1")
    if variant == "2.1":
        m = n
    elif variant == "2.4":
        m = n - 1
    else:
        m = n - k
    if variant == "3.4" and not 1 <= k <= n - 3:
        raise ValueError("variant 3.4 needs 1 <= k <= n - 3")
    if m < 3:
        raise ValueError(f"effective dimension m = {m} is below 3; no certificate")

    if bounds is None:
        mu_div = mu_quad = 0.0
        flux_min = 0.0
    else:
        mu_div, mu_quad, flux_min = bounds.mu_div, bounds.mu_quad, bounds.flux_min
        geometry = geometry or bounds.geometry
        field_kind = field_kind or bounds.field_kind
        if epsilon is None:
            epsilon = bounds.epsilon

    base = 1.0 - m / 2.0 + m / p
    total = base + mu_quad + mu_div * (0.5 + 1.0 / p)
    if total < 0.0 and flux_min >= 0.0:
        verdict = "certified-nonexistence"
        reason = (
            f"coefficient {total:.6g} < 0 with nonnegative boundary flux: "
            "any solution would make a nonnegative quantity strictly negative"
        )
    elif total >= 0.0:
        verdict = "inconclusive"
        reason = f"deviation-adjusted coefficient {total:.6g} is nonnegative"
    else:
        verdict = "inconclusive"
        reason = f"boundary flux may change sign (min v . nu = {flux_min:.6g})"

    return Certificate(
        theorem=variant,
        n=n,
        k=k,
        m=m,
        p=float(p),
        epsilon=None if epsilon is None else float(epsilon),
        base_coefficient=base,
        mu_div=float(mu_div),
        mu_quad=float(mu_quad),
        flux_min=float(flux_min),
        total=float(total),
        verdict=verdict,
        reason=reason,
        geometry=geometry,
        field_kind=field_kind,
        stability=None,
    )


@dataclass(frozen=True)
class SweepResult:
    """Certificates across a family of tube radii, plus the threshold."""

    certificates: tuple
    threshold: float | None
    monotone: bool
    note: str = ""


def certificate_sweep(
    center,
    field_kind,
    n,
    p,
    variant,
    epsilons,
    k=1,
    resolution=None,
    stability_check=True,
    step=None,
):
    """Run the certificate over several tube radii on one geometry.

    For each epsilon the deviation bounds are measured on a fresh grid; with
    ``stability_check`` the bounds are recomputed at doubled resolution and a
    relative change above 10% forces the verdict to inconclusive.  The
    threshold is the largest certified epsilon, reported only when the
    verdicts are monotone (certified below, inconclusive above).
    """
    res = dict(resolution or {})
    certs = []
    for eps in epsilons:
        tube = build_tube_grid(center, float(eps), **res)
        fobj = make_field(field_kind, center)
        bounds = sup_deviations(fobj, tube, step=step)
        cert = nonexistence_certificate(
            n, p, variant, k=k, bounds=bounds, epsilon=float(eps)
        )
        if stability_check:
            fine = sup_deviations(fobj, tube.refined(2), step=step)
            change = max(
                _rel_change(bounds.mu_div, fine.mu_div),
                _rel_change(bounds.mu_quad, fine.mu_quad),
            )
            stab = {
                "mu_div_fine": fine.mu_div,
                "mu_quad_fine": fine.mu_quad,
                "max_rel_change": change,
            }
            if change > 0.10:
                cert = _replace_verdict(
                    cert,
                    "inconclusive",
                    f"deviation bounds moved {100 * change:.1f}% under grid "
                    "refinement; not trusted",
                    stab,
                )
            else:
                cert = _replace_verdict(cert, cert.verdict, cert.reason, stab)
        certs.append(cert)

    order = np.argsort([c.epsilon for c in certs])
    flags = [certs[i].verdict == "certified-nonexistence" for i in order]
    eps_sorted = [certs[i].epsilon for i in order]
    drops = [i for i in range(1, len(flags)) if flags[i] and not flags[i - 1]]
    monotone = not drops
    if monotone and any(flags):
        threshold = max(e for e, c in zip(eps_sorted, flags) if c)
        note = f"largest certified tube radius {threshold:g}"
    elif monotone:
        threshold = None
        note = "no certified radius in the sweep"
    else:
        threshold = None
        note = "verdicts are not monotone in epsilon; threshold undefined"
    return SweepResult(tuple(certs), threshold, monotone, note)


def _rel_change(old, new):
    return abs(new - old) / max(abs(old), abs(new), 1e-9)


def _replace_verdict(cert, verdict, reason, stability):
    from dataclasses import replace

    return replace(cert, verdict=verdict, reason=reason, stability=stability)
