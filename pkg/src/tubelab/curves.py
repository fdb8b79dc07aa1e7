"""Center curves: construction, arclength reparametrization, projection.

A :class:`Curve` bundles the parametrization together with its first three
derivatives so downstream code never differentiates numerically.  All four
callables accept a scalar parameter or a 1-d array and return points in the
ambient space, one row per parameter value.

Most of the package assumes unit-speed curves; :func:`reparametrize_arclength`
converts anything with nonvanishing velocity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import AmbiguousProjectionError, DegenerateCurveError, ProjectionError
from .quadrature import gauss_legendre

__all__ = [
    "Curve",
    "segment",
    "circle",
    "circle_arc",
    "helix_arc",
    "stereographic_arc",
    "polynomial_curve",
    "fourier_curve",
    "arc_length",
    "reparametrize_arclength",
    "project_to_curve",
    "orthonormal_complement",
]


def _vectorized(f):
    """Wrap a 1-d-array callable so it also accepts and returns scalars."""

    def g(t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return f(t[None])[0]
        return f(t)

    return g


@dataclass(frozen=True)
class Curve:
    """Parametrized curve in R^n with first, second and third derivatives.

    ``interval`` is the closed parameter range [a, b].  For ``closed`` curves
    the parametrization is b-a periodic and point(a) == point(b).
    """

    point: Callable = field(repr=False)
    velocity: Callable = field(repr=False)
    acceleration: Callable = field(repr=False)
    jerk: Callable = field(repr=False)
    interval: tuple
    ambient: int
    closed: bool = False
    name: str = "curve"

    def __post_init__(self):
        a, b = self.interval
        if not b > a:
            raise ValueError("interval must have positive length")
        for attr in ("point", "velocity", "acceleration", "jerk"):
            object.__setattr__(self, attr, _vectorized(getattr(self, attr)))

    def length(self, panels=512):
        return arc_length(self, panels=panels)

    def speed_range(self, samples=4097):
        """(min, max, argmin) of |velocity| over a uniform sample."""
        ts = np.linspace(*self.interval, samples)
        sp = np.linalg.norm(self.velocity(ts), axis=1)
        i = int(np.argmin(sp))
        return float(sp[i]), float(sp.max()), float(ts[i])

    def is_unit_speed(self, tol=1e-9, samples=4097):
        lo, hi, _ = self.speed_range(samples)
        return abs(lo - 1.0) <= tol and abs(hi - 1.0) <= tol

    def wrap(self, t):
        """Map parameters into [a, b], using periodicity when closed."""
        a, b = self.interval
        t = np.asarray(t, dtype=float)
        if self.closed:
            return a + np.mod(t - a, b - a)
        return np.clip(t, a, b)


def _pad(rows, ambient):
    rows = np.asarray(rows, dtype=float)
    m, d = rows.shape
    if d == ambient:
        return rows
    out = np.zeros((m, ambient))
    out[:, :d] = rows
    return out


def segment(halflength=1.0, ambient=3):
    """Straight unit-speed segment t e1 for t in [-halflength, halflength]."""
    if halflength <= 0:
        raise ValueError("halflength must be positive")
    e1 = np.zeros(ambient)
    e1[0] = 1.0
    zero = np.zeros(ambient)

    return Curve(
        point=lambda t: t[:, None] * e1,
        velocity=lambda t: np.broadcast_to(e1, (len(t), ambient)).copy(),
        acceleration=lambda t: np.broadcast_to(zero, (len(t), ambient)).copy(),
        jerk=lambda t: np.broadcast_to(zero, (len(t), ambient)).copy(),
        interval=(-halflength, halflength),
        ambient=ambient,
        name=f"segment({halflength:g})",
    )


def _planar_arc(radius, interval, ambient, closed, name):
    # unit-speed circle of given radius in the e1-e2 plane
    R = float(radius)

    def pt(t):
        th = t / R
        return _pad(np.stack([R * np.cos(th), R * np.sin(th)], axis=1), ambient)

    def vel(t):
        th = t / R
        return _pad(np.stack([-np.sin(th), np.cos(th)], axis=1), ambient)

    def acc(t):
        th = t / R
        return _pad(np.stack([-np.cos(th) / R, -np.sin(th) / R], axis=1), ambient)

    def jrk(t):
        th = t / R
        return _pad(np.stack([np.sin(th) / R**2, -np.cos(th) / R**2], axis=1), ambient)

    return Curve(pt, vel, acc, jrk, interval, ambient, closed=closed, name=name)


def circle(radius=1.0, ambient=3):
    """Closed unit-speed circle of the given radius in the e1-e2 plane."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    L = 2.0 * np.pi * radius
    return _planar_arc(radius, (0.0, L), ambient, True, f"circle({radius:g})")


def circle_arc(t_min=-1.0, t_max=1.0, radius=1.0, ambient=3):
    """Open unit-speed circular arc; the interval must contain 0."""
    if not t_min < 0.0 < t_max:
        raise ValueError("arc interval must contain 0")
    if t_max - t_min >= 2.0 * np.pi * radius:
        raise ValueError("arc spans the whole circle; use circle() instead")
    name = f"circle-arc({radius:g},[{t_min:g},{t_max:g}])"
    return _planar_arc(radius, (t_min, t_max), ambient, False, name)


def helix_arc(radius=1.0, pitch=1.0, turns=1.0, ambient=3):
    """Open unit-speed helix arc centered at its midpoint.

    ``pitch`` is the axial rise per radian of rotation; one full turn spans
    2*pi*sqrt(radius^2 + pitch^2) of arclength.
    """
    if ambient < 3:
        raise ValueError("helix needs ambient dimension >= 3")
    R, rho = float(radius), float(pitch)
    c = np.hypot(R, rho)
    smax = float(turns) * np.pi * c

    def pt(t):
        th = t / c
        return _pad(np.stack([R * np.cos(th), R * np.sin(th), rho * th], axis=1), ambient)

    def vel(t):
        th = t / c
        rows = np.stack([-R * np.sin(th), R * np.cos(th), np.full_like(th, rho)], axis=1)
        return _pad(rows / c, ambient)

    def acc(t):
        th = t / c
        rows = np.stack([-R * np.cos(th), -R * np.sin(th), np.zeros_like(th)], axis=1)
        return _pad(rows / c**2, ambient)

    def jrk(t):
        th = t / c
        rows = np.stack([R * np.sin(th), -R * np.cos(th), np.zeros_like(th)], axis=1)
        return _pad(rows / c**3, ambient)

    name = f"helix-arc({R:g},{rho:g},{turns:g})"
    return Curve(pt, vel, acc, jrk, (-smax, smax), ambient, name=name)


def stereographic_arc(chart_radius=2.0, ambient=3):
    """Unit-circle arc covered by the 1-d stereographic chart of given radius.

    The chart x |-> (2x, x^2 - 1)/(x^2 + 1) maps (-r, r) onto the arc
    {(sin s, -cos s): |s| < 2 arctan r}, traversed at unit speed in s.
    """
    r = float(chart_radius)
    if r <= 0:
        raise ValueError("chart radius must be positive")
    phi = 2.0 * np.arctan(r)

    def pt(t):
        return _pad(np.stack([np.sin(t), -np.cos(t)], axis=1), ambient)

    def vel(t):
        return _pad(np.stack([np.cos(t), np.sin(t)], axis=1), ambient)

    def acc(t):
        return _pad(np.stack([-np.sin(t), np.cos(t)], axis=1), ambient)

    def jrk(t):
        return _pad(np.stack([-np.cos(t), -np.sin(t)], axis=1), ambient)

    name = f"stereographic-arc({r:g})"
    return Curve(pt, vel, acc, jrk, (-phi, phi), ambient, name=name)


def polynomial_curve(coeffs, interval, ambient=None):
    """Curve with polynomial components: point(t) = sum_j coeffs[j] t^j.

    ``coeffs`` has shape (degree+1, ambient).  Generally not unit speed; pass
    the result through :func:`reparametrize_arclength` before building tubes.
    """
    C = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if ambient is None:
        ambient = C.shape[1]
    C = np.pad(C, ((0, 0), (0, ambient - C.shape[1])))
    polyder = np.polynomial.polynomial.polyder
    tables = [C] + [polyder(C, m=d, axis=0) for d in (1, 2, 3)]
    tables = [T if T.size else np.zeros((1, ambient)) for T in tables]

    def make(T):
        return lambda t: np.polynomial.polynomial.polyval(t, T).T

    fns = [make(T) for T in tables]
    return Curve(*fns, tuple(interval), ambient, name=f"polynomial(deg={len(C) - 1})")


def fourier_curve(cos_coeffs, sin_coeffs, ambient=None):
    """Closed curve a_0 + sum_j a_j cos(jt) + b_j sin(jt) on [0, 2*pi].

    ``cos_coeffs`` has shape (J+1, ambient) with the constant term first;
    ``sin_coeffs`` has shape (J, ambient) for frequencies 1..J.
    """
    A = np.atleast_2d(np.asarray(cos_coeffs, dtype=float))
    B = np.atleast_2d(np.asarray(sin_coeffs, dtype=float))
    if ambient is None:
        ambient = max(A.shape[1], B.shape[1])
    A = np.pad(A, ((0, 0), (0, ambient - A.shape[1])))
    B = np.pad(B, ((0, 0), (0, ambient - B.shape[1])))
    J = max(A.shape[0] - 1, B.shape[0])
    A = np.pad(A, ((0, J + 1 - A.shape[0]), (0, 0)))
    B = np.pad(B, ((0, J - B.shape[0]), (0, 0)))
    js = np.arange(1, J + 1, dtype=float)

    def deriv(order):
        def f(t):
            arg = np.outer(t, js)
            c, s = np.cos(arg), np.sin(arg)
            k = js**order
            # derivative of cos(jt) cycles through -j sin, -j^2 cos, j^3 sin
            table = {
                0: (c, s),
                1: (-s * js, c * js),
                2: (-c * k, -s * k),
                3: (s * k, -c * k),
            }
            ca, sa = table[order]
            out = ca @ A[1:] + sa @ B
            if order == 0:
                out = out + A[0]
            return out

        return f

    fns = [deriv(d) for d in range(4)]
    return Curve(*fns, (0.0, 2.0 * np.pi), ambient, closed=True, name=f"fourier(J={J})")


def arc_length(curve, panels=512, order=7):
    """Total arclength via composite Gauss-Legendre integration."""
    a, b = curve.interval
    edges = np.linspace(a, b, panels + 1)
    x, w = gauss_legendre(order)
    h = (b - a) / panels
    ts = (edges[:-1, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    sp = np.linalg.norm(curve.velocity(ts), axis=1)
    return float(np.sum(sp * np.tile(0.5 * h * w, panels)))


def reparametrize_arclength(curve, tolerance=1e-9, panels=2048):
    """Return a unit-speed version of ``curve``.

    Open curves come back on [-L/2, L/2], closed ones on [0, L].  Velocity,
    acceleration and jerk of the result are computed from the original
    derivatives by the chain rule, so the output is unit speed to machine
    precision; only the parameter lookup t(s) involves interpolation.

    Raises DegenerateCurveError if |velocity| comes within 1e-9 of zero
    (relative to its maximum) anywhere on a dense sample.
    """
    a, b = curve.interval
    ts = np.linspace(a, b, 4097)
    sp = np.linalg.norm(curve.velocity(ts), axis=1)
    lo, hi = float(sp.min()), float(sp.max())
    if lo <= max(1e-12, 1e-9 * hi):
        t_bad = float(ts[int(np.argmin(sp))])
        raise DegenerateCurveError(
            f"velocity vanishes near t = {t_bad:.6g} (|v| = {lo:.3e})", parameter=t_bad
        )

    if abs(lo - 1.0) <= tolerance and abs(hi - 1.0) <= tolerance:
        # already unit speed: at most shift the parameter interval
        shift = 0.0 if curve.closed else 0.5 * (a + b)
        base = a if curve.closed else shift
        if base == 0.0:
            return curve
        new_iv = (0.0, b - a) if curve.closed else (a - shift, b - shift)
        return replace(
            curve,
            point=lambda s: curve.point(s + base),
            velocity=lambda s: curve.velocity(s + base),
            acceleration=lambda s: curve.acceleration(s + base),
            jerk=lambda s: curve.jerk(s + base),
            interval=new_iv,
        )

    # cumulative arclength table on panel edges, then invert by spline
    edges = np.linspace(a, b, panels + 1)
    x, w = gauss_legendre(7)
    h = (b - a) / panels
    tq = (edges[:-1, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    sq = np.linalg.norm(curve.velocity(tq), axis=1).reshape(panels, -1)
    panel_len = sq @ (0.5 * h * w)
    s_edges = np.concatenate([[0.0], np.cumsum(panel_len)])
    L = float(s_edges[-1])
    t_of_s = CubicSpline(s_edges, edges)

    offset = 0.0 if curve.closed else -0.5 * L
    new_iv = (0.0, L) if curve.closed else (-0.5 * L, 0.5 * L)

    def lookup(s):
        u = s - offset if curve.closed else s + 0.5 * L
        if curve.closed:
            u = np.mod(u, L)
        return t_of_s(np.clip(u, 0.0, L))

    def chain(s):
        t = lookup(s)
        c1 = curve.velocity(t)
        c2 = curve.acceleration(t)
        c3 = curve.jerk(t)
        sig = np.linalg.norm(c1, axis=1)
        sig_p = np.einsum("ij,ij->i", c1, c2) / sig
        sig_pp = (np.einsum("ij,ij->i", c2, c2) + np.einsum("ij,ij->i", c1, c3) - sig_p**2) / sig
        tp = 1.0 / sig
        tpp = -sig_p / sig**3
        tppp = -sig_pp / sig**4 + 3.0 * sig_p**2 / sig**5
        return t, c1, c2, c3, tp, tpp, tppp

    def pt(s):
        return curve.point(lookup(s))

    def vel(s):
        _, c1, _, _, tp, _, _ = chain(s)
        return c1 * tp[:, None]

    def acc(s):
        _, c1, c2, _, tp, tpp, _ = chain(s)
        return c2 * (tp**2)[:, None] + c1 * tpp[:, None]

    def jrk(s):
        _, c1, c2, c3, tp, tpp, tppp = chain(s)
        return c3 * (tp**3)[:, None] + 3.0 * c2 * (tp * tpp)[:, None] + c1 * tppp[:, None]

    out = Curve(
        pt, vel, acc, jrk, new_iv, curve.ambient, closed=curve.closed,
        name=f"{curve.name}|arclength",
    )
    if not out.is_unit_speed(max(tolerance, 1e-10)):
        raise DegenerateCurveError("arclength reparametrization failed verification")
    return out


def project_to_curve(curve, points, seeds=None, scan=1024, tol=1e-12, strict=True):
    """Nearest-point projection onto a unit-speed curve.

    Returns ``(t, foot, offset, ok)`` where ``offset = x - foot``.  With no
    seeds, candidates come from a dense scan; two nearly tied distance minima
    (or a flat distance profile, e.g. on the axis of a circle) raise
    AmbiguousProjectionError since such points lie beyond the reach.  Entries
    whose offset fails the orthogonality test |offset . velocity| <= 1e-9
    are marked not-ok; with ``strict=True`` that raises ProjectionError.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    a, b = curve.interval
    span = b - a

    if seeds is None:
        m = scan if curve.closed else scan + 1
        ts_scan = a + span * np.arange(m) / scan
        G = curve.point(ts_scan)
        t = np.empty(len(pts))
        # chunk the scan so the (points x scan) distance table stays small
        for lo in range(0, len(pts), 1024):
            block = pts[lo : lo + 1024]
            d2 = ((block[:, None, :] - G[None, :, :]) ** 2).sum(axis=2)
            t[lo : lo + 1024] = ts_scan[np.argmin(d2, axis=1)]
            _check_ambiguity(d2, ts_scan, curve.closed, span / scan)
    else:
        t = np.array(np.broadcast_to(seeds, (len(pts),)), dtype=float)

    scale = np.maximum(1.0, np.linalg.norm(pts, axis=1))
    for _ in range(60):
        foot = curve.point(t)
        vel = curve.velocity(t)
        acc = curve.acceleration(t)
        off = pts - foot
        g = np.einsum("ij,ij->i", off, vel)
        gp = np.einsum("ij,ij->i", off, acc) - 1.0
        if np.all(np.abs(g) <= tol * scale):
            break
        step = np.where(np.abs(gp) > 1e-14, -g / gp, 0.0)
        step = np.clip(step, -0.25 * span, 0.25 * span)
        t = curve.wrap(t + step)

    foot = curve.point(t)
    off = pts - foot
    resid = np.abs(np.einsum("ij,ij->i", off, curve.velocity(t)))
    ok = resid <= 1e-9 * np.maximum(1.0, np.linalg.norm(off, axis=1))
    if strict and not ok.all():
        i = int(np.argmax(~ok))
        raise ProjectionError(
            f"projection left the curve's parameter range or failed to converge "
            f"(point {pts[i]}, tangential residual {resid[i]:.3e})"
        )
    return t, foot, off, ok


def _check_ambiguity(d2, ts_scan, closed, step):
    dist = np.sqrt(d2)
    if closed:
        left = np.roll(dist, 1, axis=1)
        right = np.roll(dist, -1, axis=1)
    else:
        pad = np.full((len(dist), 1), np.inf)
        left = np.concatenate([pad, dist[:, :-1]], axis=1)
        right = np.concatenate([dist[:, 1:], pad], axis=1)
    is_min = (dist <= left) & (dist <= right)
    for i in range(len(dist)):
        cand = np.where(is_min[i])[0]
        if len(cand) == 0:
            raise AmbiguousProjectionError(
                "distance to curve is flat; point is beyond the reach"
            )
        vals = dist[i, cand]
        order = np.argsort(vals)
        if len(cand) > 1:
            b0, b1 = cand[order[0]], cand[order[1]]
            sep = abs(ts_scan[b0] - ts_scan[b1])
            if closed:
                span = ts_scan[-1] + step - ts_scan[0]
                sep = min(sep, span - sep)
            if vals[order[1]] - vals[order[0]] < 1e-6 and sep > 2.0 * step:
                raise AmbiguousProjectionError(
                    f"two nearest-point candidates within 1e-6 "
                    f"(t = {ts_scan[b0]:.6g} and {ts_scan[b1]:.6g}); "
                    "point is beyond the reach"
                )


def orthonormal_complement(vectors, ambient):
    """Deterministic orthonormal basis of the orthogonal complement.

    ``vectors`` is (k, n) with orthonormal-ish rows; returns (n-k, n).
    """
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    k = len(V)
    basis = [v / np.linalg.norm(v) for v in V]
    out = []
    for j in range(ambient):
        e = np.zeros(ambient)
        e[j] = 1.0
        for q in basis:
            e = e - (e @ q) * q
        norm = np.linalg.norm(e)
        if norm > 1e-8:
            e = e / norm
            basis.append(e)
            out.append(e)
        if len(out) == ambient - k:
            break
    if len(out) != ambient - k:
        raise ValueError("failed to complete orthonormal basis")
    return np.array(out)
