"""Radially symmetric Dirichlet problems on annuli and balls, by shooting.

Solves u'' + (n-1)/r u' + f(u) = 0 with u = 0 on the boundary.  On an
annulus the shooting parameter is the inner slope u'(R1) = alpha; on a ball
it is the center value u(0) = alpha, started just off the origin with the
regular series u(r) = alpha - f(alpha) r^2 / (2n) + O(r^4).

A logarithmic alpha scan brackets sign changes of u(R2; alpha); bisection
sharpens each bracket, and solutions are classified by their interior nodal
count.  Supercritical balls produce no bracket at all, which surfaces as
BracketNotFoundError rather than a fabricated root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson, solve_ivp

from .errors import BracketNotFoundError
from .identity import Nonlinearity, power_nonlinearity
from .quadrature import sphere_area

__all__ = [
    "AnnulusProblem",
    "RadialSolution",
    "integrate_radial",
    "find_radial_solution",
    "RadialIdentityReport",
    "radial_identity_check",
]

BLOWUP = 1e6
ORIGIN_OFFSET = 1e-6


@dataclass(frozen=True)
class AnnulusProblem:
    """Radial Dirichlet problem on {r_inner <= |x| <= r_outer} in R^n.

    ``r_inner = 0`` degenerates to the ball.  The nonlinearity defaults to
    the pure power |u|^{p-2} u.
    """

    ambient: int
    p: float
    r_inner: float
    r_outer: float
    nonlinearity: Nonlinearity | None = None

    def __post_init__(self):
        if self.ambient < 3:
            raise ValueError("need ambient dimension >= 3")
        if not 0.0 <= self.r_inner < self.r_outer:
            raise ValueError("need 0 <= r_inner < r_outer")
        if self.nonlinearity is None:
            object.__setattr__(self, "nonlinearity", power_nonlinearity(self.p))

    @property
    def is_ball(self):
        return self.r_inner == 0.0

    @property
    def name(self):
        dom = (
            f"ball(R={self.r_outer:g})"
            if self.is_ball
            else f"annulus([{self.r_inner:g},{self.r_outer:g}])"
        )
        return f"{dom},n={self.ambient},p={self.p:g}"


def _rhs(problem):
    n = problem.ambient
    f = problem.nonlinearity.f

    def rhs(r, y):
        return [y[1], -(n - 1) / r * y[1] - float(f(y[0]))]

    return rhs


def _blowup_event():
    def ev(r, y):
        return abs(y[0]) - BLOWUP

    ev.terminal = True
    return ev


def integrate_radial(problem, alpha, rtol=1e-11, atol=1e-13, t_eval=None, method="DOP853"):
    """Integrate one shot; returns the scipy solution with dense output.

    Terminates early if |u| exceeds 1e6 (supercritical blowup); the last
    computed state is still available for sign inspection.
    """
    if problem.is_ball:
        r0 = ORIGIN_OFFSET * problem.r_outer
        f0 = float(problem.nonlinearity.f(alpha))
        y0 = [alpha - f0 * r0**2 / (2.0 * problem.ambient), -f0 * r0 / problem.ambient]
    else:
        r0 = problem.r_inner
        y0 = [0.0, alpha]
    sol = solve_ivp(
        _rhs(problem),
        (r0, problem.r_outer),
        y0,
        method=method,
        rtol=rtol,
        atol=atol,
        dense_output=True,
        t_eval=t_eval,
        events=[_blowup_event()],
    )
    if not sol.success and sol.status != 1:
        raise RuntimeError(f"radial integration failed: {sol.message}")
    return sol


def _endpoint_value(problem, alpha, rtol, atol):
    sol = integrate_radial(problem, alpha, rtol=rtol, atol=atol)
    return float(sol.y[0, -1]), sol


def _count_nodes(us, tol):
    """Strict interior sign changes, ignoring samples indistinguishable from 0."""
    sig = us[np.abs(us) > tol]
    if len(sig) < 2:
        return 0
    return int(np.sum(np.sign(sig[:-1]) * np.sign(sig[1:]) < 0))


@dataclass(frozen=True)
class RadialSolution:
    """One shooting solution with its profile and consistency residuals."""

    problem: AnnulusProblem
    alpha: float
    nodal_count: int
    rs: np.ndarray = field(repr=False)
    us: np.ndarray = field(repr=False)
    dus: np.ndarray = field(repr=False)
    boundary_residual: float
    energy_residual: float
    profile: Callable = field(repr=False)
    dprofile: Callable = field(repr=False)

    @property
    def sup_norm(self):
        return float(np.abs(self.us).max())


def find_radial_solution(
    problem,
    nodal_target=0,
    alpha_min=1e-2,
    alpha_max=1e4,
    scan_points=121,
    samples=801,
    rtol=1e-11,
    atol=1e-13,
):
    """Find the shooting solution with the requested interior nodal count.

    Scans alpha on a log grid, bisects every endpoint sign change, classifies
    each root by nodal count and returns the first match (smallest alpha).
    Raises BracketNotFoundError when the scan sees no sign change or no root
    with the requested count; for balls with supercritical pure powers this
    is the expected outcome, not a failure of the scan.
    """
    alphas = np.geomspace(alpha_min, alpha_max, scan_points)
    vals = np.empty(scan_points)
    for i, a in enumerate(alphas):
        vals[i], _ = _endpoint_value(problem, a, rtol=1e-9, atol=1e-11)

    brackets = [
        (alphas[i], alphas[i + 1])
        for i in range(scan_points - 1)
        if np.sign(vals[i]) * np.sign(vals[i + 1]) < 0
    ]
    if not brackets:
        raise BracketNotFoundError(
            f"no sign change of u(R; alpha) for alpha in [{alpha_min:g}, {alpha_max:g}] "
            f"on {problem.name}; no radial solution in this family"
        )

    seen = []
    for lo, hi in brackets:
        flo, _ = _endpoint_value(problem, lo, rtol=1e-9, atol=1e-11)
        for _ in range(80):
            mid = math.sqrt(lo * hi)
            fmid, _ = _endpoint_value(problem, mid, rtol=rtol, atol=atol)
            if np.sign(fmid) == np.sign(flo):
                lo = mid
                flo = fmid
            else:
                hi = mid
            if hi - lo <= 1e-14 * hi:
                break
        alpha = 0.5 * (lo + hi)

        sol = integrate_radial(problem, alpha, rtol=rtol, atol=atol)
        r0 = sol.t[0]
        rs = np.linspace(r0, problem.r_outer, samples)
        ys = sol.sol(rs)
        us, dus = ys[0], ys[1]
        count = _count_nodes(us[1:-1], 1e-9 * np.abs(us).max())
        if count != nodal_target:
            seen.append(count)
            continue

        n = problem.ambient
        omega = sphere_area(n)
        kinetic = omega * simpson(rs ** (n - 1) * dus**2, x=rs)
        potential = omega * simpson(
            rs ** (n - 1) * us * np.asarray(problem.nonlinearity.f(us)), x=rs
        )
        energy_res = abs(kinetic - potential) / max(abs(kinetic), abs(potential), 1e-300)
        boundary_res = abs(float(us[-1]))
        if not problem.is_ball:
            boundary_res = max(boundary_res, abs(float(us[0])))

        dense = sol.sol

        return RadialSolution(
            problem=problem,
            alpha=float(alpha),
            nodal_count=count,
            rs=rs,
            us=us,
            dus=dus,
            boundary_residual=boundary_res,
            energy_residual=float(energy_res),
            profile=lambda r: dense(np.clip(r, r0, problem.r_outer))[0],
            dprofile=lambda r: dense(np.clip(r, r0, problem.r_outer))[1],
        )

    raise BracketNotFoundError(
        f"no root with {nodal_target} interior nodes on {problem.name}; "
        f"found nodal counts {sorted(set(seen))}"
    )


@dataclass(frozen=True)
class RadialIdentityReport:
    """One-dimensional reduction of the identity for the position field."""

    lhs: float
    rhs_gradient: float
    rhs_divergence: float
    residual: float
    relative_residual: float
    panels: int

    @property
    def rhs(self):
        return self.rhs_gradient + self.rhs_divergence


def radial_identity_check(solution, panels=512):
    """Check the identity for v(x) = x on the radial solution.

    Both volume terms use the composite trapezoid rule with ``panels``
    uniform panels, so the residual shrinks at second order as panels
    double; the surface term is exact in the ODE data.
    """
    prob = solution.problem
    n = prob.ambient
    omega = sphere_area(n)
    nl = prob.nonlinearity
    r1 = float(solution.rs[0])
    r2 = prob.r_outer

    du1 = float(solution.dprofile(r1))
    du2 = float(solution.dprofile(r2))
    lhs = 0.5 * omega * (du2**2 * r2**n - du1**2 * r1**n)

    rs = np.linspace(r1, r2, panels + 1)
    w = np.full(panels + 1, (r2 - r1) / panels)
    w[0] *= 0.5
    w[-1] *= 0.5
    us = np.asarray(solution.profile(rs), dtype=float)
    dus = np.asarray(solution.dprofile(rs), dtype=float)
    measure = omega * rs ** (n - 1)

    rhs_grad = math.fsum(w * measure * dus**2)
    Fu = np.asarray(nl.primitive(us), dtype=float)
    rhs_div = math.fsum(w * measure * n * (Fu - 0.5 * dus**2))

    residual = lhs - (rhs_grad + rhs_div)
    denom = max(abs(lhs), abs(rhs_grad + rhs_div), 1e-300)
    return RadialIdentityReport(
        lhs=lhs,
        rhs_gradient=rhs_grad,
        rhs_divergence=rhs_div,
        residual=residual,
        relative_residual=abs(residual) / denom,
        panels=panels,
    )
