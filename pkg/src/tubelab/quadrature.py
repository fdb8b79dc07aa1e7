"""Quadrature rules used by the tube grids.

All rules return ``(nodes, weights)`` with positive weights.  Sphere rules
return unit vectors in R^d whose weights sum to the surface measure of
S^{d-1}; ball and shell rules fold the radial Jacobian rho^{d-1} into the
weights so callers never multiply by it again.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "gauss_legendre",
    "trapezoid_rule",
    "sphere_rule",
    "ball_rule",
    "shell_rule",
    "sphere_area",
    "ball_volume",
]


def gauss_legendre(n, a=-1.0, b=1.0):
    """Gauss-Legendre nodes and weights on [a, b]."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def trapezoid_rule(a, b, m, periodic=False):
    """Composite trapezoid rule with m panels on [a, b].

    With ``periodic=True`` the right endpoint is dropped and all weights are
    equal, which is spectrally accurate for smooth periodic integrands.
    """
    if m < 1:
        raise ValueError("need at least one panel")
    h = (b - a) / m
    if periodic:
        return a + h * np.arange(m), np.full(m, h)
    nodes = np.linspace(a, b, m + 1)
    w = np.full(m + 1, h)
    w[0] = w[-1] = 0.5 * h
    return nodes, w


def sphere_rule(d, polar=16, angular=32):
    """Quadrature on the unit sphere S^{d-1} in R^d.

    d=1 gives the two-point counting measure on {-1, +1}; d=2 the uniform
    circle rule; d>=3 recurses through Gauss-Legendre nodes in cos(theta).
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    if d == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    if d == 2:
        theta = 2.0 * np.pi * np.arange(angular) / angular
        pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return pts, np.full(angular, 2.0 * np.pi / angular)
    u, wu = gauss_legendre(polar, -1.0, 1.0)
    sub_pts, sub_w = sphere_rule(d - 1, polar, angular)
    s = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
    # measure on S^{d-1}: (1-u^2)^{(d-3)/2} du x dS^{d-2}
    pts = np.concatenate(
        [
            s[:, None, None] * sub_pts[None, :, :],
            np.broadcast_to(u[:, None, None], (polar, len(sub_w), 1)),
        ],
        axis=2,
    ).reshape(-1, d)
    w = (wu * s ** (d - 3))[:, None] * sub_w[None, :]
    return pts, w.reshape(-1)


def ball_rule(d, radius, radial=8, polar=16, angular=32):
    """Quadrature on the solid ball of given radius in R^d."""
    return shell_rule(d, 0.0, radius, radial, polar, angular)


def shell_rule(d, r0, r1, radial=8, polar=16, angular=32):
    """Quadrature on the spherical shell r0 <= |x| <= r1 in R^d."""
    if not 0.0 <= r0 < r1:
        raise ValueError("need 0 <= r0 < r1")
    if d == 1:
        # two symmetric intervals, or one interval when r0 = 0
        if r0 == 0.0:
            return *_as_column(gauss_legendre(2 * radial, -r1, r1)),
        left = gauss_legendre(radial, -r1, -r0)
        right = gauss_legendre(radial, r0, r1)
        nodes = np.concatenate([left[0], right[0]])
        return nodes[:, None], np.concatenate([left[1], right[1]])
    rho, wr = gauss_legendre(radial, r0, r1)
    omega, ws = sphere_rule(d, polar, angular)
    pts = rho[:, None, None] * omega[None, :, :]
    w = (wr * rho ** (d - 1))[:, None] * ws[None, :]
    return pts.reshape(-1, d), w.reshape(-1)


def _as_column(rule):
    nodes, w = rule
    return nodes[:, None], w


def sphere_area(d):
    """Surface measure of S^{d-1} in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def ball_volume(d, radius=1.0):
    """Lebesgue measure of the radius-r ball in R^d."""
    return sphere_area(d) * radius**d / d
