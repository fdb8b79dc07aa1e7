"""Rotation-minimizing transport of normal frames along unit-speed curves.

A normal vector field psi(t) with psi . velocity = 0 is transported by

    psi'(t) = -(psi(t) . acceleration(t)) velocity(t),

which keeps it normal and preserves all inner products among transported
vectors.  The frame integrates this ODE with classical RK4 from the anchor
parameter t = 0 outward (for open curves) or around the loop (for closed
ones), re-orthonormalizing against the tangent after every step and
recording the worst drift seen before correction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import orthonormal_complement
from .errors import ReachExceededError, TransportError

__all__ = ["TransportedFrame", "normal_transport", "tube_point"]

DRIFT_LIMIT = 1e-6


def _orthonormalize(E, tangent):
    q = tangent / np.linalg.norm(tangent)
    out = np.empty_like(E)
    prev = [q]
    for i, row in enumerate(E):
        r = row.copy()
        for u in prev:
            r -= (r @ u) * u
        n = np.linalg.norm(r)
        if n < 1e-10:
            raise TransportError("frame collapsed during orthonormalization")
        r /= n
        prev.append(r)
        out[i] = r
    return out


def _drift(E, tangent):
    gram = E @ E.T - np.eye(len(E))
    return max(float(np.abs(E @ tangent).max()), float(np.abs(gram).max()))


@dataclass(frozen=True)
class TransportedFrame:
    """Orthonormal normal bases sampled on a uniform parameter grid.

    ``bases[j]`` has shape (n-1, n): the rows span the normal space at
    ``ts[j]``.  For closed curves the grid stores both endpoints, and
    ``holonomy[i, j] = e_i(L) . e_j(0)`` measures the loop rotation; it is
    reported, never removed.
    """

    curve: object
    ts: np.ndarray = field(repr=False)
    bases: np.ndarray = field(repr=False)
    anchor_index: int
    max_drift: float
    holonomy: np.ndarray | None = field(default=None, repr=False)

    @property
    def step(self):
        return float(self.ts[1] - self.ts[0])

    def node_index(self, t, tol=1e-9):
        """Index of the grid node equal to t, or None."""
        j = int(round((t - self.ts[0]) / self.step))
        if 0 <= j < len(self.ts) and abs(self.ts[j] - t) <= tol * max(1.0, abs(t)):
            return j
        return None

    def basis_at(self, t):
        """Normal basis at an arbitrary parameter, slerping between nodes."""
        t = float(self.curve.wrap(t))
        j = self.node_index(t)
        if j is not None:
            return self.bases[j]
        j0 = min(int((t - self.ts[0]) / self.step), len(self.ts) - 2)
        lam = (t - self.ts[j0]) / self.step
        E = np.array(
            [_slerp(u, w, lam) for u, w in zip(self.bases[j0], self.bases[j0 + 1])]
        )
        return _orthonormalize(E, self.curve.velocity(t))

    def transport(self, xi, ts=None):
        """Transport an anchor normal vector to the given parameters.

        ``xi`` must be orthogonal to the tangent at the anchor.  With
        ``ts=None`` returns the field on the whole frame grid, shape (M+1, n).
        """
        xi = np.asarray(xi, dtype=float)
        t0 = self.ts[self.anchor_index]
        tangent0 = self.curve.velocity(t0)
        if abs(xi @ tangent0) > 1e-8 * max(1.0, np.linalg.norm(xi)):
            raise ValueError("anchor vector is not normal to the curve")
        coords = self.bases[self.anchor_index] @ xi
        if ts is None:
            return np.einsum("k,mkn->mn", coords, self.bases)
        return np.array([self.basis_at(t).T @ coords for t in np.atleast_1d(ts)])


def _slerp(u, w, lam):
    c = float(np.clip(u @ w, -1.0, 1.0))
    ang = np.arccos(c)
    if ang < 1e-8:
        out = (1.0 - lam) * u + lam * w
    else:
        out = (np.sin((1.0 - lam) * ang) * u + np.sin(lam * ang) * w) / np.sin(ang)
    return out / np.linalg.norm(out)


def normal_transport(curve, node_count=256):
    """Build a :class:`TransportedFrame` on ``node_count`` uniform steps.

    Open intervals must contain the anchor t = 0; the node count is rounded
    up to keep the anchor on the grid.  Raises TransportError if the
    pre-correction drift of orthonormality ever exceeds 1e-6.
    """
    if node_count < 2:
        raise ValueError("need at least two transport steps")
    if not curve.is_unit_speed(1e-8, samples=257):
        raise ValueError("transport requires a unit-speed curve")
    a, b = curve.interval
    if not curve.closed and not a <= 0.0 <= b:
        raise ValueError("open-curve interval must contain the anchor t = 0")

    M = int(node_count)
    if curve.closed:
        anchor = 0
        ts = np.linspace(a, b, M + 1)
    else:
        # place the anchor exactly on the grid
        frac = -a / (b - a)
        k = max(1, round(M * frac))
        M = int(round(k / frac)) if frac > 0 else M
        if M > 64 * node_count:
            raise ValueError("anchor t = 0 sits too close to an interval end")
        ts = np.linspace(a, b, M + 1)
        anchor = int(round(M * frac))
        ts[anchor] = 0.0

    def rhs(t, E):
        return -np.outer(E @ curve.acceleration(t), curve.velocity(t))

    n = curve.ambient
    bases = np.empty((M + 1, n - 1, n))
    E0 = orthonormal_complement(curve.velocity(ts[anchor])[None, :], n)
    bases[anchor] = E0
    worst = 0.0

    for direction in (+1, -1):
        j = anchor
        E = E0
        while 0 < j or direction > 0:
            nxt = j + direction
            if nxt < 0 or nxt > M:
                break
            h = ts[nxt] - ts[j]
            k1 = rhs(ts[j], E)
            k2 = rhs(ts[j] + 0.5 * h, E + 0.5 * h * k1)
            k3 = rhs(ts[j] + 0.5 * h, E + 0.5 * h * k2)
            k4 = rhs(ts[nxt], E + h * k3)
            E = E + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            tangent = curve.velocity(ts[nxt])
            worst = max(worst, _drift(E, tangent))
            if worst > DRIFT_LIMIT:
                raise TransportError(
                    f"orthonormality drift {worst:.3e} at t = {ts[nxt]:.6g} "
                    f"exceeds {DRIFT_LIMIT:g}; increase node_count"
                )
            E = _orthonormalize(E, tangent)
            bases[nxt] = E
            j = nxt
        if curve.closed:
            break

    holonomy = bases[-1] @ bases[0].T if curve.closed else None
    return TransportedFrame(curve, ts, bases, anchor, worst, holonomy)


def tube_point(curve, frame, t, xi):
    """Point gamma(t) + psi(xi, t) and its volume weight 1 - psi . gamma''.

    ``xi`` is a normal vector at the anchor; the weight is the Jacobian of
    the tube coordinates and must stay positive inside the reach.
    """
    psi = frame.transport(xi, [t])[0]
    weight = 1.0 - float(psi @ curve.acceleration(t))
    if weight <= 0.0:
        raise ReachExceededError(
            f"tube coordinate Jacobian vanished at t = {t:.6g}",
            witness=float(t),
        )
    return curve.point(t) + psi, weight
