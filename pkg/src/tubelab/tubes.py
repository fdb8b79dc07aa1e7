"""Tube domains and their quadrature grids.

A tube grid carries interior nodes with volume weights and boundary nodes
with surface weights, outward unit normals and a region tag out of
{interior, lateral, cap-a, cap-b}.  Curve tubes use transported normal
frames and the exact coordinate Jacobian 1 - psi . gamma''; manifold tubes
use the closed-form offset Jacobian of the sphere family.

Grids are deterministic: same inputs, same nodes, bit for bit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from types import SimpleNamespace

import numpy as np
from scipy.spatial.distance import pdist

from .curves import Curve
from .errors import ReachExceededError
from .quadrature import ball_rule, shell_rule, sphere_rule, trapezoid_rule
from .transport import normal_transport

__all__ = [
    "TubeDomain",
    "reach_estimate",
    "build_tube_grid",
    "ball_grid",
    "shell_grid",
    "write_grid_csv",
    "read_grid_csv",
]


@dataclass(frozen=True)
class TubeDomain:
    """Quadrature grid for a tubular (or radial) domain in R^n."""

    center: object
    epsilon: float
    reach: float
    kind: str
    ambient: int
    resolution: dict
    interior_nodes: np.ndarray = field(repr=False)
    interior_weights: np.ndarray = field(repr=False)
    boundary_nodes: np.ndarray = field(repr=False)
    boundary_weights: np.ndarray = field(repr=False)
    boundary_normals: np.ndarray = field(repr=False)
    boundary_region: np.ndarray = field(repr=False)
    interior_seeds: np.ndarray | None = field(default=None, repr=False)
    boundary_seeds: np.ndarray | None = field(default=None, repr=False)
    frame: object | None = field(default=None, repr=False)
    name: str = "tube"

    @property
    def volume(self):
        return math.fsum(self.interior_weights)

    @property
    def boundary_area(self):
        return math.fsum(self.boundary_weights)

    def refined(self, factor=2):
        """Rebuild the same domain with every resolution knob scaled."""
        res = {k: max(1, int(round(v * factor))) for k, v in self.resolution.items()}
        if self.kind == "ball":
            return ball_grid(self.epsilon, self.ambient, **res)
        if self.kind == "shell":
            inner = self.reach  # shell stores r0 in the reach slot
            return shell_grid(inner, self.epsilon, self.ambient, **res)
        return build_tube_grid(self.center, self.epsilon, **res)


def reach_estimate(center, samples=2048, details=False):
    """Empirical reach of a center set.

    For manifolds this is the closed-form focal distance.  For unit-speed
    curves it is min(1/max|gamma''|, half the minimal chord between samples
    whose arclength separation is at least pi/max|gamma''|).  The second
    term guards against distant strands folding back; nearby samples are
    excluded because their chords shrink linearly with separation.
    """
    if not isinstance(center, Curve):
        r = float(center.reach)
        return (r, {"kind": "focal", "witness": None}) if details else r

    a, b = center.interval
    L = b - a
    m = samples if center.closed else samples + 1
    ts = a + L * np.arange(m) / samples
    acc = np.linalg.norm(center.acceleration(ts), axis=1)
    i_k = int(np.argmax(acc))
    kappa = float(acc[i_k])
    r_curv = 1.0 / kappa if kappa > 1e-12 else np.inf

    r_glob = np.inf
    witness = (float(ts[i_k]),)
    if np.isfinite(r_curv):
        pts = center.point(ts)
        chord = pdist(pts)
        sep = pdist(ts[:, None], metric="cityblock")
        if center.closed:
            sep = np.minimum(sep, L - sep)
        eligible = sep >= np.pi * r_curv * (1.0 - 1e-9)
        if eligible.any():
            idx = np.where(eligible)[0]
            j = idx[np.argmin(chord[idx])]
            r_glob = 0.5 * float(chord[j])
            if r_glob < r_curv:
                i1, i2 = _condensed_to_pair(j, m)
                witness = (float(ts[i1]), float(ts[i2]))
    value = float(min(r_curv, r_glob))
    if details:
        return value, {
            "kind": "curvature" if r_curv <= r_glob else "clearance",
            "curvature_radius": r_curv,
            "clearance_radius": float(r_glob),
            "witness": witness,
        }
    return value


def _condensed_to_pair(idx, m):
    # invert the condensed pdist index
    i = 0
    while idx >= m - i - 1:
        idx -= m - i - 1
        i += 1
    return i, i + 1 + idx


def _check_epsilon(epsilon, reach, info):
    if epsilon >= reach:
        raise ReachExceededError(
            f"tube radius {epsilon:g} exceeds the estimated reach {reach:g} "
            f"(limited by {info['kind']} at parameters {info['witness']})",
            epsilon=epsilon,
            reach=reach,
            witness=info["witness"],
        )


def build_tube_grid(center, epsilon, axial=64, radial=8, angular=16):
    """Quadrature grid for the epsilon-tube around a curve or manifold.

    ``axial`` controls the resolution along the center set, ``radial`` and
    ``angular`` the rule on each normal disk.  Raises ReachExceededError if
    epsilon is not strictly below the estimated reach.
    """
    if epsilon <= 0:
        raise ValueError("tube radius must be positive")
    if isinstance(center, Curve):
        return _curve_tube(center, float(epsilon), axial, radial, angular)
    return _manifold_tube(center, float(epsilon), axial, radial, angular)


def _normal_rules(d, epsilon, radial, angular):
    polar = max(2, angular // 2)
    disk, disk_w = ball_rule(d, epsilon, radial, polar, angular)
    sph, sph_w = sphere_rule(d, polar, angular)
    return disk, disk_w, sph, sph_w


def _curve_tube(curve, epsilon, axial, radial, angular):
    if not curve.is_unit_speed(1e-8, samples=257):
        raise ValueError("tube grids require a unit-speed center curve")
    reach, info = reach_estimate(curve, details=True)
    _check_epsilon(epsilon, reach, info)

    a, b = curve.interval
    n = curve.ambient
    d = n - 1
    frame = normal_transport(curve, 4 * axial)
    ts, wt = trapezoid_rule(a, b, axial, periodic=curve.closed)
    disk, disk_w, sph, sph_w = _normal_rules(d, epsilon, radial, angular)

    ipts, iw, iseed = [], [], []
    bpts, bw, bnrm, breg, bseed = [], [], [], [], []

    for t_j, w_j in zip(ts, wt):
        g = curve.point(t_j)
        g2 = curve.acceleration(t_j)
        E = frame.basis_at(t_j)
        psi = disk @ E
        jac = 1.0 - psi @ g2
        if np.any(jac <= 0.0):
            raise ReachExceededError(
                f"tube coordinate Jacobian vanished at t = {t_j:.6g}",
                epsilon=epsilon,
                reach=reach,
                witness=float(t_j),
            )
        ipts.append(g + psi)
        iw.append(w_j * disk_w * jac)
        iseed.append(np.full(len(disk_w), t_j))

        hat = sph @ E
        bpts.append(g + epsilon * hat)
        bw.append(w_j * sph_w * epsilon ** (d - 1) * (1.0 - epsilon * (hat @ g2)))
        bnrm.append(hat)
        breg.append(np.full(len(sph_w), "lateral", dtype=object))
        bseed.append(np.full(len(sph_w), t_j))

    if not curve.closed:
        for t_end, tag, sign in ((a, "cap-a", -1.0), (b, "cap-b", 1.0)):
            E = frame.basis_at(t_end)
            psi = disk @ E
            bpts.append(curve.point(t_end) + psi)
            bw.append(disk_w.copy())
            bnrm.append(np.broadcast_to(sign * curve.velocity(t_end), psi.shape).copy())
            breg.append(np.full(len(disk_w), tag, dtype=object))
            bseed.append(np.full(len(disk_w), t_end))

    return TubeDomain(
        center=curve,
        epsilon=epsilon,
        reach=reach,
        kind="curve-tube",
        ambient=n,
        resolution={"axial": axial, "radial": radial, "angular": angular},
        interior_nodes=np.concatenate(ipts),
        interior_weights=np.concatenate(iw),
        boundary_nodes=np.concatenate(bpts),
        boundary_weights=np.concatenate(bw),
        boundary_normals=np.concatenate(bnrm),
        boundary_region=np.concatenate(breg),
        interior_seeds=np.concatenate(iseed),
        boundary_seeds=np.concatenate(bseed),
        frame=frame,
        name=f"tube({curve.name},eps={epsilon:g})",
    )


def _manifold_tube(manifold, epsilon, axial, radial, angular):
    reach, info = reach_estimate(manifold, details=True)
    _check_epsilon(epsilon, reach, info)
    n = manifold.ambient
    k = manifold.dim
    d = n - k

    if manifold.has_boundary:
        feet, wy = manifold.surface_rule(radial=axial, polar=axial, angular=2 * axial)
    else:
        feet, wy = manifold.surface_rule(polar=axial, angular=2 * axial)
    bases = manifold.normal_basis(feet)
    disk, disk_w, sph, sph_w = _normal_rules(d, epsilon, radial, angular)

    ipts, iw = [], []
    bpts, bw, bnrm, breg = [], [], [], []

    for y, w_y, N in zip(feet, wy, bases):
        psi = disk @ N
        jac = manifold.tube_jacobian(np.broadcast_to(y, psi.shape), psi)
        if np.any(jac <= 0.0):
            raise ReachExceededError(
                "tube offset Jacobian vanished inside the normal disk",
                epsilon=epsilon,
                reach=reach,
            )
        ipts.append(y + psi)
        iw.append(w_y * disk_w * jac)

        hat = sph @ N
        jac_b = manifold.tube_jacobian(np.broadcast_to(y, hat.shape), epsilon * hat)
        bpts.append(y + epsilon * hat)
        bw.append(w_y * sph_w * epsilon ** (d - 1) * jac_b)
        bnrm.append(hat)
        breg.append(np.full(len(sph_w), "lateral", dtype=object))

    rim = manifold.boundary_rule(polar=max(2, angular // 2), angular=angular)
    if rim is not None:
        rim_pts, rim_w, conormal = rim
        rim_bases = manifold.normal_basis(rim_pts)
        for y, w_y, N, eta in zip(rim_pts, rim_w, rim_bases, conormal):
            psi = disk @ N
            a_rad = psi @ y  # radial offset component on the unit sphere
            bpts.append(y + psi)
            bw.append(w_y * disk_w * (1.0 + a_rad) ** (k - 1))
            bnrm.append(np.broadcast_to(eta, psi.shape).copy())
            breg.append(np.full(len(disk_w), "cap-a", dtype=object))

    return TubeDomain(
        center=manifold,
        epsilon=epsilon,
        reach=reach,
        kind="manifold-tube",
        ambient=n,
        resolution={"axial": axial, "radial": radial, "angular": angular},
        interior_nodes=np.concatenate(ipts),
        interior_weights=np.concatenate(iw),
        boundary_nodes=np.concatenate(bpts),
        boundary_weights=np.concatenate(bw),
        boundary_normals=np.concatenate(bnrm),
        boundary_region=np.concatenate(breg),
        name=f"tube({manifold.name},eps={epsilon:g})",
    )


def ball_grid(radius, ambient=3, radial=24, angular=32):
    """Quadrature grid for the ball of given radius centered at the origin."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    polar = max(2, angular // 2)
    ipts, iw = ball_rule(ambient, radius, radial, polar, angular)
    omega, ws = sphere_rule(ambient, polar, angular)
    return TubeDomain(
        center=None,
        epsilon=float(radius),
        reach=0.0,
        kind="ball",
        ambient=ambient,
        resolution={"radial": radial, "angular": angular},
        interior_nodes=ipts,
        interior_weights=iw,
        boundary_nodes=radius * omega,
        boundary_weights=ws * radius ** (ambient - 1),
        boundary_normals=omega,
        boundary_region=np.full(len(ws), "lateral", dtype=object),
        name=f"ball(R={radius:g},n={ambient})",
    )


def shell_grid(r_inner, r_outer, ambient=3, radial=24, angular=32):
    """Quadrature grid for the annular shell r_inner <= |x| <= r_outer."""
    if not 0 < r_inner < r_outer:
        raise ValueError("need 0 < r_inner < r_outer")
    polar = max(2, angular // 2)
    ipts, iw = shell_rule(ambient, r_inner, r_outer, radial, polar, angular)
    omega, ws = sphere_rule(ambient, polar, angular)
    bpts = np.concatenate([r_outer * omega, r_inner * omega])
    bnrm = np.concatenate([omega, -omega])
    bw = np.concatenate(
        [ws * r_outer ** (ambient - 1), ws * r_inner ** (ambient - 1)]
    )
    return TubeDomain(
        center=None,
        epsilon=float(r_outer),
        reach=float(r_inner),
        kind="shell",
        ambient=ambient,
        resolution={"radial": radial, "angular": angular},
        interior_nodes=ipts,
        interior_weights=iw,
        boundary_nodes=bpts,
        boundary_weights=bw,
        boundary_normals=bnrm,
        boundary_region=np.full(len(bw), "lateral", dtype=object),
        name=f"shell([{r_inner:g},{r_outer:g}],n={ambient})",
    )


def write_grid_csv(tube, path):
    """Dump interior and boundary nodes to CSV with 17 significant digits."""
    n = tube.ambient
    header = (
        [f"x{i}" for i in range(n)] + ["weight", "region"] + [f"nu{i}" for i in range(n)]
    )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        zeros = ["%.17g" % 0.0] * n
        for row, wt in zip(tube.interior_nodes, tube.interior_weights):
            w.writerow(["%.17g" % v for v in row] + ["%.17g" % wt, "interior"] + zeros)
        for row, wt, nu, reg in zip(
            tube.boundary_nodes, tube.boundary_weights, tube.boundary_normals,
            tube.boundary_region,
        ):
            w.writerow(
                ["%.17g" % v for v in row]
                + ["%.17g" % wt, str(reg)]
                + ["%.17g" % v for v in nu]
            )


def read_grid_csv(path):
    """Load a grid CSV back into plain arrays (round trip of write_grid_csv)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = sum(1 for h in header if h.startswith("x"))
    data = np.array([[float(v) for v in r[:n]] + [float(r[n])] for r in body])
    region = np.array([r[n + 1] for r in body], dtype=object)
    normals = np.array([[float(v) for v in r[n + 2 :]] for r in body])
    interior = region == "interior"
    return SimpleNamespace(
        ambient=n,
        interior_nodes=data[interior, :n],
        interior_weights=data[interior, n],
        boundary_nodes=data[~interior, :n],
        boundary_weights=data[~interior, n],
        boundary_normals=normals[~interior],
        boundary_region=region[~interior],
    )
