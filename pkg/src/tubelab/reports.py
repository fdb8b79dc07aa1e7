"""Serialization: CSV and JSON reports, SVG charts, run manifests.

Floating-point values are written with 17 significant digits so a round trip
through text reproduces the binary doubles exactly.  All writers are
deterministic given the same inputs; only the manifest carries a timestamp.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import asdict
from datetime import datetime, timezone

import numpy as np

__all__ = [
    "fmt17",
    "certificate_dict",
    "write_certificates_csv",
    "write_certificates_json",
    "read_certificates_csv",
    "write_bounds_csv",
    "read_bounds_csv",
    "write_radial_csv",
    "read_radial_csv",
    "radial_summary",
    "write_json",
    "svg_line_chart",
    "write_manifest",
]

CERT_COLUMNS = [
    "theorem", "n", "k", "m", "p", "epsilon", "base_coefficient",
    "mu_div", "mu_quad", "flux_min", "total", "verdict",
]

BOUNDS_COLUMNS = [
    "geometry", "field_kind", "epsilon", "resolution",
    "mu_div", "mu_quad", "flux_min",
]


def fmt17(x):
    """Shortest decimal that reproduces the double exactly on read-back."""
    if x is None:
        return ""
    return "%.17g" % float(x)


def certificate_dict(cert):
    """Certificate as a JSON-ready dict in schema order, extras at the end."""
    out = {
        "theorem": cert.theorem,
        "n": cert.n,
        "k": cert.k,
        "m": cert.m,
        "p": cert.p,
        "epsilon": cert.epsilon,
        "base_coefficient": cert.base_coefficient,
        "mu_div": cert.mu_div,
        "mu_quad": cert.mu_quad,
        "flux_min": cert.flux_min,
        "total": cert.total,
        "verdict": cert.verdict,
        "reason": cert.reason,
        "geometry": cert.geometry,
        "field_kind": cert.field_kind,
    }
    if cert.stability is not None:
        out["stability"] = cert.stability
    return out


def write_certificates_csv(certs, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CERT_COLUMNS)
        for c in certs:
            w.writerow(
                [
                    c.theorem, c.n, c.k, c.m, fmt17(c.p), fmt17(c.epsilon),
                    fmt17(c.base_coefficient), fmt17(c.mu_div), fmt17(c.mu_quad),
                    fmt17(c.flux_min), fmt17(c.total), c.verdict,
                ]
            )


def read_certificates_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for key in ("n", "k", "m"):
            r[key] = int(r[key])
        for key in ("p", "epsilon", "base_coefficient", "mu_div", "mu_quad",
                    "flux_min", "total"):
            r[key] = float(r[key]) if r[key] != "" else None
    return rows


def write_certificates_json(certs, path, threshold=None, monotone=None, note=""):
    payload = {"certificates": [certificate_dict(c) for c in certs]}
    if threshold is not None or monotone is not None or note:
        payload["threshold"] = threshold
        payload["monotone"] = monotone
        payload["note"] = note
    write_json(payload, path)


def bounds_row(b):
    res = ";".join(f"{k}={v}" for k, v in sorted(b.resolution.items()))
    return [
        b.geometry, b.field_kind, fmt17(b.epsilon), res,
        fmt17(b.mu_div), fmt17(b.mu_quad), fmt17(b.flux_min),
    ]


def write_bounds_csv(bounds_list, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BOUNDS_COLUMNS)
        for b in bounds_list:
            w.writerow(bounds_row(b))


def read_bounds_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for key in ("epsilon", "mu_div", "mu_quad", "flux_min"):
            r[key] = float(r[key])
    return rows


def write_radial_csv(solution, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "u", "du"])
        for r, u, du in zip(solution.rs, solution.us, solution.dus):
            w.writerow([fmt17(r), fmt17(u), fmt17(du)])


def read_radial_csv(path):
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    return data[:, 0], data[:, 1], data[:, 2]


def radial_summary(solution, identity_report=None):
    prob = solution.problem
    out = {
        "domain": prob.name,
        "n": prob.ambient,
        "p": prob.p,
        "r_inner": prob.r_inner,
        "r_outer": prob.r_outer,
        "alpha": solution.alpha,
        "nodal_count": solution.nodal_count,
        "sup_norm": solution.sup_norm,
        "boundary_residual": solution.boundary_residual,
        "energy_residual": solution.energy_residual,
    }
    if identity_report is not None:
        out["identity"] = asdict(identity_report)
    return out


def write_json(payload, path):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = np.linspace(lo, hi, count)
    return raw


def svg_line_chart(series, path, title="", xlabel="", ylabel="", size=(640, 420)):
    """Minimal deterministic SVG line chart.

    ``series`` is a list of (label, xs, ys) triples.  Intended for quick
    inspection of sweeps and radial profiles without a plotting stack.
    """
    W, H = size
    ml, mr, mt, mb = 70, 20, 40, 55
    pw, ph = W - ml - mr, H - mt - mb
    xs_all = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys_all = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    x0, x1 = float(xs_all.min()), float(xs_all.max())
    y0, y1 = float(ys_all.min()), float(ys_all.max())
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0
    padx = 0.05 * (x1 - x0)
    pady = 0.05 * (y1 - y0)
    x0, x1 = x0 - padx, x1 + padx
    y0, y1 = y0 - pady, y1 + pady

    def X(x):
        return ml + pw * (x - x0) / (x1 - x0)

    def Y(y):
        return mt + ph * (1.0 - (y - y0) / (y1 - y0))

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.1f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" '
        f'stroke="#444" stroke-width="1"/>',
    ]
    for tx in _ticks(x0 + padx, x1 - padx):
        parts.append(
            f'<line x1="{X(tx):.2f}" y1="{mt + ph}" x2="{X(tx):.2f}" '
            f'y2="{mt + ph + 5}" stroke="#444"/>'
        )
        parts.append(
            f'<text x="{X(tx):.2f}" y="{mt + ph + 20}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{tx:.4g}</text>'
        )
    for ty in _ticks(y0 + pady, y1 - pady):
        parts.append(
            f'<line x1="{ml - 5}" y1="{Y(ty):.2f}" x2="{ml}" y2="{Y(ty):.2f}" '
            f'stroke="#444"/>'
        )
        parts.append(
            f'<text x="{ml - 9}" y="{Y(ty) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{ty:.4g}</text>'
        )
    if y0 < 0.0 < y1:
        parts.append(
            f'<line x1="{ml}" y1="{Y(0):.2f}" x2="{ml + pw}" y2="{Y(0):.2f}" '
            f'stroke="#bbb" stroke-dasharray="4 3"/>'
        )
    for i, (label, xs, ys) in enumerate(series):
        col = colors[i % len(colors)]
        pstr = " ".join(
            f"{X(float(x)):.2f},{Y(float(y)):.2f}" for x, y in zip(xs, ys)
        )
        parts.append(
            f'<polyline points="{pstr}" fill="none" stroke="{col}" stroke-width="1.6"/>'
        )
        parts.append(
            f'<text x="{ml + pw - 8}" y="{mt + 16 + 15 * i}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="{col}">{label}</text>'
        )
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{H - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {mt + ph / 2:.1f})">{ylabel}</text>'
    )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def write_manifest(out_dir, filenames, extra=None):
    """Hash the named files in ``out_dir`` into manifest.json."""
    entries = []
    for name in sorted(filenames):
        p = os.path.join(out_dir, name)
        digest = hashlib.sha256()
        with open(p, "rb") as fh:
            for chunk in iter(lambda: fh.read(65536), b""):
                digest.update(chunk)
        entries.append(
            {"name": name, "sha256": digest.hexdigest(), "bytes": os.path.getsize(p)}
        )
    payload = {
        "created": datetime.now(timezone.utc).isoformat(),
        "files": entries,
    }
    if extra:
        payload.update(extra)
    path = os.path.join(out_dir, "manifest.json")
    write_json(payload, path)
    return path
