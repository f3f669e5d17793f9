#!/usr/bin/env python3
"""Offline generator for the mesh files shipped under data/.

Produces the plain-text mesh format documented in docs/formats.md:
    <num_vertices> <num_elements>
    <index> <x> <y> <marker>      (marker: 0 interior, 1 fixed, 2 free)
    <index> <v1> <v2> <v3>

Domains:
  tshape   — region between the T-shaped fixed boundary and a circle of
             radius 0.75 (free); structured polar mesh from rays cast off
             an interior anchor point.
  lshape   — region between an interior circle (free, r=1.5 at (4.2,6))
             and the L-shaped fixed outer boundary; same construction.
  twoblobs — disk of radius 5 minus two parametric blobs; Delaunay of a
             hex lattice constrained by resampled boundary polylines.

Run from the repository root:  python3 scripts/generate_meshes.py
"""

import math
import os

import numpy as np
from scipy.spatial import Delaunay

OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "data")


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def signed_area(p0, p1, p2):
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]))


def write_mesh(path, verts, tris, markers):
    tris = [t if signed_area(verts[t[0]], verts[t[1]], verts[t[2]]) > 0 else
            (t[0], t[2], t[1]) for t in tris]
    validate(verts, tris, markers)
    with open(path, "w") as f:
        f.write(f"{len(verts)} {len(tris)}\n")
        for i, ((x, y), m) in enumerate(zip(verts, markers)):
            f.write(f"{i + 1} {x:.17g} {y:.17g} {m}\n")
        for k, (a, b, c) in enumerate(tris):
            f.write(f"{k + 1} {a + 1} {b + 1} {c + 1}\n")
    print(f"wrote {path}: {len(verts)} vertices, {len(tris)} elements")


def validate(verts, tris, markers):
    # Mirrors the loader's structural checks.
    edge_count = {}
    min_h = math.inf
    for t in tris:
        a = signed_area(verts[t[0]], verts[t[1]], verts[t[2]])
        assert a > 0, "non-positive element area"
        for i in range(3):
            p, q = t[i], t[(i + 1) % 3]
            edge_count[(min(p, q), max(p, q))] = edge_count.get((min(p, q), max(p, q)), 0) + 1
        lmax = max(np.hypot(*(np.subtract(verts[t[i]], verts[t[(i + 1) % 3]])))
                   for i in range(3))
        min_h = min(min_h, 2.0 * a / lmax)
    boundary_edges = [e for e, c in edge_count.items() if c == 1]
    incident = {}
    for a, b in boundary_edges:
        incident.setdefault(a, []).append(b)
        incident.setdefault(b, []).append(a)
    for v, nbrs in incident.items():
        assert len(nbrs) == 2, f"boundary vertex {v} has {len(nbrs)} boundary edges"
        assert markers[v] in (1, 2), f"boundary vertex {v} unmarked"
    for v, m in enumerate(markers):
        if m in (1, 2):
            assert v in incident, f"marked vertex {v} not on the boundary"
    for a, b in boundary_edges:
        assert markers[a] == markers[b], "mixed-marker boundary edge"
    referenced = {v for t in tris for v in t}
    assert referenced == set(range(len(verts))), "unreferenced vertices"
    assert min_h > 1e-6, f"mesh too thin: min height {min_h}"


def ray_polygon_exit(center, direction, polygon):
    """First positive intersection of center + s*direction with the polygon."""
    best = math.inf
    n = len(polygon)
    cx, cy = center
    dx, dy = direction
    for i in range(n):
        ax, ay = polygon[i]
        bx, by = polygon[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        det = dx * (-ey) - dy * (-ex)
        if abs(det) < 1e-15:
            continue
        rx, ry = ax - cx, ay - cy
        s = (rx * (-ey) + ry * ex) / det
        u = (dx * ry - dy * rx) / det
        if s > 1e-12 and -1e-12 <= u <= 1 + 1e-12:
            best = min(best, s)
    assert math.isfinite(best), "ray missed the polygon"
    return best


def corner_aware_angles(center, corners, n_angular):
    """Uniform angle grid with the nearest entries snapped to corner angles."""
    angles = [2 * math.pi * j / n_angular for j in range(n_angular)]
    for c in corners:
        th = math.atan2(c[1] - center[1], c[0] - center[0]) % (2 * math.pi)
        j = min(range(n_angular),
                key=lambda k: min(abs(angles[k] - th), 2 * math.pi - abs(angles[k] - th)))
        angles[j] = th
    angles.sort()
    for a, b in zip(angles, angles[1:]):
        assert b - a > 1e-6, "degenerate angular spacing"
    return angles


def polar_mesh(center, inner_point, outer_point, n_radial, angles,
               inner_marker, outer_marker):
    """Structured mesh between two star-shaped curves sampled along rays."""
    na = len(angles)
    verts, markers = [], []
    for i in range(n_radial + 1):
        s = i / n_radial
        for th in angles:
            p_in = inner_point(th)
            p_out = outer_point(th)
            verts.append((p_in[0] + s * (p_out[0] - p_in[0]),
                          p_in[1] + s * (p_out[1] - p_in[1])))
            markers.append(inner_marker if i == 0 else
                           (outer_marker if i == n_radial else 0))
    tris = []
    for i in range(n_radial):
        for j in range(na):
            v00 = i * na + j
            v01 = i * na + (j + 1) % na
            v10 = (i + 1) * na + j
            v11 = (i + 1) * na + (j + 1) % na
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return verts, tris, markers


# ---------------------------------------------------------------------------
# T-shape (fixed inner boundary) inside a circle of radius 0.75 (free)
# ---------------------------------------------------------------------------

T_POLY = [(-3 / 8, -1 / 4), (3 / 8, -1 / 4), (3 / 8, 0), (1 / 8, 0),
          (1 / 8, 1 / 4), (-1 / 8, 1 / 4), (-1 / 8, 0), (-3 / 8, 0)]
T_CENTER = (0.0, -1 / 8)
T_RADIUS = 0.75


def make_tshape(n_radial, n_angular):
    angles = corner_aware_angles(T_CENTER, T_POLY, n_angular)

    def inner(th):
        d = (math.cos(th), math.sin(th))
        s = ray_polygon_exit(T_CENTER, d, T_POLY)
        return (T_CENTER[0] + s * d[0], T_CENTER[1] + s * d[1])

    def outer(th):
        d = (math.cos(th), math.sin(th))
        # Intersection with the circle |x| = R centered at the origin.
        cx, cy = T_CENTER
        b = cx * d[0] + cy * d[1]
        c = cx * cx + cy * cy - T_RADIUS * T_RADIUS
        s = -b + math.sqrt(b * b - c)
        return (cx + s * d[0], cy + s * d[1])

    return polar_mesh(T_CENTER, inner, outer, n_radial, angles, 1, 2)


# ---------------------------------------------------------------------------
# L-shape (fixed outer boundary) around a circle of radius 1.5 (free)
# ---------------------------------------------------------------------------

L_POLY = [(1, 1), (5.8, 1), (5.8, 4.2), (9, 4.2), (9, 9), (1, 9)]
L_CENTER = (4.2, 6.0)
L_RADIUS = 1.5


def make_lshape(n_radial, n_angular):
    angles = corner_aware_angles(L_CENTER, L_POLY, n_angular)

    def inner(th):
        return (L_CENTER[0] + L_RADIUS * math.cos(th),
                L_CENTER[1] + L_RADIUS * math.sin(th))

    def outer(th):
        d = (math.cos(th), math.sin(th))
        s = ray_polygon_exit(L_CENTER, d, L_POLY)
        return (L_CENTER[0] + s * d[0], L_CENTER[1] + s * d[1])

    return polar_mesh(L_CENTER, inner, outer, n_radial, angles, 2, 1)


# ---------------------------------------------------------------------------
# Two disjoint blobs (fixed) inside a circle of radius 5 (free)
# ---------------------------------------------------------------------------

def blob1(th):
    return (1 + 0.7 * math.cos(th) - 0.4 * math.cos(2 * th), math.sin(th))


def blob2(th):
    return (-2 + math.cos(th) + 0.4 * math.cos(2 * th), 0.5 + 0.7 * math.sin(th))


def circle5(th):
    return (5 * math.cos(th), 5 * math.sin(th))


def resample_closed(curve, spacing):
    """Arc-length resampling of a closed parametric curve."""
    fine = np.array([curve(t) for t in np.linspace(0, 2 * math.pi, 2000, endpoint=False)])
    seg = np.hypot(*(np.roll(fine, -1, axis=0) - fine).T)
    total = seg.sum()
    n = max(8, int(round(total / spacing)))
    targets = np.arange(n) * total / n
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    pts = []
    for t in targets:
        k = int(np.searchsorted(cum, t, side="right")) - 1
        k = min(k, len(fine) - 1)
        frac = (t - cum[k]) / seg[k]
        nxt = fine[(k + 1) % len(fine)]
        pts.append(tuple(fine[k] + frac * (nxt - fine[k])))
    return pts


def point_in_polygon(p, poly):
    x, y = p
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xi:
                inside = not inside
    return inside


def dist_to_polyline(p, poly):
    best = math.inf
    n = len(poly)
    px, py = p
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        ex, ey = bx - ax, by - ay
        L2 = ex * ex + ey * ey
        t = max(0.0, min(1.0, ((px - ax) * ex + (py - ay) * ey) / L2))
        best = min(best, math.hypot(px - ax - t * ex, py - ay - t * ey))
    return best


def make_twoblobs(h):
    b1 = resample_closed(blob1, h)
    b2 = resample_closed(blob2, h)
    ring = resample_closed(circle5, h)
    boundary = b1 + b2 + ring
    markers_b = [1] * len(b1) + [1] * len(b2) + [2] * len(ring)

    # Hex lattice interior points with clearance from all boundaries.
    pts = []
    dy = h * math.sqrt(3) / 2
    j = 0
    y = -5.0
    clear = 0.55 * h
    while y <= 5.0:
        x0 = -5.0 + (h / 2 if j % 2 else 0.0)
        x = x0
        while x <= 5.0:
            p = (x, y)
            if (math.hypot(x, y) < 5.0 - clear and
                    not point_in_polygon(p, b1) and not point_in_polygon(p, b2) and
                    dist_to_polyline(p, b1) > clear and dist_to_polyline(p, b2) > clear):
                pts.append(p)
            x += h
        y += dy
        j += 1

    verts = boundary + pts
    markers = markers_b + [0] * len(pts)
    tri = Delaunay(np.array(verts))

    def centroid_ok(t):
        c = np.mean([verts[v] for v in t], axis=0)
        return (math.hypot(*c) < 5.0 and not point_in_polygon(c, b1)
                and not point_in_polygon(c, b2))

    tris = [tuple(int(v) for v in t) for t in tri.simplices if centroid_ok(t)]

    # Drop unreferenced lattice points and compact indices.
    used = sorted({v for t in tris for v in t})
    remap = {v: i for i, v in enumerate(used)}
    verts = [verts[v] for v in used]
    markers = [markers[v] for v in used]
    tris = [(remap[a], remap[b], remap[c]) for a, b, c in tris]

    # The boundary recovered from the triangulation must be exactly the three
    # input polylines.
    for poly, mk in ((b1, 1), (b2, 1), (ring, 2)):
        for i in range(len(poly)):
            a = remap.get(boundary.index(poly[i]))
            assert a is not None, f"boundary point lost (marker {mk})"
    return verts, tris, markers


def main():
    os.makedirs(OUT_DIR, exist_ok=True)
    for name, (nr, na) in {"coarse": (6, 64), "medium": (8, 84),
                           "fine": (12, 128)}.items():
        verts, tris, markers = make_tshape(nr, na)
        write_mesh(os.path.join(OUT_DIR, f"tshape_{name}.mesh"), verts, tris, markers)
    for name, (nr, na) in {"coarse": (6, 56), "medium": (8, 80),
                           "fine": (12, 120)}.items():
        verts, tris, markers = make_lshape(nr, na)
        write_mesh(os.path.join(OUT_DIR, f"lshape_{name}.mesh"), verts, tris, markers)
    for name, h in {"coarse": 0.42, "medium": 0.28, "fine": 0.2}.items():
        verts, tris, markers = make_twoblobs(h)
        write_mesh(os.path.join(OUT_DIR, f"twoblobs_{name}.mesh"), verts, tris, markers)


if __name__ == "__main__":
    main()
