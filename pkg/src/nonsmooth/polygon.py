"""Small exact-ish planar geometry: hulls, half-plane clipping, polytopes.

Polygons are lists of ``(x, y)`` tuples in counterclockwise order. Degenerate
polygons (a segment or a single point) are allowed throughout, which is what
the greatest-minorant computations produce for nonsmooth profiles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MERGE_TOL = 1e-12


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points, tol: float = MERGE_TOL) -> list:
    """Extreme points in counterclockwise order (Andrew's monotone chain).

    Points closer than ``tol`` are merged and vertices within ``tol`` of the
    chord through their neighbours are dropped. A segment comes back as its
    two endpoints and a point as a single vertex.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if not pts:
        return []
    scale = max(1.0, max(max(abs(x), abs(y)) for x, y in pts))
    eps = tol * scale
    merged = [pts[0]]
    for p in pts[1:]:
        if math.hypot(p[0] - merged[-1][0], p[1] - merged[-1][1]) > eps:
            merged.append(p)
    pts = merged
    if len(pts) <= 2:
        if len(pts) == 2 and math.hypot(pts[1][0] - pts[0][0], pts[1][1] - pts[0][1]) <= eps:
            return [pts[0]]
        return pts

    def chain(seq):
        out = []
        for p in seq:
            # cross / |chord| is the distance of out[-1] from the chord
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= eps * math.hypot(
                p[0] - out[-2][0], p[1] - out[-2][1]
            ):
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def clip_halfplane(poly: list, normal, bound: float, eps: float = 0.0) -> list:
    """Sutherland-Hodgman clip of a convex polygon to ``<normal, u> <= bound``.

    Vertices violating the constraint by at most ``eps`` count as inside.
    """
    if not poly:
        return []
    a, b = float(normal[0]), float(normal[1])
    side = [a * p[0] + b * p[1] - bound for p in poly]
    side = [0.0 if 0 < s <= eps else s for s in side]
    if max(side) <= 0:
        return list(poly)
    if min(side) > 0:
        return []
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        sp, sq = side[i], side[(i + 1) % n]
        if sp <= 0:
            out.append(p)
        if (sp <= 0) != (sq <= 0):
            t = sp / (sp - sq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return _cleanup(out)


def _cleanup(poly: list, tol: float = MERGE_TOL) -> list:
    """Drop repeated and collinear vertices of a convex polygon in cyclic order."""
    if len(poly) <= 1:
        return poly
    scale = max(1.0, max(max(abs(x), abs(y)) for x, y in poly))
    eps = tol * scale
    out = []
    for p in poly:
        if not out or math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > eps:
            out.append(p)
    while len(out) > 1 and math.hypot(out[0][0] - out[-1][0], out[0][1] - out[-1][1]) <= eps:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        for i in range(len(out)):
            a, b, c = out[i - 1], out[i], out[(i + 1) % len(out)]
            span = math.hypot(c[0] - a[0], c[1] - a[1])
            between = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]) >= 0
            if between and abs(_cross(a, b, c)) <= eps * span:
                del out[i]
                changed = True
                break
    return out


def support(vertices, directions) -> np.ndarray:
    """``max_v <v, d>`` for each row ``d`` of ``directions``."""
    v = np.asarray(vertices, dtype=float)
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    return (d @ v.T).max(axis=1)


def polygon_area(poly: list) -> float:
    if len(poly) < 3:
        return 0.0
    s = 0.0
    for i in range(len(poly)):
        (x0, y0), (x1, y1) = poly[i], poly[(i + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def polygon_width(poly: list) -> float:
    """Smallest width over edge normals; 0 for segments and points."""
    if len(poly) < 3:
        return 0.0
    best = math.inf
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        length = math.hypot(q[0] - p[0], q[1] - p[1])
        if length == 0:
            continue
        best = min(best, max(abs(_cross(p, q, r)) / length for r in poly))
    return best


def _segment_distance(u, p, q) -> float:
    dx, dy = q[0] - p[0], q[1] - p[1]
    denom = dx * dx + dy * dy
    t = 0.0 if denom == 0 else min(1.0, max(0.0, ((u[0] - p[0]) * dx + (u[1] - p[1]) * dy) / denom))
    return math.hypot(u[0] - p[0] - t * dx, u[1] - p[1] - t * dy)


@dataclass(frozen=True)
class Polytope:
    """Convex hull of finitely many points in R^1 or R^2.

    ``vertices`` holds only extreme points; in 2D they are counterclockwise,
    in 1D they are the one or two interval endpoints in increasing order.
    """

    vertices: tuple
    dim: int

    @classmethod
    def hull(cls, points, dim=None) -> "Polytope":
        pts = [tuple(float(c) for c in np.atleast_1d(p)) for p in points]
        if not pts:
            raise ValueError("a polytope needs at least one point")
        dim = len(pts[0]) if dim is None else dim
        if dim == 1:
            lo, hi = min(p[0] for p in pts), max(p[0] for p in pts)
            verts = ((lo,),) if hi - lo <= MERGE_TOL * max(1.0, abs(lo), abs(hi)) else ((lo,), (hi,))
            return cls(verts, 1)
        return cls(tuple(convex_hull_2d(pts)), 2)

    def contains(self, u, tol: float = 1e-9) -> bool:
        u = tuple(float(c) for c in np.atleast_1d(u))
        if self.dim == 1:
            return self.vertices[0][0] - tol <= u[0] <= self.vertices[-1][0] + tol
        verts = self.vertices
        if len(verts) == 1:
            return math.hypot(u[0] - verts[0][0], u[1] - verts[0][1]) <= tol
        if len(verts) == 2:
            return _segment_distance(u, verts[0], verts[1]) <= tol
        for i in range(len(verts)):
            p, q = verts[i], verts[(i + 1) % len(verts)]
            length = math.hypot(q[0] - p[0], q[1] - p[1])
            if _cross(p, q, u) < -tol * length:
                return False
        return True

    def support(self, directions) -> np.ndarray:
        return support(self.vertices, directions)

    def to_dict(self) -> dict:
        return {"dim": self.dim, "vertices": [list(v) for v in self.vertices]}
