"""Discrete conjugates, convex envelopes and minimal convex majorants.

A convex majorant ``g`` of ``f`` is *minimal* when no other convex function
fits between ``f`` and ``g``. On a grid this is tested by dent falsification:
lower ``g`` at one node by ``delta``, take the convex envelope, and check
whether the result still majorizes ``f``. If some dent survives, ``g`` was
not minimal; if none does, ``g`` is minimal at resolution ``(delta, h)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .certificate import Certificate, CertificateStatus, Check
from .exceptions import ContractError, DegenerateInputError, DomainError, InputError
from .grid import (
    GridFn,
    GridSpec,
    NormTag,
    discrete_lipschitz_constant,
    index_distance,
    midpoint_violation,
    same_spec,
)

_U = 2.0**-53


@dataclass(frozen=True)
class DualGridSpec(GridSpec):
    """A :class:`GridSpec` whose coordinates are slopes."""


def default_dual_spec(f: GridFn) -> DualGridSpec:
    """Slopes spanning ``[-L-h, L+h]`` per axis with the primal node counts.

    ``L`` is the largest neighbour difference quotient along that axis.
    """
    grid = f.grid
    lo, hi = [], []
    for axis, h in enumerate(f.spec.spacing):
        diffs = np.abs(np.diff(grid, axis=axis))
        finite = diffs[np.isfinite(diffs)]
        L = float(finite.max()) / h if finite.size else 0.0
        lo.append(-L - h)
        hi.append(L + h)
    spec = GridSpec.from_bounds(lo, hi, f.spec.counts)
    return DualGridSpec(spec.origin, spec.spacing, spec.counts)


def dual_range_truncated(f: GridFn, dual: GridSpec) -> bool:
    """True when ``dual`` does not cover ``[-L, L]`` on every axis."""
    L = discrete_lipschitz_constant(f, NormTag.LINF) if f.is_finite() else math.inf
    for o, h, n in zip(dual.origin, dual.spacing, dual.counts):
        if o > -L or o + h * (n - 1) < L:
            return True
    return False


def _sup_affine(points, slopes, values) -> np.ndarray:
    """``max_x <s, x> - values(x)`` for each slope row; ``values`` may hold +inf."""
    keep = np.isfinite(values)
    x, v = points[keep], values[keep]
    out = np.empty(len(slopes))
    for start in range(0, len(slopes), 512):
        stop = min(start + 512, len(slopes))
        out[start:stop] = (slopes[start:stop] @ x.T - v[None, :]).max(axis=1)
    return out


def legendre_conjugate(f: GridFn, dual: GridSpec = None) -> GridFn:
    """Discrete Fenchel conjugate ``f*(s) = max_x <s, x> - f(x)``.

    Parameters
    ----------
    f : GridFn
        l-proper primal data; ``+inf`` nodes are outside the domain and skipped.
    dual : GridSpec, optional
        Slope grid. Defaults to :func:`default_dual_spec`.

    Returns
    -------
    GridFn
        The conjugate sampled on ``dual``.
    """
    if np.any(f.values == -math.inf):
        raise InputError("conjugate input must be l-proper (no -inf values)")
    if not np.any(np.isfinite(f.values)):
        raise DegenerateInputError("every value is +inf; the conjugate is identically -inf")
    dual = default_dual_spec(f) if dual is None else dual
    if dual.dims != f.spec.dims:
        raise InputError("dual grid dimension must match the primal grid")
    out = _sup_affine(f.spec.points(), dual.points(), f.values)
    return GridFn(GridSpec(dual.origin, dual.spacing, dual.counts), out)


def biconjugate(f: GridFn, dual: GridSpec = None) -> GridFn:
    """``f**`` restricted to the primal grid, via an explicit slope grid.

    With a finite slope grid this is the largest convex minorant built from
    those slopes only, so it sits below :func:`convex_envelope` (the two agree
    when ``dual`` contains every hull slope).
    """
    fstar = legendre_conjugate(f, dual)
    vals = _sup_affine(fstar.spec.points(), f.spec.points(), fstar.values)
    return f.with_values(np.minimum(vals, np.where(np.isfinite(f.values), f.values, math.inf)))


def _above_chord(ia: int, ya: float, ib: int, yb: float, ic: int, yc: float) -> bool:
    """Exact test ``yb > chord(a, c) at b`` for integer abscissae ia < ib < ic."""
    lhs = (ic - ia) * yb
    rhs = (ic - ib) * ya + (ib - ia) * yc
    err = 4.0 * _U * (abs(lhs) + (ic - ib) * abs(ya) + (ib - ia) * abs(yc))
    if lhs - rhs > err:
        return True
    if rhs - lhs > err:
        return False
    return _exact_sign((ic - ia, yb), (ib - ic, ya), (ia - ib, yc)) > 0


_SPLIT = 134217729.0  # 2**27 + 1


def _exact_sign(*terms) -> int:
    """Sign of ``sum(m * y)`` for small integers ``m`` and floats ``y``, exactly.

    Each ``y`` is split into two 26-bit halves so every partial product is
    exact; ``math.fsum`` then rounds the exact sum correctly, which keeps its
    sign.
    """
    parts = []
    for m, y in terms:
        c = _SPLIT * y
        if not math.isfinite(c):
            return _fraction_sign(terms)
        hi = c - (c - y)
        parts += [m * hi, m * (y - hi)]
    total = math.fsum(parts)
    return (total > 0) - (total < 0)


def _fraction_sign(terms) -> int:
    total = sum(m * Fraction(y) for m, y in terms)
    return (total > 0) - (total < 0)


def _lower_hull_1d(y: np.ndarray) -> np.ndarray:
    ys = y.tolist()
    hull = []
    for i, yi in enumerate(ys):
        while len(hull) >= 2 and _above_chord(hull[-2], ys[hull[-2]], hull[-1], ys[hull[-1]], i, yi):
            hull.pop()
        hull.append(i)
    out = np.array(y, dtype=float)
    for a, b in zip(hull, hull[1:]):
        if b - a > 1:
            t = (np.arange(a + 1, b) - a) / (b - a)
            out[a + 1 : b] = np.minimum(y[a] + t * (y[b] - y[a]), y[a + 1 : b])
    return out


def _lower_hull_2d(f: GridFn) -> np.ndarray:
    idx = f.spec.indices().astype(float)
    pts = np.column_stack([idx, f.values])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # all nodes coplanar: the data is affine and already convex
        return np.array(f.values)
    eq = hull.equations
    lower = eq[eq[:, 2] < -1e-12]
    planes = -(idx @ lower[:, :2].T + lower[:, 3]) / lower[:, 2]
    return np.minimum(planes.max(axis=1), f.values)


def convex_envelope(f: GridFn) -> GridFn:
    """Largest convex function below ``f`` on the grid nodes.

    In 1D this is the lower convex hull of the samples with exact orientation
    tests, so convex data (non-negative second differences) is returned bit
    for bit. In 2D the lower facets of the 3D hull of ``(x, y, f)`` are used
    and the result carries ordinary floating-point error.
    """
    if not f.is_finite():
        raise DomainError("convex_envelope needs finite values")
    if f.spec.dims == 1:
        return f.with_values(_lower_hull_1d(f.values))
    return f.with_values(_lower_hull_2d(f))


def is_convex_majorant(g: GridFn, f: GridFn, tol: float = 1e-9) -> Check:
    """Whether ``g >= f - tol`` and ``g`` is midpoint convex within ``tol``.

    The witness is the first violating node in row-major order together with
    the kind of failure.
    """
    spec = same_spec(g, f)
    with np.errstate(invalid="ignore"):
        below = np.flatnonzero(~(g.values >= f.values - tol))
    mid = midpoint_violation(g.values, spec, tol)
    candidates = []
    if below.size:
        i = int(below[0])
        candidates.append((i, "majorant", float(g.values[i] - f.values[i])))
    if mid is not None:
        candidates.append((mid[0], "convexity", -mid[1]))
    if not candidates:
        return Check(True, info={"tol": tol, "convexity": "midpoint, axes and diagonals"})
    node, kind, slack = min(candidates)
    return Check(
        False,
        {"index": node, "point": list(spec.point(node)), "kind": kind, "slack": slack},
        {"tol": tol},
    )


def apply_dent(g: GridFn, node: int, delta: float) -> GridFn:
    """Convex envelope of ``g`` lowered by ``delta`` at one node."""
    vals = np.array(g.values)
    vals[int(node)] -= delta
    return convex_envelope(g.with_values(vals))


def _dent_survives(h: GridFn, f: GridFn, tol: float) -> bool:
    return bool(np.all(h.values >= f.values - tol))


def _sweep_order(size: int, order: str) -> range:
    order = str(order).lower()
    if order in ("row-major", "forward", "default"):
        return range(size)
    if order == "reverse":
        return range(size - 1, -1, -1)
    raise InputError(f"unknown sweep order {order!r}; expected row-major or reverse")


def certify_minimal_convex_majorant(
    g: GridFn, f: GridFn, delta: float, tol: float = 1e-9, order: str = "row-major",
    lipschitz: float = None,
) -> Certificate:
    """Dent-falsification test of minimality at resolution ``delta``.

    Parameters
    ----------
    g, f : GridFn
        Candidate convex majorant and the function it should minimally majorize.
    delta : float
        Dent depth.
    tol : float
        Majorancy tolerance.
    order : {"row-major", "reverse"}
        Order in which nodes are dented; the first surviving dent is reported.
    lipschitz : float, optional
        Restrict competitors to convex functions whose discrete Lipschitz
        constant is at most this value (a dent must then also stay within it).

    Returns
    -------
    Certificate
        ``FALSIFIED`` with the first surviving dent, otherwise
        ``CERTIFIED_AT_RESOLUTION``.
    """
    if not delta > 0:
        raise InputError("dent depth must be positive")
    pre = is_convex_majorant(g, f, tol)
    if not pre:
        raise ContractError(f"g is not a convex majorant of f: {pre.witness}")
    params = {"delta": float(delta), "tol": float(tol), "probes": g.spec.size,
              "convexity": "midpoint", "order": str(order)}
    if lipschitz is not None:
        params["lipschitz"] = float(lipschitz)
    for node in _sweep_order(g.spec.size, order):
        h = apply_dent(g, node, delta)
        if _dent_survives(h, f, tol) and _within_lipschitz(h, lipschitz):
            witness = {
                "index": int(node),
                "point": list(g.spec.point(node)),
                "delta": float(delta),
                "dented_value": float(h.values[node]),
                "original_value": float(g.values[node]),
            }
            return Certificate(CertificateStatus.FALSIFIED, witness, params)
    return Certificate(CertificateStatus.CERTIFIED_AT_RESOLUTION, None, params)


def _within_lipschitz(h: GridFn, lipschitz) -> bool:
    if lipschitz is None:
        return True
    return discrete_lipschitz_constant(h, NormTag.L1) <= lipschitz * (1 + 1e-9)


def default_delta_schedule(f: GridFn, halvings: int = 6) -> list:
    """``(max f - min f) / 8`` halved ``halvings`` times.

    Flat data has no natural scale, so ``max(|f|, 1) / 8`` is used instead.
    """
    vals = f.values[np.isfinite(f.values)]
    spread = float(vals.max() - vals.min()) if vals.size else 0.0
    if spread == 0:
        spread = max(float(np.abs(vals).max()) if vals.size else 0.0, 1.0)
    d0 = spread / 8.0
    return [d0 / 2**j for j in range(halvings + 1)]


def _check_schedule(schedule) -> list:
    sched = [float(d) for d in schedule]
    if not sched or any(d <= 0 for d in sched):
        raise InputError("delta schedule must be a nonempty list of positive numbers")
    if any(b >= a for a, b in zip(sched, sched[1:])):
        raise InputError("delta schedule must be strictly decreasing")
    return sched


def extract_minimal_convex_majorant(
    f: GridFn,
    seed: GridFn,
    delta_schedule=None,
    tol: float = 1e-9,
    order: str = "row-major",
    lipschitz: float = None,
):
    """Greedy descent from ``seed`` to a minimal convex majorant of ``f``.

    Each pass dents every node in ``order``; a dent is kept whenever the
    dented envelope still majorizes ``f``. A pass without changes moves on
    to the next (smaller) depth in ``delta_schedule``.

    Returns
    -------
    (GridFn, Certificate)
        The extracted majorant (pointwise ``<= seed``) and its certificate at
        the last depth.
    """
    pre = is_convex_majorant(seed, f, tol)
    if not pre:
        raise ContractError(f"seed is not a convex majorant of f: {pre.witness}")
    sched = _check_schedule(default_delta_schedule(f) if delta_schedule is None else delta_schedule)
    g = seed
    nodes = _sweep_order(f.spec.size, order)
    for delta in sched:
        changed = True
        while changed:
            changed = False
            for node in nodes:
                # the dented node itself must stay above f
                if g.values[node] - delta < f.values[node] - tol:
                    continue
                h = apply_dent(g, node, delta)
                if _dent_survives(h, f, tol) and _within_lipschitz(h, lipschitz):
                    g = h
                    changed = True
    cert = certify_minimal_convex_majorant(g, f, sched[-1], tol, order, lipschitz)
    return g, cert


def pinned_cone_seed(f: GridFn, node: int, L: float = None, norm=NormTag.L1) -> GridFn:
    """``f(x) + L d(x, .)``: a convex majorant of ``f`` touching it at ``x``.

    ``L`` defaults to the discrete Lipschitz constant of ``f``.
    """
    norm = NormTag.parse(norm)
    L = discrete_lipschitz_constant(f, norm) if L is None else float(L)
    idx = f.spec.indices()
    d = index_distance(idx - idx[int(node)], f.spec.spacing, norm)
    return f.with_values(f.values[int(node)] + L * d)
