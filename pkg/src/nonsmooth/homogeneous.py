"""Positively homogeneous piecewise-linear functions on R^1 and R^2.

A p.h. function is determined by its values on the unit sphere, so most
operations here work either with a closed form (max-min of linear
functionals) or with a :class:`RayProfile` of values at ``M`` equally spaced
unit directions. Sublinear forms are support functions of polygons, which
turns "largest sublinear function below a profile" into half-plane
intersection and "lower a sublinear function in one direction" into a
single clip.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .certificate import Certificate, CertificateStatus, Check
from .exceptions import ContractError, InputError
from .polygon import MERGE_TOL, clip_halfplane, convex_hull_2d, polygon_width, support

DEFAULT_M = 360
PH_TOL = 1e-9


class Role(str, enum.Enum):
    MAJORANT = "majorant"
    MINORANT = "minorant"

    @classmethod
    def parse(cls, value) -> "Role":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise InputError(f"unknown role {value!r}; expected majorant or minorant") from None


def _as_functionals(rows, dim=None) -> tuple:
    out = []
    for row in rows:
        vecs = tuple(tuple(float(c) for c in np.atleast_1d(a)) for a in row)
        if not vecs:
            raise InputError("every row needs at least one functional")
        out.append(vecs)
    if not out:
        raise InputError("a form needs at least one row")
    dims = {len(a) for row in out for a in row}
    if len(dims) != 1 or (dim is not None and dims != {dim}):
        raise InputError(f"functionals must all have dimension {dim or 'n'}, got {sorted(dims)}")
    if not dims <= {1, 2}:
        raise InputError("only R^1 and R^2 are supported")
    if any(not math.isfinite(c) for row in out for a in row for c in a):
        raise InputError("functionals must be finite")
    return tuple(out)


def _dirs(x, dim) -> np.ndarray:
    d = np.atleast_2d(np.asarray(x, dtype=float))
    if d.shape[-1] != dim:
        raise InputError(f"expected {dim}-vectors, got shape {d.shape}")
    return d


class _Form:
    """Shared evaluation interface; subclasses define ``values``."""

    kind = "form"

    def value(self, x) -> float:
        return float(self.values(x)[0])

    def __call__(self, x) -> float:
        return self.value(x)

    def functionals(self) -> list:
        seen = []
        for row in self.rows:
            for a in row:
                if a not in seen:
                    seen.append(a)
        return seen

    def breakpoints(self) -> np.ndarray:
        """Unit directions where two of the functionals tie (2D only)."""
        return _pair_breakpoints(self.functionals())

    def to_dict(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "rows": [[list(a) for a in row] for row in self.rows]}


@dataclass(frozen=True)
class MaxMinForm(_Form):
    """``p(x) = min_i max_j <a_ij, x>``."""

    rows: tuple
    kind = "maxmin"

    def __post_init__(self):
        object.__setattr__(self, "rows", _as_functionals(self.rows))

    @property
    def dim(self) -> int:
        return len(self.rows[0][0])

    def values(self, x) -> np.ndarray:
        d = _dirs(x, self.dim)
        return np.min([(d @ np.asarray(row).T).max(axis=1) for row in self.rows], axis=0)

    def negated(self) -> "MinMaxForm":
        return MinMaxForm(tuple(tuple(tuple(-c for c in a) for a in row) for row in self.rows))


@dataclass(frozen=True)
class MinMaxForm(_Form):
    """``p(x) = max_i min_j <a_ij, x>``; the negation of a :class:`MaxMinForm`."""

    rows: tuple
    kind = "minmax"

    def __post_init__(self):
        object.__setattr__(self, "rows", _as_functionals(self.rows))

    @property
    def dim(self) -> int:
        return len(self.rows[0][0])

    def values(self, x) -> np.ndarray:
        d = _dirs(x, self.dim)
        return np.max([(d @ np.asarray(row).T).min(axis=1) for row in self.rows], axis=0)

    def negated(self) -> MaxMinForm:
        return MaxMinForm(tuple(tuple(tuple(-c for c in a) for a in row) for row in self.rows))


def _hull_generators(gens, dim) -> list:
    if dim == 1:
        xs = [g[0] for g in gens]
        lo, hi = min(xs), max(xs)
        return [(lo,)] if hi - lo <= MERGE_TOL * max(1.0, abs(lo), abs(hi)) else [(lo,), (hi,)]
    return convex_hull_2d(gens)


@dataclass(frozen=True)
class SublinearForm(_Form):
    """``s(x) = max_a <a, x>`` over ``generators``: the support function of their hull.

    ``degenerate`` marks forms whose generator hull is thinner than the merge
    tolerance (a segment or a point).
    """

    generators: tuple
    degenerate: bool = field(default=False, compare=False)
    kind = "sublinear"

    def __post_init__(self):
        object.__setattr__(self, "generators", _as_functionals([self.generators])[0])

    @property
    def rows(self) -> tuple:
        return (self.generators,)

    @property
    def dim(self) -> int:
        return len(self.generators[0])

    def values(self, x) -> np.ndarray:
        return support(self.generators, _dirs(x, self.dim))

    def hull(self) -> list:
        return _hull_generators(self.generators, self.dim)

    def reduced(self) -> "SublinearForm":
        hull = self.hull()
        return SublinearForm(tuple(hull), degenerate=self.dim == 2 and polygon_width(hull) <= MERGE_TOL)

    def breakpoints(self) -> np.ndarray:
        return _edge_normals(self.hull())

    def negated(self) -> "SuperlinearForm":
        return SuperlinearForm(tuple(tuple(-c for c in a) for a in self.generators))

    def scaled(self, lam: float):
        """``lam * s``: sublinear for ``lam >= 0``, superlinear for ``lam < 0``."""
        gens = tuple(tuple(lam * c for c in a) for a in self.generators)
        return SublinearForm(gens) if lam >= 0 else SuperlinearForm(gens)

    def __add__(self, other: "SublinearForm") -> "SublinearForm":
        """Pointwise sum; generators are the Minkowski sum of the two hulls."""
        if not isinstance(other, SublinearForm) or other.dim != self.dim:
            return NotImplemented
        gens = [tuple(a + b for a, b in zip(p, q)) for p in self.hull() for q in other.hull()]
        return SublinearForm(tuple(_hull_generators(gens, self.dim)))

    @classmethod
    def linear(cls, a) -> "SublinearForm":
        return cls((tuple(float(c) for c in np.atleast_1d(a)),))


@dataclass(frozen=True)
class SuperlinearForm(_Form):
    """``u(x) = min_a <a, x>`` over ``generators``."""

    generators: tuple
    kind = "superlinear"

    def __post_init__(self):
        object.__setattr__(self, "generators", _as_functionals([self.generators])[0])

    @property
    def rows(self) -> tuple:
        return (self.generators,)

    @property
    def dim(self) -> int:
        return len(self.generators[0])

    def values(self, x) -> np.ndarray:
        return -support([tuple(-c for c in a) for a in self.generators], _dirs(x, self.dim))

    def hull(self) -> list:
        return _hull_generators(self.generators, self.dim)

    def breakpoints(self) -> np.ndarray:
        return _edge_normals(self.hull())

    def negated(self) -> SublinearForm:
        return SublinearForm(tuple(tuple(-c for c in a) for a in self.generators))

    def scaled(self, lam: float):
        gens = tuple(tuple(lam * c for c in a) for a in self.generators)
        return SuperlinearForm(gens) if lam >= 0 else SublinearForm(gens)

    @classmethod
    def linear(cls, a) -> "SuperlinearForm":
        return cls((tuple(float(c) for c in np.atleast_1d(a)),))


def eval_maxmin(p: MaxMinForm, x) -> float:
    """Value of ``min_i max_j <a_ij, x>`` at one point."""
    return p.value(x)


def _unit(v) -> tuple:
    n = math.hypot(v[0], v[1])
    return (v[0] / n, v[1] / n)


def _pair_breakpoints(functionals) -> np.ndarray:
    out = []
    if not functionals or len(functionals[0]) != 2:
        return np.empty((0, len(functionals[0]) if functionals else 2))
    for i, a in enumerate(functionals):
        for b in functionals[i + 1 :]:
            w = (a[0] - b[0], a[1] - b[1])
            if math.hypot(*w) > MERGE_TOL:
                t = _unit((-w[1], w[0]))
                out += [t, (-t[0], -t[1])]
    return np.array(out).reshape(-1, 2)


def _edge_normals(hull) -> np.ndarray:
    if not hull or len(hull[0]) != 2 or len(hull) < 2:
        return np.empty((0, 2))
    out = []
    n = len(hull)
    for i in range(n if n > 2 else 1):
        p, q = hull[i], hull[(i + 1) % n]
        w = (q[0] - p[0], q[1] - p[1])
        if math.hypot(*w) > MERGE_TOL:
            t = _unit((w[1], -w[0]))
            out += [t, (-t[0], -t[1])]
    return np.array(out).reshape(-1, 2)


def unit_directions(M: int, dim: int = 2) -> np.ndarray:
    """``M`` unit directions at angles ``2 pi i / M`` (2D) or ``[+1, -1]`` (1D).

    Axis directions are exact: their cosines and sines are snapped to 0/±1.
    """
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    _check_m(M)
    return _unit_directions_2d(int(M)).copy()


@functools.lru_cache(maxsize=32)
def _unit_directions_2d(M: int) -> np.ndarray:
    theta = 2.0 * math.pi * np.arange(M) / M
    d = np.column_stack([np.cos(theta), np.sin(theta)])
    q = M // 4
    axes = {0: (1.0, 0.0), 1: (0.0, 1.0), 2: (-1.0, 0.0), 3: (0.0, -1.0)}
    for k, v in axes.items():
        d[k * q] = v
    return d


def _check_m(M):
    if int(M) != M or M < 4 or M % 4:
        raise InputError(f"direction count must be a multiple of 4 and at least 4, got {M}")


@dataclass(frozen=True)
class RayProfile:
    """Values of a p.h. function at the unit directions of :func:`unit_directions`."""

    M: int
    values: tuple
    dim: int = 2

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if self.dim not in (1, 2):
            raise InputError("profiles live on R^1 or R^2")
        if self.dim == 1 and self.M != 2:
            raise InputError("a 1D profile has exactly the two directions +1 and -1")
        if self.dim == 2:
            _check_m(self.M)
        if len(vals) != self.M:
            raise InputError(f"profile has {len(vals)} values for M={self.M}")
        if not all(math.isfinite(v) for v in vals):
            raise InputError("profile values must be finite")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "values", vals)

    @classmethod
    def sample(cls, form, M: int = DEFAULT_M, dim: int = None) -> "RayProfile":
        dim = form.dim if dim is None else dim
        M = 2 if dim == 1 else M
        return cls(M, tuple(form.values(unit_directions(M, dim))), dim)

    def directions(self) -> np.ndarray:
        return unit_directions(self.M, self.dim)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values)

    def negated(self) -> "RayProfile":
        return RayProfile(self.M, tuple(-v for v in self.values), self.dim)

    def to_dict(self) -> dict:
        return {"M": self.M, "dim": self.dim, "values": list(self.values)}


def subadditivity_check(v: RayProfile, tol: float = PH_TOL) -> Check:
    """Subadditivity of a sampled p.h. function on its own direction set.

    For direction pairs whose sum is a positive multiple of another profile
    direction, checks ``v(d_i) + v(d_j) >= |d_i + d_j| v((d_i + d_j)/|.|)``;
    opposite pairs check ``v(d) + v(-d) >= 0``. The witness is the pair with
    the largest violation, preferring non-opposite pairs.
    """
    vals = v.as_array()
    if v.dim == 1:
        excess = -(vals[0] + vals[1])
        if excess > tol:
            return Check(False, [[1.0], [-1.0]], {"violation": float(excess)})
        return Check(True, None, {"pairs": 1})
    M = v.M
    dirs = v.directions()
    i, j = np.triu_indices(M, k=1)
    sep = j - i
    opposite = sep == M // 2
    mid_ok = (sep % 2 == 0) & ~opposite
    # the sum of d_i and d_j points along the bisector: index (i+j)/2, or its
    # antipode when the short arc wraps past angle 0
    half = (i + j) // 2
    mid = np.where(sep < M // 2, half, (half + M // 2) % M)
    norm = 2.0 * np.abs(np.cos(math.pi * sep / M))
    lhs = vals[i] + vals[j]
    rhs = np.where(opposite, 0.0, norm * vals[mid])
    excess = np.where(mid_ok | opposite, rhs - lhs, -np.inf)
    info = {"pairs": int(np.count_nonzero(mid_ok | opposite))}
    for mask in (mid_ok, opposite):
        bad = np.where(mask, excess, -np.inf)
        k = int(np.argmax(bad))
        if bad[k] > tol:
            info["violation"] = float(bad[k])
            return Check(False, [dirs[i[k]].tolist(), dirs[j[k]].tolist()], info)
    return Check(True, None, info)


def greatest_sublinear_minorant(v: RayProfile, slack: float = None):
    """Support function of ``U = {u : <u, d_i> <= v(d_i) for all i}``.

    Returns ``None`` when ``U`` is empty. Vertices that violate a constraint
    by at most ``slack`` (default ``1e-12`` times the profile scale) are kept,
    so that exactly tight profiles of sublinear forms do not come out empty
    from rounding. Thin results (segments, points) are flagged ``degenerate``.
    """
    vals = v.as_array()
    scale = max(1.0, float(np.abs(vals).max()))
    slack = MERGE_TOL * scale if slack is None else float(slack)
    if v.dim == 1:
        lo, hi = -vals[1], vals[0]
        if lo > hi + slack:
            return None
        if hi < lo:
            lo = hi = 0.5 * (lo + hi)
        return SublinearForm(tuple(_hull_generators([(lo,), (hi,)], 1)))
    R = 4.0 * scale / math.cos(math.pi / v.M)
    poly = [(-R, -R), (R, -R), (R, R), (-R, R)]
    for d, b in zip(v.directions(), vals):
        poly = clip_halfplane(poly, d, b, slack)
        if not poly:
            return None
    return SublinearForm(tuple(poly), degenerate=polygon_width(poly) <= MERGE_TOL)


def _values_of(p, dirs) -> np.ndarray:
    return np.asarray(p.values(dirs), dtype=float)


def probe_directions(form, p, M: int = DEFAULT_M) -> np.ndarray:
    """Uniform directions plus every breakpoint of ``form`` and ``p``."""
    dim = form.dim
    if dim == 1:
        return unit_directions(2, 1)
    parts = [unit_directions(M, 2), form.breakpoints(), p.breakpoints()]
    return np.vstack([q for q in parts if len(q)])


def _compare(form, p, role: Role, M: int, tol: float):
    if isinstance(p, RayProfile):
        dirs = p.directions()
        target = p.as_array()
    else:
        dirs = probe_directions(form, p, M)
        target = _values_of(p, dirs)
    mine = _values_of(form, dirs)
    slack = mine - target if role is Role.MAJORANT else target - mine
    return dirs, slack


def ph_majorant_minorant_test(form, p, role=Role.MAJORANT, M: int = DEFAULT_M, tol: float = PH_TOL) -> Check:
    """Whether ``form >= p`` (MAJORANT) or ``form <= p`` (MINORANT) on the sphere.

    Both operands are piecewise linear on the circle, so checking the uniform
    directions together with all breakpoint directions of both is exact:
    between consecutive test directions (less than a half turn apart) the
    difference is linear and its sign is fixed by the endpoints. When ``p``
    is a :class:`RayProfile` only its own directions are tested.

    The witness is the direction of largest violation.
    """
    role = Role.parse(role)
    if form.dim != getattr(p, "dim", form.dim):
        raise InputError("form and p have different dimensions")
    dirs, slack = _compare(form, p, role, M, tol)
    k = int(np.argmin(slack))
    info = {"margin": float(slack[k]), "directions_tested": int(len(dirs)), "role": role.value, "tol": tol}
    if slack[k] < -tol:
        return Check(False, dirs[k].tolist(), info)
    return Check(True, None, info)


# --- minimal sublinear majorants -------------------------------------------


def _polygon_of(s: SublinearForm) -> list:
    return s.hull()


def _dent(poly, d, delta, dim):
    """Lower the support of ``poly`` in direction ``d`` by ``delta``."""
    if dim == 1:
        lo, hi = poly[0][0], poly[-1][0]
        if d[0] > 0:
            hi -= delta
        else:
            lo += delta
        if lo > hi:
            return []
        return _hull_generators([(lo,), (hi,)], 1)
    bound = float(support(poly, d)[0]) - delta
    return clip_halfplane(poly, d, bound)


class _Target:
    """``p`` evaluated once on the fixed part of the probe set."""

    def __init__(self, p, M: int, dim: int, tol: float):
        self.p, self.tol, self.dim = p, tol, dim
        self.profile = isinstance(p, RayProfile)
        if self.profile:
            self.dents = p.directions()
            self.fixed, self.fixed_vals = self.dents, p.as_array()
        else:
            self.dents = unit_directions(M, dim)
            bps = p.breakpoints() if dim == 2 else np.empty((0, dim))
            self.fixed = np.vstack([self.dents, bps]) if len(bps) else self.dents
            self.fixed_vals = _values_of(p, self.fixed)
        self.dent_vals = self.fixed_vals[: len(self.dents)]

    def majorized_by(self, poly) -> bool:
        if np.any(support(poly, self.fixed) < self.fixed_vals - self.tol):
            return False
        if self.profile or self.dim == 1:
            return True
        normals = _edge_normals(poly)
        if not len(normals):
            return True
        return bool(np.all(support(poly, normals) >= _values_of(self.p, normals) - self.tol))


def _vertex_bisectors(poly) -> np.ndarray:
    """Unit directions through the middle of each vertex's normal cone.

    Edges of a clipped polygon have profile directions as normals, so a
    vertex whose normal cone holds no profile direction can only be cut
    along a direction like these.
    """
    n = len(poly)
    if n < 2 or len(poly[0]) != 2:
        return np.empty((0, 2))
    if n == 2:
        (ax, ay), (bx, by) = poly
        w = (bx - ax, by - ay)
        if math.hypot(*w) <= MERGE_TOL:
            return np.empty((0, 2))
        t = _unit(w)
        return np.array([(-t[0], -t[1]), t])
    normals = []
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        w = (q[0] - p[0], q[1] - p[1])
        normals.append(_unit((w[1], -w[0])) if math.hypot(*w) > MERGE_TOL else None)
    out = []
    for i in range(n):
        a, b = normals[i - 1], normals[i]
        if a is None or b is None:
            continue
        s = (a[0] + b[0], a[1] + b[1])
        if math.hypot(*s) > MERGE_TOL:
            out.append(_unit(s))
    return np.array(out).reshape(-1, 2)


def _dent_pass(poly, target: _Target, delta: float, first_only: bool):
    """One sweep of dents; returns (polygon, changed, first dent direction).

    Profile directions are dented in increasing angle, then the vertex
    bisectors of the current polygon.
    """
    changed = False
    sig = support(poly, target.dents)
    for k, d in enumerate(target.dents):
        # a dent lowers the support at d to exactly sig - delta
        if sig[k] - delta < target.dent_vals[k] - target.tol:
            continue
        dented = _dent(poly, d, delta, target.dim)
        if dented and target.majorized_by(dented):
            if first_only:
                return dented, True, (k, d)
            poly, changed = dented, True
            sig = support(poly, target.dents)
    if target.dim == 2:
        for d in _vertex_bisectors(poly):
            dented = _dent(poly, d, delta, 2)
            if dented and target.majorized_by(dented):
                if first_only:
                    return dented, True, (None, d)
                poly, changed = dented, True
    return poly, changed, None


def certify_minimal_sublinear_majorant(s: SublinearForm, p, M: int = DEFAULT_M, delta: float = 1e-6,
                                       tol: float = PH_TOL) -> Certificate:
    """Dent falsification for sublinear majorants.

    Each profile direction is dented in increasing angle, then the bisector
    of each vertex's normal cone: the generator polygon is clipped so that
    its support drops by ``delta`` there. A dent that leaves a nonempty
    polygon whose support function still majorizes ``p`` falsifies
    minimality. The witness ``index`` is ``None`` for a bisector dent.
    Depths at or below ``tol`` can always pass at tight directions, so they
    say nothing about minimality.
    """
    pre = ph_majorant_minorant_test(s, p, Role.MAJORANT, M, tol)
    if not pre:
        raise ContractError(f"form is not a majorant of p (witness {pre.witness})")
    dim = s.dim
    target = _Target(p, M, dim, tol)
    params = {"delta": float(delta), "M": int(M) if dim == 2 else 2, "tol": tol, "probes": int(len(target.dents)),
              "vertex_dents": dim == 2}
    _, hit, first = _dent_pass(_polygon_of(s), target, delta, first_only=True)
    if hit:
        k, d = first
        witness = {"direction": [float(c) for c in d], "index": None if k is None else int(k),
                   "delta": float(delta)}
        return Certificate(CertificateStatus.FALSIFIED, witness, params)
    return Certificate(CertificateStatus.CERTIFIED_AT_RESOLUTION, None, params)


def default_ph_delta_schedule(s: SublinearForm, p, M: int = DEFAULT_M, halvings: int = 24,
                              tol: float = PH_TOL) -> list:
    """Quarter of the largest gap ``s - p``, halved ``halvings`` times.

    Depths below ``10 tol`` are dropped (the first depth is always kept):
    such dents pass at tight directions and only let the form drift by up
    to ``tol``.
    """
    dirs = unit_directions(M, s.dim) if isinstance(p, RayProfile) or s.dim == 1 else probe_directions(s, p, M)
    target = p.as_array() if isinstance(p, RayProfile) else _values_of(p, dirs)
    gap = float(np.max(_values_of(s, dirs) - target))
    scale = max(1.0, float(np.max(np.abs(target))))
    d0 = gap / 4.0 if gap > 1e-6 * scale else 1e-6 * scale
    sched = [d0 / 2**j for j in range(halvings + 1)]
    return sched[:1] + [d for d in sched[1:] if d > 10 * tol]


def extract_minimal_sublinear_majorant(p, seed: SublinearForm, M: int = DEFAULT_M, delta_schedule=None,
                                       tol: float = PH_TOL):
    """Greedy dents from ``seed`` down to a minimal sublinear majorant of ``p``.

    Returns
    -------
    (SublinearForm, Certificate)
        The result's generator hull is contained in the seed's, so the result
        is below ``seed`` everywhere.
    """
    pre = ph_majorant_minorant_test(seed, p, Role.MAJORANT, M, tol)
    if not pre:
        raise ContractError(f"seed is not a majorant of p (witness {pre.witness})")
    sched = default_ph_delta_schedule(seed, p, M, tol=tol) if delta_schedule is None else [float(d) for d in delta_schedule]
    if not sched or any(d <= 0 for d in sched):
        raise InputError("delta schedule must be a nonempty list of positive numbers")
    target = _Target(p, M, seed.dim, tol)
    poly = _polygon_of(seed)
    for delta in sched:
        changed = True
        while changed:
            poly, changed, _ = _dent_pass(poly, target, delta, first_only=False)
    result = SublinearForm(tuple(poly)).reduced()
    cert = certify_minimal_sublinear_majorant(result, p, M, sched[-1], tol)
    return result, cert


def extract_maximal_superlinear_minorant(p, seed: SuperlinearForm, M: int = DEFAULT_M, delta_schedule=None,
                                         tol: float = PH_TOL):
    """Mirror image of :func:`extract_minimal_sublinear_majorant` via negation."""
    neg_p = p.negated()
    s, cert = extract_minimal_sublinear_majorant(neg_p, seed.negated(), M, delta_schedule, tol)
    return s.negated(), cert


def certify_maximal_superlinear_minorant(u: SuperlinearForm, p, M: int = DEFAULT_M, delta: float = 1e-6,
                                         tol: float = PH_TOL) -> Certificate:
    return certify_minimal_sublinear_majorant(u.negated(), p.negated(), M, delta, tol)
