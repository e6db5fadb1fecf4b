"""Dini directional derivatives of corpus functions by sampling along rays.

The liminf/limsup of the difference quotients ``(f(x + t d) - f(x)) / t`` are
estimated by the min/max over a *tail window*: the smallest ``t`` values of a
geometric schedule. Quotients at ``t`` so small that cancellation in
``f(x + t d) - f(x)`` dominates are dropped (see :func:`dini_derivative`).
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .certificate import Check
from .corpus import CorpusFn, get_corpus
from .exceptions import DomainError, InputError, ProfileAssumptionError
from .homogeneous import DEFAULT_M, RayProfile, unit_directions

#: relative size of the smallest admissible step (a roundoff guard)
T_FLOOR_REL = 1e-6
DEFAULT_BOUND = 1e6
TAIL_FRACTION = 0.6


class Side(str, enum.Enum):
    LOWER = "lower"
    UPPER = "upper"

    @classmethod
    def parse(cls, value) -> "Side":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise InputError(f"unknown side {value!r}; expected lower or upper") from None


@dataclass(frozen=True)
class TSchedule:
    """Steps ``t_j = t_max * ratio**j`` for ``j < steps``."""

    t_max: float
    ratio: float = 0.7
    steps: int = 100
    tail: int = None

    def __post_init__(self):
        if not (self.t_max > 0 and math.isfinite(self.t_max)):
            raise InputError("t_max must be positive and finite")
        if not 0 < self.ratio < 1:
            raise InputError("ratio must lie in (0, 1)")
        if int(self.steps) < 8:
            raise InputError("a schedule needs at least 8 steps")
        tail = int(round(TAIL_FRACTION * self.steps)) if self.tail is None else int(self.tail)
        if not 1 <= tail <= self.steps:
            raise InputError("tail window must be between 1 and steps")
        object.__setattr__(self, "steps", int(self.steps))
        object.__setattr__(self, "tail", tail)

    @classmethod
    def default_for(cls, fn: CorpusFn) -> "TSchedule":
        return cls(0.1 * fn.box_radius())

    def values(self) -> np.ndarray:
        return self.t_max * self.ratio ** np.arange(self.steps)

    def to_dict(self) -> dict:
        return {"t_max": self.t_max, "ratio": self.ratio, "steps": self.steps, "tail": self.tail}


@dataclass(frozen=True)
class DiniEstimate:
    lower: float
    upper: float
    tail_window: int
    t_range: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "tail_window": self.tail_window,
                "t_range": list(self.t_range)}


def _point(x, dim) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.shape != (dim,):
        raise InputError(f"expected a point in R^{dim}, got {x!r}")
    return p


def _admissible(fn: CorpusFn, x: np.ndarray, d: np.ndarray, ts: np.ndarray):
    f0 = fn(x)
    if not math.isfinite(f0):
        raise DomainError(f"{fn.name} is not finite at {x.tolist()}")
    norm_d = float(np.max(np.abs(d)))
    floor = T_FLOOR_REL * (abs(f0) + float(np.max(np.abs(x)))) / norm_d
    keep = ts >= floor
    if not keep.any():
        raise DomainError("every step is below the roundoff floor; raise t_max")
    return f0, ts[keep]


def _quotients(fn: CorpusFn, x: np.ndarray, d: np.ndarray, ts: np.ndarray):
    f0, ts = _admissible(fn, x, d, ts)
    q = np.empty(len(ts))
    for j, t in enumerate(ts):
        y = x + t * d
        if not all(lo <= c <= hi for c, (lo, hi) in zip(y, fn.box)):
            raise DomainError(f"sample {y.tolist()} leaves the box of {fn.name}")
        v = fn(y)
        if not math.isfinite(v):
            raise DomainError(f"{fn.name} is not finite at {y.tolist()}")
        q[j] = (v - f0) / t
    return ts, q


def dini_derivative(fn, x, d, schedule: TSchedule = None) -> DiniEstimate:
    """Lower and upper Dini derivatives of ``fn`` at ``x`` along ``d``.

    Parameters
    ----------
    fn : CorpusFn or str
        Closed-form function.
    x : point
        Base point, interior to the function's box.
    d : direction
        Nonzero direction (not normalized).
    schedule : TSchedule, optional
        Defaults to :meth:`TSchedule.default_for`.

    Notes
    -----
    Steps with ``t < 1e-6 (|f(x)| + |x|_inf) / |d|_inf`` are discarded before
    the tail window is taken; below that size the difference ``f(x + t d) -
    f(x)`` is dominated by rounding. At the origin with ``f(0) = 0`` nothing
    is discarded. When steps are dropped the window shrinks in proportion.
    """
    fn = get_corpus(fn)
    x = _point(x, fn.dim)
    d = _point(d, fn.dim)
    if not np.any(d):
        raise InputError("direction must be nonzero")
    if not fn.interior(x):
        raise DomainError(f"{x.tolist()} is not interior to the box of {fn.name}")
    schedule = TSchedule.default_for(fn) if schedule is None else schedule
    ts, q = _quotients(fn, x, d, schedule.values())
    window = _window(schedule, len(q))
    tail = q[-window:]
    return DiniEstimate(float(tail.min()), float(tail.max()), window, (float(ts[-window]), float(ts[-1])))


def _window(schedule: TSchedule, kept: int) -> int:
    # the tail keeps its share of the schedule when small steps were dropped
    if kept == schedule.steps:
        return schedule.tail
    return max(1, min(kept, int(round(kept * schedule.tail / schedule.steps))))


@functools.lru_cache(maxsize=256)
def _profile_pair(fn: CorpusFn, x: tuple, M: int, schedule: TSchedule):
    dirs = unit_directions(M, fn.dim)
    est = [dini_derivative(fn, x, d, schedule) for d in dirs]
    lower = np.array([e.lower for e in est])
    upper = np.array([e.upper for e in est])
    return lower, upper


def directional_profiles(fn, x, M: int = DEFAULT_M, schedule: TSchedule = None, bound: float = DEFAULT_BOUND):
    """Lower and upper profiles together, as ``(RayProfile, RayProfile)``."""
    fn = get_corpus(fn)
    schedule = TSchedule.default_for(fn) if schedule is None else schedule
    M = 2 if fn.dim == 1 else int(M)
    x = tuple(float(c) for c in _point(x, fn.dim))
    lower, upper = _profile_pair(fn, x, M, schedule)
    for name, vals in (("lower", lower), ("upper", upper)):
        worst = float(np.max(np.abs(vals)))
        if not worst <= bound:
            raise ProfileAssumptionError(
                f"{name} directional derivative of {fn.name} at {list(x)} reaches {worst:g}, beyond the bound {bound:g}"
            )
    return RayProfile(M, tuple(lower), fn.dim), RayProfile(M, tuple(upper), fn.dim)


def directional_profile(fn, x, M: int = DEFAULT_M, schedule: TSchedule = None, side=Side.LOWER,
                        bound: float = DEFAULT_BOUND) -> RayProfile:
    """Dini derivative at each of ``M`` unit directions (``+1``/``-1`` in 1D).

    Raises
    ------
    ProfileAssumptionError
        If any sampled value exceeds ``bound`` in absolute value; the
        boundedness assumption behind the profile-based tests then fails.
    """
    lower, upper = directional_profiles(fn, x, M, schedule, bound)
    return lower if Side.parse(side) is Side.LOWER else upper


def _lattice(m: int, dim: int) -> np.ndarray:
    axis = np.linspace(-1.0, 1.0, m)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def hadamard_check(fn, x, d, m: int = 5, schedule: TSchedule = None, tol: float = 1e-3) -> Check:
    """Spot check of Hadamard directional differentiability along ``d``.

    Samples ``(f(x + t z) - f(x)) / t`` for ``z = d + eps_j |d|_inf e`` with
    ``e`` running over an ``m``-per-axis lattice in ``[-1, 1]^n`` and
    ``eps_j = 0.5 t_j / t_max`` shrinking with ``t``. Scaling by ``|d|_inf``
    keeps the verdict unchanged when ``d`` is rescaled. Passes when every
    quotient in the smaller half of the tail window is within ``tol`` of the
    radial derivative.
    """
    fn = get_corpus(fn)
    schedule = TSchedule.default_for(fn) if schedule is None else schedule
    radial = dini_derivative(fn, x, d, schedule)
    if radial.upper - radial.lower > tol:
        return Check(False, None, {"reason": "not directionally differentiable",
                                   "lower": radial.lower, "upper": radial.upper})
    value = 0.5 * (radial.lower + radial.upper)
    xv = _point(x, fn.dim)
    dv = _point(d, fn.dim)
    f0, ts = _admissible(fn, xv, dv, schedule.values())
    # limits are read off the smaller half of the tail window, where the
    # lattice has shrunk by at least that half's ratio**(window/2)
    ts = ts[-max(1, _window(schedule, len(ts)) // 2):]
    worst, arg = 0.0, None
    size = float(np.max(np.abs(dv)))
    for e in _lattice(m, fn.dim):
        for t in ts:
            z = dv + 0.5 * (t / schedule.t_max) * size * e
            q = (fn(xv + t * z) - f0) / t
            if not math.isfinite(q):
                raise DomainError(f"{fn.name} is not finite near {xv.tolist()}")
            if abs(q - value) > worst:
                worst, arg = abs(q - value), {"t": float(t), "z": z.tolist()}
    info = {"radial": value, "max_deviation": float(worst), "lattice": m ** fn.dim, "tol": tol}
    return Check(bool(worst <= tol), None if worst <= tol else arg, info)
