"""Exact set calculus for finite unions of intervals on the real line.

Endpoints are floats, possibly infinite; open/closed flags are tracked
exactly and every operation is combinatorial on the sorted endpoints.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .exceptions import InputError, ParseError

INF = math.inf


@dataclass(frozen=True, order=True)
class Interval:
    """One interval; infinite endpoints are always open."""

    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise InputError("interval endpoints must not be NaN")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo_closed", bool(self.lo_closed) and math.isfinite(lo))
        object.__setattr__(self, "hi_closed", bool(self.hi_closed) and math.isfinite(hi))

    @classmethod
    def point(cls, a: float) -> "Interval":
        return cls(a, a, True, True)

    @property
    def empty(self) -> bool:
        return self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed))

    def __contains__(self, x) -> bool:
        x = float(x)
        above = x > self.lo or (x == self.lo and self.lo_closed)
        below = x < self.hi or (x == self.hi and self.hi_closed)
        return above and below

    def recession_cone(self) -> "Cone1D":
        if self.empty:
            raise InputError("the empty interval has no recession cone")
        return Cone1D.from_flags(self.hi == INF, self.lo == -INF)

    def __str__(self) -> str:
        if self.lo == self.hi:
            return "{" + _fmt(self.lo) + "}"
        return f"{'[' if self.lo_closed else '('}{_fmt(self.lo)},{_fmt(self.hi)}{']' if self.hi_closed else ')'}"


def _fmt(v: float) -> str:
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return repr(v) if v != int(v) else str(int(v))


def _touches(a: Interval, b: Interval) -> bool:
    """Whether ``a`` (left of ``b`` by start) overlaps or abuts ``b`` without a gap."""
    if a.hi > b.lo:
        return True
    return a.hi == b.lo and (a.hi_closed or b.lo_closed)


def _merge(a: Interval, b: Interval) -> Interval:
    if b.hi > a.hi or (b.hi == a.hi and b.hi_closed):
        hi, hi_closed = b.hi, b.hi_closed or (b.hi == a.hi and a.hi_closed)
    else:
        hi, hi_closed = a.hi, a.hi_closed
    lo_closed = a.lo_closed or (a.lo == b.lo and b.lo_closed)
    return Interval(a.lo, hi, lo_closed, hi_closed)


def _start_key(iv: Interval):
    # closed starts come first at a tie so merging sees the larger piece
    return (iv.lo, not iv.lo_closed)


class IntervalUnion:
    """Finite union of intervals, stored as sorted, disjoint, non-touching pieces.

    Examples
    --------
    >>> str(IntervalUnion.parse("[0,2]u[1,3]"))
    '[0,3]'
    """

    __slots__ = ("pieces",)

    def __init__(self, pieces=()):
        items = sorted((iv for iv in (_as_interval(p) for p in pieces) if not iv.empty), key=_start_key)
        out = []
        for iv in items:
            if out and _touches(out[-1], iv):
                out[-1] = _merge(out[-1], iv)
            else:
                out.append(iv)
        self.pieces = tuple(out)

    @classmethod
    def parse(cls, text: str) -> "IntervalUnion":
        return parse_set(text)

    @classmethod
    def real_line(cls) -> "IntervalUnion":
        return cls([Interval(-INF, INF, False, False)])

    @property
    def empty(self) -> bool:
        return not self.pieces

    def __contains__(self, x) -> bool:
        return any(x in iv for iv in self.pieces)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalUnion) and self.pieces == other.pieces

    def __hash__(self):
        return hash(self.pieces)

    def __iter__(self):
        return iter(self.pieces)

    def __len__(self) -> int:
        return len(self.pieces)

    def __or__(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion(self.pieces + other.pieces)

    def __and__(self, other: "IntervalUnion") -> "IntervalUnion":
        return (self.complement() | other.complement()).complement()

    def complement(self) -> "IntervalUnion":
        gaps = []
        lo, lo_closed = -INF, False
        for iv in self.pieces:
            gaps.append(Interval(lo, iv.lo, lo_closed, not iv.lo_closed))
            lo, lo_closed = iv.hi, not iv.hi_closed
        gaps.append(Interval(lo, INF, lo_closed, False))
        return IntervalUnion(gaps)

    def __str__(self) -> str:
        return "u".join(str(iv) for iv in self.pieces) if self.pieces else "{}"

    def __repr__(self) -> str:
        return f"IntervalUnion({str(self)!r})"


def _as_interval(p) -> Interval:
    if isinstance(p, Interval):
        return p
    if len(p) == 2:
        return Interval(p[0], p[1])
    return Interval(*p)


class Cone1D(str, enum.Enum):
    """The four convex cones of the real line."""

    ZERO = "{0}"
    NONNEG = "[0,inf)"
    NONPOS = "(-inf,0]"
    REAL = "R"

    @classmethod
    def from_flags(cls, pos: bool, neg: bool) -> "Cone1D":
        return {(False, False): cls.ZERO, (True, False): cls.NONNEG,
                (False, True): cls.NONPOS, (True, True): cls.REAL}[(bool(pos), bool(neg))]

    @property
    def has_positive(self) -> bool:
        return self in (Cone1D.NONNEG, Cone1D.REAL)

    @property
    def has_negative(self) -> bool:
        return self in (Cone1D.NONPOS, Cone1D.REAL)

    def __and__(self, other: "Cone1D") -> "Cone1D":
        return Cone1D.from_flags(self.has_positive and other.has_positive, self.has_negative and other.has_negative)

    def __neg__(self) -> "Cone1D":
        return Cone1D.from_flags(self.has_negative, self.has_positive)

    def __contains__(self, y) -> bool:
        y = float(y)
        return y == 0 or (y > 0 and self.has_positive) or (y < 0 and self.has_negative)


def _require_nonempty(Q: IntervalUnion):
    if Q.empty:
        raise InputError("the set is empty")


def convex_components_1d(Q: IntervalUnion) -> list:
    """Maximal convex subsets of ``Q``; on the line these are its connected pieces."""
    _require_nonempty(Q)
    return list(Q.pieces)


def convex_complements_1d(Q: IntervalUnion) -> list:
    """Maximal convex subsets of the complement of ``Q``.

    Closed endpoints of ``Q`` become open endpoints of the complements.
    """
    comp = Q.complement()
    if comp.empty:
        raise InputError("the set is the whole line and has no convex complements")
    return list(comp.pieces)


def recession_cone_1d(Q: IntervalUnion) -> Cone1D:
    """Directions ``y`` with ``x + t y`` in ``Q`` for all ``x`` in ``Q``, ``t >= 0``.

    A ray from some point of ``Q`` leaves ``Q`` exactly when a point of the
    complement lies beyond that point, so the positive direction recedes iff
    the whole complement sits at or below the smallest point of ``Q``.
    """
    _require_nonempty(Q)
    comp = Q.complement()
    first, last = Q.pieces[0], Q.pieces[-1]
    pos = comp.empty or comp.pieces[-1].hi <= first.lo
    neg = comp.empty or comp.pieces[0].lo >= last.hi
    return Cone1D.from_flags(pos, neg)


def recession_intersection_check(Q: IntervalUnion) -> bool:
    """Whether both component-wise cone intersections reproduce ``Q``'s cone.

    Compares ``recession_cone_1d(Q)`` with the intersection of the components'
    cones and with the negated intersection of the convex complements' cones.
    """
    cone = recession_cone_1d(Q)
    inner = Cone1D.REAL
    for S in convex_components_1d(Q):
        inner = inner & S.recession_cone()
    outer = Cone1D.REAL
    for C in convex_complements_1d(Q):
        outer = outer & C.recession_cone()
    return inner is cone and -outer is cone


_NUM = r"[+-]?(?:inf|(?:\d+\.?\d*|\.\d+)(?:e[+-]?\d+)?)"
_PIECE = re.compile(rf"\s*(?:([\[(])\s*({_NUM})\s*,\s*({_NUM})\s*([\])])|\{{\s*({_NUM})\s*\}})\s*", re.I)


def parse_set(text: str) -> IntervalUnion:
    """Parse a set literal such as ``[0,1]u(2,inf)u{5}``.

    Pieces are intervals with ``[``/``(`` and ``]``/``)`` brackets or point
    sets ``{a}``, joined by ``u``; ``inf`` and ``-inf`` are accepted.
    """
    text = str(text).strip()
    if not text:
        raise ParseError("empty set literal", line=1)
    pieces = []
    for chunk in re.split(r"\s*[uU]\s*", text):
        m = _PIECE.fullmatch(chunk)
        if not m:
            raise ParseError(f"cannot parse set piece {chunk!r}", line=1)
        if m.group(5) is not None:
            a = float(m.group(5))
            if not math.isfinite(a):
                raise ParseError(f"point piece must be finite: {chunk!r}", line=1)
            pieces.append(Interval.point(a))
            continue
        lo, hi = float(m.group(2)), float(m.group(3))
        if lo > hi:
            raise ParseError(f"interval {chunk!r} has lo > hi", line=1)
        pieces.append(Interval(lo, hi, m.group(1) == "[", m.group(4) == "]"))
    return IntervalUnion(pieces)
