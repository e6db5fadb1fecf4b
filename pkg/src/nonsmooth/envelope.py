"""Pasch-Hausdorff envelopes ``f_k(x) = max_y f(y) - k d(x, y)`` on grids.

Every output value is the exact envelope of the (floating-point) input data,
rounded toward minus infinity. Candidate maximisers are screened in floating
point and the survivors are evaluated exactly: as integers over a common
power-of-two denominator for the l1 and linf norms, and with an exact
square-root comparison for the Euclidean norm. Two consequences
are relied upon by the tests:

* the sweep transforms (``FAST``) reproduce the all-pairs transform
  (``EXACT``) bit for bit, because both round the same exact number;
* applying the transform twice is a no-op bit for bit, because a value rounded
  down can never push a neighbour above its own rounded-down value.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import DegenerateInputError, InputError, UnsupportedError
from .grid import GridFn, NormTag, index_distance

_UNIT_ROUNDOFF = 2.0**-53
_CHUNK = 256


class EnvelopeMode(str, enum.Enum):
    EXACT = "exact"
    FAST = "fast"

    @classmethod
    def parse(cls, value) -> "EnvelopeMode":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise InputError(f"unknown envelope mode {value!r}") from None


class Direction(str, enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    @classmethod
    def parse(cls, value) -> "Direction":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise InputError(f"unknown closure direction {value!r}") from None


@dataclass(frozen=True)
class KSchedule:
    """Geometric Lipschitz constants ``k_min * factor**j`` for ``j < steps``."""

    k_min: float
    factor: float = 2.0
    steps: int = 6

    def __post_init__(self):
        if not (self.k_min > 0 and math.isfinite(self.k_min)):
            raise InputError("k_min must be a positive finite number")
        if not self.factor > 1:
            raise InputError("factor must exceed 1")
        if int(self.steps) < 1:
            raise InputError("schedule is empty")

    def values(self) -> list:
        return [self.k_min * self.factor**j for j in range(int(self.steps))]


class _Exact:
    """Exact arithmetic for ``f(y) - k * d(offset)``."""

    def __init__(self, spacing, k: float, norm: NormTag):
        self.k = Fraction(k)
        self.h = [Fraction(h) for h in spacing]
        self.euclid = norm is NormTag.L2 and len(spacing) == 2
        self.norm = norm

    def _dist(self, offset) -> Fraction:
        parts = [h * abs(int(m)) for h, m in zip(self.h, offset)]
        if len(parts) == 1:
            return parts[0]
        if self.norm is NormTag.L1:
            return parts[0] + parts[1]
        return max(parts)

    def _sq_dist(self, offset) -> Fraction:
        return sum((h * int(m)) ** 2 for h, m in zip(self.h, offset))

    def exceeds(self, fa: float, oa, fb: float, ob) -> int:
        """Sign of ``(fa - k d(oa)) - (fb - k d(ob))``; rational norms only."""
        diff = (Fraction(fa) - Fraction(fb)) - self.k * (self._dist(oa) - self._dist(ob))
        return (diff > 0) - (diff < 0)

    def round_down(self, fval: float, offset) -> float:
        if not self.euclid:
            exact = Fraction(fval) - self.k * self._dist(offset)
            r = float(exact)
            if Fraction(r) > exact:
                r = math.nextafter(r, -math.inf)
            return r
        q = self._sq_dist(offset)
        if q == 0:
            return float(fval)
        f = Fraction(fval)
        k2q = self.k * self.k * q

        def below(r: float) -> bool:  # r <= f - k*sqrt(q)
            s = f - Fraction(r)
            return s >= 0 and k2q <= s * s

        r = float(fval) - float(self.k) * math.sqrt(float(q))
        if below(r):
            up = math.nextafter(r, math.inf)
            while below(up):
                r, up = up, math.nextafter(up, math.inf)
        else:
            while not below(r):
                r = math.nextafter(r, -math.inf)
        return r


def _den_exp(d: int) -> int:
    return d.bit_length() - 1


class _Scaled:
    """``f(y)`` and ``k d(m)`` as exact integers over a common ``2**S``.

    Floats, ``k`` and the spacings are dyadic rationals, so with rational
    norms every candidate is an integer at this scale; taking the exact max
    with integer arithmetic and rounding once per node is much cheaper than
    rounding every tied candidate through ``Fraction``.
    """

    def __init__(self, arith: _Exact, values):
        self.arith = arith
        exps = [_den_exp(float(v).as_integer_ratio()[1]) for v in values]
        self.S = max(exps + [_den_exp(arith.k.denominator) + max(_den_exp(h.denominator) for h in arith.h)])
        self._kd = {}

    def value(self, v: float) -> int:
        n, d = float(v).as_integer_ratio()
        return n << (self.S - _den_exp(d))

    def kd(self, offset) -> int:
        key = tuple(abs(int(m)) for m in offset)
        out = self._kd.get(key)
        if out is None:
            fr = self.arith.k * self.arith._dist(key)
            out = self._kd[key] = fr.numerator << (self.S - _den_exp(fr.denominator))
        return out

    def round_down(self, n: int) -> float:
        r = n / (1 << self.S)  # correctly rounded
        rn, rd = r.as_integer_ratio()
        if rn << self.S > n * rd:
            r = math.nextafter(r, -math.inf)
        return r


def _screen_bound(values: np.ndarray, k: float, diameter: float) -> float:
    # rigorous bound on |float(f - k d) - (f - k d)| for any candidate pair
    return 8.0 * _UNIT_ROUNDOFF * (float(np.max(np.abs(values))) + k * diameter)


def _check_inputs(f: GridFn, k: float):
    if not (k > 0 and math.isfinite(k)):
        raise InputError(f"k must be a positive finite number, got {k}")
    if np.any(f.values == -math.inf):
        raise InputError("envelope input must be l-proper (no -inf values)")
    if not np.any(np.isfinite(f.values)):
        raise DegenerateInputError("every value is +inf; the envelope is undefined")


def _exact_transform(f: GridFn, k: float, norm: NormTag) -> np.ndarray:
    spec = f.spec
    vals = f.values
    finite = vals[np.isfinite(vals)]
    bound = _screen_bound(finite, k, spec.diameter(norm))
    arith = _Exact(spec.spacing, k, norm)
    if spec.dims == 2:
        return _exact_rows_2d(f, k, norm, bound, arith)
    idx = spec.indices()
    src = np.flatnonzero(np.isfinite(vals))
    sidx, sval = idx[src], vals[src]
    scaled = None if arith.euclid else _Scaled(arith, sval)
    ints = None if scaled is None else [scaled.value(v) for v in sval]
    out = np.empty(spec.size)
    for start in range(0, spec.size, _CHUNK):
        stop = min(start + _CHUNK, spec.size)
        off = idx[start:stop, None, :] - sidx[None, :, :]
        cand = sval[None, :] - k * index_distance(off, spec.spacing, norm)
        top = cand.max(axis=1)
        near = cand >= (top - 2.0 * bound)[:, None]
        for row in range(stop - start):
            cols = np.flatnonzero(near[row])
            if scaled is None:
                out[start + row] = max(arith.round_down(sval[c], off[row, c]) for c in cols)
            else:
                m = np.abs(off[row, cols, 0]).tolist()
                out[start + row] = scaled.round_down(max(ints[c] - scaled.kd((d,)) for c, d in zip(cols.tolist(), m)))
    return out


def _exact_rows_2d(f: GridFn, k: float, norm: NormTag, bound: float, arith: "_Exact") -> np.ndarray:
    # all pairs, one output row at a time; k*d is read from a table indexed by
    # (|di|, |dj|) whose entries are computed by index_distance itself
    n0, n1 = f.spec.counts
    grid = f.grid
    src = np.where(np.isfinite(grid), grid, -np.inf)
    absi, absj = np.meshgrid(np.arange(n0), np.arange(n1), indexing="ij")
    kd = k * index_distance(np.stack([absi, absj], axis=-1), f.spec.spacing, norm)
    # ext[:, n1 - 1 + m] = kd[:, |m|] for m in -(n1-1)..(n1-1)
    ext = np.concatenate([kd[:, :0:-1], kd], axis=1)
    windows = np.lib.stride_tricks.sliding_window_view(ext, n1, axis=1)
    # windows[:, s, t] = kd[:, |s + t - n1 + 1|], so reversing t gives
    # rev[:, j, j'] = kd[:, |j - j'|]
    rev = windows[:, :, ::-1]
    scaled = None
    if not arith.euclid:
        flat = grid.ravel()
        scaled = _Scaled(arith, flat[np.isfinite(flat)])
        ints = [scaled.value(v) if math.isfinite(v) else None for v in flat.tolist()]
    out = np.empty((n0, n1))
    rows = np.arange(n0)
    for i in range(n0):
        dist = rev[np.abs(i - rows)]  # (i', j, j')
        cand = src[:, None, :] - dist  # (i', j, j')
        cand = np.moveaxis(cand, 1, 0).reshape(n1, n0 * n1)
        top = cand.max(axis=1)
        near = cand >= (top - 2.0 * bound)[:, None]
        for j in range(n1):
            cols = np.flatnonzero(near[j])
            if scaled is not None:
                a, b = np.divmod(cols, n1)
                di, dj = np.abs(i - a).tolist(), np.abs(j - b).tolist()
                out[i, j] = scaled.round_down(
                    max(ints[c] - scaled.kd((p, q)) for c, p, q in zip(cols.tolist(), di, dj)))
                continue
            best = -math.inf
            for c in cols:
                a, b = divmod(int(c), n1)
                best = max(best, arith.round_down(grid[a, b], (i - a, j - b)))
            out[i, j] = best
    return out.ravel()


class _Sweeper:
    """Carries an exact maximiser per node through neighbour sweeps."""

    def __init__(self, f: GridFn, k: float, norm: NormTag):
        spec = f.spec
        self.spec = spec
        self.k = k
        self.norm = norm
        self.vals = f.values
        self.idx = [tuple(int(i) for i in row) for row in spec.indices()]
        self.arith = _Exact(spec.spacing, k, norm)
        finite = self.vals[np.isfinite(self.vals)]
        self.bound = _screen_bound(finite, k, spec.diameter(norm))
        self.h = spec.spacing
        self.best = [c if math.isfinite(self.vals[c]) else None for c in range(spec.size)]

    def _approx(self, c: int, target) -> float:
        src = self.idx[c]
        parts = [h * abs(t - s) for h, t, s in zip(self.h, target, src)]
        if len(parts) == 1:
            d = parts[0]
        elif self.norm is NormTag.L1:
            d = parts[0] + parts[1]
        else:
            d = max(parts)
        return self.vals[c] - self.k * d

    def pick(self, a, b, target):
        """The better of candidates ``a``/``b`` for ``target``; ties keep ``a``."""
        if a is None:
            return b
        if b is None or a == b:
            return a
        va, vb = self._approx(a, target), self._approx(b, target)
        if va - vb > 2.0 * self.bound:
            return a
        if vb - va > 2.0 * self.bound:
            return b
        ia, ib = self.idx[a], self.idx[b]
        sign = self.arith.exceeds(
            self.vals[a], [t - s for t, s in zip(target, ia)],
            self.vals[b], [t - s for t, s in zip(target, ib)],
        )
        return b if sign < 0 else a

    def finish(self) -> np.ndarray:
        out = np.empty(self.spec.size)
        for node, c in enumerate(self.best):
            target, src = self.idx[node], self.idx[c]
            out[node] = self.arith.round_down(self.vals[c], [t - s for t, s in zip(target, src)])
        return out

    def line_pass(self, nodes):
        """Forward then backward 1D sweep over an ordered run of flat indices."""
        best = self.best
        idx = self.idx
        for prev, cur in zip(nodes, nodes[1:]):
            best[cur] = self.pick(best[cur], best[prev], idx[cur])
        rev = nodes[::-1]
        for prev, cur in zip(rev, rev[1:]):
            best[cur] = self.pick(best[cur], best[prev], idx[cur])


def _fast_transform(f: GridFn, k: float, norm: NormTag) -> np.ndarray:
    spec = f.spec
    sw = _Sweeper(f, k, norm)
    if spec.dims == 1:
        sw.line_pass(list(range(spec.size)))
        return sw.finish()
    n0, n1 = spec.counts
    if norm is NormTag.L1:
        for i in range(n0):
            sw.line_pass([i * n1 + j for j in range(n1)])
        for j in range(n1):
            sw.line_pass([i * n1 + j for i in range(n0)])
        return sw.finish()
    if norm is NormTag.LINF:
        if not spec.uniform_spacing():
            raise UnsupportedError("FAST L-infinity sweeps need equal spacing on both axes")
        best, idx = sw.best, sw.idx
        fwd = ((-1, -1), (-1, 0), (-1, 1), (0, -1))
        for i in range(n0):
            for j in range(n1):
                node = i * n1 + j
                for di, dj in fwd:
                    a, b = i + di, j + dj
                    if 0 <= a < n0 and 0 <= b < n1:
                        best[node] = sw.pick(best[node], best[a * n1 + b], idx[node])
        for i in range(n0 - 1, -1, -1):
            for j in range(n1 - 1, -1, -1):
                node = i * n1 + j
                for di, dj in fwd:
                    a, b = i - di, j - dj
                    if 0 <= a < n0 and 0 <= b < n1:
                        best[node] = sw.pick(best[node], best[a * n1 + b], idx[node])
        return sw.finish()
    raise UnsupportedError(
        "FAST mode is not available for the 2D Euclidean norm (cone sweeps are not exact); use EXACT"
    )


def pasch_hausdorff(f: GridFn, k: float, norm=NormTag.L1, mode=EnvelopeMode.EXACT) -> GridFn:
    """Least ``k``-Lipschitz majorant of ``f`` on the sampled box.

    Parameters
    ----------
    f : GridFn
        l-proper grid function. Nodes holding ``+inf`` are left out of the
        maximum (they are outside the effective domain); their output value
        is the envelope of the remaining nodes.
    k : float
        Lipschitz constant, ``k > 0``.
    norm : NormTag or str
        Metric on the grid. In 1D all norms coincide.
    mode : EnvelopeMode or str
        ``EXACT`` scans all node pairs. ``FAST`` uses two-pass sweeps and is
        available for 1D, 2D-L1 and 2D-L-infinity with equal spacing.

    Returns
    -------
    GridFn
        ``f_k`` rounded toward minus infinity at every node.
    """
    norm = NormTag.parse(norm)
    mode = EnvelopeMode.parse(mode)
    k = float(k)
    _check_inputs(f, k)
    if mode is EnvelopeMode.FAST:
        return f.with_values(_fast_transform(f, k, norm))
    return f.with_values(_exact_transform(f, k, norm))


def saturation_warning(f: GridFn, k: float, norm=NormTag.L1) -> bool:
    """True when the oscillation of ``f`` exceeds ``k`` times the box diameter.

    That is the grid's signal that ``k`` is below any Lipschitz bound that
    ``f`` could satisfy on the box.
    """
    finite = f.values[np.isfinite(f.values)]
    if finite.size == 0:
        return False
    return bool(finite.max() - finite.min() > k * f.spec.diameter(norm))


def semicontinuous_closure(
    f: GridFn,
    schedule: KSchedule,
    norm=NormTag.L1,
    direction=Direction.UPPER,
    mode=EnvelopeMode.EXACT,
) -> GridFn:
    """Schedule-truncated semicontinuous closure.

    ``UPPER`` is the pointwise minimum of ``f_k`` over the schedule; ``LOWER``
    is ``-UPPER(-f)``. On a fixed grid the minimum tends to ``f`` itself as
    ``k`` grows, so this is a resolution-limited estimate: convergence to the
    continuum closure needs grid refinement together with a growing schedule.
    """
    direction = Direction.parse(direction)
    if not isinstance(schedule, KSchedule):
        raise InputError("schedule must be a KSchedule")
    if direction is Direction.LOWER:
        if np.any(f.values == math.inf):
            raise InputError("LOWER closure needs a u-proper input (no +inf values)")
        return -semicontinuous_closure(-f, schedule, norm, Direction.UPPER, mode)
    ks = schedule.values()
    if saturation_warning(f, ks[0], norm):
        warnings.warn(
            f"k_min={ks[0]:g} looks below the Lipschitz bound of f on this box "
            "(oscillation exceeds k_min * diameter)",
            RuntimeWarning,
            stacklevel=2,
        )
    out = None
    for k in ks:
        fk = pasch_hausdorff(f, k, norm, mode).values
        out = fk if out is None else np.minimum(out, fk)
    return f.with_values(out)
