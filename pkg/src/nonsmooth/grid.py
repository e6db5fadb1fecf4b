"""Uniform 1D/2D grids carrying extended-real values.

Extended reals are stored as IEEE doubles where ``+inf``/``-inf`` act as the
two sentinels. NaN is never a legal value and is rejected on construction.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError, InputError

INF = math.inf

#: all-pairs Lipschitz scans are used up to this many grid points
ALL_PAIRS_LIMIT = 4096


class NormTag(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, value) -> "NormTag":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InputError(f"unknown norm {value!r}; expected l1, l2 or linf") from None


def norm_of(vectors, norm: NormTag) -> np.ndarray:
    """Norm of each row of ``vectors`` (shape ``(m, n)``)."""
    v = np.abs(np.atleast_2d(np.asarray(vectors, dtype=float)))
    norm = NormTag.parse(norm)
    if norm is NormTag.L1:
        return v.sum(axis=1)
    if norm is NormTag.LINF:
        return v.max(axis=1)
    return np.sqrt((v * v).sum(axis=1))


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box sampled at ``counts[a]`` points spaced ``spacing[a]``."""

    origin: tuple
    spacing: tuple
    counts: tuple

    def __post_init__(self):
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        spacing = tuple(float(h) for h in np.atleast_1d(self.spacing))
        counts = tuple(int(n) for n in np.atleast_1d(self.counts))
        if not (len(origin) == len(spacing) == len(counts)) or len(counts) not in (1, 2):
            raise InputError("grid must be 1D or 2D with one origin/spacing/count per axis")
        if any(not math.isfinite(h) or h <= 0 for h in spacing):
            raise InputError(f"spacing must be strictly positive, got {spacing}")
        if any(not math.isfinite(o) for o in origin):
            raise InputError("origin must be finite")
        if any(n < 2 for n in counts):
            raise InputError(f"need at least 2 points per axis, got {counts}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_bounds(cls, lo, hi, counts) -> "GridSpec":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        counts = np.atleast_1d(counts)
        spacing = (hi - lo) / (counts - 1)
        return cls(tuple(lo), tuple(spacing), tuple(counts))

    @property
    def dims(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return int(np.prod(self.counts))

    @property
    def shape(self) -> tuple:
        return self.counts

    def indices(self) -> np.ndarray:
        """Integer multi-indices of all nodes, row-major, shape ``(size, dims)``."""
        axes = [np.arange(n) for n in self.counts]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def points(self) -> np.ndarray:
        """Coordinates of all nodes, row-major, shape ``(size, dims)``."""
        idx = self.indices()
        return np.asarray(self.origin) + idx * np.asarray(self.spacing)

    def point(self, flat_index: int) -> tuple:
        multi = np.unravel_index(int(flat_index), self.counts)
        return tuple(float(o + int(i) * h) for o, i, h in zip(self.origin, multi, self.spacing))

    def diameter(self, norm=NormTag.L2) -> float:
        extent = np.asarray(self.spacing) * (np.asarray(self.counts) - 1)
        return float(norm_of(extent[None, :], norm)[0])

    def uniform_spacing(self) -> bool:
        return len(set(self.spacing)) == 1


@dataclass(frozen=True)
class GridFn:
    """A scalar field on a :class:`GridSpec`; ``values`` is flat and row-major."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size != self.spec.size:
            raise InputError(
                f"expected {self.spec.size} values for counts {self.spec.counts}, got {values.size}"
            )
        if np.isnan(values).any():
            raise InputError("NaN is not an extended real; use inf/-inf sentinels")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, array, origin=None, spacing=None) -> "GridFn":
        array = np.asarray(array, dtype=float)
        dims = array.ndim
        origin = (0.0,) * dims if origin is None else origin
        spacing = (1.0,) * dims if spacing is None else spacing
        return cls(GridSpec(origin, spacing, array.shape), array.ravel())

    @property
    def grid(self) -> np.ndarray:
        """Values reshaped to the grid's counts."""
        return self.values.reshape(self.spec.counts)

    def with_values(self, values) -> "GridFn":
        return GridFn(self.spec, values)

    def __neg__(self) -> "GridFn":
        return self.with_values(-self.values)

    def is_l_proper(self) -> bool:
        return bool(not np.any(self.values == -INF) and np.any(np.isfinite(self.values)))

    def is_u_proper(self) -> bool:
        return bool(not np.any(self.values == INF) and np.any(np.isfinite(self.values)))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


def index_distance(offsets, spacing: Sequence[float], norm: NormTag) -> np.ndarray:
    """Distance between nodes separated by integer ``offsets`` (shape ``(..., dims)``).

    On a line every norm reduces to ``h * |m|``; this exact expression is used
    so that all transforms agree on the same floating-point distances.
    """
    offsets = np.abs(np.asarray(offsets))
    h = np.asarray(spacing, dtype=float)
    if h.size == 1:
        return h[0] * offsets[..., 0]
    parts = h * offsets
    norm = NormTag.parse(norm)
    if norm is NormTag.L1:
        return parts[..., 0] + parts[..., 1]
    if norm is NormTag.LINF:
        return np.maximum(parts[..., 0], parts[..., 1])
    return np.sqrt(parts[..., 0] * parts[..., 0] + parts[..., 1] * parts[..., 1])


class LipschitzEstimate(NamedTuple):
    value: float
    exact: bool
    stencil: str


def _stencil_offsets(dims: int, diagonals: bool) -> list:
    if dims == 1:
        return [(1,)]
    offsets = [(1, 0), (0, 1)]
    if diagonals:
        offsets += [(1, 1), (1, -1)]
    return offsets


def _neighbor_ratio(f: GridFn, offsets, norm) -> float:
    grid = f.grid
    best = 0.0
    for off in offsets:
        src = tuple(slice(max(0, -o), n - max(0, o)) for o, n in zip(off, grid.shape))
        dst = tuple(slice(max(0, o), n - max(0, -o)) for o, n in zip(off, grid.shape))
        diff = np.abs(grid[dst] - grid[src])
        if diff.size:
            d = float(index_distance(np.array(off)[None, :], f.spec.spacing, norm)[0])
            best = max(best, float(diff.max()) / d)
    return best


def _all_pairs_ratio(f: GridFn, norm) -> float:
    idx = f.spec.indices()
    vals = f.values
    best = 0.0
    for start in range(0, len(vals), 512):
        stop = min(start + 512, len(vals))
        off = idx[start:stop, None, :] - idx[None, :, :]
        d = index_distance(off, f.spec.spacing, norm)
        diff = np.abs(vals[start:stop, None] - vals[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d > 0, diff / np.where(d > 0, d, 1.0), 0.0)
        best = max(best, float(ratio.max()))
    return best


def lipschitz_estimate(f: GridFn, norm=NormTag.L1) -> LipschitzEstimate:
    """Largest difference quotient of ``f`` over a norm-appropriate stencil.

    The 4-neighbour stencil is exact for L1 and the 8-neighbour stencil is
    exact for L-infinity on equally spaced axes, because every pair of nodes
    is joined by a path of stencil steps whose lengths add up to their
    distance. Other cases scan all pairs up to :data:`ALL_PAIRS_LIMIT`
    points and otherwise fall back to the 8-neighbour stencil, which then
    only bounds the constant from below.
    """
    norm = NormTag.parse(norm)
    if not f.is_finite():
        raise DomainError("discrete Lipschitz constant needs finite values")
    spec = f.spec
    if spec.dims == 1 or norm is NormTag.L1:
        return LipschitzEstimate(_neighbor_ratio(f, _stencil_offsets(spec.dims, False), norm), True, "4-neighbor")
    if norm is NormTag.LINF and spec.uniform_spacing():
        return LipschitzEstimate(_neighbor_ratio(f, _stencil_offsets(2, True), norm), True, "8-neighbor")
    if spec.size <= ALL_PAIRS_LIMIT:
        return LipschitzEstimate(_all_pairs_ratio(f, norm), True, "all-pairs")
    return LipschitzEstimate(_neighbor_ratio(f, _stencil_offsets(2, True), norm), False, "8-neighbor lower bound")


def discrete_lipschitz_constant(f: GridFn, norm=NormTag.L1) -> float:
    return lipschitz_estimate(f, norm).value


def midpoint_directions(dims: int) -> list:
    """Unit index steps used for midpoint-convexity scans."""
    return _stencil_offsets(dims, diagonals=True)


def midpoint_violation(values: np.ndarray, spec: GridSpec, tol: float):
    """First node where ``f(x) > (f(x-v) + f(x+v))/2 + tol``, else ``None``.

    Returns ``(flat_index, excess)``. Scans unit steps along the axes and, in
    2D, along both diagonals; on a uniform grid this implies midpoint
    convexity for every collinear triple along those lines.
    """
    grid = np.asarray(values, dtype=float).reshape(spec.counts)
    shape = grid.shape
    first = None
    for off in midpoint_directions(spec.dims):
        # centre window: nodes x with x - off and x + off both inside
        centre = tuple(slice(abs(o), n - abs(o)) for o, n in zip(off, shape))
        minus = tuple(slice(abs(o) - o, n - abs(o) - o) for o, n in zip(off, shape))
        plus = tuple(slice(abs(o) + o, n - abs(o) + o) for o, n in zip(off, shape))
        c = grid[centre]
        if c.size == 0:
            continue
        with np.errstate(invalid="ignore"):
            excess = c - 0.5 * (grid[minus] + grid[plus])
        bad = np.argwhere(excess > tol)
        for pos in bad:
            node = tuple(int(p) + abs(o) for p, o in zip(pos, off))
            flat = int(np.ravel_multi_index(node, shape))
            if first is None or flat < first[0]:
                first = (flat, float(excess[tuple(pos)]))
            break
    return first


def is_midpoint_convex(f: GridFn, tol: float = 1e-12) -> bool:
    return midpoint_violation(f.values, f.spec, tol) is None


def same_spec(*fns: GridFn) -> GridSpec:
    spec = fns[0].spec
    for g in fns[1:]:
        if g.spec != spec:
            raise InputError("grid functions live on different grids")
    return spec
