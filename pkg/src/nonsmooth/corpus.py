"""Registry of closed-form test functions on R^1 and R^2.

Metadata attached to each entry (Lipschitz bound, convexity, positive
homogeneity) is descriptive only; the test suite checks it.
``lipschitz`` is stated with respect to the L1 norm on the argument.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .exceptions import CorpusConsistencyError, InputError, RegistryError
from .grid import GridFn, GridSpec


@dataclass(frozen=True)
class CorpusFn:
    name: str
    dim: int
    func: Callable
    box: tuple  # ((lo, hi), ...) per axis
    lipschitz: Optional[float] = None  # with respect to the L1 metric
    convex: bool = False
    ph: bool = False
    finite: bool = True

    def __call__(self, point) -> float:
        x = _as_point(point, self.dim)
        return float(self.func(x))

    def box_radius(self) -> float:
        return min(hi - lo for lo, hi in self.box) / 2.0

    def interior(self, point) -> bool:
        x = _as_point(point, self.dim)
        return all(lo < xi < hi for xi, (lo, hi) in zip(x, self.box))

    def scaled(self, lam: float) -> "CorpusFn":
        lam = float(lam)
        lip = None if self.lipschitz is None else abs(lam) * self.lipschitz
        return CorpusFn(
            f"{lam:g}*{self.name}",
            self.dim,
            lambda x, _f=self.func: lam * _f(x),
            self.box,
            lip,
            convex=self.convex if lam >= 0 else False,
            ph=self.ph,
        )

    def __add__(self, other: "CorpusFn") -> "CorpusFn":
        if not isinstance(other, CorpusFn) or other.dim != self.dim:
            return NotImplemented
        box = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(self.box, other.box))
        lip = None
        if self.lipschitz is not None and other.lipschitz is not None:
            lip = self.lipschitz + other.lipschitz
        return CorpusFn(
            f"({self.name}+{other.name})",
            self.dim,
            lambda x, _f=self.func, _g=other.func: _f(x) + _g(x),
            box,
            lip,
            convex=self.convex and other.convex,
            ph=self.ph and other.ph,
        )


def _as_point(point, dim: int) -> tuple:
    x = tuple(float(v) for v in np.atleast_1d(np.asarray(point, dtype=float)))
    if len(x) != dim:
        raise InputError(f"point has dimension {len(x)}, function expects {dim}")
    return x


def _tsinlog(x):
    t = x[0]
    if t == 0.0:
        return 0.0
    return t * math.sin(math.log(abs(t)))


_UNIT = ((-1.0, 1.0),)
_SQUARE = ((-1.0, 1.0), (-1.0, 1.0))

AFFINE_SLOPE = (1.0, -2.0)
AFFINE_OFFSET = 0.5

_REGISTRY = {
    f.name: f
    for f in [
        CorpusFn("abs", 1, lambda x: abs(x[0]), _UNIT, 1.0, convex=True, ph=True),
        CorpusFn("square", 1, lambda x: x[0] * x[0], ((-2.0, 2.0),), 4.0, convex=True),
        CorpusFn("linear2x", 1, lambda x: 2.0 * x[0], _UNIT, 2.0, convex=True, ph=True),
        CorpusFn("maxlin", 1, lambda x: max(2.0 * x[0], -x[0]), _UNIT, 2.0, convex=True, ph=True),
        CorpusFn("tsinlog", 1, _tsinlog, _UNIT, math.sqrt(2.0)),
        CorpusFn("sqrtabs_xy", 2, lambda x: math.sqrt(abs(x[0] * x[1])), _SQUARE, None, ph=True),
        CorpusFn("absdiff", 2, lambda x: abs(x[0]) - abs(x[1]), _SQUARE, 1.0, ph=True),
        CorpusFn("abssum", 2, lambda x: abs(x[0]) + abs(x[1]), _SQUARE, 1.0, convex=True, ph=True),
        CorpusFn("abs1", 2, lambda x: abs(x[0]), _SQUARE, 1.0, convex=True, ph=True),
        CorpusFn("negabs2", 2, lambda x: -abs(x[1]), _SQUARE, 1.0, ph=True),
        CorpusFn("negabssum", 2, lambda x: -abs(x[0]) - abs(x[1]), _SQUARE, 1.0, ph=True),
        CorpusFn("maxlin2", 2, lambda x: max(x[0], x[1]), _SQUARE, 1.0, convex=True, ph=True),
        CorpusFn("minlin2", 2, lambda x: min(x[0], x[1]), _SQUARE, 1.0, ph=True),
        CorpusFn(
            "affine",
            2,
            lambda x: AFFINE_SLOPE[0] * x[0] + AFFINE_SLOPE[1] * x[1] + AFFINE_OFFSET,
            _SQUARE,
            2.0,
            convex=True,
        ),
    ]
}


def corpus_names() -> list:
    return sorted(_REGISTRY)


def get_corpus(name) -> CorpusFn:
    if isinstance(name, CorpusFn):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise RegistryError(f"unknown corpus function {name!r}; known: {', '.join(corpus_names())}") from None


def eval_corpus(name, point) -> float:
    return get_corpus(name)(point)


def sample_to_grid(fn, spec: GridSpec) -> GridFn:
    """Evaluate a corpus function at every node of ``spec``.

    Each node is evaluated through the same scalar path as :func:`eval_corpus`,
    so re-evaluating at ``spec.points()[i]`` reproduces ``values[i]`` exactly.
    """
    fn = get_corpus(fn)
    if fn.dim != spec.dims:
        raise InputError(f"{fn.name} is {fn.dim}D but the grid is {spec.dims}D")
    values = np.array([fn(p) for p in spec.points()], dtype=float)
    if fn.finite and not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise CorpusConsistencyError(
            f"{fn.name} is declared finite but is {values[bad]} at {spec.point(bad)}"
        )
    return GridFn(spec, values)
