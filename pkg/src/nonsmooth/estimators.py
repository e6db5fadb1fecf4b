"""scikit-learn style wrappers around the grid transforms and extractors.

Inputs are :class:`~nonsmooth.grid.GridFn` objects or plain 1D/2D arrays,
which are placed on a unit-spaced grid at the origin unless ``origin`` and
``spacing`` are given. Transforms return the same kind of object they receive.
"""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted, check_scalar

from . import conjugate, envelope, homogeneous
from .exceptions import InputError
from .grid import GridFn, NormTag


def check_grid(X, origin=None, spacing=None) -> GridFn:
    """Validate ``X`` and return it as a :class:`GridFn`.

    Arrays must be 1D or 2D, numeric, NaN-free and have at least two points
    per axis; ``inf`` and ``-inf`` are allowed.
    """
    if isinstance(X, GridFn):
        return X
    try:
        arr = np.asarray(X, dtype=float)
    except (TypeError, ValueError):
        raise InputError("grid values must be numeric") from None
    if arr.ndim not in (1, 2):
        raise InputError(f"expected a 1D or 2D array of grid values, got {arr.ndim} dimensions")
    return GridFn.from_array(arr, origin, spacing)


def check_positive(value, name: str) -> float:
    check_scalar(value, name, numbers.Real, min_val=0, include_boundaries="neither")
    if not np.isfinite(value):
        raise InputError(f"{name} must be finite")
    return float(value)


def _like(X, out: GridFn):
    return out if isinstance(X, GridFn) else out.grid.copy()


class _GridTransformer(TransformerMixin, BaseEstimator):
    """Shared ``fit``: validate the grid and remember its spec."""

    origin = None
    spacing = None

    def _check_params(self):
        pass

    def fit(self, X, y=None):
        self._check_params()
        f = check_grid(X, self.origin, self.spacing)
        self.spec_ = f.spec
        self.n_dims_in_ = f.spec.dims
        return self

    def _grid_in(self, X) -> GridFn:
        check_is_fitted(self, "spec_")
        f = check_grid(X, self.origin, self.spacing)
        if f.spec.dims != self.n_dims_in_:
            raise InputError(f"fitted on {self.n_dims_in_}D grids, got a {f.spec.dims}D grid")
        return f


class PaschHausdorffEnvelope(_GridTransformer):
    """Least ``k``-Lipschitz majorant of grid data.

    Parameters
    ----------
    k : float
        Lipschitz constant, ``> 0``.
    norm : {"l1", "l2", "linf"}
    mode : {"exact", "fast"}
    """

    def __init__(self, k=1.0, norm="l1", mode="exact", origin=None, spacing=None):
        self.k = k
        self.norm = norm
        self.mode = mode
        self.origin = origin
        self.spacing = spacing

    def _check_params(self):
        check_positive(self.k, "k")
        NormTag.parse(self.norm)
        envelope.EnvelopeMode.parse(self.mode)

    def transform(self, X):
        f = self._grid_in(X)
        return _like(X, envelope.pasch_hausdorff(f, self.k, self.norm, self.mode))


class SemicontinuousClosure(_GridTransformer):
    """Upper (or lower) closure over a geometric ``k`` schedule."""

    def __init__(self, k_min=1.0, factor=2.0, steps=6, norm="l1", direction="upper", mode="exact",
                 origin=None, spacing=None):
        self.k_min = k_min
        self.factor = factor
        self.steps = steps
        self.norm = norm
        self.direction = direction
        self.mode = mode
        self.origin = origin
        self.spacing = spacing

    def _check_params(self):
        self.schedule_ = envelope.KSchedule(self.k_min, self.factor, self.steps)
        envelope.Direction.parse(self.direction)

    def transform(self, X):
        f = self._grid_in(X)
        return _like(X, envelope.semicontinuous_closure(f, self.schedule_, self.norm, self.direction, self.mode))


class LegendreConjugate(_GridTransformer):
    """Discrete conjugate ``f*(s) = max_x (<s, x> - f(x))``.

    Attributes
    ----------
    dual_spec_ : DualGridSpec
        Slope grid used by ``transform``; taken from ``dual`` or from the
        fitted grid's discrete Lipschitz constant.
    range_truncated_ : bool
        Whether that slope grid misses part of the subgradient range of the
        fitted data.
    """

    def __init__(self, dual=None, origin=None, spacing=None):
        self.dual = dual
        self.origin = origin
        self.spacing = spacing

    def fit(self, X, y=None):
        super().fit(X)
        f = check_grid(X, self.origin, self.spacing)
        self.dual_spec_ = conjugate.default_dual_spec(f) if self.dual is None else self.dual
        self.range_truncated_ = conjugate.dual_range_truncated(f, self.dual_spec_)
        return self

    def transform(self, X):
        f = self._grid_in(X)
        out = conjugate.legendre_conjugate(f, self.dual_spec_)
        return _like(X, out)


class ConvexEnvelope(_GridTransformer):
    """Greatest convex minorant of grid data."""

    def __init__(self, origin=None, spacing=None):
        self.origin = origin
        self.spacing = spacing

    def transform(self, X):
        return _like(X, conjugate.convex_envelope(self._grid_in(X)))


class MinimalConvexMajorant(_GridTransformer):
    """Minimal convex majorant extracted from a seed by greedy dents.

    Parameters
    ----------
    seed : GridFn or array, optional
        Convex majorant to start from; defaults to the constant ``max f``.
    delta_schedule : list of float, optional
    tol : float
    order : {"row-major", "reverse"}

    Attributes
    ----------
    majorant_ : GridFn
    certificate_ : Certificate
    """

    def __init__(self, seed=None, delta_schedule=None, tol=1e-9, order="row-major", origin=None, spacing=None):
        self.seed = seed
        self.delta_schedule = delta_schedule
        self.tol = tol
        self.order = order
        self.origin = origin
        self.spacing = spacing

    def _extract(self, f: GridFn):
        if self.seed is None:
            if not f.is_finite():
                raise InputError("the default seed needs finite data")
            seed = f.with_values(np.full(f.spec.size, float(f.values.max())))
        else:
            seed = check_grid(self.seed, f.spec.origin, f.spec.spacing)
        return conjugate.extract_minimal_convex_majorant(f, seed, self.delta_schedule, self.tol, self.order)

    def fit(self, X, y=None):
        check_positive(self.tol, "tol")
        super().fit(X)
        self.majorant_, self.certificate_ = self._extract(check_grid(X, self.origin, self.spacing))
        return self

    def transform(self, X):
        g, _ = self._extract(self._grid_in(X))
        return _like(X, g)

    def fit_transform(self, X, y=None, **fit_params):
        return _like(X, self.fit(X).majorant_)


def _box_seed(p, M: int) -> homogeneous.SublinearForm:
    if isinstance(p, homogeneous.RayProfile):
        B = float(np.max(np.abs(p.as_array())))
    else:
        B = max(float(np.linalg.norm(a)) for a in p.functionals())
    B = max(B, 1.0)
    if p.dim == 1:
        return homogeneous.SublinearForm(((-B,), (B,)))
    return homogeneous.SublinearForm(((B, B), (-B, B), (-B, -B), (B, -B)))


class MinimalSublinearMajorant(BaseEstimator):
    """Minimal sublinear majorant of a p.h. function.

    ``fit`` takes a form or a :class:`RayProfile`; ``predict`` evaluates the
    extracted form at the rows of ``D``.

    Parameters
    ----------
    seed : SublinearForm, optional
        Defaults to ``B |d|_1`` with ``B`` bounding ``p`` on the unit circle.
    M : int
        Number of unit directions used for tests and dents.
    """

    def __init__(self, seed=None, M=homogeneous.DEFAULT_M, delta_schedule=None, tol=homogeneous.PH_TOL):
        self.seed = seed
        self.M = M
        self.delta_schedule = delta_schedule
        self.tol = tol

    def fit(self, p, y=None):
        check_positive(self.tol, "tol")
        seed = _box_seed(p, self.M) if self.seed is None else self.seed
        self.form_, self.certificate_ = homogeneous.extract_minimal_sublinear_majorant(
            p, seed, self.M, self.delta_schedule, self.tol)
        return self

    def predict(self, D):
        check_is_fitted(self, "form_")
        return self.form_.values(D)
