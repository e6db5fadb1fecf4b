"""Demyanov-Rubinov sub/superdifferentials at a point and optimality checks.

Everything is evaluated on sampled directional profiles (see :mod:`.deriv`):
the four DR objects are the maximal superlinear minorants (``*_SUB``) or the
minimal sublinear majorants (``*_SUPER``) of the lower or upper Dini
derivative. Membership is the pair of tests "is a minorant/majorant" and
"survives every dent" at profile resolution ``M``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .certificate import Certificate, CertificateStatus
from .corpus import get_corpus
from .deriv import TSchedule, directional_profiles
from .exceptions import InputError, ProfileAssumptionError
from .grid import NormTag, norm_of
from .homogeneous import (
    DEFAULT_M,
    PH_TOL,
    Role,
    SublinearForm,
    SuperlinearForm,
    certify_maximal_superlinear_minorant,
    certify_minimal_sublinear_majorant,
    extract_maximal_superlinear_minorant,
    extract_minimal_sublinear_majorant,
    greatest_sublinear_minorant,
    ph_majorant_minorant_test,
)
from .polygon import Polytope

#: quotient spread allowed by the uniform-convergence pre-check
UNIFORM_TOL = 1e-3
#: relative slack for linear functionals against noisy sampled profiles
FILTER_SLACK = 1e-9
FILTER_MERGE = 1e-6


class Which(str, enum.Enum):
    LOWER_SUB = "lower-sub"
    LOWER_SUPER = "lower-super"
    UPPER_SUB = "upper-sub"
    UPPER_SUPER = "upper-super"

    @classmethod
    def parse(cls, value) -> "Which":
        text = str(getattr(value, "value", value)).lower().replace("_", "-")
        try:
            return cls(text)
        except ValueError:
            raise InputError(f"unknown DR object {value!r}; expected one of {[w.value for w in cls]}") from None

    @property
    def lower(self) -> bool:
        return self in (Which.LOWER_SUB, Which.LOWER_SUPER)

    @property
    def sub(self) -> bool:
        return self in (Which.LOWER_SUB, Which.UPPER_SUB)


class Kind(str, enum.Enum):
    SUB = "sub"
    SUPER = "super"

    @classmethod
    def parse(cls, value) -> "Kind":
        try:
            return cls(str(getattr(value, "value", value)).lower())
        except ValueError:
            raise InputError(f"unknown side {value!r}; expected sub or super") from None


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class OptimalityReport:
    """Verdict of an optimality test with its witness and measured margins."""

    verdict: Verdict
    witness: Optional[list] = None
    quantities: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def to_dict(self) -> dict:
        return {"verdict": self.verdict.value, "witness": self.witness, "quantities": dict(self.quantities)}


def _schedule(fn, schedule):
    return TSchedule.default_for(fn) if schedule is None else schedule


def _config(fn, x, M, schedule, **extra) -> dict:
    cfg = {"fn": fn.name, "at": [float(c) for c in np.atleast_1d(x)], "M": 2 if fn.dim == 1 else int(M),
           "schedule": schedule.to_dict()}
    cfg.update(extra)
    return cfg


def _coerce(candidate, want_sub: bool):
    """Linear functionals may be passed as either form type."""
    if want_sub and isinstance(candidate, SublinearForm) and len(candidate.generators) == 1:
        return SuperlinearForm(candidate.generators)
    if not want_sub and isinstance(candidate, SuperlinearForm) and len(candidate.generators) == 1:
        return SublinearForm(candidate.generators)
    expected = SuperlinearForm if want_sub else SublinearForm
    if not isinstance(candidate, expected):
        raise InputError(f"this DR object holds {expected.__name__}s, got {type(candidate).__name__}")
    return candidate


def _default_delta(profile) -> float:
    return 1e-6 * max(1.0, float(np.max(np.abs(profile.as_array()))))


def dr_membership(candidate, fn, x, which=Which.LOWER_SUB, M: int = DEFAULT_M, schedule: TSchedule = None,
                  delta: float = None, tol: float = PH_TOL) -> Certificate:
    """Whether ``candidate`` belongs to one of the four DR objects of ``fn`` at ``x``.

    Parameters
    ----------
    candidate : SuperlinearForm or SublinearForm
        Superlinear for the ``*_SUB`` objects, sublinear for ``*_SUPER``.
    fn : CorpusFn or str
    x : point
    which : Which
        ``LOWER_*`` uses the lower Dini derivative, ``UPPER_*`` the upper one.
    M : int
        Profile resolution.
    delta : float, optional
        Dent depth for the extremality stage; defaults to ``1e-6`` times the
        profile scale.

    Returns
    -------
    Certificate
        ``FALSIFIED`` names the failing stage and its witness direction;
        ``NOT_APPLICABLE`` when the profile is not bounded.
    """
    fn = get_corpus(fn)
    which = Which.parse(which)
    schedule = _schedule(fn, schedule)
    candidate = _coerce(candidate, which.sub)
    params = _config(fn, x, M, schedule, which=which.value, tol=tol)
    try:
        lower, upper = directional_profiles(fn, x, M, schedule)
    except ProfileAssumptionError as exc:
        return Certificate(CertificateStatus.NOT_APPLICABLE, {"reason": str(exc)}, params)
    profile = lower if which.lower else upper
    role = Role.MINORANT if which.sub else Role.MAJORANT
    stage_a = ph_majorant_minorant_test(candidate, profile, role, M, tol)
    if not stage_a:
        witness = {"stage": role.value, "direction": stage_a.witness, "margin": stage_a.info["margin"]}
        return Certificate(CertificateStatus.FALSIFIED, witness, params)
    delta = _default_delta(profile) if delta is None else float(delta)
    if which.sub:
        cert = certify_maximal_superlinear_minorant(candidate, profile, M, delta, tol)
    else:
        cert = certify_minimal_sublinear_majorant(candidate, profile, M, delta, tol)
    params.update(delta=delta, probes=cert.params.get("probes"))
    if cert.falsified:
        witness = dict(cert.witness, stage="dent")
        return Certificate(CertificateStatus.FALSIFIED, witness, params)
    return Certificate(CertificateStatus.CERTIFIED_AT_RESOLUTION, None, params)


def fenchel_moreau_subdiff(s: SublinearForm) -> Polytope:
    """Subdifferential at the origin of a sublinear form: the hull of its generators."""
    if not isinstance(s, SublinearForm):
        raise InputError("fenchel_moreau_subdiff expects a SublinearForm")
    return Polytope.hull(s.generators, s.dim)


def hadamard_subdiff_filter(fn, x, which=Kind.SUB, M: int = DEFAULT_M, schedule: TSchedule = None):
    """Linear minorants (SUB) or majorants (SUPER) of the directional derivative.

    Uses the lower profile for SUB and the upper profile for SUPER. Returns a
    :class:`Polytope`, or ``None`` when no such linear functional exists. A
    relative slack of ``1e-9`` absorbs sampling noise in the profile, and
    vertices closer than ``1e-6`` are merged.
    """
    fn = get_corpus(fn)
    kind = Kind.parse(which)
    schedule = _schedule(fn, schedule)
    lower, upper = directional_profiles(fn, x, M, schedule)
    profile = lower if kind is Kind.SUB else upper.negated()
    scale = max(1.0, float(np.max(np.abs(profile.as_array()))))
    s = greatest_sublinear_minorant(profile, slack=FILTER_SLACK * scale)
    if s is None:
        return None
    verts = s.generators if kind is Kind.SUB else [tuple(-c for c in v) for v in s.generators]
    merged = []
    for v in verts:
        if all(math.dist(v, w) > FILTER_MERGE * scale for w in merged):
            merged.append(v)
    return Polytope.hull(merged, fn.dim)


def _first_argmin(values: np.ndarray, tol: float) -> int:
    # first direction (in angle order) attaining the minimum up to ``tol``
    return int(np.flatnonzero(values <= values.min() + tol)[0])


def necessary_optimality(fn, x, M: int = DEFAULT_M, schedule: TSchedule = None, members=(),
                         tol: float = PH_TOL) -> OptimalityReport:
    """First-order necessary condition for a local minimum.

    PASS iff the lower Dini derivative is ``>= -tol`` in every profile
    direction (equivalently the zero functional is a superlinear minorant of
    it). For each supplied sublinear member ``g`` of the lower
    superdifferential the report also states whether ``0`` lies in its
    subdifferential; only supplied members are checked.
    """
    fn = get_corpus(fn)
    schedule = _schedule(fn, schedule)
    q = {"config": _config(fn, x, M, schedule, tol=tol),
         "formulation": "min over profile directions of the lower Dini derivative >= -tol"}
    try:
        lower, _ = directional_profiles(fn, x, M, schedule)
    except ProfileAssumptionError as exc:
        q["reason"] = str(exc)
        return OptimalityReport(Verdict.NOT_APPLICABLE, None, q)
    vals = lower.as_array()
    k = _first_argmin(vals, tol)
    q["margin"] = float(vals.min())
    q["zero_in_subdiff"] = [fenchel_moreau_subdiff(g).contains(np.zeros(fn.dim), 1e-9) for g in members]
    q["members_checked"] = len(q["zero_in_subdiff"])
    if vals.min() >= -tol:
        return OptimalityReport(Verdict.PASS, None, q)
    return OptimalityReport(Verdict.FAIL, lower.directions()[k].tolist(), q)


def sufficient_optimality(fn, x, gamma: float, M: int = DEFAULT_M, schedule: TSchedule = None,
                          norm=NormTag.L2, tol: float = PH_TOL) -> OptimalityReport:
    """Sufficient condition for a strict local minimum.

    Tests ``f'(x | d) >= gamma |d|`` at every profile direction, which is the
    direction-wise form of "``gamma B*`` lies in the subdifferential of every
    member of the DR superdifferential". Requires the lower and upper
    quotients to agree within ``1e-3`` in every direction (a uniform
    convergence spot check); otherwise the verdict is NOT_APPLICABLE.
    """
    if not gamma > 0:
        raise InputError("gamma must be positive")
    fn = get_corpus(fn)
    norm = NormTag.parse(norm)
    schedule = _schedule(fn, schedule)
    q = {"config": _config(fn, x, M, schedule, gamma=float(gamma), norm=norm.value, tol=tol),
         "formulation": "f'(x|d) >= gamma*|d| at every profile direction"}
    try:
        lower, upper = directional_profiles(fn, x, M, schedule)
    except ProfileAssumptionError as exc:
        q["reason"] = str(exc)
        return OptimalityReport(Verdict.NOT_APPLICABLE, None, q)
    spread = float(np.max(upper.as_array() - lower.as_array()))
    q["quotient_spread"] = spread
    if spread > UNIFORM_TOL:
        q["reason"] = "difference quotients do not converge uniformly within 1e-3"
        return OptimalityReport(Verdict.NOT_APPLICABLE, None, q)
    deriv = 0.5 * (lower.as_array() + upper.as_array())
    dirs = lower.directions()
    slack = deriv - gamma * norm_of(dirs, norm)
    q["margin"] = float(slack.min())
    if slack.min() >= -tol:
        return OptimalityReport(Verdict.PASS, None, q)
    return OptimalityReport(Verdict.FAIL, dirs[_first_argmin(slack, tol)].tolist(), q)


# --- calculus rules ---------------------------------------------------------


def _seed_bound(profile) -> float:
    return max(1.0, float(np.max(np.abs(profile.as_array()))))


def default_super_member(fn, x, M: int = DEFAULT_M, schedule: TSchedule = None) -> SublinearForm:
    """A member of the lower DR superdifferential, extracted from ``B |d|_1``."""
    fn = get_corpus(fn)
    schedule = _schedule(fn, schedule)
    lower, _ = directional_profiles(fn, x, M, schedule)
    B = _seed_bound(lower)
    seed = SublinearForm(_box_generators(B, fn.dim))
    s, _ = extract_minimal_sublinear_majorant(lower, seed, M)
    return s


def default_sub_member(fn, x, M: int = DEFAULT_M, schedule: TSchedule = None) -> SuperlinearForm:
    """A member of the lower DR subdifferential, extracted from ``-B |d|_1``."""
    fn = get_corpus(fn)
    schedule = _schedule(fn, schedule)
    lower, _ = directional_profiles(fn, x, M, schedule)
    B = _seed_bound(lower)
    seed = SuperlinearForm(_box_generators(B, fn.dim))
    u, _ = extract_maximal_superlinear_minorant(lower, seed, M)
    return u


def _box_generators(B: float, dim: int) -> tuple:
    if dim == 1:
        return ((-B,), (B,))
    return ((B, B), (-B, B), (-B, -B), (B, -B))


def _rule(ok, **info) -> dict:
    verdict = Verdict.NOT_APPLICABLE if ok is None else (Verdict.PASS if ok else Verdict.FAIL)
    return dict(info, verdict=verdict.value)


def _dominates(f1, f2, x, radius: float, m: int = 9) -> bool:
    """``f1 <= f2`` on a lattice around ``x`` with equality at ``x``."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if not math.isclose(f1(xv), f2(xv), rel_tol=0, abs_tol=1e-12):
        return False
    axis = np.linspace(-radius, radius, m)
    mesh = np.meshgrid(*([axis] * f1.dim), indexing="ij")
    for off in np.stack([g.ravel() for g in mesh], axis=1):
        if f1(xv + off) > f2(xv + off) + 1e-12:
            return False
    return True


def calculus_rules_check(f1, f2, x, lam: float, M: int = DEFAULT_M, schedule: TSchedule = None,
                         member=None, sub_member=None, g1=None, g2=None) -> dict:
    """Checks the scaling, sum and domination rules at profile resolution.

    Parameters
    ----------
    f1, f2 : CorpusFn or str
    x : point
    lam : float
        Scaling factor for rule (i), applied to ``f1``.
    member : SublinearForm, optional
        Superdifferential member of ``f1`` used when ``lam > 0``.
    sub_member : SuperlinearForm, optional
        Subdifferential member of ``f1`` used when ``lam < 0``.
    g1, g2 : SublinearForm, optional
        Superdifferential members of ``f1`` and ``f2`` for rules (ii), (iii).

    Missing members are extracted from ``B |d|_1`` seeds.

    Returns
    -------
    dict
        One entry per rule with a ``verdict`` of PASS, FAIL or NOT_APPLICABLE.
    """
    f1, f2 = get_corpus(f1), get_corpus(f2)
    if f1.dim != f2.dim:
        raise InputError("f1 and f2 must have the same dimension")
    if lam == 0:
        raise InputError("lambda must be nonzero")
    schedule = _schedule(f1, schedule)
    report = {"config": _config(f1, x, M, schedule, f2=f2.name, lam=float(lam))}
    try:
        # (i) scaling
        scaled_fn = f1.scaled(lam)
        if lam > 0:
            s = member if member is not None else default_super_member(f1, x, M, schedule)
            image = s.scaled(lam)
        else:
            u = sub_member if sub_member is not None else default_sub_member(f1, x, M, schedule)
            image = u.scaled(lam)
        cert = dr_membership(image, scaled_fn, x, Which.LOWER_SUPER, M, schedule)
        report["scaling"] = _rule(cert.certified, member=image.to_dict(), certificate=cert.to_dict())

        # (ii) sum rule
        g1 = g1 if g1 is not None else default_super_member(f1, x, M, schedule)
        g2 = g2 if g2 is not None else default_super_member(f2, x, M, schedule)
        seed = g1 + g2
        total = f1 + f2
        lower_sum, _ = directional_profiles(total, x, M, schedule)
        if not ph_majorant_minorant_test(seed, lower_sum, Role.MAJORANT, M):
            report["sum"] = _rule(None, reason="g1 + g2 does not majorize the profile of f1 + f2")
        else:
            g, cert = extract_minimal_sublinear_majorant(lower_sum, seed, M)
            below = ph_majorant_minorant_test(g, seed, Role.MINORANT, M)
            report["sum"] = _rule(bool(below) and cert.certified, g=g.to_dict(), certificate=cert.to_dict())

        # (iii) domination: f1 <= f2 near x with equality at x
        radius = 0.5 * min(f1.box_radius(), f2.box_radius()) * 0.1
        if not _dominates(f1, f2, x, radius):
            report["domination"] = _rule(None, reason="f1 <= f2 near x with equality at x does not hold")
        else:
            lower1, _ = directional_profiles(f1, x, M, schedule)
            if not ph_majorant_minorant_test(g2, lower1, Role.MAJORANT, M):
                report["domination"] = _rule(None, reason="g2 does not majorize the profile of f1")
            else:
                h, cert = extract_minimal_sublinear_majorant(lower1, g2, M)
                below = ph_majorant_minorant_test(h, g2, Role.MINORANT, M)
                report["domination"] = _rule(bool(below) and cert.certified, g1=h.to_dict(),
                                             certificate=cert.to_dict())
    except ProfileAssumptionError as exc:
        report["reason"] = str(exc)
        for key in ("scaling", "sum", "domination"):
            report.setdefault(key, _rule(None, reason="profile not bounded"))
    verdicts = {report[k]["verdict"] for k in ("scaling", "sum", "domination")}
    if Verdict.FAIL.value in verdicts:
        report["verdict"] = Verdict.FAIL.value
    elif verdicts == {Verdict.NOT_APPLICABLE.value}:
        report["verdict"] = Verdict.NOT_APPLICABLE.value
    else:
        report["verdict"] = Verdict.PASS.value
    return report
