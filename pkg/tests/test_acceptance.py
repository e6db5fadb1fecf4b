"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear inline) or
``python3 tests/test_acceptance.py`` for the bare summary.
"""
import math
import time
import warnings

import numpy as np
import pytest

from nonsmooth import (
    EnvelopeMode,
    GridFn,
    GridSpec,
    Interval,
    IntervalUnion,
    KSchedule,
    Kind,
    NormTag,
    SublinearForm,
    SuperlinearForm,
    UnsupportedError,
    Verdict,
    Which,
    certify_minimal_convex_majorant,
    convex_complements_1d,
    convex_components_1d,
    dini_derivative,
    directional_profiles,
    discrete_lipschitz_constant,
    dr_membership,
    extract_minimal_convex_majorant,
    fenchel_moreau_subdiff,
    get_corpus,
    hadamard_subdiff_filter,
    is_convex_majorant,
    necessary_optimality,
    pasch_hausdorff,
    pinned_cone_seed,
    recession_intersection_check,
    sample_to_grid,
    semicontinuous_closure,
    subadditivity_check,
)
from nonsmooth.corpus import corpus_names
from nonsmooth.drcalc import sufficient_optimality

EXACT, FAST = EnvelopeMode.EXACT, EnvelopeMode.FAST
KS = (0.5, 1.0, 2.0, 4.0)
SEED = 20240611


def report(capsys, n, ok, detail=""):
    line = f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    assert ok, line


def random_suite(seed=SEED):
    """50 1D grids (<= 257 points) and 20 2D grids (<= 65 x 65); every other 2D grid is equally spaced."""
    rng = np.random.default_rng(seed)
    one, two = [], []
    for i in range(50):
        n = int(rng.integers(2, 258))
        h = float(rng.choice([0.01, 0.05, 0.1, 0.25]))
        vals = rng.normal(scale=float(rng.choice([0.1, 1.0, 10.0])), size=n)
        if i % 5 == 0:
            vals = np.round(vals, 2)  # ties and flat stretches
        one.append(GridFn(GridSpec(float(rng.uniform(-2, 0)), h, n), vals))
    for i in range(20):
        n1, n2 = int(rng.integers(2, 66)), int(rng.integers(2, 66))
        h1 = float(rng.choice([0.02, 0.05, 0.1]))
        h2 = h1 if i % 2 == 0 else float(rng.choice([0.03, 0.07]))
        vals = rng.normal(scale=float(rng.choice([0.1, 1.0])), size=n1 * n2)
        two.append(GridFn(GridSpec((-1.0, -1.0), (h1, h2), (n1, n2)), vals))
    return one, two


def _grid_axioms(f, norm):
    """The four envelope axioms on one grid; returns a failure description or None."""
    prev = None
    for k in KS:
        fk = pasch_hausdorff(f, k, norm, EXACT)
        if np.any(fk.values < f.values):
            return f"not a majorant at k={k}"
        if prev is not None and np.any(fk.values > prev.values):
            return f"not monotone at k={k}"
        if pasch_hausdorff(fk, k, norm, EXACT).values.tobytes() != fk.values.tobytes():
            return f"not idempotent at k={k}"
        if discrete_lipschitz_constant(fk, norm) > k * (1 + 1e-9):
            return f"Lipschitz constant above k={k}"
        prev = fk
    return None


def test_criterion_1_envelope_axioms(capsys=None):
    one, two = random_suite()
    start = time.perf_counter()
    failures = []
    for f in one:
        for norm in NormTag:
            bad = _grid_axioms(f, norm)
            if bad:
                failures.append(f"1D n={f.spec.size} {norm.value}: {bad}")
    for f in two:
        for norm in NormTag:
            bad = _grid_axioms(f, norm)
            if bad:
                failures.append(f"2D {f.spec.counts} {norm.value}: {bad}")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    report(capsys, 1, ok, f"{len(one)}x1D + {len(two)}x2D, 3 norms, {elapsed:.1f}s"
           + (f"; {failures[:3]}" if failures else ""))


def test_criterion_2_fast_equals_exact(capsys=None):
    one, two = random_suite()
    mismatches, checked = [], 0
    cases = [(f, norm) for f in one for norm in NormTag]
    cases += [(f, NormTag.L1) for f in two]
    cases += [(f, NormTag.LINF) for f in two if f.spec.spacing[0] == f.spec.spacing[1]]
    for f, norm in cases:
        for k in KS:
            a = pasch_hausdorff(f, k, norm, EXACT).values
            b = pasch_hausdorff(f, k, norm, FAST).values
            checked += 1
            if a.tobytes() != b.tobytes():
                mismatches.append((f.spec.counts, norm.value, k))
    unsupported = 0
    for f in two:
        try:
            pasch_hausdorff(f, 1.0, NormTag.L2, FAST)
        except UnsupportedError:
            unsupported += 1
    ok = not mismatches and unsupported == len(two)
    report(capsys, 2, ok, f"{checked} bit-equal comparisons, L2-FAST unsupported on {unsupported}/{len(two)}"
           + (f"; mismatches {mismatches[:3]}" if mismatches else ""))


def test_criterion_3_closure_coherence(capsys=None):
    fn = get_corpus("sqrtabs_xy")
    errors, steps_ok = [], True
    sched = KSchedule(1.0, 2.0, 5)
    k_max = sched.values()[-1]
    bound_ok = True
    for h in (1 / 8, 1 / 16, 1 / 32):
        n = int(round(2 / h)) + 1
        f = sample_to_grid(fn, GridSpec.from_bounds((-1, -1), (1, 1), (n, n)))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            closures = [semicontinuous_closure(f, KSchedule(1.0, 2.0, s)) for s in range(1, 6)]
        for a, b in zip(closures, closures[1:]):
            steps_ok &= bool(np.all(b.values <= a.values))
        err = float(np.max(np.abs(closures[-1].values - f.values)))
        bound_ok &= err <= 2 * h * k_max
        errors.append(err)
    decreasing = all(b <= a for a, b in zip(errors, errors[1:]))
    ok = steps_ok and bound_ok and decreasing
    report(capsys, 3, ok, f"max errors {errors} for h=1/8,1/16,1/32; nonincreasing in steps: {steps_ok}")


def test_criterion_4_minimal_majorants(capsys=None):
    spec = GridSpec(-1, 0.5, 5)
    spike = GridFn(spec, [0, 0, 1, 0, 0])
    x = spec.points()[:, 0]
    delta = 0.1
    certified = all(certify_minimal_convex_majorant(GridFn(spec, g), spike, delta).certified
                    for g in (1 - x, x + 1, np.ones(5)))
    cert2 = certify_minimal_convex_majorant(GridFn(spec, np.full(5, 2.0)), spike, delta)
    falsified = cert2.falsified and cert2.witness is not None
    g, cert = extract_minimal_convex_majorant(spike, GridFn(spec, np.full(5, 2.0)))
    extracted = cert.certified and g.values[2] == 1.0 and bool(is_convex_majorant(g, spike))

    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    all_certified = True
    for _ in range(20):
        n = int(rng.integers(5, 25))
        f = GridFn(GridSpec(-1.0, 2.0 / (n - 1), n), rng.normal(size=n))
        mins = np.full(n, np.inf)
        for node in range(n):
            gk, ck = extract_minimal_convex_majorant(f, pinned_cone_seed(f, node))
            all_certified &= ck.certified
            mins = np.minimum(mins, gk.values)
        worst = max(worst, float(np.max(np.abs(mins - f.values))))
    ok = certified and falsified and extracted and all_certified and worst <= 1e-9
    report(capsys, 4, ok, f"spike examples ok={certified and falsified and extracted}, "
           f"witness node {cert2.witness and cert2.witness['index']}, representation error {worst:.2e}")


def test_criterion_5_envelope_bridge(capsys=None):
    rng = np.random.default_rng(SEED + 5)
    k = 2.0
    results = []
    for _ in range(10):
        n = int(rng.integers(5, 30))
        f = GridFn(GridSpec(-1.0, 2.0 / (n - 1), n), rng.normal(size=n))
        fk = pasch_hausdorff(f, k)
        node = int(rng.integers(n))
        g, cert = extract_minimal_convex_majorant(fk, pinned_cone_seed(fk, node, k))
        delta = cert.params["delta"]
        literal = certify_minimal_convex_majorant(g, f, delta)
        results.append((cert.certified, bool(is_convex_majorant(g, f)), literal.certified,
                        certify_minimal_convex_majorant(g, f, delta, lipschitz=k).certified))
    extracted = all(r[0] for r in results)
    majorant = all(r[1] for r in results)
    literal = sum(r[2] for r in results)
    restricted = sum(r[3] for r in results)
    ok = extracted and majorant and literal == len(results)
    report(capsys, 5, ok, f"certified for f_k: {extracted}, majorant of f: {majorant}, "
           f"dent-certified against f: {literal}/10 (against k-Lipschitz competitors: {restricted}/10)")


def test_criterion_6_absdiff_family(capsys=None):
    origin = (0.0, 0.0)
    start = time.perf_counter()
    inside = (-1.0, -0.5, 0.0, 0.5, 1.0)
    sub_in = all(dr_membership(SuperlinearForm(((a, -1.0), (a, 1.0))), "absdiff", origin, Which.LOWER_SUB).certified
                 for a in inside)
    sup_in = all(dr_membership(SublinearForm(((1.0, -a), (-1.0, -a))), "absdiff", origin, Which.LOWER_SUPER).certified
                 for a in inside)
    sub_out = sup_out = True
    for a in (-1.5, 1.5):
        c = dr_membership(SuperlinearForm(((a, -1.0), (a, 1.0))), "absdiff", origin, Which.LOWER_SUB)
        sub_out &= c.falsified and c.witness["direction"][1] == 0.0
        c = dr_membership(SublinearForm(((1.0, -a), (-1.0, -a))), "absdiff", origin, Which.LOWER_SUPER)
        sup_out &= c.falsified and c.witness["direction"][0] == 0.0
    empty = (hadamard_subdiff_filter("absdiff", origin, Kind.SUB) is None
             and hadamard_subdiff_filter("absdiff", origin, Kind.SUPER) is None)
    elapsed = time.perf_counter() - start
    ok = sub_in and sup_in and sub_out and sup_out and empty and elapsed < 5
    report(capsys, 6, ok, f"u_a in: {sub_in}, out: {sub_out}; s_a in: {sup_in}, out: {sup_out}; "
           f"Hadamard both empty: {empty}; {elapsed:.2f}s")


def _probes(poly, rng, inside: bool, count=10):
    verts = np.array(poly.vertices)
    out = []
    while len(out) < count:
        if inside:
            w = rng.dirichlet(np.ones(len(verts)))
            p = w @ verts
            # stay clear of the relative boundary
            if len(verts) > 1 and min(w) < 1e-3:
                continue
        else:
            p = verts[rng.integers(len(verts))] + rng.normal(scale=0.5, size=verts.shape[1])
            if poly.contains(p, tol=1e-3):
                continue
        out.append(tuple(float(c) for c in p))
    return out


def test_criterion_7_convex_agreement(capsys=None):
    rng = np.random.default_rng(SEED + 7)
    cases = [("maxlin", SublinearForm(((2.0,), (-1.0,)))), ("abs1", SublinearForm(((1.0, 0.0), (-1.0, 0.0))))]
    misclassified, total = [], 0
    for name, s in cases:
        poly = fenchel_moreau_subdiff(s)
        x = (0.0,) * poly.dim
        for v, expect in ([(v, True) for v in poly.vertices] + [(p, True) for p in _probes(poly, rng, True)]
                          + [(p, False) for p in _probes(poly, rng, False)]):
            cert = dr_membership(SuperlinearForm.linear(v), name, x, Which.LOWER_SUB, tol=1e-6)
            total += 1
            if cert.certified != expect:
                misclassified.append((name, v, cert.status.value))
    ok = not misclassified
    report(capsys, 7, ok, f"{total} functionals, {len(misclassified)} misclassified")


def test_criterion_8_optimality(capsys=None):
    origin = (0.0, 0.0)
    nec = necessary_optimality("abssum", origin)
    nec_ok = nec.verdict is Verdict.PASS and abs(nec.quantities["margin"] - 1) <= 1e-9
    bad = necessary_optimality("absdiff", origin)
    bad_ok = bad.verdict is Verdict.FAIL and bad.witness == [0.0, 1.0]
    s09 = sufficient_optimality("abssum", origin, 0.9, norm=NormTag.L2)
    s11 = sufficient_optimality("abssum", origin, 1.1, norm=NormTag.L2)
    suff_ok = s09.verdict is Verdict.PASS and s11.verdict is Verdict.FAIL
    ok = nec_ok and bad_ok and suff_ok
    report(capsys, 8, ok, f"necessary abssum {nec.verdict.value} margin {nec.quantities['margin']:.12g}; "
           f"absdiff {bad.verdict.value} witness {bad.witness}; sufficient 0.9 {s09.verdict.value}, "
           f"1.1 {s11.verdict.value}")


def _random_union(rng):
    pool = [-math.inf, math.inf] + [float(v) for v in range(-6, 7)] + [0.5, 2.5]
    pieces = []
    for _ in range(int(rng.integers(1, 7))):
        a, b = sorted(rng.choice(pool, size=2).tolist())
        if a == b and not math.isfinite(a):
            continue
        pieces.append(Interval(a, b, bool(rng.integers(2)), bool(rng.integers(2))))
    return IntervalUnion(pieces)


def test_criterion_9_recession_suite(capsys=None):
    rng = np.random.default_rng(SEED + 9)
    tested = identity = covering = duality = 0
    while tested < 1000:
        Q = _random_union(rng)
        if Q.empty or Q.complement().empty:
            continue
        tested += 1
        identity += recession_intersection_check(Q)
        covering += IntervalUnion(convex_components_1d(Q)) == Q
        comps = convex_complements_1d(Q)
        inter = IntervalUnion.real_line()
        for C in comps:
            inter = inter & IntervalUnion([C]).complement()
        duality += comps == convex_components_1d(Q.complement()) and inter == Q
    ok = identity == covering == duality == tested
    report(capsys, 9, ok, f"{tested} unions: identity {identity}, covering {covering}, duality {duality}")


def test_criterion_10_derivative_sampling(capsys=None):
    est = dini_derivative("tsinlog", (0.0,), (1.0,))
    osc = -1.05 <= est.lower <= -0.95 and 0.95 <= est.upper <= 1.05
    convex = [n for n in corpus_names() if get_corpus(n).convex and get_corpus(n).dim == 2]
    sub = []
    for name in convex:
        lo, up = directional_profiles(name, (0.0, 0.0))
        sub.append(bool(subadditivity_check(lo)) and bool(subadditivity_check(up)))
    ok = osc and all(sub)
    report(capsys, 10, ok, f"tsinlog lower {est.lower:.4f}, upper {est.upper:.4f}; "
           f"{sum(sub)}/{len(sub)} convex profiles subadditive ({', '.join(convex)})")


if __name__ == "__main__":
    for test in (test_criterion_1_envelope_axioms, test_criterion_2_fast_equals_exact,
                 test_criterion_3_closure_coherence, test_criterion_4_minimal_majorants,
                 test_criterion_5_envelope_bridge, test_criterion_6_absdiff_family,
                 test_criterion_7_convex_agreement, test_criterion_8_optimality,
                 test_criterion_9_recession_suite, test_criterion_10_derivative_sampling):
        try:
            test(None)
        except AssertionError:
            pass
