import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonsmooth import (
    ContractError,
    InputError,
    MaxMinForm,
    MinMaxForm,
    RayProfile,
    Role,
    SublinearForm,
    SuperlinearForm,
    certify_maximal_superlinear_minorant,
    certify_minimal_sublinear_majorant,
    extract_maximal_superlinear_minorant,
    extract_minimal_sublinear_majorant,
    greatest_sublinear_minorant,
    ph_majorant_minorant_test,
    subadditivity_check,
    unit_directions,
)
from nonsmooth.homogeneous import eval_maxmin

ABSDIFF = MaxMinForm([[(1, -1), (-1, -1)], [(1, 1), (-1, 1)]])
ABSSUM = SublinearForm(((1, 1), (-1, 1), (-1, -1), (1, -1)))
ABS1 = SublinearForm(((1, 0), (-1, 0)))
MAX2 = SublinearForm(((1, 0), (0, 1)))
MIN2 = MaxMinForm([[(1, 0)], [(0, 1)]])

coef = st.floats(-5, 5, allow_nan=False).map(lambda v: round(v, 2))
vec = st.tuples(coef, coef)


def same_points(a, b, tol=1e-9):
    a, b = sorted(map(tuple, a)), sorted(map(tuple, b))
    return len(a) == len(b) and all(np.allclose(p, q, atol=tol) for p, q in zip(a, b))


class TestForms:
    def test_eval_examples(self):
        assert eval_maxmin(ABSDIFF, (1, 0)) == 1
        assert eval_maxmin(ABSDIFF, (0, 1)) == -1
        assert eval_maxmin(ABSDIFF, (0, 0)) == 0

    @given(st.lists(st.lists(vec, min_size=1, max_size=3), min_size=1, max_size=3), vec,
           st.sampled_from([2.0, 10.0]))
    def test_homogeneity(self, rows, x, lam):
        p = MaxMinForm(rows)
        lhs, rhs = eval_maxmin(p, (lam * x[0], lam * x[1])), lam * eval_maxmin(p, x)
        if lam == 2.0:
            assert lhs == rhs  # scaling by 2 is exact in binary
        else:
            assert lhs == pytest.approx(rhs, rel=1e-14, abs=1e-12)

    def test_closed_form(self):
        d = unit_directions(40)
        assert np.allclose(ABSDIFF.values(d), np.abs(d[:, 0]) - np.abs(d[:, 1]))
        assert np.allclose(ABSSUM.values(d), np.abs(d).sum(1))

    def test_negation_round_trip(self):
        neg = ABSDIFF.negated()
        assert isinstance(neg, MinMaxForm)
        d = unit_directions(16)
        assert np.array_equal(neg.values(d), -ABSDIFF.values(d))
        assert isinstance(ABSSUM.negated(), SuperlinearForm)

    @pytest.mark.parametrize("rows", [[], [[]], [[(1, 0)], [(1, 0, 0)]], [[(math.inf, 0)]]])
    def test_bad_rows(self, rows):
        with pytest.raises(InputError):
            MaxMinForm(rows)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            eval_maxmin(ABSDIFF, (1.0,))


class TestProfiles:
    @pytest.mark.parametrize("M", [0, 6, 10, 7.5])
    def test_bad_direction_count(self, M):
        with pytest.raises(InputError):
            RayProfile(M, [0.0] * int(M))

    def test_axes_are_directions(self):
        d = unit_directions(8)
        for axis in ([1, 0], [0, 1], [-1, 0], [0, -1]):
            assert any(np.array_equal(row, axis) for row in d)

    def test_subadditivity_examples(self):
        assert subadditivity_check(RayProfile.sample(ABSSUM, 8))
        chk = subadditivity_check(RayProfile.sample(ABSDIFF, 8))
        assert not chk
        assert same_points(chk.witness, [(1 / math.sqrt(2), 1 / math.sqrt(2)), (1 / math.sqrt(2), -1 / math.sqrt(2))])
        assert subadditivity_check(RayProfile.sample(SublinearForm.linear((2.0, -3.0)), 360))

    def test_1d_subadditivity(self):
        assert subadditivity_check(RayProfile(2, (1.0, -1.0), dim=1))
        assert not subadditivity_check(RayProfile(2, (1.0, -1.5), dim=1))

    @settings(max_examples=25)
    @given(st.lists(vec, min_size=1, max_size=6), st.sampled_from([8, 16, 72]))
    def test_sublinear_profiles_are_subadditive(self, gens, M):
        assert subadditivity_check(RayProfile.sample(SublinearForm(tuple(gens)), M))


class TestGreatestSublinearMinorant:
    def test_examples(self):
        s = greatest_sublinear_minorant(RayProfile.sample(ABS1, 8))
        assert same_points(s.reduced().generators, [(-1, 0), (1, 0)])
        assert greatest_sublinear_minorant(RayProfile.sample(ABSDIFF, 8)) is None
        s = greatest_sublinear_minorant(RayProfile.sample(MAX2, 8))
        assert same_points(s.reduced().generators, [(1, 0), (0, 1)]) and s.degenerate

    @settings(max_examples=30)
    @given(st.lists(vec, min_size=1, max_size=6), st.sampled_from([8, 16, 36, 360]))
    def test_round_trip(self, gens, M):
        s = SublinearForm(tuple(gens))
        v = RayProfile.sample(s, M)
        back = greatest_sublinear_minorant(v)
        d = unit_directions(M)
        assert np.allclose(back.values(d), s.values(d), atol=1e-9 * max(1, np.abs(gens).max()))

    @settings(max_examples=30)
    @given(st.lists(st.floats(-3, 3), min_size=8, max_size=8))
    def test_result_is_below_profile(self, vals):
        v = RayProfile(8, vals)
        s = greatest_sublinear_minorant(v)
        if s is not None:
            assert np.all(s.values(v.directions()) <= v.as_array() + 1e-9)

    def test_1d(self):
        s = greatest_sublinear_minorant(RayProfile(2, (2.0, 1.0), dim=1))
        assert s.values([[1.0], [-1.0]]).tolist() == [2.0, 1.0]
        assert greatest_sublinear_minorant(RayProfile(2, (1.0, -2.0), dim=1)) is None


class TestMajorantTest:
    @pytest.mark.parametrize("alpha, ok", [(0.5, True), (1.0, True), (-1.0, True), (2.0, False)])
    def test_superlinear_minorants(self, alpha, ok):
        u = SuperlinearForm(((alpha, -1), (alpha, 1)))
        chk = ph_majorant_minorant_test(u, ABSDIFF, Role.MINORANT)
        assert bool(chk) is ok
        if not ok:
            assert chk.witness == [1.0, 0.0]

    @pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0])
    def test_sublinear_majorants(self, alpha):
        s = SublinearForm(((1, -alpha), (-1, -alpha)))
        assert ph_majorant_minorant_test(s, ABSDIFF, "majorant")

    def test_breakpoints_make_the_test_exact(self):
        # a kink between sampled directions is still seen
        p = SublinearForm(((1, 0.01), (1, -0.01)))
        lin = SublinearForm.linear((1, 0))
        assert not ph_majorant_minorant_test(lin, p, Role.MAJORANT, M=4)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            ph_majorant_minorant_test(SublinearForm(((1,),)), ABSDIFF)

    @settings(max_examples=30)
    @given(st.lists(vec, min_size=1, max_size=4),
           st.lists(st.lists(vec, min_size=1, max_size=3), min_size=1, max_size=3))
    def test_superlinear_symmetry(self, gens, rows):
        u = SuperlinearForm(tuple(gens))
        p = MaxMinForm(rows)
        a = ph_majorant_minorant_test(u, p, Role.MINORANT, M=36)
        b = ph_majorant_minorant_test(u.negated(), p.negated(), Role.MAJORANT, M=36)
        assert bool(a) == bool(b)


class TestExtraction:
    def test_sublinear_p_unchanged(self):
        r, cert = extract_minimal_sublinear_majorant(MAX2, MAX2)
        assert same_points(r.generators, MAX2.generators, 0) and cert.certified

    def test_absdiff_from_abssum(self):
        r, cert = extract_minimal_sublinear_majorant(ABSDIFF, ABSSUM)
        assert cert.certified
        assert r.value((0, 1)) + r.value((0, -1)) <= 1e-6
        alpha = 0.5 * (r.value((0, -1)) - r.value((0, 1)))
        assert -1 - 1e-6 <= alpha <= 1 + 1e-6
        d = unit_directions(360)
        assert np.allclose(r.values(d), np.abs(d[:, 0]) - alpha * d[:, 1], atol=1e-6)
        assert np.all(r.values(d) <= ABSSUM.values(d) + 1e-12)

    def test_min_from_max_is_linear(self):
        r, cert = extract_minimal_sublinear_majorant(MIN2, MAX2)
        assert cert.certified
        d = unit_directions(360)
        assert np.max(r.values(d) + r.values(-d)) <= 1e-6
        lam = r.value((1, 0))
        assert -1e-6 <= lam <= 1 + 1e-6
        assert np.allclose(r.values(d), lam * d[:, 0] + (1 - lam) * d[:, 1], atol=1e-6)

    def test_certify_examples(self):
        s_half = SublinearForm(((1, -0.5), (-1, -0.5)))
        assert certify_minimal_sublinear_majorant(s_half, ABSDIFF).certified
        cert = certify_minimal_sublinear_majorant(ABSSUM, ABSDIFF, delta=1e-3)
        assert cert.falsified and cert.witness["delta"] == 1e-3
        assert len(cert.witness["direction"]) == 2

    def test_contract_error(self):
        with pytest.raises(ContractError):
            extract_minimal_sublinear_majorant(ABSSUM, ABS1)
        with pytest.raises(ContractError):
            certify_minimal_sublinear_majorant(ABS1, ABSSUM)

    def test_superlinear_extraction(self):
        u, cert = extract_maximal_superlinear_minorant(ABSDIFF, SuperlinearForm(((0, -2), (0, 2), (-2, 0))))
        assert cert.certified and ph_majorant_minorant_test(u, ABSDIFF, Role.MINORANT)
        # maximal superlinear minorants of |d1| - |d2| include the tilted pairs
        # min(a d1 - d2, b d1 + d2) with |a|, |b| <= 1, not only a d1 - |d2|
        g = np.array(u.generators)
        a, b = g[g[:, 1].argmin(), 0], g[g[:, 1].argmax(), 0]
        d = unit_directions(360)
        assert max(abs(a), abs(b)) <= 1 + 1e-6
        assert np.allclose(u.values(d), np.minimum(a * d[:, 0] - d[:, 1], b * d[:, 0] + d[:, 1]), atol=1e-6)
        assert certify_maximal_superlinear_minorant(u, ABSDIFF, delta=1e-6).certified

    def test_tilted_pair_is_maximal(self):
        u = SuperlinearForm(((0.5, -1), (-0.25, 1)))
        assert ph_majorant_minorant_test(u, ABSDIFF, Role.MINORANT)
        assert certify_maximal_superlinear_minorant(u, ABSDIFF, delta=1e-4).certified

    def test_bisector_dent_falsifies_thin_polygon(self):
        # the middle vertex has no profile direction in its normal cone at M=8
        s = SublinearForm(((0, 1), (0.26, 0), (0.5, -1)))
        cert = certify_minimal_sublinear_majorant(s, ABSDIFF.negated(), M=8, delta=1e-3)
        assert cert.falsified and cert.witness["index"] is None

    def test_profile_target(self):
        v = RayProfile.sample(ABSDIFF, 72)
        r, cert = extract_minimal_sublinear_majorant(v, ABSSUM, M=72)
        assert cert.certified and ph_majorant_minorant_test(r, v)

    def test_1d(self):
        p = MaxMinForm([[(1.0,)], [(-2.0,)]])  # min(d, -2d): p(1) = -2, p(-1) = -1
        r, cert = extract_minimal_sublinear_majorant(p, SublinearForm(((-3.0,), (3.0,))))
        assert cert.certified
        assert r.value((1.0,)) + r.value((-1.0,)) == pytest.approx(0, abs=1e-6)
        assert r.value((1.0,)) >= -2 - 1e-9 and r.value((-1.0,)) >= -1 - 1e-9

    @settings(max_examples=10)
    @given(st.lists(st.lists(vec, min_size=1, max_size=2), min_size=1, max_size=2))
    def test_random_extraction_is_a_certified_majorant_below_seed(self, rows):
        p = MaxMinForm(rows)
        B = max(1.0, max(abs(c) for row in rows for a in row for c in a)) * 2
        seed = SublinearForm(((B, B), (-B, B), (-B, -B), (B, -B)))
        r, cert = extract_minimal_sublinear_majorant(p, seed, M=16)
        assert cert.certified
        assert ph_majorant_minorant_test(r, p, M=16)
        d = unit_directions(64)
        assert np.all(r.values(d) <= seed.values(d) + 1e-9)


class TestLowerEnvelope:
    def test_finite_family(self):
        d = unit_directions(360)
        fam = np.array([np.abs(d[:, 0]) - a * d[:, 1] for a in (-1, -0.5, 0, 0.5, 1)])
        assert np.allclose(fam.min(0), ABSDIFF.values(d), atol=1e-6)

    def test_dense_sweep_gap_is_nonincreasing(self):
        d = unit_directions(360)
        p = ABSDIFF.values(d)
        gaps = []
        for step in (0.5, 0.1, 0.05, 0.01):
            alphas = np.arange(-1, 1 + step / 2, step)
            fam = np.abs(d[:, 0])[None] - alphas[:, None] * d[:, 1][None]
            gaps.append(float(np.max(fam.min(0) - p)))
        assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:])) and gaps[-1] <= 1e-9
