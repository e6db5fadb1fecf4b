import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline

from nonsmooth import (
    ConvexEnvelope,
    GridFn,
    GridSpec,
    InputError,
    LegendreConjugate,
    MaxMinForm,
    MinimalConvexMajorant,
    MinimalSublinearMajorant,
    PaschHausdorffEnvelope,
    SemicontinuousClosure,
    UnsupportedError,
    directional_profile,
    pasch_hausdorff,
)
from nonsmooth.homogeneous import eval_maxmin, unit_directions

SPIKE = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
ABSDIFF = MaxMinForm([[(1, -1), (-1, -1)], [(1, 1), (-1, 1)]])


class TestParams:
    def test_get_set_clone(self):
        est = PaschHausdorffEnvelope(k=2.0, norm="linf")
        assert est.get_params()["k"] == 2.0
        twin = clone(est).set_params(k=3.0)
        assert twin.k == 3.0 and est.k == 2.0 and twin.norm == "linf"

    @pytest.mark.parametrize("est", [PaschHausdorffEnvelope(), SemicontinuousClosure(), LegendreConjugate(),
                                     ConvexEnvelope(), MinimalConvexMajorant()])
    def test_not_fitted(self, est):
        with pytest.raises(NotFittedError):
            est.transform(SPIKE)

    def test_sublinear_not_fitted(self):
        with pytest.raises(NotFittedError):
            MinimalSublinearMajorant().predict([[1.0, 0.0]])

    @pytest.mark.parametrize("est", [PaschHausdorffEnvelope(k=0), PaschHausdorffEnvelope(k=np.inf),
                                     PaschHausdorffEnvelope(norm="l3"), SemicontinuousClosure(factor=1.0),
                                     MinimalConvexMajorant(tol=-1)])
    def test_invalid_params_raise_on_fit(self, est):
        with pytest.raises((InputError, ValueError)):
            est.fit(SPIKE)


class TestTransforms:
    def test_envelope_on_array(self):
        out = PaschHausdorffEnvelope(k=1.0, spacing=0.5).fit_transform(SPIKE)
        assert isinstance(out, np.ndarray) and out.tolist() == [0, 0.5, 1, 0.5, 0]

    def test_envelope_on_gridfn(self):
        f = GridFn(GridSpec(-1, 0.5, 5), SPIKE)
        out = PaschHausdorffEnvelope(k=1.0).fit(f).transform(f)
        assert isinstance(out, GridFn) and out.values.tolist() == pasch_hausdorff(f, 1.0).values.tolist()

    def test_2d_array_shape(self):
        X = np.arange(12.0).reshape(3, 4) % 5
        out = PaschHausdorffEnvelope(k=2.0, norm="l2").fit_transform(X)
        assert out.shape == (3, 4) and np.all(out >= X)

    def test_l2_fast_unsupported(self):
        with pytest.raises(UnsupportedError):
            PaschHausdorffEnvelope(norm="l2", mode="fast").fit_transform(np.zeros((3, 3)))

    def test_dimension_mismatch(self):
        est = ConvexEnvelope().fit(SPIKE)
        with pytest.raises(InputError):
            est.transform(np.zeros((3, 3)))

    def test_bad_arrays(self):
        for X in (np.zeros((2, 2, 2)), [[1, "a"]], [np.nan, 1.0], [1.0]):
            with pytest.raises(InputError):
                ConvexEnvelope().fit(X)

    def test_closure_and_convex_envelope(self):
        cl = SemicontinuousClosure(k_min=1.0, steps=4, spacing=0.5).fit_transform(SPIKE)
        assert cl.tolist() == SPIKE.tolist()
        assert ConvexEnvelope().fit_transform(SPIKE).tolist() == [0] * 5

    def test_conjugate_attributes(self):
        est = LegendreConjugate(spacing=0.5).fit(SPIKE)
        assert est.range_truncated_ is False and est.transform(SPIKE)[0] >= 0

    def test_pipeline(self):
        pipe = make_pipeline(PaschHausdorffEnvelope(k=4.0, spacing=0.5), ConvexEnvelope(spacing=0.5))
        assert pipe.fit_transform(SPIKE).tolist() == [0] * 5


class TestMajorants:
    def test_minimal_convex_majorant(self):
        est = MinimalConvexMajorant(seed=np.full(5, 2.0), spacing=0.5).fit(SPIKE)
        assert est.certificate_.certified and est.majorant_.values[2] == 1
        assert np.all(est.majorant_.values >= SPIKE)

    def test_default_seed(self):
        out = MinimalConvexMajorant(spacing=0.5).fit_transform(SPIKE)
        assert np.all(out >= SPIKE) and out[2] == 1

    def test_sublinear_from_form(self):
        est = MinimalSublinearMajorant(M=32).fit(ABSDIFF)
        assert est.certificate_.certified
        D = unit_directions(32)
        vals = np.array([eval_maxmin(ABSDIFF, d) for d in D])
        assert np.all(est.predict(D) >= vals - 1e-9)

    def test_sublinear_profile_is_recovered(self):
        prof = directional_profile("abssum", (0.0, 0.0), 64)
        est = MinimalSublinearMajorant(M=64).fit(prof)
        assert est.certificate_.certified
        assert np.allclose(est.predict(unit_directions(64)), prof.as_array(), atol=1e-6)

    def test_coarse_profile_still_gives_a_certified_majorant(self):
        # 16 samples do not pin down the minimal majorant uniquely
        prof = directional_profile("abssum", (0.0, 0.0), 16)
        est = MinimalSublinearMajorant(M=16).fit(prof)
        assert est.certificate_.certified
        assert np.all(est.predict(unit_directions(16)) >= prof.as_array() - 1e-9)
