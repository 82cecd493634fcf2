import numpy as np
import pytest
from sklearn.base import clone

import zocop
from zocop.estimators import (
    RankCorrelationRidge,
    ZeroOneBinaryRelevance,
    ZeroOneSVC,
    ZeroOneTwinSVC,
)

from conftest import monotone_mrc_data, separable_svm_data


@pytest.fixture(scope="module")
def small_classification():
    data = separable_svm_data(seed=11, n=16, lift=1.5)
    return data.X, data.y


class TestZeroOneSVC:
    def test_fit_predict_separable(self, small_classification):
        X, y = small_classification
        clf = ZeroOneSVC(lam=5.0).fit(X, y)
        assert clf.score(X, y) == 1.0
        assert clf.report_.status is zocop.SolveStatus.P_STATIONARY
        assert int((clf.report_.final.u > 0).sum()) == 0

    def test_label_mapping(self, small_classification):
        X, y = small_classification
        labels = np.where(y > 0, "spam", "ham")
        clf = ZeroOneSVC(lam=5.0, mode="practical", rho=8.0).fit(X, labels)
        assert set(clf.predict(X)) <= {"spam", "ham"}
        assert np.mean(clf.predict(X) == labels) == 1.0

    def test_get_params_clone(self):
        clf = ZeroOneSVC(lam=3.0, mu=2.0)
        cloned = clone(clf)
        assert cloned.get_params()["lam"] == 3.0
        assert cloned.get_params()["mu"] == 2.0

    def test_unfitted_raises(self, small_classification):
        X, _ = small_classification
        from sklearn.exceptions import NotFittedError

        with pytest.raises(NotFittedError):
            ZeroOneSVC().predict(X)

    def test_multiclass_rejected(self, small_classification):
        X, _ = small_classification
        with pytest.raises(zocop.ValidationError):
            ZeroOneSVC().fit(X, np.arange(X.shape[0]) % 3)


class TestZeroOneTwinSVC:
    def test_fit_predict(self, small_classification):
        X, y = small_classification
        clf = ZeroOneTwinSVC(lam1=1.0, lam2=5.0, lam3=1.0, lam4=5.0,
                             mode="practical", rho=10.0).fit(X, y)
        assert clf.score(X, y) == 1.0

    def test_clone(self):
        assert clone(ZeroOneTwinSVC(lam2=7.0)).get_params()["lam2"] == 7.0


class TestZeroOneBinaryRelevance:
    def test_multilabel_fit(self, small_classification):
        X, y = small_classification
        Y = np.column_stack([y, -y])
        clf = ZeroOneBinaryRelevance(lam=5.0, mode="practical", rho=8.0).fit(X, Y)
        assert np.array_equal(clf.predict(X), Y)

    def test_zero_one_label_convention(self, small_classification):
        X, y = small_classification
        Y01 = np.column_stack([(y > 0).astype(int), (y < 0).astype(int)])
        clf = ZeroOneBinaryRelevance(lam=5.0, mode="practical", rho=8.0).fit(X, Y01)
        pred = clf.predict(X)
        assert set(np.unique(pred)) <= {0, 1}
        assert np.array_equal(pred, Y01)

    def test_bad_labels_rejected(self, small_classification):
        X, _ = small_classification
        with pytest.raises(zocop.ValidationError):
            ZeroOneBinaryRelevance().fit(X, np.full((X.shape[0], 2), 3.0))


class TestAutoMode:
    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_plain_tall_data_falls_back_to_practical(self):
        # n > p with no lifting: the margin matrix is rank deficient, so auto
        # mode runs uncertified with rho = 2 lam and still separates
        rng = np.random.default_rng(0)
        n = 60
        d = np.array([1.0, -0.7])
        d /= np.linalg.norm(d)
        y = np.concatenate([np.ones(n // 2), -np.ones(n // 2)])
        X = np.array(
            [yi * rng.uniform(0.6, 1.5) * d + 0.3 * rng.normal(size=2) for yi in y]
        )
        clf = ZeroOneSVC(lam=5.0).fit(X, y)
        assert clf.score(X, y) == 1.0
        assert clf.report_.status is zocop.SolveStatus.P_STATIONARY

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_noisy_regression_terminates_quickly(self):
        # strict monotone fit impossible: the run must end in bounded time
        # with the rank-deficiency flagged, not spin at the noise floor
        import time

        rng = np.random.default_rng(3)
        t = np.linspace(0, 3, 25)
        X = np.column_stack([t, t**2 / 3])
        y = t + 0.05 * rng.standard_normal(25)
        t0 = time.time()
        reg = RankCorrelationRidge(lam1=1.0, lam2=1.0).fit(X, y)
        assert time.time() - t0 < 30.0
        assert reg.report_.status is zocop.SolveStatus.RANK_DEFICIENT
        assert reg.score(X, y) > 0.9


class TestRankCorrelationRidge:
    def test_fit_predict_monotone(self):
        X, y = monotone_mrc_data()
        reg = RankCorrelationRidge(lam1=1.0, lam2=1.0, mode="practical",
                                   rho=10.0).fit(X, y)
        assert reg.score(X, y) > 0.95
        # fitted scores respect the response ordering
        scores = reg.predict(X)
        order = np.argsort(y, kind="stable")
        assert np.all(np.diff(scores[order]) > 0)

    def test_clone(self):
        assert clone(RankCorrelationRidge(xi=1e-2)).get_params()["xi"] == 1e-2
