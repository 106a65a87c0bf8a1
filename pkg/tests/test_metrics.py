"""Hand-checked values and edge handling for the error metric suite."""

import numpy as np
import pytest

from qkforecast import metrics
from qkforecast.errors import LengthMismatch, ZeroMeanObservations, ZeroVariance


class TestHandValues:
    """Small vectors whose metrics can be verified by hand."""

    # predictions [2, 2, 4], observations [1, 3, 5]:
    # errors [1, -1, -1], observed mean 3
    PRED = np.array([2.0, 2.0, 4.0])
    OBS = np.array([1.0, 3.0, 5.0])

    def test_nrmse(self):
        # rmse = sqrt(3/3) = 1, so 100 * 1 / 3
        np.testing.assert_allclose(metrics.nrmse(self.PRED, self.OBS),
                                   100.0 / 3.0, atol=1e-12)

    def test_nmbe(self):
        # mean error = -1/3, mean obs = 3
        np.testing.assert_allclose(metrics.nmbe(self.PRED, self.OBS),
                                   100.0 * (-1.0 / 9.0), atol=1e-12)

    def test_mae(self):
        np.testing.assert_allclose(metrics.mae(self.PRED, self.OBS), 1.0,
                                   atol=1e-15)

    def test_ermax(self):
        np.testing.assert_allclose(metrics.ermax_pct(self.PRED, self.OBS),
                                   100.0 / 3.0, atol=1e-12)

    def test_r2_score(self):
        # ss_res = 3, ss_tot = 8
        np.testing.assert_allclose(metrics.r2_score(self.PRED, self.OBS),
                                   1.0 - 3.0 / 8.0, atol=1e-12)

    def test_r2_pearson(self):
        # corr([2,2,4],[1,3,5]) = 0.75 -> squared 0.5625... verify directly
        expected = np.corrcoef(self.PRED, self.OBS)[0, 1] ** 2
        np.testing.assert_allclose(metrics.r2_pearson(self.PRED, self.OBS),
                                   expected, atol=1e-14)

    def test_perfect_prediction(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        assert metrics.nrmse(y, y) == 0.0
        assert metrics.nmbe(y, y) == 0.0
        assert metrics.mae(y, y) == 0.0
        assert metrics.ermax_pct(y, y) == 0.0
        np.testing.assert_allclose(metrics.r2_score(y, y), 1.0, atol=1e-15)
        np.testing.assert_allclose(metrics.r2_pearson(y, y), 1.0, atol=1e-12)


class TestPearsonVsScore:
    def test_bias_separates_the_two(self):
        """A constant offset leaves Pearson at 1 but drags the score down."""
        rng = np.random.default_rng(110)
        y = rng.uniform(1.0, 2.0, size=200)
        pred = y + 0.5
        np.testing.assert_allclose(metrics.r2_pearson(pred, y), 1.0, atol=1e-10)
        assert metrics.r2_score(pred, y) < 0.0 or \
            metrics.r2_score(pred, y) < metrics.r2_pearson(pred, y) - 0.5

    def test_score_unbounded_below(self):
        y = np.array([1.0, 2.0, 3.0])
        pred = np.array([30.0, -10.0, 50.0])
        assert metrics.r2_score(pred, y) < -100


class TestGuards:
    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            metrics.nrmse(np.ones(3), np.ones(4))

    def test_empty(self):
        with pytest.raises(LengthMismatch):
            metrics.mae(np.empty(0), np.empty(0))

    def test_zero_mean_observations(self):
        pred = np.array([0.1, -0.1])
        obs = np.array([1.0, -1.0])
        for fn in (metrics.nrmse, metrics.nmbe, metrics.ermax_pct):
            with pytest.raises(ZeroMeanObservations):
                fn(pred, obs)

    def test_constant_observations(self):
        with pytest.raises(ZeroVariance):
            metrics.r2_score(np.array([1.0, 2.0]), np.array([3.0, 3.0]))
        with pytest.raises(ZeroVariance):
            metrics.r2_pearson(np.array([1.0, 2.0]), np.array([3.0, 3.0]))


class TestReport:
    def test_fields_populated(self):
        rng = np.random.default_rng(111)
        y = rng.uniform(5.0, 10.0, size=50)
        pred = y + rng.normal(0, 0.1, size=50)
        report = metrics.compute_report("ABC", pred, y)
        assert report.station_code == "ABC"
        assert report.n_points == 50
        assert report.ermax_def == metrics.ERMAX_DEF
        np.testing.assert_allclose(report.nrmse_pct, metrics.nrmse(pred, y))
        np.testing.assert_allclose(report.r2_score, metrics.r2_score(pred, y))

    def test_constant_predictions_flagged_not_fatal(self):
        y = np.array([1.0, 2.0, 3.0, 4.0])
        pred = np.full(4, 2.5)
        report = metrics.compute_report("ABC", pred, y)
        assert np.isnan(report.r2_pearson)
        assert "r2_pearson_undefined" in report.flags
        assert np.isfinite(report.r2_score)


class TestFiveNumberSummary:
    def test_known_quartiles(self):
        s = metrics.FiveNumberSummary.of([1.0, 2.0, 3.0, 4.0, 5.0])
        assert s.median == 3.0
        assert s.q1 == 2.0
        assert s.q3 == 4.0
        assert s.min == 1.0
        assert s.max == 5.0
        assert s.count == 5

    def test_interpolated_quartiles(self):
        s = metrics.FiveNumberSummary.of([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_allclose(s.q1, 1.75)
        np.testing.assert_allclose(s.median, 2.5)
        np.testing.assert_allclose(s.q3, 3.25)


class TestAggregateByClass:
    def _report(self, code, r2p=0.9):
        return metrics.MetricsReport(
            station_code=code, n_points=10, nrmse_pct=10.0, nmbe_pct=1.0,
            r2_pearson=r2p, r2_score=0.8, mae=5.0, ermax_pct=30.0)

    def test_grouping(self):
        reports = [self._report("A"), self._report("B"), self._report("C")]
        class_map = {"A": "Cfa", "B": "Cfa", "C": "BWk"}
        agg = metrics.aggregate_by_class(reports, class_map)
        assert set(agg) == {"BWk", "Cfa"}
        assert agg["Cfa"]["nrmse_pct"].count == 2
        assert agg["BWk"]["nrmse_pct"].count == 1

    def test_unmapped_station_goes_to_unknown(self):
        agg = metrics.aggregate_by_class([self._report("X")], {})
        assert set(agg) == {"unknown"}

    def test_nan_excluded_from_summary(self):
        reports = [self._report("A", r2p=float("nan")), self._report("B")]
        agg = metrics.aggregate_by_class(reports, {"A": "Cfa", "B": "Cfa"})
        assert agg["Cfa"]["r2_pearson"].count == 1
        assert agg["Cfa"]["nrmse_pct"].count == 2
