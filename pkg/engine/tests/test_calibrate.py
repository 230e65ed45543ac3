import math

import pytest

from structglrt.errors import InvalidInput
from structglrt.harness.calibrate import calibrate_threshold, decision_statistics, summarize
from structglrt.schemas.experiment import TrialRecord


def record(trial, hypothesis, detector, stat=None, error=None, point=0, axis_value=None, n_hat=1):
    return TrialRecord(
        trial_index=trial,
        point_index=point,
        axis_value=axis_value,
        hypothesis=hypothesis,
        detector=detector,
        log_statistic=stat,
        n_hat=n_hat if error is None else None,
        iterations=3 if error is None else 0,
        error=error,
        error_message="boom" if error else None,
        interference_power=1.0,
        noise_var=1.0,
        Q=4,
        n_interferers=1,
    )


class TestCalibrateThreshold:
    def test_quantile_convention(self):
        h0 = list(range(1, 101))
        eta, pd = calibrate_threshold(h0, [95.5, 96.5, 50.0, 200.0], "pd_at_pfa", 0.05)
        assert 95 <= eta <= 96
        assert pd == 0.75

    def test_order_independent(self):
        a = calibrate_threshold([3, 1, 2, 5, 4], [2.5, 6], "pd_at_pfa", 0.2)
        b = calibrate_threshold([5, 4, 3, 2, 1], [6, 2.5], "pd_at_pfa", 0.2)
        assert a == b == (4.0, 0.5)

    def test_separated_statistics(self):
        eta, error = calibrate_threshold([0.0, 1.0, 2.0], [5.0, 6.0], "min_error")
        assert error == 0.0
        assert eta == 2.0

    def test_identical_distributions(self):
        stats = [float(x) for x in range(50)]
        _, error = calibrate_threshold(stats, stats, "min_error")
        assert error == pytest.approx(0.5)

    def test_partial_overlap(self):
        eta, error = calibrate_threshold([0, 1, 2, 3], [2.5, 3.5, 4, 5], "min_error")
        assert eta == 2.0
        assert error == pytest.approx(0.125)

    @pytest.mark.parametrize("h0,h1", [([], [1.0]), ([1.0], []), ([math.nan], [1.0])])
    def test_invalid_statistics(self, h0, h1):
        with pytest.raises(InvalidInput):
            calibrate_threshold(h0, h1, "min_error")

    @pytest.mark.parametrize("pfa", [0.0, 1.0, -0.1])
    def test_pfa_range(self, pfa):
        with pytest.raises(InvalidInput):
            calibrate_threshold([1.0, 2.0], [3.0], "pd_at_pfa", pfa)

    def test_infinite_statistics_are_allowed(self):
        eta, pd = calibrate_threshold([1.0, math.inf], [-math.inf, 5.0], "pd_at_pfa", 0.5)
        assert eta == 1.0
        assert pd == 0.5


class TestDecisionStatistics:
    def test_failures_become_errors(self):
        records = [
            record(0, "H1", "kmr-tr", 2.0),
            record(0, "H0", "kmr-tr", 1.0),
            record(1, "H1", "kmr-tr", error="KellyUndefined"),
            record(1, "H0", "kmr-tr", error="KellyUndefined"),
        ]
        h0, h1 = decision_statistics(records)
        assert h0 == [1.0, math.inf]
        assert h1 == [2.0, -math.inf]


class TestSummarize:
    def test_rows_per_point_and_detector(self):
        records = []
        for point, value in enumerate((4.0, 16.0)):
            for t in range(4):
                for det, offset in (("kmr-tr", 0.0), ("kmr-em", 10.0)):
                    records.append(record(t, "H1", det, offset + 5 + t, point=point,
                                          axis_value=value))
                    records.append(record(t, "H0", det, float(t), point=point, axis_value=value))
        rows = summarize(records, "snr", "min_error", detector_order=["kmr-em", "kmr-tr"])
        assert [(r.axis_value, r.detector) for r in rows] == [
            (4.0, "kmr-em"), (4.0, "kmr-tr"), (16.0, "kmr-em"), (16.0, "kmr-tr"),
        ]
        assert all(r.value == 0.0 for r in rows)
        assert all(r.pfa is None for r in rows)
        assert rows[0].mean_n_hat == 1.0
        assert rows[0].mean_iterations == 3.0
        assert rows[0].trials == 4

    def test_counts_errors(self):
        records = [
            record(0, "H1", "kel-tr", error="KellyUndefined"),
            record(0, "H0", "kel-tr", error="KellyUndefined"),
            record(1, "H1", "kel-tr", error="KellyUndefined"),
            record(1, "H0", "kel-tr", error="KellyUndefined"),
        ]
        (row,) = summarize(records, "point", "pd_at_pfa", 0.01)
        assert row.errors == 4
        assert row.value == 0.0
        assert math.isnan(row.mean_n_hat)

    def test_empty(self):
        assert summarize([], "snr") == []
