"""Empirical thresholds and the per-point summary table.

The detectors are not CFAR, so thresholds come from the H0 statistics of the
same Monte Carlo point. Conventions:

  pd_at_pfa  eta is the ceil((1 - pfa) n)-th order statistic of the n H0
             statistics; the value is the fraction of H1 statistics above eta.
  min_error  eta minimizes (P_miss + P_fa) / 2 over all observed statistics;
             ties go to the smallest eta.

A failed trial is a decision error: -inf under H1 (a miss) and +inf under H0
(a false alarm).
"""

import math
from collections import defaultdict
from typing import Iterable, Optional, Sequence

import numpy as np

from structglrt.errors import InvalidInput
from structglrt.schemas.experiment import Metric, SummaryRow, TrialRecord

CONVENTIONS = {
    "pd_at_pfa": "eta = ceil((1 - pfa) n)-th order statistic of H0; value = P(stat_H1 > eta)",
    "min_error": "value = min over eta of (P_miss + P_fa) / 2; ties to the smallest eta",
    "failures": "failed H1 trials count as misses, failed H0 trials as false alarms",
}


def calibrate_threshold(
    stats_h0: Sequence[float],
    stats_h1: Sequence[float],
    metric: Metric = "pd_at_pfa",
    pfa: float = 0.01,
) -> tuple[float, float]:
    """Threshold eta and the achieved metric value."""
    h0 = np.sort(np.asarray(stats_h0, dtype=float))
    h1 = np.sort(np.asarray(stats_h1, dtype=float))
    if h0.size == 0 or h1.size == 0:
        raise InvalidInput("calibration needs nonempty H0 and H1 statistics")
    if np.isnan(h0).any() or np.isnan(h1).any():
        raise InvalidInput("statistics must not contain NaN")

    if metric == "pd_at_pfa":
        if not 0 < pfa < 1:
            raise InvalidInput(f"pfa must lie in (0, 1), got {pfa}")
        n = h0.size
        k = min(max(math.ceil((1 - pfa) * n - 1e-9), 1), n)
        eta = float(h0[k - 1])
        return eta, float(np.mean(h1 > eta))
    elif metric == "min_error":
        candidates = np.concatenate([[-np.inf], np.unique(np.concatenate([h0, h1]))])
        false_alarm = 1.0 - np.searchsorted(h0, candidates, side="right") / h0.size
        miss = np.searchsorted(h1, candidates, side="right") / h1.size
        error = 0.5 * (miss + false_alarm)
        best = int(np.argmin(error))
        return float(candidates[best]), float(error[best])
    else:
        raise InvalidInput(f"Unknown metric: {metric}")


def decision_statistics(records: Iterable[TrialRecord]) -> tuple[list[float], list[float]]:
    """(H0, H1) statistics with failures mapped to the erroneous decision."""
    h0: list[float] = []
    h1: list[float] = []
    for record in records:
        if record.hypothesis == "H0":
            h0.append(math.inf if record.failed else record.log_statistic)
        else:
            h1.append(-math.inf if record.failed else record.log_statistic)
    return h0, h1


def summarize(
    records: Iterable[TrialRecord],
    axis: str,
    metric: Metric = "pd_at_pfa",
    pfa: float = 0.01,
    detector_order: Optional[Sequence[str]] = None,
) -> list[SummaryRow]:
    """One row per (point, detector), in point order then detector order."""
    groups: dict[tuple[int, str], list[TrialRecord]] = defaultdict(list)
    axis_values: dict[int, Optional[float]] = {}
    for record in records:
        groups[(record.point_index, record.detector)].append(record)
        axis_values[record.point_index] = record.axis_value

    names = list(detector_order or sorted({d for _, d in groups}))
    rows: list[SummaryRow] = []
    for point in sorted(axis_values):
        for name in names:
            group = groups.get((point, name))
            if not group:
                continue
            h0, h1 = decision_statistics(group)
            if not h0 or not h1:
                continue
            eta, value = calibrate_threshold(h0, h1, metric, pfa)
            successes = [r for r in group if r.hypothesis == "H1" and not r.failed]
            rows.append(
                SummaryRow(
                    axis=axis,
                    axis_value=axis_values[point],
                    detector=name,
                    metric=metric,
                    pfa=pfa if metric == "pd_at_pfa" else None,
                    threshold=eta,
                    value=value,
                    mean_n_hat=_mean([r.n_hat for r in successes if r.n_hat is not None]),
                    mean_iterations=_mean([r.iterations for r in successes]),
                    errors=sum(1 for r in group if r.failed),
                    trials=len(h1),
                )
            )
    return rows


def _mean(values: list) -> float:
    return float(np.mean(values)) if values else math.nan
