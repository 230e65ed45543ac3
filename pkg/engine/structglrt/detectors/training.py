"""Training-only baselines: known-signal statistics on the first Q snapshots."""

import logging
from typing import Literal

import numpy as np

from structglrt.detectors import DetectorReport
from structglrt.detectors.base import Detector
from structglrt.detectors.closedform import (
    kelly_statistic,
    kmr_statistic,
    mcwhorter_statistic,
    sample_spectra,
)
from structglrt.rank import estimate_rank
from structglrt.schemas.detector import RankCriterion

logger = logging.getLogger(__name__)


class TrainingOnlyDetector(Detector):
    """Kelly, KMR or McWhorter applied to (Y_t, s_t), rank estimated on the training spectrum."""

    def __init__(
        self,
        name: str,
        statistic: Literal["kelly", "kmr", "mcwhorter"],
        criterion: RankCriterion,
    ):
        self._name = name
        self.statistic = statistic
        self.criterion = criterion

    @property
    def name(self) -> str:
        return self._name

    def evaluate(self, Y, s_train, alphabet) -> DetectorReport:
        s_train = np.asarray(s_train, dtype=complex).ravel()
        Q = s_train.shape[0]
        Y_train = np.asarray(Y, dtype=complex)[:, :Q]
        M = Y_train.shape[0]

        if self.statistic == "kelly":
            return DetectorReport.from_closed_form(kelly_statistic(Y_train, s_train))

        _, lams1 = sample_spectra(Y_train, s_train)
        N, _ = estimate_rank(lams1, self.criterion.model, self.criterion, M, Q)
        logger.debug("%s: N_hat=%d from %d training snapshots", self._name, N, Q)
        if self.statistic == "kmr":
            report = kmr_statistic(Y_train, s_train, N)
        else:
            report = mcwhorter_statistic(Y_train, s_train, N)
        return DetectorReport.from_closed_form(report)
