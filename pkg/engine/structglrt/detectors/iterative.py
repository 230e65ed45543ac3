"""EM detectors that use the whole frame."""

import logging
from typing import Literal

import numpy as np

from structglrt.detectors import DetectorReport
from structglrt.detectors.base import Detector
from structglrt.detectors.em_det import glrt_det
from structglrt.detectors.em_gauss import glrt_gauss
from structglrt.detectors.init import initialize
from structglrt.priors import training_data_prior
from structglrt.schemas.detector import EmConfig, InitConfig

logger = logging.getLogger(__name__)

# Leave-one-out initialization needs at least this many training symbols
MIN_INIT_TRAINING = 3


class EmDetector(Detector):
    def __init__(
        self,
        name: str,
        model: Literal["gauss", "det"],
        config: EmConfig,
        init_config: InitConfig,
    ):
        self._name = name
        self.model = model
        self.config = config
        self.init_config = init_config

    @property
    def name(self) -> str:
        return self._name

    def evaluate(self, Y, s_train, alphabet) -> DetectorReport:
        Y = np.asarray(Y, dtype=complex)
        s_train = np.asarray(s_train, dtype=complex).ravel()
        prior = training_data_prior(s_train, alphabet, Y.shape[1])

        init = None
        if s_train.shape[0] >= MIN_INIT_TRAINING:
            init = initialize(
                Y,
                s_train,
                prior,
                grid=self.init_config.alpha_grid,
                route=self.init_config.route,
                rank_gain=self.init_config.rank_gain,
            )

        if self.model == "gauss":
            report = glrt_gauss(Y, prior, self.config, init)
        else:
            report = glrt_det(Y, prior, self.config, init)
        if not report.converged:
            logger.debug("%s: stopped at max_iters=%d", self._name, self.config.max_iters)
        return report
