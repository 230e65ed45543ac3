"""Base detector interface."""

from abc import ABC, abstractmethod

import numpy as np

from structglrt.detectors import DetectorReport


class Detector(ABC):
    """
    Common interface for all detectors run by the harness.
    Each detector maps one frame plus its known training block to a log-statistic.
    """

    @property
    @abstractmethod
    def name(self) -> str:
        ...

    @abstractmethod
    def evaluate(self, Y: np.ndarray, s_train: np.ndarray, alphabet: np.ndarray) -> DetectorReport:
        """Log-GLRT statistic for the M x L frame Y whose first symbols are s_train."""
        ...
