"""Result types shared by all detectors."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class ClosedFormReport:
    """Known-signal GLRT statistic with the spectra it was computed from."""
    log_statistic: float
    lams0: np.ndarray
    lams1: np.ndarray
    nu0: float
    nu1: float
    rank_used: int


@dataclass(frozen=True)
class DetectorReport:
    """Log-domain test statistic plus diagnostics."""
    log_statistic: float
    n_hat: int
    iterations: int
    lams0: np.ndarray
    lams1: np.ndarray
    converged: bool = True
    fallback: Optional[str] = None
    trace: list[float] = field(default_factory=list)

    @classmethod
    def from_closed_form(cls, report: ClosedFormReport, fallback: Optional[str] = None,
                         iterations: int = 0) -> "DetectorReport":
        return cls(
            log_statistic=report.log_statistic,
            n_hat=report.rank_used,
            iterations=iterations,
            lams0=report.lams0,
            lams1=report.lams1,
            fallback=fallback,
        )
