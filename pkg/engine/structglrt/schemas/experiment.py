"""Pydantic schemas for detectors, sweeps and the records they produce."""

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from structglrt.detectors.validate import VALID_DETECTORS, suggest_detector_name
from structglrt.schemas.detector import DEFAULT_ALPHA_GRID, EmConfig, InitConfig, RankCriterion

Axis = Literal["Q", "snr", "sir", "N", "tau"]
Metric = Literal["pd_at_pfa", "min_error"]

# GIC gains per detector
DEFAULT_GAINS: dict[str, float] = {
    "kmr-tr": 1.1,
    "mcw-tr": 1.25,
    "kmr-em": 10.0,
    "forsythe-lowrank": 10.0,
    "mcw-em": 1.7,
    "hard-mcw-em": 1.7,
}

_DET_MODEL = {"mcw-tr", "mcw-em", "hard-mcw-em"}
_HARD = {"forsythe", "forsythe-lowrank", "hard-mcw-em"}
_FULL_RANK = {"kel-tr", "kel-em", "forsythe"}


# ---------------------------------------------------------------------------
# Detectors
# ---------------------------------------------------------------------------

class DetectorSpec(BaseModel):
    name: str = Field(..., description="Detector name, e.g. kmr-em")
    max_iters: int = Field(50, ge=1)
    rel_tol: float = Field(0.01, gt=0, lt=1)
    fast_eig: bool = False
    rank_refresh: Literal["every_iteration", "first_iteration"] = "every_iteration"
    n_max: Optional[int] = Field(None, ge=0, description="Largest candidate interference rank")
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    init_route: Literal["regularized", "rank"] = "regularized"
    gain: Optional[float] = Field(None, gt=0, description="GIC gain; per-detector default if unset")

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("name")
    @classmethod
    def _known_name(cls, v: str) -> str:
        if v not in VALID_DETECTORS:
            hint = suggest_detector_name(v)
            suffix = f" (did you mean {hint}?)" if hint else ""
            raise ValueError(f"Unknown detector: {v}{suffix}")
        return v

    @property
    def model(self) -> Literal["gauss", "det"]:
        return "det" if self.name in _DET_MODEL else "gauss"

    @property
    def full_rank(self) -> bool:
        return self.name in _FULL_RANK

    def criterion(self) -> RankCriterion:
        gain = self.gain if self.gain is not None else DEFAULT_GAINS.get(self.name, 10.0)
        return RankCriterion(penalty="gic", gain=gain, n_max=self.n_max, model=self.model)

    def em_config(self) -> EmConfig:
        return EmConfig(
            max_iters=self.max_iters,
            rel_tol=self.rel_tol,
            decision_mode="hard" if self.name in _HARD else "soft",
            rank_mode="full" if self.full_rank else "estimate",
            criterion=self.criterion(),
            rank_refresh=self.rank_refresh,
            fast_eig=self.fast_eig,
        )

    def init_config(self) -> InitConfig:
        return InitConfig(alpha_grid=self.alpha_grid, route=self.init_route)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

class SweepSpec(BaseModel):
    axis: Axis = "snr"
    values: tuple[float, ...] = Field(..., min_length=1)
    trials: int = Field(100, ge=2, description="Paired trials per axis value")
    metric: Metric = "pd_at_pfa"
    pfa: float = Field(0.01, gt=0, lt=1, description="False-alarm rate for pd_at_pfa")

    model_config = {"frozen": True, "extra": "forbid"}


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------

class TrialRecord(BaseModel):
    trial_index: int
    point_index: int = 0
    axis_value: Optional[float] = None
    hypothesis: Literal["H0", "H1"]
    detector: str
    log_statistic: Optional[float] = None
    n_hat: Optional[int] = None
    iterations: int = 0
    fallback: Optional[str] = None
    error: Optional[str] = None
    error_message: Optional[str] = None
    interference_power: float
    noise_var: float
    Q: int
    n_interferers: int
    tau_resid: Optional[float] = None
    fo_T: Optional[float] = None

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _statistic_or_error(self) -> "TrialRecord":
        if self.error is None:
            if self.log_statistic is None or not math.isfinite(self.log_statistic):
                raise ValueError("record needs a finite log_statistic or an error tag")
        elif self.log_statistic is not None:
            raise ValueError("failed record must not carry a statistic")
        return self

    @property
    def failed(self) -> bool:
        return self.error is not None


class SummaryRow(BaseModel):
    axis: str
    axis_value: Optional[float] = None
    detector: str
    metric: Metric
    pfa: Optional[float] = None
    threshold: float
    value: float
    mean_n_hat: float
    mean_iterations: float
    errors: int
    trials: int

    model_config = {"frozen": True, "extra": "forbid"}
