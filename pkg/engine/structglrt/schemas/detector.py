"""Pydantic schemas for detector configuration."""

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

DEFAULT_ALPHA_GRID = (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0)


class RankCriterion(BaseModel):
    penalty: Literal["aic", "aicc", "bic", "gic"] = Field("gic", description="Order-selection rule")
    gain: float = Field(10.0, gt=0, description="GIC gain G (ignored by AIC, AICc, BIC)")
    n_max: Optional[int] = Field(
        None, ge=0, description="Largest candidate rank; default min(M,L)-1 capped at M//2"
    )
    model: Literal["gauss", "det"] = Field("gauss", description="Interference model")

    model_config = {"frozen": True, "extra": "forbid"}


class EmConfig(BaseModel):
    max_iters: int = Field(50, ge=1, description="EM iteration cap")
    rel_tol: float = Field(0.01, gt=0, lt=1, description="Stop when ||ds||/||s|| falls below this")
    decision_mode: Literal["soft", "hard"] = "soft"
    rank_mode: Literal["fixed", "full", "estimate"] = Field(
        "estimate", description="fixed: use fixed_rank; full: N=M; estimate: information criterion"
    )
    fixed_rank: int = Field(0, ge=0)
    criterion: RankCriterion = RankCriterion()
    rank_refresh: Literal["every_iteration", "first_iteration"] = "every_iteration"
    fast_eig: bool = Field(False, description="Secular-equation eigenupdate instead of dense eigh")

    model_config = {"frozen": True, "extra": "forbid"}


class InitConfig(BaseModel):
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    route: Literal["regularized", "rank"] = "regularized"
    rank_gain: float = Field(1.1, gt=0, description="GIC gain for the rank-N training route")

    model_config = {"frozen": True, "extra": "forbid"}

    @model_validator(mode="after")
    def _check_grid(self) -> "InitConfig":
        if not self.alpha_grid:
            raise ValueError("alpha_grid must be nonempty")
        if any(not 0 < a <= 1 for a in self.alpha_grid):
            raise ValueError("alpha_grid values must lie in (0, 1]")
        return self
