"""Pydantic schema for the synthetic scenario."""

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from structglrt.priors import CONSTELLATIONS

InterferenceKind = Literal["gauss", "qpsk_unsync", "sinusoid", "spike"]


class ScenarioConfig(BaseModel):
    M: int = Field(64, ge=1, description="Array elements; a perfect square (UPA grid)")
    L: int = Field(1024, ge=2, description="Symbols per frame")
    Q: int = Field(32, ge=1, description="Leading training symbols")
    n_interferers: int = Field(5, ge=0, description="True interference rank N")
    noise_var: float = Field(32.0, ge=0, description="White noise variance nu")
    interference_power: float = Field(32.0, ge=0, description="Total interference power")
    alphabet: str = Field("qpsk", description="Constellation name for the symbols")
    interference_kind: InterferenceKind = "gauss"
    oversample: int = Field(2, ge=1, description="Delay-hypothesis grid factor P")
    rolloff: float = Field(0.35, ge=0, le=1, description="Raised-cosine roll-off")
    fo_T_min: float = -1e-4
    fo_T_max: float = 1e-4
    tau_fixed: Optional[float] = Field(
        None, description="Residual timing offset; drawn per trial when unset"
    )
    seed: int = Field(0, ge=0)

    model_config = {"frozen": True, "extra": "forbid"}

    @field_validator("M")
    @classmethod
    def _square_array(cls, v: int) -> int:
        if math.isqrt(v) ** 2 != v:
            raise ValueError(f"M={v} is not a perfect square")
        return v

    @field_validator("alphabet")
    @classmethod
    def _known_alphabet(cls, v: str) -> str:
        if v not in CONSTELLATIONS:
            raise ValueError(f"unknown alphabet {v!r}; expected one of {sorted(CONSTELLATIONS)}")
        return v

    @model_validator(mode="after")
    def _check_sizes(self) -> "ScenarioConfig":
        if self.Q > self.L:
            raise ValueError(f"Q={self.Q} exceeds L={self.L}")
        if self.n_interferers >= min(self.M, self.L):
            raise ValueError(f"n_interferers={self.n_interferers} must be < min(M, L)")
        if self.fo_T_min > self.fo_T_max:
            raise ValueError("fo_T_min exceeds fo_T_max")
        return self

    @property
    def tau_range(self) -> tuple[float, float]:
        half = 0.5 / self.oversample
        return -half, half
