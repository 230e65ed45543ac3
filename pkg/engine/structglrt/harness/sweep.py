"""Parameter sweeps: one Monte Carlo point per axis value."""

import asyncio
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

from pydantic import ValidationError

from structglrt.errors import ConfigError
from structglrt.harness.calibrate import summarize
from structglrt.harness.runner import run_point_async
from structglrt.schemas.experiment import DetectorSpec, SummaryRow, SweepSpec, TrialRecord
from structglrt.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


@dataclass
class SweepResult:
    sweep: SweepSpec
    records: list[TrialRecord] = field(default_factory=list)
    rows: list[SummaryRow] = field(default_factory=list)
    # seconds per (axis value, detector)
    timings: list[tuple[float, str, float]] = field(default_factory=list)


def apply_axis(base: ScenarioConfig, axis: str, value: float) -> ScenarioConfig:
    """Scenario at one axis value.

    Q       Q = value and nu = interference power = value
    snr     nu = interference power = value
    sir     interference power = value at the base nu
    N       n_interferers = value, interference power = value * nu
    tau     residual timing offset fixed at value
    """
    if axis == "Q":
        update = {"Q": int(value), "noise_var": value, "interference_power": value}
    elif axis == "snr":
        update = {"noise_var": value, "interference_power": value}
    elif axis == "sir":
        update = {"interference_power": value}
    elif axis == "N":
        update = {"n_interferers": int(value), "interference_power": value * base.noise_var}
    elif axis == "tau":
        update = {"tau_fixed": value}
    else:
        raise ConfigError(f"Unknown sweep axis: {axis}")
    try:
        return ScenarioConfig(**{**base.model_dump(), **update})
    except ValidationError as e:
        raise ConfigError(f"{axis}={value} is invalid for the base scenario: {e}") from e


async def run_sweep_async(
    sweep: SweepSpec,
    base: ScenarioConfig,
    specs: Sequence[DetectorSpec],
    threads: int = 1,
    trials: Optional[int] = None,
) -> SweepResult:
    trials = sweep.trials if trials is None else trials
    points = [apply_axis(base, sweep.axis, value) for value in sweep.values]
    result = SweepResult(sweep=sweep)

    for point_index, (value, config) in enumerate(zip(sweep.values, points)):
        logger.info("sweep %s: point %d/%d (%s=%g)",
                    sweep.axis, point_index + 1, len(points), sweep.axis, value)
        timings: dict[str, float] = {}
        records = await run_point_async(
            config, specs, trials, threads, point_index, float(value), timings
        )
        result.records.extend(records)
        for spec in specs:
            result.timings.append((float(value), spec.name, timings.get(spec.name, 0.0)))

    result.rows = summarize(
        result.records, sweep.axis, sweep.metric, sweep.pfa, [s.name for s in specs]
    )
    return result


def run_sweep(
    sweep: SweepSpec,
    base: ScenarioConfig,
    specs: Sequence[DetectorSpec],
    threads: int = 1,
    trials: Optional[int] = None,
) -> SweepResult:
    """Run every axis value and summarize each (value, detector) pair."""
    return asyncio.run(run_sweep_async(sweep, base, specs, threads, trials))
