"""Monte Carlo trial runner.

Each trial index yields a paired (H1, H0) frame sharing every random draw;
every detector is evaluated on both. Trials fan out over a thread pool (numpy
and LAPACK release the GIL) and the records are merged in trial-index order,
so the output does not depend on the pool size.
"""

import asyncio
import logging
import math
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from structglrt.detectors.base import Detector
from structglrt.detectors.resolver import build_detector
from structglrt.errors import DetectionError, InvalidInput, NonFiniteStatistic
from structglrt.priors import constellation
from structglrt.scenario import Scenario, synthesize
from structglrt.schemas.experiment import DetectorSpec, TrialRecord
from structglrt.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

HYPOTHESES = ("H1", "H0")


def _error_fields(exc: Exception) -> tuple[str, str]:
    if isinstance(exc, DetectionError):
        return exc.code, exc.message
    return type(exc).__name__, str(exc)


def _record(
    config: ScenarioConfig,
    trial_index: int,
    hypothesis: str,
    detector: str,
    point_index: int,
    axis_value: Optional[float],
    scenario: Optional[Scenario] = None,
    **fields,
) -> TrialRecord:
    summary = scenario.summary() if scenario is not None else {
        "interference_power": config.interference_power,
        "noise_var": config.noise_var,
        "Q": config.Q,
        "n_interferers": config.n_interferers,
    }
    return TrialRecord(
        trial_index=trial_index,
        point_index=point_index,
        axis_value=axis_value,
        hypothesis=hypothesis,
        detector=detector,
        **summary,
        **fields,
    )


def _evaluate_detector(
    detector: Detector,
    scenario: Scenario,
    trial_index: int,
    point_index: int,
    axis_value: Optional[float],
) -> TrialRecord:
    config = scenario.config
    alphabet = constellation(config.alphabet)
    try:
        report = detector.evaluate(scenario.Y, scenario.s_train, alphabet)
        if not math.isfinite(report.log_statistic):
            raise NonFiniteStatistic(f"log-statistic is {report.log_statistic}")
    except Exception as e:
        code, message = _error_fields(e)
        logger.warning(
            "%s failed on trial %d (%s): %s: %s",
            detector.name, trial_index, scenario.hypothesis, code, message,
        )
        return _record(
            config, trial_index, scenario.hypothesis, detector.name, point_index, axis_value,
            scenario, error=code, error_message=message,
        )
    return _record(
        config, trial_index, scenario.hypothesis, detector.name, point_index, axis_value,
        scenario,
        log_statistic=float(report.log_statistic),
        n_hat=report.n_hat,
        iterations=report.iterations,
        fallback=report.fallback,
    )


def run_trial(
    config: ScenarioConfig,
    detectors: Sequence[Detector],
    trial_index: int,
    point_index: int = 0,
    axis_value: Optional[float] = None,
) -> tuple[list[TrialRecord], dict[str, float]]:
    """Records for one paired trial (H1 first) plus per-detector seconds."""
    records: list[TrialRecord] = []
    seconds: dict[str, float] = defaultdict(float)
    for hypothesis in HYPOTHESES:
        try:
            scenario = synthesize(config, trial_index, hypothesis)
        except Exception as e:
            code, message = _error_fields(e)
            logger.warning("trial %d (%s) synthesis failed: %s: %s",
                           trial_index, hypothesis, code, message)
            for detector in detectors:
                records.append(_record(
                    config, trial_index, hypothesis, detector.name, point_index, axis_value,
                    error=code, error_message=message,
                ))
            continue
        for detector in detectors:
            start = time.perf_counter()
            records.append(
                _evaluate_detector(detector, scenario, trial_index, point_index, axis_value)
            )
            seconds[detector.name] += time.perf_counter() - start
    return records, dict(seconds)


async def run_point_async(
    config: ScenarioConfig,
    specs: Sequence[DetectorSpec],
    trials: int,
    threads: int = 1,
    point_index: int = 0,
    axis_value: Optional[float] = None,
    timings: Optional[dict[str, float]] = None,
) -> list[TrialRecord]:
    if not specs:
        raise InvalidInput("at least one detector is required")
    if trials < 1:
        raise InvalidInput(f"trials must be >= 1, got {trials}")
    detectors = [build_detector(spec) for spec in specs]

    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        tasks = [
            loop.run_in_executor(
                pool, run_trial, config, detectors, trial_index, point_index, axis_value
            )
            for trial_index in range(trials)
        ]
        results = await asyncio.gather(*tasks)

    records: list[TrialRecord] = []
    for trial_records, seconds in results:
        records.extend(trial_records)
        if timings is not None:
            for name, value in seconds.items():
                timings[name] = timings.get(name, 0.0) + value
    failures = sum(1 for r in records if r.failed)
    logger.info(
        "point %d: %d trials x %d detectors, %d failed records",
        point_index, trials, len(detectors), failures,
    )
    return records


def run_point(
    config: ScenarioConfig,
    specs: Sequence[DetectorSpec],
    trials: int,
    threads: int = 1,
    point_index: int = 0,
    axis_value: Optional[float] = None,
    timings: Optional[dict[str, float]] = None,
) -> list[TrialRecord]:
    """Run paired trials at one scenario point; failures become tagged records."""
    return asyncio.run(
        run_point_async(config, specs, trials, threads, point_index, axis_value, timings)
    )
