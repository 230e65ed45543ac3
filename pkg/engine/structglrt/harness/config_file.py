"""Flat ``key = value`` experiment files.

    # comment
    scenario.M = 16
    scenario.alphabet = qpsk
    detector.names = kmr-tr, kmr-em
    detector.gain_kmr_em = 8
    sweep.axis = snr
    sweep.values = 4, 16, 64

Values are validated by the pydantic schemas; list values are comma
separated. Unknown sections and keys are rejected with the offending key.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from structglrt.detectors.validate import validate_detector_names
from structglrt.errors import ConfigError
from structglrt.schemas.experiment import DetectorSpec, SweepSpec
from structglrt.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

DEFAULT_DETECTORS = ("kmr-tr", "mcw-tr", "kmr-em", "mcw-em")

SCENARIO_KEYS = set(ScenarioConfig.model_fields)
DETECTOR_KEYS = set(DetectorSpec.model_fields) - {"name", "gain"}
SWEEP_KEYS = set(SweepSpec.model_fields)

_LIST_KEYS = {"detector.names", "detector.alpha_grid", "sweep.values"}
_NONE_VALUES = {"", "none", "null"}


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig
    detectors: list[DetectorSpec]
    sweep: Optional[SweepSpec] = None
    raw: dict[str, str] = field(default_factory=dict)

    @property
    def detector_names(self) -> list[str]:
        return [d.name for d in self.detectors]

    def echo(self) -> dict:
        """JSON-ready copy for the run manifest."""
        return {
            "scenario": self.scenario.model_dump(mode="json"),
            "detectors": [d.model_dump(mode="json", exclude_defaults=True) for d in self.detectors],
            "sweep": self.sweep.model_dump(mode="json") if self.sweep else None,
        }


def parse_lines(text: str) -> dict[str, str]:
    """Raw key/value pairs; later duplicates are an error."""
    entries: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        entries[key] = value
    return entries


def _value(key: str, text: str):
    if key in _LIST_KEYS:
        return [item.strip() for item in text.split(",") if item.strip()]
    if text.lower() in _NONE_VALUES:
        return None
    return text


def _gain_target(field_name: str) -> str:
    return field_name[len("gain_"):].replace("_", "-")


def parse_experiment(
    text: str,
    default_seed: int = 0,
    detector_names: Optional[list[str]] = None,
) -> ExperimentConfig:
    """Build validated configs from file text.

    ``detector_names`` replaces ``detector.names`` (the --detectors flag).
    """
    entries = parse_lines(text)
    scenario: dict = {"seed": default_seed}
    shared: dict = {}
    gains: dict[str, str] = {}
    sweep: dict = {}
    names: Optional[list[str]] = None

    for key, text_value in entries.items():
        section, _, name = key.partition(".")
        value = _value(key, text_value)
        if section == "scenario" and name in SCENARIO_KEYS:
            scenario[name] = value
        elif section == "detector" and name == "names":
            names = value
        elif section == "detector" and name.startswith("gain_"):
            gains[_gain_target(name)] = value
        elif section == "detector" and name in DETECTOR_KEYS:
            shared[name] = value
        elif section == "sweep" and name in SWEEP_KEYS:
            sweep[name] = value
        else:
            raise ConfigError(f"Unknown config key: {key}")

    if detector_names is not None:
        names = detector_names
    names = list(names or DEFAULT_DETECTORS)
    err = validate_detector_names(names)
    if err:
        raise ConfigError(err)
    unused = set(gains) - set(names)
    if unused:
        raise ConfigError(f"gain given for detectors not run: {', '.join(sorted(unused))}")

    try:
        scenario_config = ScenarioConfig(**scenario)
        specs = [DetectorSpec(name=n, gain=gains.get(n), **shared) for n in names]
        sweep_spec = SweepSpec(**sweep) if sweep else None
    except ValidationError as e:
        raise ConfigError(_describe(e)) from e

    logger.debug("parsed config: %d keys, detectors=%s", len(entries), ",".join(names))
    return ExperimentConfig(scenario_config, specs, sweep_spec, raw=entries)


def load_experiment(
    path: Path,
    default_seed: int = 0,
    detector_names: Optional[list[str]] = None,
) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_experiment(text, default_seed, detector_names)


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "config"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)
