"""Resolve a detector implementation from its spec."""

from structglrt.detectors.base import Detector
from structglrt.detectors.iterative import EmDetector
from structglrt.detectors.training import TrainingOnlyDetector
from structglrt.schemas.experiment import DetectorSpec


def build_detector(spec: DetectorSpec) -> Detector:
    """Instantiate a detector by name with its per-name configuration."""
    if spec.name == "kel-tr":
        return TrainingOnlyDetector(spec.name, "kelly", spec.criterion())
    elif spec.name == "kmr-tr":
        return TrainingOnlyDetector(spec.name, "kmr", spec.criterion())
    elif spec.name == "mcw-tr":
        return TrainingOnlyDetector(spec.name, "mcwhorter", spec.criterion())
    elif spec.name in ("kel-em", "kmr-em", "forsythe", "forsythe-lowrank"):
        return EmDetector(spec.name, "gauss", spec.em_config(), spec.init_config())
    elif spec.name in ("mcw-em", "hard-mcw-em"):
        return EmDetector(spec.name, "det", spec.em_config(), spec.init_config())
    else:
        raise ValueError(f"Unknown detector: {spec.name}")
