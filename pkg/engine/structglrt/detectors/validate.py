"""Validation of detector names."""

from typing import Optional, Sequence

VALID_DETECTORS = {
    "kel-tr",
    "kmr-tr",
    "mcw-tr",
    "kel-em",
    "kmr-em",
    "mcw-em",
    "forsythe",
    "forsythe-lowrank",
    "hard-mcw-em",
}

# Common typos -> correct name
_DETECTOR_SUGGESTIONS: dict[str, str] = {
    "kel": "kel-tr",
    "kelly": "kel-tr",
    "kmr": "kmr-tr",
    "mcw": "mcw-tr",
    "mcwhorter": "mcw-tr",
    "kellyem": "kel-em",
    "kelem": "kel-em",
    "kmrem": "kmr-em",
    "mcwem": "mcw-em",
    "forsyth": "forsythe",
    "forsythe-lr": "forsythe-lowrank",
    "forsythe-low-rank": "forsythe-lowrank",
    "lowrank-forsythe": "forsythe-lowrank",
    "hard-mcw": "hard-mcw-em",
    "mcw-em-hard": "hard-mcw-em",
    "hardmcwem": "hard-mcw-em",
}


def suggest_detector_name(name: str) -> Optional[str]:
    """Return a suggestion if the input looks like a typo of a valid name."""
    if name in VALID_DETECTORS:
        return None
    normalized = name.strip().lower().replace("_", "-")
    if normalized in VALID_DETECTORS:
        return normalized
    return _DETECTOR_SUGGESTIONS.get(normalized) or _DETECTOR_SUGGESTIONS.get(
        normalized.replace("-", "")
    )


def validate_detector_names(names: Sequence[str]) -> Optional[str]:
    """
    Validate a detector list.
    Returns None if valid, or an error message string if invalid.
    """
    if not names:
        return "At least one detector is required"
    seen: set[str] = set()
    for name in names:
        if name not in VALID_DETECTORS:
            hint = suggest_detector_name(name)
            if hint:
                return f"Unknown detector: {name} (did you mean {hint}?)"
            return f"Unknown detector: {name}. Valid: {', '.join(sorted(VALID_DETECTORS))}"
        if name in seen:
            return f"Duplicate detector: {name}"
        seen.add(name)
    return None
