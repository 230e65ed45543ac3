"""Error types raised by the detection library.

Every error carries a stable ``code`` (the class name) that the harness writes
into trial records, so a failed trial is tagged rather than dropped.
"""


class DetectionError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidInput(DetectionError):
    """Malformed array, shape mismatch or out-of-range argument."""


class InvalidPrecision(DetectionError):
    """Symbol-channel precision xi is not strictly positive and finite."""


class KellyUndefined(DetectionError):
    """Sample covariance under H1 is singular (fewer than M+1 snapshots)."""


class ZeroSignal(DetectionError):
    """The reference signal is identically zero."""


class InvalidRank(DetectionError):
    """Interference rank outside the range the model supports."""


class DegenerateNoise(DetectionError):
    """Residual noise power vanished."""


class SingularCovariance(DetectionError):
    """Full-rank interference covariance cannot be inverted."""


class NonPositivePrecision(DetectionError):
    """EM produced a whitened matched-filter gain with xi <= 0."""


class DegenerateZeta(DetectionError):
    """Posterior uncertainty collapsed (E == ||s_hat||^2) in the deterministic-interference EM."""


class DegenerateSpectrum(DetectionError):
    """All eigenvalues are zero."""


class DegenerateTraining(DetectionError):
    """Training block cannot support leave-one-out estimation."""


class InsufficientSidelobes(DetectionError):
    """Beampattern has fewer sidelobe peaks than requested interferers."""


class ConfigError(DetectionError):
    """Experiment configuration file is malformed or names unknown keys."""


class NonFiniteStatistic(DetectionError):
    """Detector returned a NaN or infinite log-statistic."""
