"""Exception hierarchy.

Three families map onto CLI exit codes: ingestion (2), configuration (3)
and computation (4).
"""


class SddError(Exception):
    exit_code = 4


class IngestError(SddError, ValueError):
    exit_code = 2


class ConfigError(SddError, ValueError):
    exit_code = 3


class MissingArtifactError(ConfigError):
    pass


class ComputeError(SddError, ValueError):
    exit_code = 4


class SplitError(ComputeError):
    pass


class NormalizeError(IngestError):
    """Raised for a constant training series (no usable min/max range)."""


class WindowError(ComputeError):
    pass


class SegmentError(ComputeError):
    pass


class DistanceError(ComputeError):
    pass


class BandError(DistanceError):
    pass


class ClusterError(ComputeError):
    pass


class ScoreError(ComputeError):
    pass


class AssignError(ComputeError):
    pass


class ForecastError(ComputeError):
    pass


class FitError(ComputeError):
    pass


class MapeUndefined(ComputeError):
    """All actual values were zero. ``metrics`` still carries rmse and mse."""

    def __init__(self, message, metrics=None):
        super().__init__(message)
        self.metrics = metrics


class ReliabilityError(ComputeError):
    pass


class DegenerateClusterError(ReliabilityError):
    pass


class CurveError(ComputeError):
    pass


class InversionError(ComputeError):
    pass
