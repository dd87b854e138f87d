"""Exception types shared across the lab."""


class LabError(Exception):
    """Base class for all teleoplab errors."""


class ClosureError(LabError):
    """Route segments do not chain back to the start pose."""

    def __init__(self, position_gap: float, heading_gap: float):
        self.position_gap = position_gap
        self.heading_gap = heading_gap
        super().__init__(
            f"route does not close: position gap {position_gap:.3f} m, "
            f"heading gap {heading_gap:.3f} rad"
        )


class OffMapError(LabError):
    """Query point too far from the route centerline."""


class NonMonotonicTime(LabError):
    """Channel operation violated its monotone-time precondition."""


class InsufficientHistory(LabError):
    """Not enough buffered history to build a feature window."""


class InsufficientFuture(LabError):
    """Not enough future states to label an intention."""


class ShapeMismatch(LabError):
    """Model topology does not match the input feature layout."""


class DegenerateDataset(LabError):
    """Dataset missing a class or too unbalanced to train on."""


class PathExhausted(LabError):
    """Fewer than two usable waypoints remain on the target path."""


class HistoryMiss(LabError):
    """Requested pose timestamp is older than the pose buffer."""


class EmptyRemainder(LabError):
    """Elapsed delay consumed the whole guidance horizon."""


class IncompleteLoop(LabError):
    """Trial log does not cover a full route loop."""


class DegenerateBaseline(LabError):
    """Normalization baselines coincide; ratio undefined."""


class UnbalancedDesign(LabError):
    """Factorial table has missing cells."""


class DegenerateVariance(LabError):
    """An error term has zero variance; F/t statistic undefined."""


class NonPositiveValue(LabError):
    """Log transform requires strictly positive values."""


class ConfigError(LabError):
    """Invalid harness configuration."""


class TrialTimeout(LabError):
    """Trial exceeded the wall-time budget without completing the loop."""
