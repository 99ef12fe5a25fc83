"""Exception hierarchy shared by every sub-package."""

from __future__ import annotations

from enum import Enum


class FailureReason(str, Enum):
    """Why a chip cannot be certified at the accuracy target."""
    RATE_BEYOND_PROFILE = "RATE_BEYOND_PROFILE"
    UNRECOVERABLE = "UNRECOVERABLE"


class ReduceError(Exception):
    """Base class for every error raised by reduce_sim."""


class ShapeMismatchError(ReduceError, ValueError):
    """Arrays, masks or inputs disagree with the network layout."""


class LabelRangeError(ReduceError, ValueError):
    """A class label lies outside [0, num_classes)."""


class EmptyDatasetError(ReduceError, ValueError):
    pass


class BaselineBelowTargetError(ReduceError):
    """The fault-free network does not reach the accuracy constraint."""


class UncertifiableChipError(ReduceError):
    """No retraining budget can be certified for a chip."""

    reason: FailureReason

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class RateBeyondProfileError(UncertifiableChipError):
    reason = FailureReason.RATE_BEYOND_PROFILE


class UnrecoverableRateError(UncertifiableChipError):
    reason = FailureReason.UNRECOVERABLE


class PolicyError(ReduceError, ValueError):
    """A retraining policy cannot be run with the given inputs."""


class FleetMismatchError(ReduceError, ValueError):
    """Reports being compared were not produced on the same fleet."""


class IdxFormatError(ReduceError):
    """Base class for malformed IDX files."""


class IdxMagicError(IdxFormatError):
    pass


class IdxTruncatedError(IdxFormatError):
    pass


class IdxCountMismatchError(IdxFormatError):
    pass


class ConfigFileError(ReduceError):
    """The run configuration file is missing or is not valid JSON."""
