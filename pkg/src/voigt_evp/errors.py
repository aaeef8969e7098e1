"""Exception hierarchy shared across the package."""


class VoigtEVPError(Exception):
    """Base class for all package errors."""


class InvalidArgument(VoigtEVPError, ValueError):
    """A parameter lies outside its admissible range."""


class NumericError(VoigtEVPError, FloatingPointError):
    """A computation produced non-finite values."""


class BlowUpError(NumericError):
    """Time integration detected a non-finite or runaway stage.

    ``time`` is the stage time at which the problem was seen and
    ``last_good`` the last accepted state (may be ``None``).
    """

    def __init__(self, message, time=None, last_good=None):
        super().__init__(message)
        self.time = time
        self.last_good = last_good


class ConfigError(VoigtEVPError, ValueError):
    """Configuration text failed to parse or validate."""


class SnapshotError(VoigtEVPError, OSError):
    """A binary snapshot is malformed."""
