"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """A caller passed a value outside an operation's domain."""


class UnsupportedGateError(ValueError):
    """A gate has no OpenQASM 2.0 counterpart in the supported set."""


class DegenerateBranchError(ValueError):
    """Conditioning was requested on an outcome with zero probability."""


class IllConditionedAngleError(ValueError):
    """The protocol angle makes the inversion numerically unstable."""


class InconsistentMeasurementError(ValueError):
    """Measured statistics fall outside the range the model allows.

    The raw (unclamped) value is kept on ``raw`` so callers can still report it.
    """

    def __init__(self, message, raw=None):
        super().__init__(message)
        self.raw = raw


class FormatError(ValueError):
    """An input file does not follow its documented schema."""


class UnmatchedPointError(ValueError):
    """A data point does not correspond to any point of the configured grid."""


class ConfigError(ValueError):
    """Malformed experiment configuration."""
