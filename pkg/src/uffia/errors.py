"""Exception hierarchy shared across the package."""


class UffiaError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(UffiaError):
    """Tensor extents are inconsistent with an operation's contract."""


class ConfigError(UffiaError):
    """A configuration value is outside its documented domain."""


class ContractError(UffiaError):
    """An operation was called in a state its contract forbids."""


class NumericError(UffiaError):
    """Non-finite values where finite ones are required."""


class InputError(UffiaError):
    """Invalid input data (empty signal, silent clip, bad frame count...)."""


class ManifestError(UffiaError):
    """Manifest parse failure; message carries the offending line number."""


class FlopsError(UffiaError):
    """FLOPs accounting hit a component it has no formula for."""


class UnsupportedError(UffiaError):
    """Operation applied outside its supported domain."""


class TrainingDiverged(UffiaError):
    """Training loss became non-finite; the run was aborted."""
