"""Exception hierarchy shared across the package."""


class FdcnetError(Exception):
    """Base class for all errors raised by fdcnet."""


class DimensionError(FdcnetError):
    """Shapes or sizes are inconsistent with what an operation requires."""


class ConfigError(FdcnetError):
    """An unknown kind/flag or an invalid configuration value."""


class ContractError(FdcnetError):
    """A caller violated an API contract (e.g. backward on a non-scalar)."""


class DegenerateDataError(FdcnetError):
    """Input data carries no usable signal (zero RMS, single-class labels, batch too small)."""


class NonFiniteError(FdcnetError):
    """A NaN or Inf showed up where only finite values are allowed."""


class FileFormatError(FdcnetError):
    """A container file has a bad magic, unsupported version, or truncated payload."""
