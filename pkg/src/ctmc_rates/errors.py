"""Exception types with a stable mapping onto CLI exit codes."""


class CtmcRatesError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ModelValidationError(CtmcRatesError):
    """Model inputs violate a CTMC invariant (exit code 1)."""

    exit_code = 1


class ModelFileError(CtmcRatesError):
    """Model config file is malformed or inadmissible (exit code 1)."""

    exit_code = 1


class RecoveryHypothesisError(CtmcRatesError):
    """The Perron eigenvalue is nonnegative, so recovery is not defined (exit code 2)."""

    exit_code = 2


class UnhedgeableBasisError(CtmcRatesError):
    """The bond-price difference system is singular at some (time, state) (exit code 3)."""

    exit_code = 3
