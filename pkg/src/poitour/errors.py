"""Exception hierarchy shared across the package.

The CLI maps these onto its stable exit codes, and the HTTP service maps
them onto status codes, so core code should raise the most specific class
that applies.
"""


class PoitourError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PoitourError):
    """Invalid configuration: bad hyperparameter, non-positive speed, etc."""


class InputFormatError(PoitourError):
    """Malformed or missing input data (files, lines, headers)."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class InsufficientDataError(PoitourError):
    """Not enough data to proceed: empty corpus, nothing evaluable."""


class UnknownEntityError(PoitourError):
    """A referenced entity (POI id, token) cannot be resolved."""


class TrainingDivergedError(ConfigError):
    """Non-finite values appeared during training (learning rate too high)."""
