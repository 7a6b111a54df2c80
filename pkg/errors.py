"""Error types raised across the coembed packages.

Every error carries the process exit code the CLI maps it to. Numeric
domain errors also subclass ValueError so plain ``except ValueError``
handlers keep working.
"""
from config.settings import EXIT_CODES


class CoembedError(Exception):
    """Base class for all coembed errors."""

    exit_code = EXIT_CODES["check_failed"]


# numerics
class ZeroNorm(CoembedError, ValueError):
    """Vector norm too small to normalize."""


class DimensionMismatch(CoembedError, ValueError):
    """Operands have nonconforming shapes."""


class NonFiniteFunction(CoembedError, ValueError):
    """A function under finite differencing returned NaN or Inf."""


# encoders
class InvalidDimension(CoembedError, ValueError):
    """A layer dimension is smaller than 1."""


class StaleCache(CoembedError, ValueError):
    """Cached activations do not belong to the encoder or gradient shapes."""


# memory
class InvalidKey(CoembedError, ValueError):
    """A queue key is not unit norm or its tags are not binary."""


# losses / trainer
class EmptyBatch(CoembedError, ValueError):
    """A batch without samples was passed to the objective."""


class NonFiniteGradient(CoembedError, ValueError):
    """A gradient contains NaN or Inf."""


# evaluator
class EmptyTestSet(CoembedError, ValueError):
    """Nothing to evaluate."""


class DegenerateLabels(CoembedError, ValueError):
    """A class is missing from the probe training labels."""


# configuration and files
class ConfigError(CoembedError, ValueError):
    """Invalid or unknown configuration field."""

    exit_code = EXIT_CODES["config"]

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class StorageError(CoembedError, OSError):
    """Reading or writing a file failed."""

    exit_code = EXIT_CODES["io"]


class FormatError(CoembedError, ValueError):
    """A file does not follow the documented format."""

    exit_code = EXIT_CODES["io"]


class VersionMismatch(FormatError):
    """A file was written with a different format version."""

    exit_code = EXIT_CODES["version"]

    def __init__(self, path: str, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(
            f"{path}: format version {found!r} is not supported (expected {expected!r})"
        )
