"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: configuration problems exit 2, data
problems exit 3, anything else exits 4.
"""


class LinkEvalError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(LinkEvalError, ValueError):
    """A file could not be parsed; the message names the offending line."""


class RangeError(LinkEvalError, IndexError):
    """A node id falls outside the graph."""


class ValidationError(LinkEvalError, ValueError):
    """Input data violates a documented precondition."""


class ConfigError(LinkEvalError, ValueError):
    """Invalid configuration or an incompatible combination of options."""


class CoverageError(LinkEvalError, LookupError):
    """A score required for evaluation is missing."""


class SaturationError(LinkEvalError, RuntimeError):
    """Rejection sampling failed to find an admissible pair."""
