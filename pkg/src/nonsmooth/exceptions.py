"""Exception hierarchy shared by every module.

The CLI maps :class:`InputError` and :class:`ContractError` (and their
subclasses) to exit code 2.
"""


class NonsmoothError(Exception):
    """Base class for all errors raised by this package."""


class InputError(NonsmoothError, ValueError):
    """Invalid argument: bad shape, dimension mismatch, non-positive constant."""


class RegistryError(NonsmoothError, KeyError):
    """Unknown corpus function name."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown corpus entry"


class DomainError(InputError):
    """A value lies outside the domain an operation is defined on."""


class DegenerateInputError(InputError):
    """Input carries no usable information (e.g. every value is +inf)."""


class CorpusConsistencyError(NonsmoothError):
    """A corpus function disagrees with its own metadata."""


class UnsupportedError(NonsmoothError):
    """The requested mode/norm combination is deliberately not implemented."""


class ContractError(NonsmoothError):
    """A documented precondition of an operation does not hold."""


class ProfileAssumptionError(NonsmoothError):
    """A sampled directional profile is not finite and bounded."""


class ParseError(InputError):
    """Malformed text input. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(InputError):
    """JSON document does not follow the form schema."""
