"""Exception hierarchy shared by the library and the CLI."""


class ExtremalError(Exception):
    """Base class for all library errors."""


class DomainError(ExtremalError, ValueError):
    """An argument lies outside the support or domain of a function."""


class ConfigError(ExtremalError, ValueError):
    """Invalid distribution or experiment configuration.

    ``line`` and ``column`` are set when the error comes from parsing a
    config file (1-based).
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


class ArgumentError(ExtremalError, ValueError):
    """Structurally invalid arguments (empty grids, unsorted input, k > n)."""


class ResourceGuardError(ExtremalError, MemoryError):
    """A requested simulation exceeds the configured memory guard."""


class InsufficientDataError(ExtremalError):
    """Too few conditioning events to produce a meaningful estimate."""

    def __init__(self, message, count, required):
        self.count = count
        self.required = required
        super().__init__(f"{message} (got {count}, need at least {required})")
