"""Exception hierarchy shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of an operation."""


class PreconditionError(ValueError):
    """A statistical precondition fails (e.g. too few samples or blocks)."""


class ConfigError(ValueError):
    """An experiment configuration is invalid or incompatible."""


class InputError(ValueError):
    """User-supplied data could not be parsed."""


class OutputExistsError(OSError):
    """Refusing to overwrite an existing output file without --force."""
