"""Exception hierarchy for allee_dyn."""


class AlleeDynError(Exception):
    """Base class for all package errors."""


class DomainError(AlleeDynError):
    """An argument lies outside the documented domain of an operation."""


class EvaluationError(AlleeDynError):
    """A map or density evaluation produced a non-finite or invalid value."""


class PreconditionError(AlleeDynError):
    """A mathematical precondition of an operation does not hold."""


class RootNotFoundError(AlleeDynError):
    """A requested threshold root does not exist for the configuration."""


class QuadratureError(AlleeDynError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ParseError(AlleeDynError):
    """A textual map definition or config file could not be parsed."""


class ConfigError(AlleeDynError):
    """Invalid run configuration (CLI or config file)."""
