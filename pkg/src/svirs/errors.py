"""Exception hierarchy.

Two families: :class:`UsageError` for malformed input (bad parameters,
unknown config keys) and :class:`DomainError` for well-formed input that
violates a mathematical hypothesis of the analysis being requested.  The
CLI maps them to exit codes 2 and 1 respectively.
"""


class SvirsError(Exception):
    """Base class for all package errors."""


class UsageError(SvirsError, ValueError):
    """Input is malformed or outside the admissible parameter region."""


class ParameterError(UsageError):
    """A model parameter violates its admissible range.

    Attributes
    ----------
    name : str
        Name of the offending field.
    """

    def __init__(self, name, message):
        super().__init__(f"{name}: {message}")
        self.name = name


class ConfigError(UsageError):
    """Config file or override could not be parsed."""

    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.key = key
        self.line = line


class DomainError(SvirsError):
    """A requested quantity is undefined for the given input."""


class HypothesisError(DomainError):
    """An existence/stability hypothesis required by an analysis fails."""


class NoCriticalDelay(DomainError):
    """No crossing of the imaginary axis was found in the scanned range."""


class CoefficientMismatch(DomainError):
    """Closed-form characteristic coefficients disagree with the determinant."""


class SimulationUnstable(DomainError):
    """The explicit scheme blew up; the step size is too large."""
