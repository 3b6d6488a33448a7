"""Exception and warning types shared across the package."""


class PlasmonGateError(Exception):
    """Base class for all package errors."""


class DomainError(PlasmonGateError, ValueError):
    pass


class BracketError(PlasmonGateError):
    pass


class ConvergenceError(PlasmonGateError):
    pass


class InputError(PlasmonGateError, ValueError):
    pass


class InsufficientModesError(PlasmonGateError):
    pass


class NoSolutionError(PlasmonGateError):
    """The dispersion condition has no root in the search bracket."""


class InvalidNormalizationError(PlasmonGateError):
    pass


class ResolutionError(PlasmonGateError):
    """Requested wavepacket simulation exceeds the grid budget."""


class ConfigError(PlasmonGateError, ValueError):
    pass


class UnderflowWarning(RuntimeWarning):
    pass


class SingularityWarning(RuntimeWarning):
    pass


class RangeWarning(RuntimeWarning):
    """A tabulated model was evaluated outside its range and clamped."""
