# src/varcarleson/exceptions.py
from core.exceptions import ConfigurationError
from signal_core.exceptions import ExponentError, GridMismatchError


class FrequencyGridTooSmall(ConfigurationError):
    """A variation needs at least two grid frequencies"""
    pass


class LinearizationError(ConfigurationError):
    """Linearization data inconsistent with its grid or sample positions"""
    pass


__all__ = ['ExponentError', 'GridMismatchError', 'FrequencyGridTooSmall', 'LinearizationError']
