# src/signal_core/exceptions.py
from core.exceptions import ConfigurationError, SignalInputError


class SignalError(ConfigurationError):
    """Base exception for sampled-signal errors"""
    pass


class OrderingError(SignalError):
    """Frequency or interval endpoints given in the wrong order"""
    pass


class ExponentError(SignalError):
    """Exponent outside its admissible range"""
    pass


class GridMismatchError(SignalError):
    """Signals that must share a sampling grid do not"""
    pass


class SignalFileError(SignalInputError):
    """Signal CSV could not be parsed or is not uniformly sampled"""
    pass
