# src/weights/exceptions.py
from core.exceptions import ConfigurationError
from signal_core.exceptions import ExponentError


class WeightParameterError(ConfigurationError):
    """Weight samples or experiment exponents outside their admissible range"""
    pass


__all__ = ['ExponentError', 'WeightParameterError']
