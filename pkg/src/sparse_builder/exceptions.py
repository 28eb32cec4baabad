# src/sparse_builder/exceptions.py
from core.exceptions import ConfigurationError, InvariantViolation


class ConstructionFailure(InvariantViolation):
    """The exceptional set never met its packing bound"""
    pass


class GenerationCapExceeded(ConfigurationError):
    """The scale cutoff asks for more generations than the configured cap"""
    pass


class SparseCertificateError(InvariantViolation):
    """Witnesses overlap, leave their interval or fall below eta"""
    pass


class IterationConfigError(ConfigurationError):
    """Budget, packing exponent or scale cutoff out of range"""
    pass
