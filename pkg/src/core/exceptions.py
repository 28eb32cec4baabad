# src/core/exceptions.py
class ToolkitError(Exception):
    """Base exception for toolkit errors"""
    exit_code = 1


class ConfigurationError(ToolkitError):
    """Invalid parameters, grids or exponents"""
    exit_code = 2


class SignalInputError(ToolkitError):
    """Malformed or inconsistent input files"""
    exit_code = 3


class InvariantViolation(ToolkitError):
    """A certified inequality or structural invariant failed"""
    exit_code = 4
