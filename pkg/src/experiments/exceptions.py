# src/experiments/exceptions.py
from core.exceptions import ConfigurationError


class RunConfigError(ConfigurationError):
    """Run configuration file missing, unreadable or inconsistent"""
    pass
