# src/outer_lp/exceptions.py
from core.exceptions import ConfigurationError


class OuterMeasureError(ConfigurationError):
    """Base exception for outer measure computations"""
    pass


class TentGeometryError(OuterMeasureError):
    """Theta and Theta^o violate 0 in Theta^o within Theta or miss (-b, b)"""
    pass


class IncoverableError(OuterMeasureError):
    """Tiles outside every candidate tent"""
    pass
