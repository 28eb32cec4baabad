# src/wavepacket/exceptions.py
from core.exceptions import ConfigurationError
from signal_core.exceptions import GridMismatchError, OrderingError


class WavePacketParameterError(ConfigurationError):
    """Wave packet constants violate d > b, eps < b/4 or d'' > d' > 0"""
    pass


class ScaleError(ConfigurationError):
    """Scale too fine for the sampling grid of the signal"""
    pass


class TileGridError(ConfigurationError):
    """Tile fields or regions built on different tile grids"""
    pass


__all__ = ['GridMismatchError', 'OrderingError', 'WavePacketParameterError', 'ScaleError', 'TileGridError']
