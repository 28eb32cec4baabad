# src/signal_core/grids.py
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .exceptions import SignalError, GridMismatchError

GRID_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Interval:
    """Open interval stored by center and length"""
    center: float
    length: float

    def __post_init__(self):
        if not np.isfinite(self.center) or not self.length > 0:
            raise SignalError(f"Invalid interval: center={self.center}, length={self.length}")

    @classmethod
    def from_endpoints(cls, left: float, right: float) -> 'Interval':
        return cls(center=(left + right) / 2.0, length=right - left)

    @property
    def left(self) -> float:
        return self.center - self.length / 2.0

    @property
    def right(self) -> float:
        return self.center + self.length / 2.0

    def dilate(self, factor: float = 3.0) -> 'Interval':
        return Interval(self.center, factor * self.length)

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x > self.left) & (x < self.right)

    def contains_interval(self, other: 'Interval') -> bool:
        return self.left <= other.left and other.right <= self.right

    def distance_to(self, other: 'Interval') -> float:
        return max(0.0, other.left - self.right, self.left - other.right)

    def dyadic_children(self, level: int) -> list:
        """The 2**level subintervals of length 2**-level * |I|"""
        count = 2 ** level
        step = self.length / count
        return [Interval.from_endpoints(self.left + k * step, self.left + (k + 1) * step) for k in range(count)]

    def as_dict(self) -> dict:
        return {'center': float(self.center), 'length': float(self.length)}


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Finite strictly increasing set of frequencies (the set Xi)"""
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or points.size < 1:
            raise SignalError("Frequency grid must be a non-empty 1d sequence")
        if not np.all(np.isfinite(points)):
            raise SignalError("Frequency grid contains non-finite points")
        if np.any(np.diff(points) <= 0):
            raise SignalError("Frequency grid must be strictly increasing")
        points = points.copy()
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

    @classmethod
    def uniform(cls, low: float, high: float, count: int) -> 'FrequencyGrid':
        return cls(np.linspace(low, high, count))

    def __len__(self) -> int:
        return int(self.points.size)

    def refined(self) -> 'FrequencyGrid':
        """Grid with every midpoint inserted; contains the original points"""
        mids = (self.points[1:] + self.points[:-1]) / 2.0
        return FrequencyGrid(np.sort(np.concatenate([self.points, mids])))

    def as_list(self) -> list:
        return [float(p) for p in self.points]


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """Complex samples on a uniform grid, identically zero off the grid"""
    origin: float
    spacing: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=complex).reshape(-1)
        if not self.spacing > 0 or not np.isfinite(self.spacing):
            raise SignalError(f"Spacing must be positive, got {self.spacing}")
        if not np.isfinite(self.origin):
            raise SignalError("Origin must be finite")
        if samples.size < 1:
            raise SignalError("A signal needs at least one sample")
        if not np.all(np.isfinite(samples)):
            raise SignalError("Signal samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @classmethod
    def from_function(cls, func: Callable, origin: float, spacing: float, count: int) -> 'SampledSignal':
        x = origin + spacing * np.arange(count)
        return cls(origin, spacing, func(x))

    @classmethod
    def zeros(cls, origin: float, spacing: float, count: int) -> 'SampledSignal':
        return cls(origin, spacing, np.zeros(count, dtype=complex))

    @property
    def count(self) -> int:
        return int(self.samples.size)

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.count)

    @property
    def end(self) -> float:
        return self.origin + self.spacing * (self.count - 1)

    @property
    def window(self) -> Interval:
        return Interval.from_endpoints(self.origin, self.end + self.spacing)

    def with_samples(self, samples: Iterable) -> 'SampledSignal':
        return SampledSignal(self.origin, self.spacing, np.asarray(samples))

    def scaled(self, factor: complex) -> 'SampledSignal':
        return self.with_samples(self.samples * factor)

    def modulus(self) -> 'SampledSignal':
        return self.with_samples(np.abs(self.samples))

    def same_grid(self, other: 'SampledSignal') -> bool:
        scale = max(abs(self.spacing), abs(self.origin), 1.0)
        return (
            self.count == other.count
            and abs(self.spacing - other.spacing) <= GRID_TOLERANCE * self.spacing
            and abs(self.origin - other.origin) <= GRID_TOLERANCE * scale
        )

    def require_same_grid(self, other: 'SampledSignal'):
        if not self.same_grid(other):
            raise GridMismatchError(
                f"Signals live on different grids: ({self.origin}, {self.spacing}, {self.count}) "
                f"vs ({other.origin}, {other.spacing}, {other.count})"
            )

    def index_of(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.origin) / self.spacing

    def snap(self, x: float) -> float:
        """Nearest point of the (infinite) sampling lattice"""
        return self.origin + self.spacing * np.round((x - self.origin) / self.spacing)

    def snap_interval(self, interval: Interval) -> Interval:
        left, right = self.snap(interval.left), self.snap(interval.right)
        if right <= left:
            right = left + self.spacing
        return Interval.from_endpoints(left, right)

    def mask(self, interval: Optional[Interval]) -> np.ndarray:
        """Samples whose cell [x, x + dx) starts inside the interval"""
        if interval is None:
            return np.ones(self.count, dtype=bool)
        x = self.x
        half = 0.5 * self.spacing
        return (x >= interval.left - half * 1e-6) & (x < interval.right - half * 1e-6)

    def restrict(self, interval: Optional[Interval]) -> 'SampledSignal':
        return self.with_samples(np.where(self.mask(interval), self.samples, 0.0))

    def minus(self, interval: Interval) -> 'SampledSignal':
        return self.with_samples(np.where(self.mask(interval), 0.0, self.samples))

    def is_zero(self) -> bool:
        return not np.any(self.samples)
