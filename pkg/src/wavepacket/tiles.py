# src/wavepacket/tiles.py
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from signal_core.grids import SampledSignal
from .exceptions import TileGridError, WavePacketParameterError


@dataclass(frozen=True)
class Tile:
    """A point (u, t, eta) of the upper 3-space"""
    u: float
    t: float
    eta: float

    def __post_init__(self):
        if not self.t > 0:
            raise WavePacketParameterError(f"Tile scale must be positive, got {self.t}")


@dataclass(frozen=True, eq=False)
class TileLayer:
    """All tiles sharing one scale: eta_k = k * eta_step for the integers k in range"""
    t: float
    dt: float
    etas: np.ndarray
    eta_step: float

    @property
    def size(self) -> int:
        return int(self.etas.size)


class TileGrid:
    """Discretization of du dt deta on the upper 3-space

    Scales are geometric with ratio 2**(-1/scales_per_octave) (dyadic for one
    voice per octave), each carrying the quadrature weight t * ln 2 / voices.
    At scale t the modulations form the lattice (c_eta / t) * Z clipped to
    eta_range; translations are the sample positions u_k = origin + k * u_spacing.
    """

    def __init__(self, scales, u_origin: float, u_spacing: float, u_count: int,
                 scales_per_octave: int = 1, c_eta: float = 0.25, eta_range: Tuple[float, float] = (-np.pi, np.pi)):
        scales = np.sort(np.asarray(scales, dtype=float))[::-1]
        if scales.size < 1 or np.any(scales <= 0):
            raise WavePacketParameterError("A tile grid needs at least one positive scale")
        if not c_eta > 0 or not u_spacing > 0 or u_count < 1:
            raise WavePacketParameterError("c_eta, u_spacing and u_count must be positive")
        if not eta_range[0] < eta_range[1]:
            raise WavePacketParameterError(f"Empty modulation range {eta_range}")
        self.u_origin = float(u_origin)
        self.u_spacing = float(u_spacing)
        self.u_count = int(u_count)
        self.scales_per_octave = int(scales_per_octave)
        self.c_eta = float(c_eta)
        self.eta_range = (float(eta_range[0]), float(eta_range[1]))

        log_step = np.log(2.0) / self.scales_per_octave
        self.layers: List[TileLayer] = []
        for t in scales:
            step = self.c_eta / t
            first = int(np.ceil(self.eta_range[0] / step))
            last = int(np.floor(self.eta_range[1] / step))
            etas = step * np.arange(first, last + 1, dtype=float)
            self.layers.append(TileLayer(t=float(t), dt=float(t * log_step), etas=etas, eta_step=float(step)))

    @classmethod
    def geometric(cls, t_min: float, t_max: float, scales_per_octave: int = 1, **kwargs) -> 'TileGrid':
        """Scales t_max * 2**(-k/v) down to t_min"""
        if not 0 < t_min <= t_max:
            raise WavePacketParameterError(f"Need 0 < t_min <= t_max, got ({t_min}, {t_max})")
        count = int(np.floor(scales_per_octave * np.log2(t_max / t_min) + 1e-9)) + 1
        scales = t_max * 2.0 ** (-np.arange(count) / scales_per_octave)
        kwargs.setdefault('u_origin', 0.0)
        kwargs.setdefault('u_spacing', 1.0)
        kwargs.setdefault('u_count', 1)
        return cls(scales, scales_per_octave=scales_per_octave, **kwargs)

    @classmethod
    def for_signal(cls, f: SampledSignal, scales_per_octave: int = 1, c_eta: float = 0.25,
                   scale_count: int = 0, eta_range: Optional[Tuple[float, float]] = None) -> 'TileGrid':
        """Scales from the window length down to 2 * spacing, u on the signal grid

        scale_count > 0 keeps only the coarsest scale_count scales; eta_range
        defaults to the Nyquist band of f.
        """
        t_max = f.count * f.spacing
        t_min = 2.0 * f.spacing
        count = int(np.floor(scales_per_octave * np.log2(t_max / t_min) + 1e-9)) + 1
        if scale_count > 0:
            count = min(count, scale_count)
        scales = t_max * 2.0 ** (-np.arange(count) / scales_per_octave)
        nyquist = np.pi / f.spacing
        return cls(scales, f.origin, f.spacing, f.count, scales_per_octave=scales_per_octave,
                   c_eta=c_eta, eta_range=eta_range or (-nyquist, nyquist))

    @property
    def u(self) -> np.ndarray:
        return self.u_origin + self.u_spacing * np.arange(self.u_count)

    @property
    def scales(self) -> np.ndarray:
        return np.array([layer.t for layer in self.layers])

    @property
    def tile_count(self) -> int:
        return sum(layer.size for layer in self.layers) * self.u_count

    def layer_weight(self, index: int) -> float:
        layer = self.layers[index]
        return self.u_spacing * layer.dt * layer.eta_step

    def shapes(self) -> List[Tuple[int, int]]:
        return [(layer.size, self.u_count) for layer in self.layers]

    def same_as(self, other: 'TileGrid') -> bool:
        return other is self or (
            self.shapes() == other.shapes()
            and np.allclose(self.scales, other.scales, rtol=1e-12)
            and abs(self.u_origin - other.u_origin) <= 1e-9 * max(1.0, abs(self.u_origin))
            and abs(self.u_spacing - other.u_spacing) <= 1e-12 * self.u_spacing
            and abs(self.c_eta - other.c_eta) <= 1e-12 * self.c_eta
        )

    def require_same(self, other: 'TileGrid'):
        if not self.same_as(other):
            raise TileGridError("Tile data live on different tile grids")

    def describe(self) -> dict:
        return {
            'u_origin': self.u_origin,
            'u_spacing': self.u_spacing,
            'u_count': self.u_count,
            'scales': [float(t) for t in self.scales],
            'scales_per_octave': self.scales_per_octave,
            'c_eta': self.c_eta,
            'eta_range': list(self.eta_range),
            'tile_count': self.tile_count,
        }


class TileRegion:
    """Explicit boolean mask over a tile grid, one (n_eta, n_u) array per layer"""

    def __init__(self, grid: TileGrid, masks: List[np.ndarray]):
        if [m.shape for m in masks] != grid.shapes():
            raise TileGridError("Region masks do not match the tile grid")
        self.grid = grid
        self.masks = [np.asarray(m, dtype=bool) for m in masks]

    @classmethod
    def empty(cls, grid: TileGrid) -> 'TileRegion':
        return cls(grid, [np.zeros(shape, dtype=bool) for shape in grid.shapes()])

    @classmethod
    def full(cls, grid: TileGrid) -> 'TileRegion':
        return cls(grid, [np.ones(shape, dtype=bool) for shape in grid.shapes()])

    @classmethod
    def from_predicate(cls, grid: TileGrid, predicate) -> 'TileRegion':
        """predicate(u, t, eta) evaluated on broadcast arrays of one layer"""
        masks = []
        u = grid.u[None, :]
        for layer in grid.layers:
            masks.append(np.broadcast_to(predicate(u, layer.t, layer.etas[:, None]), (layer.size, grid.u_count)).copy())
        return cls(grid, masks)

    def _combine(self, other: 'TileRegion', op) -> 'TileRegion':
        self.grid.require_same(other.grid)
        return TileRegion(self.grid, [op(a, b) for a, b in zip(self.masks, other.masks)])

    def __or__(self, other: 'TileRegion') -> 'TileRegion':
        return self._combine(other, np.logical_or)

    def __and__(self, other: 'TileRegion') -> 'TileRegion':
        return self._combine(other, np.logical_and)

    def __sub__(self, other: 'TileRegion') -> 'TileRegion':
        return self._combine(other, lambda a, b: a & ~b)

    def __invert__(self) -> 'TileRegion':
        return TileRegion(self.grid, [~m for m in self.masks])

    def count(self) -> int:
        return int(sum(m.sum() for m in self.masks))

    def is_empty(self) -> bool:
        return not any(m.any() for m in self.masks)

    def issubset(self, other: 'TileRegion') -> bool:
        return all(not np.any(a & ~b) for a, b in zip(self.masks, other.masks))

    def above(self, epsilon: float) -> 'TileRegion':
        """Tiles with t > epsilon"""
        return TileRegion(self.grid, [m & (layer.t > epsilon) for m, layer in zip(self.masks, self.grid.layers)])


class TileField:
    """One value per tile, stored as (n_eta, n_u) arrays per layer"""

    def __init__(self, grid: TileGrid, values: List[np.ndarray]):
        if [v.shape for v in values] != grid.shapes():
            raise TileGridError("Field values do not match the tile grid")
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: TileGrid) -> 'TileField':
        return cls(grid, [np.zeros(shape) for shape in grid.shapes()])

    @classmethod
    def constant(cls, grid: TileGrid, value: float) -> 'TileField':
        return cls(grid, [np.full(shape, float(value)) for shape in grid.shapes()])

    def __iter__(self) -> Iterator[Tuple[TileLayer, np.ndarray]]:
        return iter(zip(self.grid.layers, self.values))

    def scaled(self, factor) -> 'TileField':
        return TileField(self.grid, [v * factor for v in self.values])

    def modulus(self) -> 'TileField':
        return TileField(self.grid, [np.abs(v) for v in self.values])

    def restricted(self, region: Optional[TileRegion]) -> 'TileField':
        if region is None:
            return self
        self.grid.require_same(region.grid)
        return TileField(self.grid, [np.where(m, v, 0.0) for v, m in zip(self.values, region.masks)])

    def sup(self, region: Optional[TileRegion] = None) -> float:
        field = self.restricted(region)
        return max((float(np.max(np.abs(v))) if v.size else 0.0) for v in field.values)

    def integral(self, region: Optional[TileRegion] = None, power: float = 1.0) -> float:
        """sum |value|^power * du dt deta over the region"""
        field = self.restricted(region)
        total = 0.0
        for index, v in enumerate(field.values):
            if v.size:
                total += float(np.sum(np.abs(v) ** power)) * self.grid.layer_weight(index)
        return total

    def product(self, other: 'TileField') -> 'TileField':
        self.grid.require_same(other.grid)
        return TileField(self.grid, [a * b for a, b in zip(self.values, other.values)])

    def support(self) -> TileRegion:
        return TileRegion(self.grid, [v != 0 for v in self.values])

    def to_frame(self) -> pd.DataFrame:
        """Flat u,t,eta,value table for CSV dumps"""
        frames = []
        u = self.grid.u
        for layer, v in self:
            eta_grid, u_grid = np.meshgrid(layer.etas, u, indexing='ij')
            frames.append(pd.DataFrame({
                'u': u_grid.ravel(),
                't': np.full(v.size, layer.t),
                'eta': eta_grid.ravel(),
                'value': np.abs(v).ravel(),
            }))
        if not frames:
            return pd.DataFrame(columns=['u', 't', 'eta', 'value'])
        return pd.concat(frames, ignore_index=True)
