# src/outer_lp/geometry.py
import enum
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Tuple

import numpy as np
from django.conf import settings

from signal_core.grids import Interval
from wavepacket.tiles import Tile, TileGrid, TileRegion
from .exceptions import IncoverableError, TentGeometryError

logger = logging.getLogger(__name__)

# footprint row columns
TENT, LAYER, U0, U1, A0, A1, O0, O1 = range(8)


class TentMembership(str, enum.Enum):
    OUTSIDE = 'outside'
    OVERLAP = 'overlap'
    LACUNARY = 'lacunary'


@dataclass(frozen=True)
class TentGeometry:
    """Theta = [alpha-, alpha+] and its overlap part Theta^o = [beta-, beta+]"""
    theta: Tuple[float, float]
    theta_o: Tuple[float, float]

    def __post_init__(self):
        (alpha_lo, alpha_hi), (beta_lo, beta_hi) = self.theta, self.theta_o
        if not (alpha_lo <= beta_lo <= 0.0 <= beta_hi <= alpha_hi and beta_lo < beta_hi):
            raise TentGeometryError(f"Need 0 in Theta^o within Theta, got Theta={self.theta}, Theta^o={self.theta_o}")

    @classmethod
    def from_settings(cls, b: float = None) -> 'TentGeometry':
        toolkit = settings.CARLESON_TOOLKIT
        b = b if b is not None else toolkit['WAVE_PACKET']['B']
        geometry = toolkit['TENT_GEOMETRY']
        tent_geometry = cls(
            theta=tuple(b * v for v in geometry['THETA']),
            theta_o=tuple(b * v for v in geometry['THETA_O']),
        )
        tent_geometry.require_packet_support(b)
        return tent_geometry

    def require_packet_support(self, b: float):
        if not (self.theta_o[0] <= -b and b <= self.theta_o[1]):
            raise TentGeometryError(f"Theta^o={self.theta_o} must contain (-{b}, {b})")

    @property
    def overlap_width(self) -> float:
        return self.theta_o[1] - self.theta_o[0]

    def in_overlap(self, z):
        return (z >= self.theta_o[0]) & (z <= self.theta_o[1])

    def in_theta(self, z):
        return (z >= self.theta[0]) & (z <= self.theta[1])

    def as_dict(self) -> dict:
        return {'theta': list(self.theta), 'theta_o': list(self.theta_o)}


@dataclass(frozen=True)
class Tent:
    """T(I, xi) above the time-frequency locus (I, xi)"""
    interval: Interval
    xi: float

    @property
    def length(self) -> float:
        return self.interval.length

    def as_dict(self) -> dict:
        return {'interval': self.interval.as_dict(), 'xi': float(self.xi)}


def tent_membership(tile: Tile, tent: Tent, geometry: TentGeometry) -> TentMembership:
    if not tile.t < tent.length or not abs(tile.u - tent.interval.center) < tent.length - tile.t:
        return TentMembership.OUTSIDE
    z = tile.t * (tile.eta - tent.xi)
    if geometry.in_overlap(z):
        return TentMembership.OVERLAP
    if geometry.in_theta(z):
        return TentMembership.LACUNARY
    return TentMembership.OUTSIDE


def _runs(mask: np.ndarray):
    """First index and stop of the (contiguous) True run in each row"""
    present = mask.any(axis=1)
    start = np.argmax(mask, axis=1)
    stop = mask.shape[1] - np.argmax(mask[:, ::-1], axis=1)
    return present, start, stop


def _layer_rows(grid: TileGrid, layer_index: int, intervals: List[Interval], xis: np.ndarray,
                geometry: TentGeometry) -> np.ndarray:
    """Footprint rows (interval index * len(xis) + xi index in the TENT column) for one layer"""
    layer = grid.layers[layer_index]
    if layer.size == 0:
        return np.zeros((0, 8), dtype=np.int64)
    centers = np.array([interval.center for interval in intervals])
    lengths = np.array([interval.length for interval in intervals])
    spatial = (np.abs(grid.u[None, :] - centers[:, None]) < (lengths - layer.t)[:, None]) & (layer.t < lengths)[:, None]
    has_u, u0, u1 = _runs(spatial)
    z = layer.t * (layer.etas[None, :] - xis[:, None])
    has_eta, a0, a1 = _runs(geometry.in_theta(z))
    has_overlap, o0, o1 = _runs(geometry.in_overlap(z))
    o0 = np.where(has_overlap, o0, a0)
    o1 = np.where(has_overlap, o1, a0)
    ci, xj = np.nonzero(has_u[:, None] & has_eta[None, :])
    rows = np.empty((ci.size, 8), dtype=np.int64)
    rows[:, TENT] = ci * xis.size + xj
    rows[:, LAYER] = layer_index
    rows[:, U0], rows[:, U1] = u0[ci], u1[ci]
    rows[:, A0], rows[:, A1] = a0[xj], a1[xj]
    rows[:, O0], rows[:, O1] = o0[xj], o1[xj]
    return rows


def tent_footprint(grid: TileGrid, tent: Tent, geometry: TentGeometry) -> np.ndarray:
    """Index rectangles (layer, u range, Theta rows, Theta^o rows) of the tiles in a tent"""
    parts = [_layer_rows(grid, i, [tent.interval], np.array([tent.xi]), geometry)
             for i in range(len(grid.layers))]
    return np.concatenate(parts) if parts else np.zeros((0, 8), dtype=np.int64)


def footprint_masks(grid: TileGrid, rows: np.ndarray, overlap_only: bool = False) -> List[np.ndarray]:
    masks = [np.zeros(shape, dtype=bool) for shape in grid.shapes()]
    for row in rows:
        lo, hi = (row[O0], row[O1]) if overlap_only else (row[A0], row[A1])
        masks[row[LAYER]][lo:hi, row[U0]:row[U1]] = True
    return masks


class TentFamily:
    """Candidate tents for covers and stopping: dyadic intervals times a xi lattice

    Level -1 is the tile window dilated by 2 (so every tile sits in some tent),
    level k >= 0 holds the 2**k dyadic subintervals of the window, down to the
    last length of at least twice the finest scale. At length |I| the
    frequencies xi run over the lattice |Theta^o|/|I| * Z across the range
    where a tent can meet the grid. Tents without tiles are dropped; the rest
    are ordered by decreasing |I|, then left endpoint, then xi.
    """

    def __init__(self, grid: TileGrid, geometry: TentGeometry, window: Optional[Interval] = None,
                 max_level: Optional[int] = None):
        self.grid = grid
        self.geometry = geometry
        self.window = window or Interval.from_endpoints(grid.u_origin, grid.u_origin + grid.u_count * grid.u_spacing)

        populated = [layer for layer in grid.layers if layer.size]
        t_min = float(min(layer.t for layer in grid.layers))
        eta_lo = min(float(layer.etas[0]) for layer in populated) if populated else 0.0
        eta_hi = max(float(layer.etas[-1]) for layer in populated) if populated else 0.0
        xi_lo = eta_lo - geometry.theta[1] / t_min
        xi_hi = eta_hi - geometry.theta[0] / t_min

        finest = int(np.floor(np.log2(self.window.length / (2.0 * t_min)) + 1e-9))
        if max_level is not None:
            finest = min(finest, max_level)
        finest = max(finest, -1)

        tents, blocks, offset = [], [], 0
        for level in range(-1, finest + 1):
            intervals = [self.window.dilate(2.0)] if level < 0 else self.window.dyadic_children(level)
            length = intervals[0].length
            step = geometry.overlap_width / length
            xis = step * np.arange(np.ceil(xi_lo / step), np.floor(xi_hi / step) + 1)
            if xis.size == 0:
                continue
            for layer_index in range(len(grid.layers)):
                rows = _layer_rows(grid, layer_index, intervals, xis, geometry)
                rows[:, TENT] += offset
                blocks.append(rows)
            tents.extend(Tent(interval, float(xi)) for interval in intervals for xi in xis)
            offset += len(intervals) * xis.size

        rows = np.concatenate(blocks) if blocks else np.zeros((0, 8), dtype=np.int64)
        used, compact = np.unique(rows[:, TENT], return_inverse=True)
        rows[:, TENT] = compact
        order = np.argsort(rows[:, TENT], kind='stable')
        self.rows = rows[order]
        self.tents: List[Tent] = [tents[i] for i in used]
        self.lengths = np.array([tent.length for tent in self.tents])
        bounds = np.searchsorted(self.rows[:, TENT], np.arange(len(self.tents) + 1))
        self._bounds = bounds
        self._weights = np.array([grid.layer_weight(i) for i in range(len(grid.layers))])
        logger.debug(f"Tent family: {len(self.tents)} tents over levels -1..{finest}, {self.rows.shape[0]} footprint rows")

    def __len__(self) -> int:
        return len(self.tents)

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def rows_of(self, index: int) -> np.ndarray:
        return self.rows[self._bounds[index]:self._bounds[index + 1]]

    def region(self, index: int, overlap_only: bool = False) -> TileRegion:
        return TileRegion(self.grid, footprint_masks(self.grid, self.rows_of(index), overlap_only))

    def clear(self, arrays: List[np.ndarray], index: int):
        """Zero the tiles of one tent in per-layer arrays, in place"""
        for row in self.rows_of(index):
            arrays[row[LAYER]][row[A0]:row[A1], row[U0]:row[U1]] = 0

    @cached_property
    def coverage(self) -> TileRegion:
        return TileRegion(self.grid, footprint_masks(self.grid, self.rows))

    def require_covers(self, region: TileRegion):
        self.grid.require_same(region.grid)
        missing = (region - self.coverage).count()
        if missing:
            raise IncoverableError(f"{missing} tiles lie outside every candidate tent")

    def rectangle_totals(self, arrays: List[np.ndarray]) -> np.ndarray:
        """Per tent: sum over layers of layer weight times the array total on the tent's tiles"""
        totals = np.zeros(len(self))
        for layer_index, array in enumerate(arrays):
            picks = self.rows[:, LAYER] == layer_index
            if not np.any(picks):
                continue
            rows = self.rows[picks]
            table = np.zeros((array.shape[0] + 1, array.shape[1] + 1))
            table[1:, 1:] = np.cumsum(np.cumsum(array, axis=0), axis=1)
            block = (table[rows[:, A1], rows[:, U1]] - table[rows[:, A0], rows[:, U1]]
                     - table[rows[:, A1], rows[:, U0]] + table[rows[:, A0], rows[:, U0]])
            totals += np.bincount(rows[:, TENT], weights=block * self._weights[layer_index], minlength=len(self))
        return totals

    def describe(self, index: int) -> dict:
        rows = self.rows_of(index)
        spatial = rows[:, U1] - rows[:, U0]
        overlap = int(np.sum((rows[:, O1] - rows[:, O0]) * spatial))
        total = int(np.sum((rows[:, A1] - rows[:, A0]) * spatial))
        return {**self.tents[index].as_dict(), 'overlap_tiles': overlap, 'lacunary_tiles': total - overlap}
