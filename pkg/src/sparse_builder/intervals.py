# src/sparse_builder/intervals.py
from dataclasses import dataclass, field
from typing import Iterable, List

import numpy as np

from signal_core.exceptions import GridMismatchError
from signal_core.grids import Interval, SampledSignal

LATTICE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class CellSet:
    """Finite union of sampling cells [x_i, x_i + dx) of one signal grid

    Open sets of the construction live here: every interval endpoint is a
    lattice point, so unions, differences and measures are exact cell counts.
    """
    origin: float
    spacing: float
    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool).reshape(-1)
        mask.setflags(write=False)
        object.__setattr__(self, 'mask', mask)

    @classmethod
    def empty(cls, f: SampledSignal) -> 'CellSet':
        return cls(f.origin, f.spacing, np.zeros(f.count, dtype=bool))

    @classmethod
    def from_interval(cls, f: SampledSignal, interval: Interval) -> 'CellSet':
        return cls(f.origin, f.spacing, f.mask(interval))

    @classmethod
    def from_intervals(cls, f: SampledSignal, intervals: Iterable[Interval]) -> 'CellSet':
        mask = np.zeros(f.count, dtype=bool)
        for interval in intervals:
            mask |= f.mask(interval)
        return cls(f.origin, f.spacing, mask)

    def with_mask(self, mask: np.ndarray) -> 'CellSet':
        return CellSet(self.origin, self.spacing, mask)

    def _require_same(self, other: 'CellSet'):
        if self.mask.size != other.mask.size or abs(self.spacing - other.spacing) > LATTICE_TOLERANCE * self.spacing \
                or abs(self.origin - other.origin) > LATTICE_TOLERANCE * max(1.0, abs(self.origin)):
            raise GridMismatchError("Cell sets live on different sampling grids")

    def __or__(self, other: 'CellSet') -> 'CellSet':
        self._require_same(other)
        return self.with_mask(self.mask | other.mask)

    def __and__(self, other: 'CellSet') -> 'CellSet':
        self._require_same(other)
        return self.with_mask(self.mask & other.mask)

    def __sub__(self, other: 'CellSet') -> 'CellSet':
        self._require_same(other)
        return self.with_mask(self.mask & ~other.mask)

    @property
    def cell_count(self) -> int:
        return int(self.mask.sum())

    @property
    def measure(self) -> float:
        return self.cell_count * self.spacing

    def is_empty(self) -> bool:
        return not self.mask.any()

    def issubset(self, other: 'CellSet') -> bool:
        self._require_same(other)
        return not np.any(self.mask & ~other.mask)

    def isdisjoint(self, other: 'CellSet') -> bool:
        self._require_same(other)
        return not np.any(self.mask & other.mask)

    def runs(self) -> List[tuple]:
        """(first cell, stop cell) of every maximal run"""
        edges = np.diff(np.concatenate([[0], self.mask.astype(np.int8), [0]]))
        starts = np.flatnonzero(edges == 1)
        stops = np.flatnonzero(edges == -1)
        return [(int(a), int(b)) for a, b in zip(starts, stops)]

    def components(self) -> List[Interval]:
        """Connected components as open intervals (x_a, x_b)"""
        return [Interval.from_endpoints(self.origin + self.spacing * a, self.origin + self.spacing * b)
                for a, b in self.runs()]

    def as_list(self) -> list:
        return [component.as_dict() for component in self.components()]


def on_lattice(f: SampledSignal, interval: Interval) -> bool:
    tolerance = LATTICE_TOLERANCE * max(1.0, abs(interval.left), abs(interval.right))
    return abs(f.snap(interval.left) - interval.left) <= tolerance \
        and abs(f.snap(interval.right) - interval.right) <= tolerance


def dyadic_candidates(f: SampledSignal, interval: Interval, max_level: int) -> List[Interval]:
    """Lattice-snapped dyadic subintervals of a lattice interval, coarsest first, at least one cell long"""
    seen, candidates = set(), []
    for level in range(1, max_level + 1):
        if interval.length / 2 ** level < f.spacing * (1 - LATTICE_TOLERANCE):
            break
        for child in interval.dyadic_children(level):
            snapped = f.snap_interval(child)
            key = (round((snapped.left - f.origin) / f.spacing), round((snapped.right - f.origin) / f.spacing))
            if key in seen:
                continue
            seen.add(key)
            candidates.append(snapped)
    return candidates
