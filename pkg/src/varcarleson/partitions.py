# src/varcarleson/partitions.py
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from signal_core.grids import FrequencyGrid, SampledSignal
from .exceptions import GridMismatchError, LinearizationError

NORM_TOLERANCE = 1e-12


def conjugate_exponent(r: float) -> float:
    return r / (r - 1.0)


@dataclass(frozen=True, eq=False)
class VariationPartition:
    """Strictly increasing subsequence xi_0 < ... < xi_N of a frequency grid"""
    grid: FrequencyGrid
    indices: np.ndarray

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=int).reshape(-1)
        if indices.size < 2:
            raise LinearizationError("A partition needs at least two frequencies")
        if np.any(np.diff(indices) <= 0):
            raise LinearizationError("Partition indices must be strictly increasing")
        if indices[0] < 0 or indices[-1] >= len(self.grid):
            raise LinearizationError("Partition indices fall outside the frequency grid")
        indices = indices.copy()
        indices.setflags(write=False)
        object.__setattr__(self, 'indices', indices)

    @property
    def points(self) -> np.ndarray:
        return self.grid.points[self.indices]

    @property
    def jumps(self) -> int:
        return int(self.indices.size - 1)

    def as_list(self) -> list:
        return [float(p) for p in self.points]


class LinearizationData:
    """Measurable choice x -> (partition, coefficients) on the sample grid of a signal

    Coefficients are normalized on construction so that every row has
    l^{r'} norm exactly one; a row of zeros becomes a unit weight on its
    first interval. Evaluation uses padded index arrays: slot j of row k
    covers [grid[starts[k, j]], grid[stops[k, j]]) and unused slots carry a
    zero coefficient.
    """

    def __init__(self, grid: FrequencyGrid, origin: float, spacing: float,
                 partitions: Sequence[Sequence[int]], coefficients: Sequence[Sequence[complex]], r: float):
        if len(partitions) != len(coefficients):
            raise LinearizationError("One coefficient vector per sample point is required")
        self.grid = grid
        self.origin = float(origin)
        self.spacing = float(spacing)
        self.r = float(r)
        self.partitions: List[VariationPartition] = [VariationPartition(grid, p) for p in partitions]

        width = max(p.jumps for p in self.partitions) if self.partitions else 1
        count = len(self.partitions)
        self.starts = np.zeros((count, width), dtype=int)
        self.stops = np.zeros((count, width), dtype=int)
        self.coefficients = np.zeros((count, width), dtype=complex)
        dual = conjugate_exponent(self.r)
        for k, (partition, coeffs) in enumerate(zip(self.partitions, coefficients)):
            coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
            if coeffs.size != partition.jumps:
                raise LinearizationError(
                    f"Sample {k}: {partition.jumps} intervals but {coeffs.size} coefficients"
                )
            norm = np.sum(np.abs(coeffs) ** dual) ** (1.0 / dual)
            if norm == 0:
                coeffs = np.zeros(partition.jumps, dtype=complex)
                coeffs[0] = 1.0
            else:
                coeffs = coeffs / norm
            jumps = partition.jumps
            self.starts[k, :jumps] = partition.indices[:-1]
            self.stops[k, :jumps] = partition.indices[1:]
            self.coefficients[k, :jumps] = coeffs

    @property
    def count(self) -> int:
        return len(self.partitions)

    def coefficients_at(self, k: int) -> np.ndarray:
        return self.coefficients[k, :self.partitions[k].jumps].copy()

    def lower_frequencies(self) -> np.ndarray:
        """xi_{j-1}(x) per slot, nan for unused slots"""
        return np.where(self.active, self.grid.points[self.starts], np.nan)

    def upper_frequencies(self) -> np.ndarray:
        return np.where(self.active, self.grid.points[self.stops], np.nan)

    @property
    def active(self) -> np.ndarray:
        return self.stops > self.starts

    def dual_norms(self) -> np.ndarray:
        dual = conjugate_exponent(self.r)
        return np.sum(np.abs(self.coefficients) ** dual, axis=1) ** (1.0 / dual)

    def matches(self, f: SampledSignal) -> bool:
        scale = max(abs(self.origin), 1.0)
        return (
            f.count == self.count
            and abs(f.spacing - self.spacing) <= 1e-9 * self.spacing
            and abs(f.origin - self.origin) <= 1e-9 * scale
        )

    def require_matches(self, f: SampledSignal):
        if not self.matches(f):
            raise GridMismatchError(
                f"Linearization defined on ({self.origin}, {self.spacing}, {self.count}) "
                f"but signal lives on ({f.origin}, {f.spacing}, {f.count})"
            )

    def describe(self, k: int) -> dict:
        return {
            'partition': self.partitions[k].as_list(),
            'coefficients': [[float(c.real), float(c.imag)] for c in self.coefficients_at(k)],
        }


def random_linearization(grid: FrequencyGrid, f: SampledSignal, r: float, rng: np.random.Generator,
                         max_jumps: int = 4) -> LinearizationData:
    """Random partitions and coefficients drawn from rng, one per sample of f"""
    size = len(grid)
    if size < 2:
        raise LinearizationError("Random linearizations need at least two grid frequencies")
    partitions, coefficients = [], []
    for _ in range(f.count):
        jumps = int(rng.integers(1, min(max_jumps, size - 1) + 1))
        indices = np.sort(rng.choice(size, size=jumps + 1, replace=False))
        partitions.append(indices)
        coefficients.append(rng.normal(size=jumps) + 1j * rng.normal(size=jumps))
    return LinearizationData(grid, f.origin, f.spacing, partitions, coefficients, r)
