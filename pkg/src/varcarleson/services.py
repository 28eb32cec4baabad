# src/varcarleson/services.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from signal_core.grids import FrequencyGrid, SampledSignal
from signal_core.services import Spectrum, prefix_partial_integrals, spectrum
from .exceptions import ExponentError, FrequencyGridTooSmall
from .partitions import LinearizationData, VariationPartition

logger = logging.getLogger(__name__)


def check_variation_exponent(r: float):
    if not r > 1:
        raise ExponentError(f"Variation exponent must satisfy r > 1, got {r}")
    if r <= 2:
        logger.warning(f"r = {r} lies outside (2, inf); C_r is not bounded there, results are exploratory")


def _check_grid(grid: FrequencyGrid):
    if len(grid) < 2:
        raise FrequencyGridTooSmall(f"Frequency grid has {len(grid)} point(s); at least 2 are required")


@dataclass(frozen=True)
class VariationResult:
    value: float
    partition: VariationPartition

    def as_dict(self) -> dict:
        return {'value': float(self.value), 'partition': self.partition.as_list()}


def partition_variation_value(f: SampledSignal, x: float, partition: VariationPartition, r: float,
                              spec: Optional[Spectrum] = None) -> float:
    """(sum_j |S(xi_{j-1}, xi_j, x)|^r)^{1/r}"""
    check_variation_exponent(r)
    prefix = prefix_partial_integrals(f, partition.points, [x], spec=spec)[0]
    total = 0.0
    for j in range(1, partition.indices.size):
        total = total + abs(prefix[j] - prefix[j - 1]) ** r
    return total ** (1.0 / r)


def _variation_tables(prefix: np.ndarray, r: float) -> Tuple[np.ndarray, np.ndarray]:
    """Forward DP over the grid for every row of prefix at once

    best[:, j] is the largest sum of |S|^r over partitions of [xi_0, xi_j]
    accumulated left to right; parent[:, j] is the smallest maximizing
    predecessor.
    """
    rows, size = prefix.shape
    best = np.zeros((rows, size))
    parent = np.zeros((rows, size), dtype=int)
    for j in range(1, size):
        candidates = best[:, :j] + np.abs(prefix[:, j:j + 1] - prefix[:, :j]) ** r
        parent[:, j] = np.argmax(candidates, axis=1)
        best[:, j] = candidates[np.arange(rows), parent[:, j]]
    return best, parent


def _lexicographic_argmax(prefix_row: np.ndarray, r: float) -> Tuple[float, tuple]:
    size = prefix_row.size
    best = [0.0] * size
    paths = [(0,)] + [None] * (size - 1)
    for j in range(1, size):
        top, path = None, None
        for i in range(j):
            candidate = best[i] + abs(prefix_row[j] - prefix_row[i]) ** r
            extended = paths[i] + (j,)
            if top is None or candidate > top or (candidate == top and extended < path):
                top, path = candidate, extended
        best[j], paths[j] = top, path
    # extending a partition to the last frequency never lowers its sum
    return best[-1], paths[-1]


def var_carleson_dp(f: SampledSignal, x: float, grid: FrequencyGrid, r: float,
                    spec: Optional[Spectrum] = None) -> VariationResult:
    """Exact maximum of the r-variation over partitions drawn from the grid, with its argmax

    Ties are broken toward the lexicographically smallest index sequence.
    """
    check_variation_exponent(r)
    _check_grid(grid)
    prefix = prefix_partial_integrals(f, grid.points, [x], spec=spec)[0]
    total, path = _lexicographic_argmax(prefix, r)
    return VariationResult(value=total ** (1.0 / r), partition=VariationPartition(grid, path))


def variation_profile(f: SampledSignal, grid: FrequencyGrid, r: float, threads: int = 1,
                      spec: Optional[Spectrum] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """C_r f at every sample of f, plus the prefix table and DP parents behind it"""
    check_variation_exponent(r)
    _check_grid(grid)
    spec = spec if spec is not None else spectrum(f)
    prefix = prefix_partial_integrals(f, grid.points, f.x, spec=spec)

    if threads > 1 and f.count > threads:
        chunks = np.array_split(np.arange(f.count), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            tables = list(pool.map(lambda rows: _variation_tables(prefix[rows], r), chunks))
        best = np.concatenate([t[0] for t in tables], axis=0)
        parent = np.concatenate([t[1] for t in tables], axis=0)
    else:
        best, parent = _variation_tables(prefix, r)

    values = np.max(best, axis=1) ** (1.0 / r)
    return values, prefix, parent


def var_carleson_function(f: SampledSignal, grid: FrequencyGrid, r: float, threads: int = 1,
                          spec: Optional[Spectrum] = None) -> SampledSignal:
    values, _, _ = variation_profile(f, grid, r, threads=threads, spec=spec)
    return f.with_samples(values)


def carleson_maximal(f: SampledSignal, grid: FrequencyGrid, spec: Optional[Spectrum] = None) -> SampledSignal:
    """sup_j |S(xi_0, xi_j, x)|, the grid-restricted Carleson operator"""
    _check_grid(grid)
    prefix = prefix_partial_integrals(f, grid.points, f.x, spec=spec)
    return f.with_samples(np.max(np.abs(prefix), axis=1))


def _backtrack(parent_row: np.ndarray) -> list:
    path = [parent_row.size - 1]
    while path[-1] != 0:
        path.append(int(parent_row[path[-1]]))
    return path[::-1]


def argmax_linearization(f: SampledSignal, grid: FrequencyGrid, r: float,
                         spec: Optional[Spectrum] = None) -> LinearizationData:
    """Maximizing partition at every sample with a_j = (|S_j|/V)^{r-1} * conj(phase(S_j))

    With these coefficients sum_j a_j S_j = C_r f(x), so the linearized form
    attains the dual pairing for g >= 0.
    """
    values, prefix, parent = variation_profile(f, grid, r, spec=spec)
    partitions, coefficients = [], []
    for k in range(f.count):
        path = _backtrack(parent[k])
        jumps = prefix[k, path[1:]] - prefix[k, path[:-1]]
        if values[k] > 0:
            magnitude = np.abs(jumps)
            phase = np.where(magnitude > 0, np.conj(jumps) / np.where(magnitude > 0, magnitude, 1.0), 0.0)
            coeffs = (magnitude / values[k]) ** (r - 1.0) * phase
        else:
            coeffs = np.zeros(len(path) - 1, dtype=complex)
        partitions.append(path)
        coefficients.append(coeffs)
    return LinearizationData(grid, f.origin, f.spacing, partitions, coefficients, r)


def linearized_integrand(f: SampledSignal, linearization: LinearizationData,
                         spec: Optional[Spectrum] = None) -> np.ndarray:
    """sum_j a_j(x) S(xi_{j-1}(x), xi_j(x), x) at every sample"""
    linearization.require_matches(f)
    prefix = prefix_partial_integrals(f, linearization.grid.points, f.x, spec=spec)
    rows = np.arange(f.count)[:, None]
    jumps = prefix[rows, linearization.stops] - prefix[rows, linearization.starts]
    return np.sum(linearization.coefficients * jumps, axis=1)


def linearized_form(f: SampledSignal, g: SampledSignal, linearization: LinearizationData, r: float,
                    spec: Optional[Spectrum] = None) -> complex:
    """Lambda(f, g) = int g(x) sum_j a_j(x) S(xi_{j-1}(x), xi_j(x), x) dx"""
    check_variation_exponent(r)
    f.require_same_grid(g)
    integrand = linearized_integrand(f, linearization, spec=spec)
    return complex(np.sum(g.samples * integrand) * f.spacing)


def dual_pairing(f: SampledSignal, g: SampledSignal, grid: FrequencyGrid, r: float, threads: int = 1,
                 spec: Optional[Spectrum] = None) -> float:
    """int C_r f(x) |g(x)| dx"""
    f.require_same_grid(g)
    if g.is_zero():
        return 0.0
    values, _, _ = variation_profile(f, grid, r, threads=threads, spec=spec)
    return float(np.sum(values * np.abs(g.samples)) * f.spacing)
