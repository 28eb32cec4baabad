# src/outer_lp/services.py
import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from signal_core.exceptions import ExponentError
from wavepacket.tiles import TileField, TileRegion
from .geometry import A0, A1, LAYER, O0, O1, U0, U1, Tent, TentFamily, TentGeometry, footprint_masks, tent_footprint

logger = logging.getLogger(__name__)

LAMBDA_FLOOR = 1e-6
LAMBDA_LEVELS = 63
HOLDER_SLACK = 1e-9


class SizeKind(str, enum.Enum):
    """s^e pairs with F(f), s^m with A(g)"""
    E = 'e'
    M = 'm'


def tent_size(values: Sequence[np.ndarray], rows: np.ndarray, weights: np.ndarray, length: float,
              kind: SizeKind) -> float:
    """Size of a nonnegative field on the tiles listed by footprint rows

    s^e: (|I|^-1 sum_{lacunary} F^2 w)^(1/2) + max_T F
    s^m: (|I|^-1 sum_T A^2 w)^(1/2) + |I|^-1 sum_{overlap} A w
    """
    square = 0.0
    linear = 0.0
    top = 0.0
    for row in rows:
        w = weights[row[LAYER]]
        block = values[row[LAYER]][row[A0]:row[A1], row[U0]:row[U1]]
        if block.size == 0:
            continue
        if kind is SizeKind.E:
            below = block[:row[O0] - row[A0]]
            above = block[row[O1] - row[A0]:]
            square += (float(np.sum(below ** 2)) + float(np.sum(above ** 2))) * w
            top = max(top, float(block.max()))
        else:
            square += float(np.sum(block ** 2)) * w
            linear += float(np.sum(block[row[O0] - row[A0]:row[O1] - row[A0]])) * w
    if kind is SizeKind.E:
        return float(np.sqrt(square / length)) + top
    return float(np.sqrt(square / length)) + linear / length


def _single_tent_size(F: TileField, tent: Tent, geometry: TentGeometry, kind: SizeKind) -> float:
    rows = tent_footprint(F.grid, tent, geometry)
    weights = np.array([F.grid.layer_weight(i) for i in range(len(F.grid.layers))])
    return tent_size(F.modulus().values, rows, weights, tent.length, kind)


def size_e(F: TileField, tent: Tent, geometry: TentGeometry) -> float:
    return _single_tent_size(F, tent, geometry, SizeKind.E)


def size_m(A: TileField, tent: Tent, geometry: TentGeometry) -> float:
    return _single_tent_size(A, tent, geometry, SizeKind.M)


def family_sizes(F: TileField, kind: SizeKind, family: TentFamily) -> np.ndarray:
    """Size of F on every candidate tent"""
    F.grid.require_same(family.grid)
    values = F.modulus().values
    return np.array([tent_size(values, family.rows_of(j), family.weights, family.lengths[j], kind)
                     for j in range(len(family))])


@dataclass
class TentCover:
    """Indices of candidate tents whose union is taken as a cover"""
    family: TentFamily
    indices: List[int] = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(np.sum(self.family.lengths[self.indices])) if self.indices else 0.0

    @property
    def tents(self) -> List[Tent]:
        return [self.family.tents[j] for j in self.indices]

    def region(self) -> TileRegion:
        rows = np.concatenate([self.family.rows_of(j) for j in self.indices]) if self.indices \
            else np.zeros((0, 8), dtype=np.int64)
        return TileRegion(self.family.grid, footprint_masks(self.family.grid, rows))

    def covers(self, region: TileRegion) -> bool:
        return region.issubset(self.region())

    def merged(self, other: 'TentCover') -> 'TentCover':
        return TentCover(self.family, sorted(set(self.indices) | set(other.indices)))


def greedy_cover(region: TileRegion, family: TentFamily) -> TentCover:
    """Repeatedly take the tent covering the most uncovered weight per unit |I|

    Ties go to the earliest tent in family order. Raises IncoverableError when
    some tile of the region lies outside every candidate tent.
    """
    family.require_covers(region)
    uncovered = [m.copy() for m in region.masks]
    cover = TentCover(family)
    while any(m.any() for m in uncovered):
        gain = family.rectangle_totals(uncovered)
        index = int(np.argmax(gain / family.lengths))
        cover.indices.append(index)
        family.clear(uncovered, index)
    logger.debug(f"Greedy cover: {len(cover.indices)} tents, premeasure {cover.total:.6g}")
    return cover


def outer_measure(region: TileRegion, family: TentFamily, known_covers: Iterable[TentCover] = ()) -> float:
    """Upper bound on mu(region): the greedy cover, or any known cover of the region that does better

    Passing the cover of a superset keeps the bound monotone, passing merged
    covers of the parts keeps it subadditive.
    """
    if region.is_empty():
        family.grid.require_same(region.grid)
        return 0.0
    best = greedy_cover(region, family).total
    for cover in known_covers:
        if cover.total < best and cover.covers(region):
            best = cover.total
    return best


@dataclass
class SuperLevelSet:
    """Removed tents E with sup_T s(F 1_{E^c})(T) <= lambda on the candidate family"""
    measure: float
    cover: TentCover

    def region(self) -> TileRegion:
        return self.cover.region()


def super_level_set(F: TileField, kind: SizeKind, lam: float, family: TentFamily,
                    initial_sizes: Optional[np.ndarray] = None) -> SuperLevelSet:
    """Walk the tents in family order, removing every tent whose current size exceeds lambda

    Sizes only drop as tiles are removed, so a tent found at or below lambda
    stays there and one ordered pass leaves every tent at or below lambda.
    The walk equals repeatedly removing the first violating tent.
    """
    initial = initial_sizes if initial_sizes is not None else family_sizes(F, kind, family)
    values = [v.copy() for v in F.modulus().values]
    cover = TentCover(family)
    for j in np.flatnonzero(initial > lam):
        if tent_size(values, family.rows_of(j), family.weights, family.lengths[j], kind) > lam:
            cover.indices.append(int(j))
            family.clear(values, j)
    return SuperLevelSet(measure=cover.total, cover=cover)


def super_level_measure(F: TileField, kind: SizeKind, lam: float, family: TentFamily,
                        initial_sizes: Optional[np.ndarray] = None) -> float:
    return super_level_set(F, kind, lam, family, initial_sizes).measure


def super_level_profile(F: TileField, kind: SizeKind, levels: Sequence[float], family: TentFamily,
                        initial_sizes: Optional[np.ndarray] = None) -> List[SuperLevelSet]:
    """Super-level sets on an increasing lambda grid

    A set that brings every size to or below lambda' does so for every
    lambda above lambda', so each level keeps the smallest set found so far.
    The measures are nonincreasing in lambda.
    """
    levels = np.asarray(levels, dtype=float)
    if np.any(np.diff(levels) < 0):
        raise ExponentError("Lambda levels must be increasing")
    initial = initial_sizes if initial_sizes is not None else family_sizes(F, kind, family)
    profile: List[SuperLevelSet] = []
    for lam in levels:
        current = super_level_set(F, kind, lam, family, initial)
        if profile and profile[-1].measure <= current.measure:
            current = profile[-1]
        profile.append(current)
    return profile


def lambda_levels(top: float) -> np.ndarray:
    """top * 10^(-6 + 6k/62) for k = 0..62, then 2 * top"""
    exponents = np.log10(LAMBDA_FLOOR) * (1.0 - np.arange(LAMBDA_LEVELS) / (LAMBDA_LEVELS - 1))
    return np.append(top * 10.0 ** exponents, 2.0 * top)


def outer_lp_norm(F: TileField, kind: SizeKind, p: float, family: TentFamily) -> float:
    """(p int lambda^(p-1) mu(s(F) > lambda) d lambda)^(1/p) on the geometric lambda grid

    Each lambda interval takes the measure at its left end, the piece below
    the floor contributes mu(lambda_0) lambda_0^p.
    """
    if not p > 0:
        raise ExponentError(f"Outer L^p needs p > 0, got {p}")
    initial = family_sizes(F, kind, family)
    top = float(initial.max()) if initial.size else 0.0
    if top == 0.0:
        return 0.0
    levels = lambda_levels(top)
    measures = np.array([entry.measure for entry in super_level_profile(F, kind, levels, family, initial)])
    powers = levels ** p
    total = measures[0] * powers[0] + float(np.sum(measures[:-1] * np.diff(powers)))
    return float(total ** (1.0 / p))


@dataclass(frozen=True)
class HolderCheck:
    lhs: float
    rhs: float
    passed: bool

    def as_dict(self) -> dict:
        return {'lhs': self.lhs, 'rhs': self.rhs, 'pass': self.passed}


def outer_holder_check(F: TileField, A: TileField, tent: Tent, geometry: TentGeometry) -> HolderCheck:
    """sum_T |F A| w against 2 |I| s^e(F)(T) s^m(A)(T)"""
    F.grid.require_same(A.grid)
    region = TileRegion(F.grid, footprint_masks(F.grid, tent_footprint(F.grid, tent, geometry)))
    lhs = F.modulus().product(A.modulus()).integral(region)
    rhs = 2.0 * tent.length * size_e(F, tent, geometry) * size_m(A, tent, geometry)
    return HolderCheck(lhs=lhs, rhs=rhs, passed=bool(lhs <= rhs * (1.0 + HOLDER_SLACK)))


def outer_holder_integral_check(F: TileField, A: TileField, region: Optional[TileRegion], sigma: float, tau: float,
                                family: TentFamily) -> dict:
    """int_region |F A| against ||F 1_region||_{L^sigma(s^e)} ||A 1_region||_{L^tau(s^m)}

    The outer Holder constant is not quantified, so the ratio is reported.
    """
    if not abs(1.0 / sigma + 1.0 / tau - 1.0) < 1e-12:
        raise ExponentError(f"sigma={sigma} and tau={tau} are not Holder dual")
    lhs = F.modulus().product(A.modulus()).integral(region)
    rhs = (outer_lp_norm(F.restricted(region), SizeKind.E, sigma, family)
           * outer_lp_norm(A.restricted(region), SizeKind.M, tau, family))
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else float('inf'))
    return {'integral': lhs, 'outer_norm_product': rhs, 'ratio': ratio, 'sigma': sigma, 'tau': tau}
