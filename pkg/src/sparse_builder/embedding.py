# src/sparse_builder/embedding.py
import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Union

import numpy as np

from outer_lp.services import SizeKind, outer_lp_norm
from signal_core.grids import Interval, SampledSignal
from signal_core.services import local_average
from wavepacket.services import embed_A_field, embed_F_field
from wavepacket.tiles import TileField, TileGrid, TileRegion
from .context import SparseContext
from .intervals import CellSet, dyadic_candidates

logger = logging.getLogger(__name__)


class EmbeddingKind(str, enum.Enum):
    """energy: F(f) with s^e and exponent sigma; mass: A(g) with s^m and exponent tau"""
    ENERGY = 'energy'
    MASS = 'mass'


def _components(open_set: Union[CellSet, Iterable[Interval]]) -> List[Interval]:
    return open_set.components() if isinstance(open_set, CellSet) else list(open_set)


def spatial_tent_masks(grid: TileGrid, open_set: Union[CellSet, Iterable[Interval]]) -> np.ndarray:
    """(layer, u) mask of the union of T(I) over the components I"""
    masks = np.zeros((len(grid.layers), grid.u_count), dtype=bool)
    u = grid.u
    for interval in _components(open_set):
        for index, layer in enumerate(grid.layers):
            if layer.t < interval.length:
                masks[index] |= np.abs(u - interval.center) < interval.length - layer.t
    return masks


def _region_from_spatial(grid: TileGrid, masks: np.ndarray) -> TileRegion:
    return TileRegion(grid, [np.broadcast_to(row, (layer.size, grid.u_count)).copy()
                             for row, layer in zip(masks, grid.layers)])


def tent_over_open_set(open_set: Union[CellSet, Iterable[Interval]], grid: TileGrid) -> TileRegion:
    """T(E): union over the components I of {t < |I|, |u - c(I)| < |I| - t}, every eta

    Every interval inside E sits in one component J and T(I) lies in T(J),
    so the components alone decide the region.
    """
    return _region_from_spatial(grid, spatial_tent_masks(grid, open_set))


def embedding_field(h: SampledSignal, kind: EmbeddingKind, context: SparseContext) -> TileField:
    if kind is EmbeddingKind.ENERGY:
        return embed_F_field(h, context.grid, context.params)
    return embed_A_field(h, context.grid, context.linearization, context.params)


def embedding_scale(h: SampledSignal, Q: Interval, kind: EmbeddingKind, context: SparseContext) -> float:
    """|Q|^{1/sigma} <h>_{3Q,p} or |Q|^{1/tau} <h>_{3Q,1}"""
    if kind is EmbeddingKind.ENERGY:
        return Q.length ** (1.0 / context.sigma) * local_average(h, Q.dilate(3.0), context.p)
    return Q.length ** (1.0 / context.tau) * local_average(h, Q.dilate(3.0), 1.0)


@dataclass
class RemovalSequence:
    """Greedy removals for one node, independent of the budget

    ratios[j] is the restricted embedding norm over the scale after the
    first j removals; a budget keeps the longest prefix that fits and the
    best ratio inside it, so a larger budget never does worse.
    """
    kind: EmbeddingKind
    intervals: List[Interval] = field(default_factory=list)
    ratios: List[float] = field(default_factory=lambda: [0.0])
    measures: List[float] = field(default_factory=lambda: [0.0])

    def prefix(self, budget: float) -> int:
        """Best admissible prefix length for a removal budget c|Q|"""
        admissible = [j for j, measure in enumerate(self.measures) if measure <= budget * (1 + 1e-12)]
        stop = max(admissible) + 1
        return int(np.argmin(self.ratios[:stop]))


def _energy_density(field: TileField, exponent: float) -> np.ndarray:
    """(layer, u) array of w * sum_eta |F|^exponent"""
    rows = []
    for index, values in enumerate(field.values):
        weight = field.grid.layer_weight(index)
        rows.append(np.sum(np.abs(values) ** exponent, axis=0) * weight if values.size
                    else np.zeros(field.grid.u_count))
    return np.array(rows)


def removal_sequence(h: SampledSignal, Q: Interval, kind: EmbeddingKind, context: SparseContext,
                     field: Optional[TileField] = None) -> RemovalSequence:
    """Repeatedly excise the dyadic subinterval of Q whose tent carries the most size per unit length

    h is restricted to 3Q first. Stops after the configured number of
    removals or once the remaining tiles carry nothing.
    """
    h_Q = h.restrict(Q.dilate(3.0))
    sequence = RemovalSequence(kind)
    scale = embedding_scale(h_Q, Q, kind, context)
    if scale == 0:
        return sequence
    field = field if field is not None else embedding_field(h_Q, kind, context)
    exponent = context.sigma if kind is EmbeddingKind.ENERGY else context.tau
    size_kind = SizeKind.E if kind is EmbeddingKind.ENERGY else SizeKind.M
    grid = context.grid

    base = spatial_tent_masks(grid, [Q])
    density = _energy_density(field, exponent)
    max_level = int(np.ceil(np.log2(max(Q.length / h.spacing, 1.0))))
    candidates = dyadic_candidates(h, Q, max_level)
    candidate_masks = [spatial_tent_masks(grid, [J]) for J in candidates]
    removed = CellSet.empty(h)
    removed_masks = np.zeros_like(base)

    def ratio() -> float:
        region = _region_from_spatial(grid, base & ~removed_masks)
        return outer_lp_norm(field.restricted(region), size_kind, exponent, context.family) / scale

    sequence.ratios = [ratio()]
    for _ in range(context.iteration.max_removals):
        live = base & ~removed_masks
        excess = np.array([np.sum(density[live & mask]) / J.length for J, mask in zip(candidates, candidate_masks)])
        if excess.size == 0 or not np.max(excess) > 0:
            break
        pick = int(np.argmax(excess))
        J = candidates[pick]
        removed = removed | CellSet.from_interval(h, J)
        removed_masks |= candidate_masks[pick]
        sequence.intervals.append(J)
        sequence.measures.append(removed.measure)
        sequence.ratios.append(ratio())
    logger.debug(f"{kind.value} removals on {Q}: ratios {[round(x, 4) for x in sequence.ratios]}")
    return sequence


@dataclass
class EmbeddingExceptionalSet:
    """Open set W with |W| <= c|Q| and the embedding constant it achieves"""
    kind: EmbeddingKind
    cells: CellSet
    budget: float
    target: float
    achieved: float
    removals: int

    @property
    def satisfied(self) -> bool:
        return self.achieved <= self.target

    def as_dict(self) -> dict:
        return {
            'kind': self.kind.value,
            'components': self.cells.as_list(),
            'measure': self.cells.measure,
            'budget': self.budget,
            'target_k': self.target,
            'achieved_k': self.achieved,
            'satisfied': self.satisfied,
            'removals': self.removals,
        }


def embedding_exceptional_set(h: SampledSignal, Q: Interval, kind: EmbeddingKind, c: float,
                              context: SparseContext,
                              sequence: Optional[RemovalSequence] = None) -> EmbeddingExceptionalSet:
    """W with |W| <= c|Q| bounding the restricted embedding norm by K |Q|^{1/exponent} <h>_{3Q}

    When the budget runs out first, the smallest constant reached is
    reported and the set is still returned.
    """
    kind = EmbeddingKind(kind)
    sequence = sequence if sequence is not None else removal_sequence(h, Q, kind, context)
    count = sequence.prefix(c * Q.length)
    cells = CellSet.from_intervals(h, sequence.intervals[:count])
    result = EmbeddingExceptionalSet(kind=kind, cells=cells, budget=c, target=context.iteration.embedding_k,
                                     achieved=float(sequence.ratios[count]), removals=count)
    if not result.satisfied:
        logger.debug(f"{kind.value} embedding on {Q}: budget {c:.3g} reaches K={result.achieved:.4g} "
                       f"above the target {result.target:.4g}")
    return result
