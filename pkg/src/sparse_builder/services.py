# src/sparse_builder/services.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.exceptions import InvariantViolation, SignalInputError
from signal_core.grids import FrequencyGrid, Interval, SampledSignal
from signal_core.services import local_average, maximal_profile
from varcarleson.services import dual_pairing
from wavepacket.services import PACKET_REACH, bilinear_form_B, embed_F_field, packet_tail
from wavepacket.params import WavePacketParams, chi
from wavepacket.tiles import TileField, TileGrid, TileRegion
from .context import SparseContext
from .embedding import (
    EmbeddingExceptionalSet, EmbeddingKind, RemovalSequence, embedding_exceptional_set, embedding_field,
    removal_sequence, tent_over_open_set,
)
from .exceptions import ConstructionFailure, GenerationCapExceeded, IterationConfigError, SparseCertificateError
from .intervals import LATTICE_TOLERANCE, CellSet, on_lattice

logger = logging.getLogger(__name__)

DECOMPOSITION_SLACK = 1e-9
# FFT round-off in packet transforms, relative to the peak of |psi|
TAIL_FLOOR = 1e-10


@dataclass
class ExceptionalSet:
    """E_Q = Q cap (E_f u E_g) with the budget c that met the packing bound"""
    cells: CellSet
    parent: Interval
    budget: float
    halvings: int
    level_f: float
    level_g: float
    energy: Optional[EmbeddingExceptionalSet] = None
    mass: Optional[EmbeddingExceptionalSet] = None

    @property
    def intervals(self) -> List[Interval]:
        return self.cells.components()

    @property
    def measure(self) -> float:
        return self.cells.measure

    @property
    def packing_ratio(self) -> float:
        return self.measure / self.parent.length

    def as_dict(self) -> dict:
        return {
            'parent': self.parent.as_dict(),
            'intervals': self.cells.as_list(),
            'budget': self.budget,
            'halvings': self.halvings,
            'packing_ratio': self.packing_ratio,
            'embeddings': [e.as_dict() for e in (self.energy, self.mass) if e is not None],
        }


def _require_lattice(f: SampledSignal, interval: Interval):
    if not on_lattice(f, interval):
        raise IterationConfigError(f"Interval ({interval.left}, {interval.right}) does not sit on the sampling lattice")


def exceptional_set(f: SampledSignal, g: SampledSignal, Q: Interval, p: float, c: float, context: SparseContext,
                    sequences: Optional[Tuple[RemovalSequence, RemovalSequence]] = None) -> ExceptionalSet:
    """Q cap (U u {M_p f > <f>_{3Q,p}/c} u V u {M_1 g > <g>_{3Q,1}/c}), halving c until packed

    f and g are restricted to 3Q. The packing bound is 2^-k |Q| with k the
    configured packing exponent; raises ConstructionFailure when it is still
    missed after the configured number of halvings.
    """
    if not 0 < c < 1:
        raise IterationConfigError(f"Budget must lie in (0, 1), got {c}")
    f.require_same_grid(g)
    _require_lattice(f, Q)
    three_Q = Q.dilate(3.0)
    f_Q, g_Q = f.restrict(three_Q), g.restrict(three_Q)
    average_f = local_average(f_Q, three_Q, p)
    average_g = local_average(g_Q, three_Q, 1.0)
    maximal_f = maximal_profile(f_Q, p)
    maximal_g = maximal_profile(g_Q, 1.0)
    energy, mass = sequences if sequences is not None else (
        removal_sequence(f_Q, Q, EmbeddingKind.ENERGY, context),
        removal_sequence(g_Q, Q, EmbeddingKind.MASS, context),
    )

    inside = CellSet.from_interval(f, Q)
    limit = context.iteration.packing * Q.length
    budget = c
    for halving in range(context.iteration.max_halvings + 1):
        level_f, level_g = average_f / budget, average_g / budget
        U = embedding_exceptional_set(f_Q, Q, EmbeddingKind.ENERGY, budget, context, energy)
        V = embedding_exceptional_set(g_Q, Q, EmbeddingKind.MASS, budget, context, mass)
        flagged = inside.with_mask(inside.mask & ((maximal_f > level_f) | (maximal_g > level_g)))
        cells = inside & (flagged | U.cells | V.cells)
        if cells.measure <= limit * (1 + LATTICE_TOLERANCE):
            result = ExceptionalSet(cells=cells, parent=Q, budget=budget, halvings=halving,
                                    level_f=level_f, level_g=level_g, energy=U, mass=V)
            logger.debug(f"Exceptional set of {Q}: {len(result.intervals)} components, "
                         f"packing {result.packing_ratio:.3g}, c={budget:.3g}")
            return result
        budget /= 2.0
    raise ConstructionFailure(
        f"No budget below {c} packs the exceptional set of ({Q.left}, {Q.right}) "
        f"after {context.iteration.max_halvings} halvings"
    )


def stopping_bounds(f: SampledSignal, g: SampledSignal, exceptional: ExceptionalSet, p: float) -> dict:
    """inf over closed 3I of M_p f and M_1 g against the levels <.>_{3Q}/c, for every child I"""
    three_Q = exceptional.parent.dilate(3.0)
    maximal_f = maximal_profile(f.restrict(three_Q), p)
    maximal_g = maximal_profile(g.restrict(three_Q), 1.0)
    x = f.x
    rows = []
    for child in exceptional.intervals:
        wide = child.dilate(3.0)
        tolerance = LATTICE_TOLERANCE * f.spacing
        near = (x >= wide.left - tolerance) & (x <= wide.right + tolerance)
        rows.append({
            'interval': child.as_dict(),
            'inf_maximal_f': float(maximal_f[near].min()),
            'inf_maximal_g': float(maximal_g[near].min()),
        })
    holds = all(row['inf_maximal_f'] <= exceptional.level_f and row['inf_maximal_g'] <= exceptional.level_g
                for row in rows)
    return {'children': rows, 'level_f': exceptional.level_f, 'level_g': exceptional.level_g, 'holds': holds}


@dataclass
class PrincipalStep:
    """One node of the stopping time: its children, local term and decomposition check"""
    interval: Interval
    exceptional: ExceptionalSet
    local_term: float
    scale: float
    decomposition: Dict[str, float]

    @property
    def children(self) -> List[Interval]:
        return self.exceptional.intervals

    @property
    def local_ratio(self) -> float:
        """local term over |Q| <f>_{3Q,p} <g>_{3Q,1}"""
        if self.scale > 0:
            return self.local_term / self.scale
        return 0.0 if self.local_term == 0 else float('inf')

    def as_dict(self) -> dict:
        return {
            'interval': self.interval.as_dict(),
            'children': [child.as_dict() for child in self.children],
            'local_term': self.local_term,
            'local_ratio': self.local_ratio,
            'decomposition': self.decomposition,
            'exceptional_set': self.exceptional.as_dict(),
        }


def principal_iteration(f: SampledSignal, g: SampledSignal, Q: Interval, context: SparseContext) -> PrincipalStep:
    """Children I_Q and the local term B over T(Q) minus T(E_Q), both for f 1_{3Q} and g 1_{3Q}

    Also checks B_Q(f 1_{3Q}, g 1_{3Q}) <= local + sum_I B_I(f 1_{3I}, g 1_{3I}) + tails, with the
    tails made of the in/out restrictions to 3I other than (in, in).
    """
    three_Q = Q.dilate(3.0)
    f_Q, g_Q = f.restrict(three_Q), g.restrict(three_Q)
    F = embed_F_field(f_Q, context.grid, context.params)
    A = embedding_field(g_Q, EmbeddingKind.MASS, context)
    sequences = (
        removal_sequence(f_Q, Q, EmbeddingKind.ENERGY, context, field=F),
        removal_sequence(g_Q, Q, EmbeddingKind.MASS, context, field=A),
    )
    exceptional = exceptional_set(f_Q, g_Q, Q, context.p, context.iteration.c_initial, context, sequences)

    epsilon = context.epsilon
    grid = context.grid
    base = tent_over_open_set([Q], grid)
    local_term = bilinear_form_B(F, A, base - tent_over_open_set(exceptional.cells, grid), epsilon)
    total = bilinear_form_B(F, A, base, epsilon)

    inner = tails = 0.0
    for child in exceptional.intervals:
        tent = tent_over_open_set([child], grid)
        if tent.above(epsilon).is_empty():
            continue
        wide = child.dilate(3.0)
        F_in = embed_F_field(f_Q.restrict(wide), grid, context.params)
        F_out = embed_F_field(f_Q.minus(wide), grid, context.params)
        A_in = embedding_field(g_Q.restrict(wide), EmbeddingKind.MASS, context)
        A_out = embedding_field(g_Q.minus(wide), EmbeddingKind.MASS, context)
        inner += bilinear_form_B(F_in, A_in, tent, epsilon)
        tails += (bilinear_form_B(F_in, A_out, tent, epsilon) + bilinear_form_B(F_out, A_in, tent, epsilon)
                  + bilinear_form_B(F_out, A_out, tent, epsilon))
    bound = local_term + inner + tails
    decomposition = {
        'total': total,
        'local': local_term,
        'inner': inner,
        'tails': tails,
        'holds': bool(total <= bound * (1 + DECOMPOSITION_SLACK)),
    }
    scale = Q.length * local_average(f_Q, three_Q, context.p) * local_average(g_Q, three_Q, 1.0)
    return PrincipalStep(interval=Q, exceptional=exceptional, local_term=local_term, scale=scale,
                         decomposition=decomposition)


def carleson_box(grid: TileGrid, P: Interval) -> TileRegion:
    """{u in P, |P|/2 <= t < |P|}, every eta"""
    return TileRegion.from_predicate(
        grid, lambda u, t, eta: (u >= P.left) & (u < P.right) & (t >= P.length / 2.0) & (t < P.length)
    )


def box_norm(field: TileField, box: TileRegion, P: Interval) -> float:
    """(|P|^-1 sum_box(P) |field|^2 du dt deta)^(1/2)"""
    return float(np.sqrt(field.integral(box, power=2.0) / P.length))


def support_distance(h: SampledSignal, P: Interval) -> float:
    """Lower bound on |u - x| over lattice points u in P and samples x where h is nonzero"""
    xs = h.x[np.flatnonzero(h.samples)]
    if not xs.size:
        return float('inf')
    gaps = np.where(xs >= P.right, xs - P.right, np.where(xs < P.left, P.left - xs, 0.0))
    return float(np.min(gaps))


def _require_band_limited(grid: TileGrid, spacing: float, params: WavePacketParams):
    reach = max(abs(e) for layer in grid.layers for e in layer.etas) if grid.tile_count else 0.0
    t_min = min(layer.t for layer in grid.layers)
    if reach + params.b / (2.0 * t_min) >= np.pi / spacing:
        raise SignalInputError("Tile frequencies reach past the sampling band; the tail bound does not apply")


def box_tail_bound(mass: float, separation: float, P: Interval, box: TileRegion, window: float,
                   params: WavePacketParams) -> float:
    """Bound on the box(P) norm of |h * psi_{t,eta}| for sum |h| dx <= mass at distance >= separation from P

    Every tile of box(P) has |P|/2 <= t < |P|, so |psi_t(y)| <= (2/|P|) sup_{|s| >= separation/|P|} |psi(s)|.
    The wrap-around images of the padded transform sit 2 * PACKET_REACH scales away.
    """
    if mass == 0:
        return 0.0
    reach = max(2.0 * window / P.length, 2.0 * PACKET_REACH) + 1.0
    tail = packet_tail(separation / P.length if np.isfinite(separation) else reach, params, reach)
    images = 4.0 * packet_tail(2.0 * PACKET_REACH, params, reach)
    floor = TAIL_FLOOR * packet_tail(0.0, params, reach)
    measure = TileField.constant(box.grid, 1.0).integral(box)
    return float(2.0 / P.length * mass * (tail + images + floor) * np.sqrt(measure / P.length))


def _require_within_tail(norm: float, bound: float, label: str):
    if norm > bound * (1 + DECOMPOSITION_SLACK):
        raise InvariantViolation(f"{label}: box norm {norm:.3e} exceeds its tail bound {bound:.3e}")


def linearized_mass(g: SampledSignal, context: SparseContext) -> float:
    """sum_x |g(x)| max_j |a_j(x)| max kappa dx, which dominates the l^1 norm of every row fed to A(g)

    At most one interval of the partition holds eta, and kappa <= 2 chi(d).
    """
    coefficients = np.abs(context.linearization.coefficients)
    largest = coefficients.max(axis=1) if coefficients.size else np.zeros(g.count)
    kappa = 2.0 * float(chi(context.params.d, context.params))
    return float(np.sum(np.abs(g.samples) * largest) * g.spacing * kappa)


def tail_decay_check(f: SampledSignal, g: SampledSignal, Q: Interval, I: Interval, max_k: int,
                     context: SparseContext) -> pd.DataFrame:
    """Per level k: box-restricted norms of F(f 1_{3I}) and A(g 1_{3Q minus 3I}) over the dyadic pieces P of I

    On every piece the mass norm is held to box_tail_bound at dist(P, supp g 1_{3Q minus 3I})
    and the pairing on box(P) to |P| times the product of the two norms; a miss raises
    InvariantViolation. Per level the table carries the largest norms, the pairing, the
    bound sum_P |P| ||F||_box(P) * tail bound, and the decay ratio against level k - 1.
    The attrs carry the fitted decay rate in k and the geometric sum, which must stay below
    the summed bounds.
    """
    _require_band_limited(context.grid, f.spacing, context.params)
    three_Q, three_I = Q.dilate(3.0), I.dilate(3.0)
    f_in = f.restrict(three_I)
    g_out = g.restrict(three_Q).minus(three_I)
    F = embed_F_field(f_in, context.grid, context.params)
    A = embedding_field(g_out, EmbeddingKind.MASS, context)
    mass = linearized_mass(g_out, context)
    window = g.window.length
    rows = []
    for k in range(max_k + 1):
        pieces = I.dyadic_children(k)
        energy_norms, mass_norms, bounds, pairing, tail_bound = [], [], [], 0.0, 0.0
        for P in pieces:
            box = carleson_box(context.grid, P)
            energy, spread = box_norm(F, box, P), box_norm(A, box, P)
            bound = box_tail_bound(mass, support_distance(g_out, P), P, box, window, context.params)
            _require_within_tail(spread, bound, f"A(g) on box({P.left:g}, {P.right:g})")
            piece = bilinear_form_B(F, A, box)
            if piece > P.length * energy * spread * (1 + DECOMPOSITION_SLACK):
                raise InvariantViolation(f"Pairing on box({P.left:g}, {P.right:g}) exceeds the norm product")
            energy_norms.append(energy)
            mass_norms.append(spread)
            bounds.append(bound)
            pairing += piece
            tail_bound += P.length * energy * bound
        rows.append({
            'k': k,
            'pieces': len(pieces),
            'length_sum': float(sum(P.length for P in pieces)),
            'energy_norm': max(energy_norms),
            'mass_norm': max(mass_norms),
            'mass_bound': max(bounds),
            'contribution': float(pairing),
            'tail_bound': float(tail_bound),
        })
    table = pd.DataFrame(rows)
    previous = table['contribution'].shift(1)
    table['decay_ratio'] = np.where(previous > 0, table['contribution'] / previous.where(previous > 0, 1.0), np.nan)
    positive = table[table['contribution'] > 0]
    rate = float(np.polyfit(positive['k'], np.log2(positive['contribution']), 1)[0]) if len(positive) > 1 else 0.0
    table.attrs['decay_rate'] = rate
    table.attrs['geometric_sum'] = float(table['contribution'].sum())
    table.attrs['geometric_bound'] = float(table['tail_bound'].sum())
    if table.attrs['geometric_sum'] > table.attrs['geometric_bound'] * (1 + DECOMPOSITION_SLACK):
        raise InvariantViolation("Tail pairings exceed the summed box tail bounds")
    return table


def distance_decay(h: SampledSignal, P: Interval, distances: Sequence[float], grid: TileGrid,
                   params: WavePacketParams) -> pd.DataFrame:
    """Box norm of F(h_D), with h_D the copy of h whose support starts D to the right of P

    Each norm is held to box_tail_bound (InvariantViolation otherwise). A copy that
    would leave the sample window raises SignalInputError. The attrs carry the fitted
    log-log exponent against 1 + dist/|P| (negative for decay).
    """
    support = np.flatnonzero(h.samples)
    if not support.size:
        raise SignalInputError("distance_decay needs a nonzero signal")
    _require_band_limited(grid, h.spacing, params)
    box = carleson_box(grid, P)
    mass = float(np.sum(np.abs(h.samples)) * h.spacing)
    first = h.x[support[0]]
    rows = []
    for distance in distances:
        if distance < 0:
            raise SignalInputError(f"Distances must be nonnegative, got {distance}")
        shift = int(round((P.right + distance - first) / h.spacing))
        moved = support + shift
        if moved[0] < 0 or moved[-1] >= h.count:
            raise SignalInputError(
                f"Placing h at distance {distance:g} from P moves it past the window ({h.origin:g}, {h.end:g})"
            )
        samples = np.zeros_like(h.samples)
        samples[moved] = h.samples[support]
        shifted = h.with_samples(samples)
        separation = support_distance(shifted, P)
        norm = box_norm(embed_F_field(shifted, grid, params), box, P)
        bound = box_tail_bound(mass, separation, P, box, h.window.length, params)
        _require_within_tail(norm, bound, f"F(h) at distance {distance:g}")
        rows.append({
            'distance': float(distance),
            'relative_distance': 1.0 + separation / P.length,
            'box_norm': norm,
            'bound': bound,
        })
    table = pd.DataFrame(rows)
    usable = table[table['box_norm'] > 0]
    exponent = float(np.polyfit(np.log(usable['relative_distance']), np.log(usable['box_norm']), 1)[0]) \
        if len(usable) > 1 else 0.0
    table.attrs['exponent'] = exponent
    return table


def generation_count(length: float, epsilon: float, packing_exponent: int) -> int:
    """Smallest N with 2^{-kN} |Q0| < epsilon"""
    if length < epsilon:
        return 0
    return int(np.floor(np.log2(length / epsilon) / packing_exponent + 1e-12)) + 1


@dataclass
class SparseCollection:
    """{3Q} with witnesses X_Q = Q minus its children, all on the sampling lattice"""
    intervals: List[Interval]
    witnesses: List[CellSet]
    eta: float
    sources: List[Interval] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.intervals)

    def certify(self) -> dict:
        """Witness disjointness, containment and |E_I| >= eta |I|; raises SparseCertificateError"""
        union: Optional[CellSet] = None
        worst = float('inf')
        for interval, source, witness in zip(self.intervals, self.sources, self.witnesses):
            if union is not None and not witness.isdisjoint(union):
                raise SparseCertificateError(f"Witness of ({interval.left}, {interval.right}) overlaps another")
            if not witness.issubset(witness.with_mask(_cells_of(witness, source))):
                raise SparseCertificateError(f"Witness leaves ({interval.left}, {interval.right})")
            ratio = witness.measure / interval.length
            if ratio < self.eta * (1 - LATTICE_TOLERANCE):
                raise SparseCertificateError(
                    f"Witness of ({interval.left}, {interval.right}) covers {ratio:.6g} < eta={self.eta:.6g}"
                )
            worst = min(worst, ratio)
            union = witness if union is None else union | witness
        return {'intervals': len(self), 'eta': self.eta, 'min_witness_ratio': worst if self.intervals else None,
                'pass': True}

    def as_dict(self) -> dict:
        return {
            'intervals': [interval.as_dict() for interval in self.intervals],
            'witnesses': [witness.as_list() for witness in self.witnesses],
            'eta': self.eta,
        }


def _cells_of(cells: CellSet, interval: Interval) -> np.ndarray:
    x = cells.origin + cells.spacing * np.arange(cells.mask.size)
    half = 0.5 * cells.spacing
    return (x >= interval.left - half * 1e-6) & (x < interval.right - half * 1e-6)


@dataclass
class IterationTrace:
    """Generations S_0 ... S_N of the stopping time and every processed node"""
    generations: List[List[Interval]]
    epsilon: float
    packing_exponent: int
    steps: List[PrincipalStep] = field(default_factory=list)

    @property
    def generation_sizes(self) -> List[int]:
        return [len(generation) for generation in self.generations]

    def check_packing(self, root: Interval):
        """|Q| <= 2^{-kn}|Q0| per generation and sum of children <= 2^-k |Q| per node"""
        packing = 2.0 ** (-self.packing_exponent)
        for n, generation in enumerate(self.generations):
            for Q in generation:
                if Q.length > packing ** n * root.length * (1 + LATTICE_TOLERANCE):
                    raise InvariantViolation(f"Generation {n} interval of length {Q.length} is too long")
        for step in self.steps:
            total = sum(child.length for child in step.children)
            if total > packing * step.interval.length * (1 + LATTICE_TOLERANCE):
                raise InvariantViolation(f"Children of ({step.interval.left}, {step.interval.right}) are not packed")

    def as_dict(self) -> dict:
        return {
            'epsilon': self.epsilon,
            'generations': [[Q.as_dict() for Q in generation] for generation in self.generations],
            'packing_ratios': [step.exceptional.packing_ratio for step in self.steps],
            'local_ratios': [step.local_ratio for step in self.steps],
            'decompositions_hold': all(step.decomposition['holds'] for step in self.steps),
            'nodes': [step.as_dict() for step in self.steps],
        }


def _process_generation(f: SampledSignal, g: SampledSignal, generation: List[Interval],
                        context: SparseContext) -> List[PrincipalStep]:
    threads = context.iteration.threads
    if threads > 1 and len(generation) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda Q: principal_iteration(f, g, Q, context), generation))
    return [principal_iteration(f, g, Q, context) for Q in generation]


def build_sparse(f: SampledSignal, g: SampledSignal, Q0: Interval,
                 context: SparseContext) -> Tuple[SparseCollection, IterationTrace]:
    """Run S_{n+1} = union of I_Q over S_n up to generation N and certify {3Q : Q in S*}

    f and g must vanish off Q0, which must sit on the sampling lattice.
    """
    f.require_same_grid(g)
    _require_lattice(f, Q0)
    if not f.minus(Q0).is_zero() or not g.minus(Q0).is_zero():
        raise SignalInputError(f"f and g must vanish outside ({Q0.left}, {Q0.right})")
    iteration = context.iteration
    epsilon = context.epsilon
    N = generation_count(Q0.length, epsilon, iteration.packing_exponent)
    if N > iteration.generation_cap:
        raise GenerationCapExceeded(f"Scale cutoff {epsilon} needs {N} generations, cap is {iteration.generation_cap}")
    logger.info(f"Sparse construction on ({Q0.left}, {Q0.right}): up to {N} generations, epsilon={epsilon:.4g}")

    trace = IterationTrace(generations=[[Q0]], epsilon=epsilon, packing_exponent=iteration.packing_exponent)
    children_of: Dict[int, List[Interval]] = {}
    for n in range(N):
        current = trace.generations[-1]
        if not current:
            break
        steps = _process_generation(f, g, current, context)
        trace.steps.extend(steps)
        for Q, step in zip(current, steps):
            children_of[id(Q)] = step.children
        trace.generations.append([child for step in steps for child in step.children])
        logger.info(f"Generation {n + 1}: {len(trace.generations[-1])} intervals")
    trace.check_packing(Q0)

    intervals, witnesses, sources = [], [], []
    for generation in trace.generations:
        for Q in generation:
            witness = CellSet.from_interval(f, Q) - CellSet.from_intervals(f, children_of.get(id(Q), []))
            intervals.append(Q.dilate(3.0))
            witnesses.append(witness)
            sources.append(Q)
    collection = SparseCollection(intervals=intervals, witnesses=witnesses, eta=iteration.eta, sources=sources)
    collection.certify()
    return collection, trace


def verify_domination(f: SampledSignal, g: SampledSignal, collection: SparseCollection, p: float, r: float,
                      grid: FrequencyGrid, threads: int = 1) -> dict:
    """int C_r f |g| against sum_{I in S} |I| <f>_{I,p} <g>_{I,1}"""
    lhs = dual_pairing(f, g, grid, r, threads=threads)
    rhs = sparse_form(f, g, collection.intervals, p)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else float('inf'))
    return {'lhs': lhs, 'rhs': rhs, 'ratio': ratio}


def sparse_form(f: SampledSignal, g: SampledSignal, intervals: Iterable[Interval], p: float) -> float:
    return float(sum(I.length * local_average(f, I, p) * local_average(g, I, 1.0) for I in intervals))


def sparse_maximal_bound(f: SampledSignal, g: SampledSignal, collection: SparseCollection, p: float) -> dict:
    """sum |I| <f><g> <= eta^-1 sum |E_I| <f><g>, and the witness sum against int M_p f M_1 g

    The first step is exact; the second uses the lattice maximal family and
    is reported as a ratio.
    """
    sparse_sum = sparse_form(f, g, collection.intervals, p)
    witness_sum = float(sum(witness.measure * local_average(f, I, p) * local_average(g, I, 1.0)
                            for I, witness in zip(collection.intervals, collection.witnesses)))
    maximal_pairing = float(np.sum(maximal_profile(f, p) * maximal_profile(g, 1.0)) * f.spacing)
    return {
        'sparse_sum': sparse_sum,
        'witness_sum': witness_sum,
        'maximal_pairing': maximal_pairing,
        'eta': collection.eta,
        'witness_chain_holds': bool(sparse_sum <= witness_sum / collection.eta * (1 + 1e-9) + 1e-300),
        'maximal_ratio': witness_sum / maximal_pairing if maximal_pairing > 0 else 0.0,
    }
