# src/experiments/services.py
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from core.exceptions import InvariantViolation, SignalInputError
from signal_core.csv_io import read_signal
from signal_core.grids import Interval, SampledSignal
from signal_core.services import spectrum
from sparse_builder.context import SparseContext
from sparse_builder.intervals import CellSet
from sparse_builder.services import (
    SparseCollection,
    build_sparse,
    sparse_maximal_bound,
    verify_domination,
)
from varcarleson.partitions import LinearizationData, random_linearization
from varcarleson.services import (
    argmax_linearization,
    carleson_maximal,
    var_carleson_dp,
    var_carleson_function,
)
from wavepacket.services import embed_A_field, embed_F_field, multiplier_grid, multiplier_reconstruction
from wavepacket.tiles import TileField
from weights.services import weighted_bound_experiment
from .corpus import random_corpus, random_signal
from .reports import (
    CarlesonReport,
    FieldReport,
    ReconstructionReport,
    SparseReport,
    VerificationReport,
    WeightsReport,
)
from .run_config import RunConfig

logger = logging.getLogger(__name__)

MIDDLE_TOLERANCE = 2e-2
OUTSIDE_TOLERANCE = 1e-3
OPERATORS = ('variation', 'maximal')
LINEARIZATIONS = ('argmax', 'random')


def load_signal(path: Optional[Union[str, Path]], config: RunConfig, rng: np.random.Generator) -> SampledSignal:
    """Signal from CSV, or a corpus draw on the configured window when no path is given"""
    if path:
        return read_signal(path)
    return random_signal(config.template(), rng, band=(config.frequency_low, config.frequency_high))


def run_carleson(config: RunConfig, f: SampledSignal, operator: str = 'variation',
                 probes: Iterable[float] = ()) -> Tuple[SampledSignal, CarlesonReport]:
    """C_r f (or the grid Carleson maximal function) at every sample, with argmax partitions at probes"""
    grid = config.frequency_grid()
    spec = spectrum(f, config.pad_factor)
    if operator == 'maximal':
        values = carleson_maximal(f, grid, spec=spec)
    else:
        values = var_carleson_function(f, grid, config.r, threads=config.threads, spec=spec)

    probe_rows = []
    for probe in probes:
        index = int(np.clip(np.round(f.index_of(probe)), 0, f.count - 1))
        x = float(f.x[index])
        result = var_carleson_dp(f, x, grid, config.r, spec=spec)
        probe_rows.append({'x': x, 'value': result.value, 'partition': result.partition.as_list()})

    report = CarlesonReport(operator=operator, r=config.r, frequency_grid=grid.as_list(), samples=f.count,
                            max_value=float(np.max(values.samples.real)) if f.count else 0.0,
                            probes=probe_rows, config=config.as_dict())
    return values, report


def _field_report(field: TileField, embedding: str, config: RunConfig,
                  linearization: Optional[str] = None) -> FieldReport:
    return FieldReport(embedding=embedding, linearization=linearization, tile_grid=field.grid.describe(),
                       wave_packet=config.params().as_dict(), max_value=field.sup(), total_mass=field.integral(),
                       config=config.as_dict())


def run_transform(config: RunConfig, f: SampledSignal) -> Tuple[TileField, FieldReport]:
    """F(f) on the tile grid of f"""
    field = embed_F_field(f, config.tile_grid(f), config.params())
    return field, _field_report(field, 'F', config)


def make_linearization(config: RunConfig, g: SampledSignal, f: Optional[SampledSignal],
                       rng: np.random.Generator) -> Tuple[LinearizationData, str]:
    """Argmax linearization of C_r f when f is given, otherwise one drawn from rng"""
    grid = config.frequency_grid()
    if f is not None:
        g.require_same_grid(f)
        return argmax_linearization(f, grid, config.r, spec=spectrum(f, config.pad_factor)), 'argmax'
    return random_linearization(grid, g, config.r, rng), 'random'


def run_embed_a(config: RunConfig, g: SampledSignal, f: Optional[SampledSignal],
                rng: np.random.Generator) -> Tuple[TileField, FieldReport]:
    """A(g) on the tile grid of g for an argmax or random linearization"""
    linearization, kind = make_linearization(config, g, f, rng)
    field = embed_A_field(g, config.tile_grid(g), linearization, config.params())
    return field, _field_report(field, 'A', config, linearization=kind)


def sparse_context(config: RunConfig, f: SampledSignal, linearization: LinearizationData) -> SparseContext:
    return SparseContext.for_signal(
        f, linearization, config.p, config.r, params=config.params(), geometry=config.geometry(),
        iteration=config.iteration(), scale_count=config.sparse_scale_count,
        scales_per_octave=config.scales_per_octave, c_eta=config.c_eta, eta_range=config.eta_range,
    )


def _verification(config: RunConfig, f: SampledSignal, g: SampledSignal, collection: SparseCollection,
                  certificate: dict) -> VerificationReport:
    domination = verify_domination(f, g, collection, config.p, config.r, config.frequency_grid(),
                                   threads=config.threads)
    chain = sparse_maximal_bound(f, g, collection, config.p)
    if not chain['witness_chain_holds']:
        raise InvariantViolation("Sparse form exceeds the witness form over eta")
    return VerificationReport(**domination, certificate=certificate, maximal_chain=chain, config=config.as_dict())


def run_sparse(config: RunConfig, f: SampledSignal, g: SampledSignal, rng: np.random.Generator,
               linearization: str = 'argmax') -> Tuple[SparseReport, VerificationReport]:
    """Sparse collection over the window of f with its certificate and the domination check"""
    f.require_same_grid(g)
    data, kind = make_linearization(config, g, f if linearization == 'argmax' else None, rng)
    context = sparse_context(config, f, data)
    collection, trace = build_sparse(f, g, f.window, context)
    certificate = collection.certify()
    logger.info(f"Sparse collection: {len(collection)} intervals over {len(trace.generations)} generations")
    sparse = SparseReport(**collection.as_dict(), certificate=certificate, trace=trace.as_dict(),
                          context={**context.describe(), 'linearization': kind}, config=config.as_dict())
    return sparse, _verification(config, f, g, collection, certificate)


def collection_from_report(report: dict, f: SampledSignal) -> SparseCollection:
    """Rebuild a sparse collection from its JSON form on the grid of f"""
    try:
        intervals = [Interval(**item) for item in report['intervals']]
        witnesses = [CellSet.from_intervals(f, [Interval(**c) for c in components])
                     for components in report['witnesses']]
        eta = float(report['eta'])
    except (KeyError, TypeError, ValueError) as e:
        raise SignalInputError(f"Malformed sparse report: {str(e)}")
    if len(intervals) != len(witnesses):
        raise SignalInputError("Sparse report lists a different number of intervals and witnesses")
    sources = [Interval(I.center, I.length / 3.0) for I in intervals]
    return SparseCollection(intervals=intervals, witnesses=witnesses, eta=eta, sources=sources)


def run_verify(config: RunConfig, f: SampledSignal, g: SampledSignal, report: dict) -> VerificationReport:
    """Re-certify a stored sparse collection and recompute its domination ratio"""
    f.require_same_grid(g)
    collection = collection_from_report(report, f)
    certificate = collection.certify()
    return _verification(config, f, g, collection, certificate)


def zeta_sweep(xi_minus: float, xi_plus: float, count: int) -> np.ndarray:
    width = xi_plus - xi_minus
    return np.linspace(xi_minus - 2.0 * width, xi_plus + 2.0 * width, count)


def run_reconstruct(config: RunConfig, xi_minus: float, xi_plus: float, zeta_count: int = 161,
                    scales_per_octave: int = 32) -> Tuple[pd.DataFrame, ReconstructionReport]:
    """Reconstructed multiplier of (xi-, xi+) on a zeta sweep, with plateau errors

    The output is low confidence when the plateaus miss their tolerances or
    when even the finest scale the multiplier needs exceeds the signal window.
    """
    params = config.params()
    grid = multiplier_grid(xi_minus, xi_plus, params, scales_per_octave=scales_per_octave)
    zeta = zeta_sweep(xi_minus, xi_plus, zeta_count)
    values = multiplier_reconstruction(xi_minus, xi_plus, zeta, grid, params)

    width = xi_plus - xi_minus
    middle = (zeta >= xi_minus + width / 4) & (zeta <= xi_plus - width / 4)
    outside = (zeta < xi_minus - width) | (zeta > xi_plus + width)
    middle_error = float(np.max(np.abs(values[middle] - 1.0))) if np.any(middle) else float('inf')
    outside_error = float(np.max(np.abs(values[outside]))) if np.any(outside) else 0.0
    unresolved = float(grid.scales.min()) > config.window
    low_confidence = bool(unresolved or middle_error > MIDDLE_TOLERANCE or outside_error > OUTSIDE_TOLERANCE)
    if low_confidence:
        logger.warning(f"Multiplier of ({xi_minus}, {xi_plus}) is low confidence: middle error {middle_error:.3g}, "
                       f"outside error {outside_error:.3g}, finest scale {grid.scales.min():.3g}")

    table = pd.DataFrame({'zeta': zeta, 'value': values})
    report = ReconstructionReport(xi_minus=xi_minus, xi_plus=xi_plus, scales=len(grid.layers),
                                  scales_per_octave=scales_per_octave, middle_error=middle_error,
                                  outside_error=outside_error, low_confidence=low_confidence,
                                  config=config.as_dict())
    return table, report


def run_weights(config: RunConfig, rng: np.random.Generator,
                corpus: Optional[List[SampledSignal]] = None) -> Tuple[pd.DataFrame, WeightsReport]:
    """Power-weight experiment on a seeded corpus"""
    corpus = corpus or random_corpus(config.template(), rng, config.corpus_size,
                                     band=(config.frequency_low, config.frequency_high))
    experiment = weighted_bound_experiment(config.r, config.q, config.t, config.weight_exponents, corpus,
                                           config.frequency_grid(), threads=config.threads)
    report = WeightsReport(**experiment.summary(), rows=len(experiment.table), config=config.as_dict())
    return experiment.table, report
