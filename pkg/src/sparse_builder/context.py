# src/sparse_builder/context.py
import logging
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

from django.conf import settings

from outer_lp.geometry import TentFamily, TentGeometry
from signal_core.grids import SampledSignal
from varcarleson.partitions import LinearizationData, conjugate_exponent
from varcarleson.services import check_variation_exponent
from wavepacket.params import WavePacketParams
from wavepacket.tiles import TileGrid
from .exceptions import IterationConfigError

logger = logging.getLogger(__name__)

EXPONENT_MARGIN = 1.05


@dataclass(frozen=True)
class IterationSettings:
    """Stopping-time knobs: initial budget c, packing 2^-k, embedding constant K"""
    c_initial: float = 0.25
    packing_exponent: int = 12
    embedding_k: float = 4.0
    max_removals: int = 8
    generation_cap: int = 16
    epsilon: float = 0.0
    threads: int = 1
    max_halvings: int = 40

    def __post_init__(self):
        if not 0 < self.c_initial < 1:
            raise IterationConfigError(f"Initial budget must lie in (0, 1), got {self.c_initial}")
        if self.packing_exponent < 1:
            raise IterationConfigError(f"Packing exponent must be a positive integer, got {self.packing_exponent}")
        if not self.embedding_k > 0:
            raise IterationConfigError(f"Embedding constant must be positive, got {self.embedding_k}")
        if self.max_removals < 0 or self.generation_cap < 1 or self.threads < 1 or self.max_halvings < 0:
            raise IterationConfigError("Removal count, generation cap, threads and halvings must be nonnegative")
        if self.epsilon < 0:
            raise IterationConfigError(f"Scale cutoff must be nonnegative, got {self.epsilon}")

    @classmethod
    def from_settings(cls, **overrides) -> 'IterationSettings':
        toolkit = settings.CARLESON_TOOLKIT
        iteration = toolkit['ITERATION']
        values = {
            'c_initial': iteration['C_INITIAL'],
            'packing_exponent': iteration['PACKING_EXPONENT'],
            'embedding_k': iteration['EMBEDDING_K'],
            'max_removals': iteration['MAX_REMOVALS'],
            'generation_cap': iteration['GENERATION_CAP'],
            'epsilon': iteration['EPSILON'],
            'threads': toolkit['THREADS'],
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @property
    def packing(self) -> float:
        return 2.0 ** (-self.packing_exponent)

    @property
    def eta(self) -> float:
        """Sparseness of {3Q}: |X_Q| >= (1 - 2^-k)|Q| = (1 - 2^-k)/3 |3Q|"""
        return (1.0 - self.packing) / 3.0

    def as_dict(self) -> dict:
        return asdict(self)


def embedding_exponents(p: float, r: float) -> Tuple[float, float]:
    """(sigma, tau) with 1/sigma + 1/tau = 1 and tau just above r'

    tau sits halfway between r' and p when p > r', otherwise slightly
    above r' (the endpoint p = r' has no embedding to offer).
    """
    check_variation_exponent(r)
    dual = conjugate_exponent(r)
    if p > dual:
        tau = (dual + p) / 2.0
    else:
        logger.warning(f"p={p} does not exceed r'={dual:.4g}; using tau = {EXPONENT_MARGIN} r'")
        tau = EXPONENT_MARGIN * dual
    return conjugate_exponent(tau), tau


@dataclass
class SparseContext:
    """Everything the stopping-time construction shares across nodes"""
    grid: TileGrid
    family: TentFamily
    params: WavePacketParams
    geometry: TentGeometry
    linearization: LinearizationData
    p: float
    r: float
    iteration: IterationSettings

    def __post_init__(self):
        if not self.p >= 1:
            raise IterationConfigError(f"Averaging exponent must satisfy p >= 1, got {self.p}")
        self.sigma, self.tau = embedding_exponents(self.p, self.r)
        finest = self.finest_scale
        if self.iteration.epsilon and self.iteration.epsilon < finest * (1 - 1e-12):
            raise IterationConfigError(
                f"Scale cutoff {self.iteration.epsilon} lies below the finest tile scale {finest}"
            )

    @classmethod
    def for_signal(cls, f: SampledSignal, linearization: LinearizationData, p: float, r: float,
                   params: Optional[WavePacketParams] = None, geometry: Optional[TentGeometry] = None,
                   iteration: Optional[IterationSettings] = None, scale_count: Optional[int] = None,
                   scales_per_octave: Optional[int] = None, c_eta: Optional[float] = None,
                   eta_range: Optional[Tuple[float, float]] = None) -> 'SparseContext':
        grids = settings.CARLESON_TOOLKIT['GRIDS']
        params = params or WavePacketParams.from_settings()
        geometry = geometry or TentGeometry.from_settings(params.b)
        grid = TileGrid.for_signal(
            f,
            scales_per_octave=scales_per_octave or grids['SCALES_PER_OCTAVE'],
            c_eta=c_eta or grids['C_ETA'],
            scale_count=scale_count if scale_count is not None else grids['SCALE_COUNT'],
            eta_range=eta_range,
        )
        family = TentFamily(grid, geometry)
        logger.info(f"Sparse context: {grid.tile_count} tiles, {len(family)} candidate tents")
        return cls(grid=grid, family=family, params=params, geometry=geometry, linearization=linearization,
                   p=p, r=r, iteration=iteration or IterationSettings.from_settings())

    @property
    def finest_scale(self) -> float:
        return float(self.grid.scales.min())

    @property
    def epsilon(self) -> float:
        return self.iteration.epsilon or self.finest_scale

    def describe(self) -> dict:
        return {
            'p': self.p,
            'r': self.r,
            'sigma': self.sigma,
            'tau': self.tau,
            'epsilon': self.epsilon,
            'iteration': self.iteration.as_dict(),
            'wave_packet': self.params.as_dict(),
            'tent_geometry': self.geometry.as_dict(),
            'tile_grid': self.grid.describe(),
        }
