# src/experiments/run_config.py
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from django.conf import settings
from dotenv import dotenv_values

from outer_lp.geometry import TentGeometry
from signal_core.grids import FrequencyGrid, SampledSignal
from sparse_builder.context import IterationSettings
from wavepacket.params import WavePacketParams
from wavepacket.tiles import TileGrid
from .exceptions import RunConfigError
from .serializers import RunConfigSerializer

logger = logging.getLogger(__name__)

CONFIG_SECTIONS = [
    ('wave packet: psi^ on [-B/2, B/2], chi on [D - EPS, D + EPS], switch flat beyond D_DOUBLEPRIME, zero below D_PRIME',
     ['b', 'd', 'eps', 'd_prime', 'd_doubleprime', 'sharpness']),
    ('tent geometry in multiples of B: Theta^o = [THETA_O_LOW, THETA_O_HIGH] inside Theta',
     ['theta_low', 'theta_high', 'theta_o_low', 'theta_o_high']),
    ('grids: signals sample [-WINDOW/2, WINDOW/2) at SPACING; FREQUENCY_COUNT points span the frequency band',
     ['spacing', 'window', 'scale_count', 'scales_per_octave', 'c_eta', 'frequency_count', 'frequency_low',
      'frequency_high', 'eta_low', 'eta_high', 'pad_factor']),
    ('exponents: variation R, averaging P, weighted norm Q, weight class T',
     ['r', 'p', 'q', 't']),
    ('stopping time: budget C_INITIAL, packing 2^-PACKING_EXPONENT, scale cutoff EPSILON (0 = finest scale)',
     ['c_initial', 'epsilon', 'generation_cap', 'packing_exponent', 'embedding_k', 'max_removals']),
    ('experiments',
     ['corpus_size', 'weight_exponents', 'sparse_scale_count']),
    ('run',
     ['seed', 'threads']),
]
CONFIG_KEYS = [key for _, keys in CONFIG_SECTIONS for key in keys]


def default_values() -> dict:
    toolkit = settings.CARLESON_TOOLKIT
    packet = toolkit['WAVE_PACKET']
    geometry = toolkit['TENT_GEOMETRY']
    grids = toolkit['GRIDS']
    exponents = toolkit['EXPONENTS']
    iteration = toolkit['ITERATION']
    experiments = toolkit['EXPERIMENTS']
    return {
        'b': packet['B'],
        'd': packet['D'],
        'eps': packet['EPS'],
        'd_prime': packet['D_PRIME'],
        'd_doubleprime': packet['D_DOUBLEPRIME'],
        'sharpness': packet['SHARPNESS'],
        'theta_low': geometry['THETA'][0],
        'theta_high': geometry['THETA'][1],
        'theta_o_low': geometry['THETA_O'][0],
        'theta_o_high': geometry['THETA_O'][1],
        'spacing': grids['SPACING'],
        'window': grids['WINDOW'],
        'scale_count': grids['SCALE_COUNT'],
        'scales_per_octave': grids['SCALES_PER_OCTAVE'],
        'c_eta': grids['C_ETA'],
        'frequency_count': grids['FREQUENCY_COUNT'],
        'frequency_low': grids['FREQUENCY_BAND'][0],
        'frequency_high': grids['FREQUENCY_BAND'][1],
        'eta_low': grids['ETA_BAND'][0],
        'eta_high': grids['ETA_BAND'][1],
        'pad_factor': grids['PAD_FACTOR'],
        'r': exponents['R'],
        'p': exponents['P'],
        'q': exponents['Q'],
        't': exponents['T'],
        'c_initial': iteration['C_INITIAL'],
        'epsilon': iteration['EPSILON'],
        'generation_cap': iteration['GENERATION_CAP'],
        'packing_exponent': iteration['PACKING_EXPONENT'],
        'embedding_k': iteration['EMBEDDING_K'],
        'max_removals': iteration['MAX_REMOVALS'],
        'corpus_size': experiments['CORPUS_SIZE'],
        'weight_exponents': list(experiments['WEIGHT_EXPONENTS']),
        'sparse_scale_count': experiments['SPARSE_SCALE_COUNT'],
        'seed': toolkit['SEED'],
        'threads': toolkit['THREADS'],
    }


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; builds the domain objects every command shares"""
    b: float
    d: float
    eps: float
    d_prime: float
    d_doubleprime: float
    sharpness: float
    theta_low: float
    theta_high: float
    theta_o_low: float
    theta_o_high: float
    spacing: float
    window: float
    scale_count: int
    scales_per_octave: int
    c_eta: float
    frequency_count: int
    frequency_low: float
    frequency_high: float
    eta_low: float
    eta_high: float
    pad_factor: int
    r: float
    p: float
    q: float
    t: float
    c_initial: float
    epsilon: float
    generation_cap: int
    packing_exponent: int
    embedding_k: float
    max_removals: int
    corpus_size: int
    weight_exponents: Tuple[float, ...]
    sparse_scale_count: int
    seed: int
    threads: int

    def params(self) -> WavePacketParams:
        return WavePacketParams(b=self.b, d=self.d, eps=self.eps, d_prime=self.d_prime,
                                d_doubleprime=self.d_doubleprime, sharpness=self.sharpness)

    def geometry(self) -> TentGeometry:
        return TentGeometry(theta=(self.b * self.theta_low, self.b * self.theta_high),
                            theta_o=(self.b * self.theta_o_low, self.b * self.theta_o_high))

    def iteration(self) -> IterationSettings:
        return IterationSettings(c_initial=self.c_initial, packing_exponent=self.packing_exponent,
                                 embedding_k=self.embedding_k, max_removals=self.max_removals,
                                 generation_cap=self.generation_cap, epsilon=self.epsilon, threads=self.threads)

    def frequency_grid(self) -> FrequencyGrid:
        return FrequencyGrid.uniform(self.frequency_low, self.frequency_high, self.frequency_count)

    @property
    def eta_range(self) -> Tuple[float, float]:
        return self.eta_low, self.eta_high

    def template(self) -> SampledSignal:
        """Zero signal on [-window/2, window/2)"""
        count = int(round(self.window / self.spacing))
        return SampledSignal.zeros(-self.window / 2.0, self.spacing, count)

    def tile_grid(self, f: SampledSignal, scale_count: Optional[int] = None) -> TileGrid:
        return TileGrid.for_signal(f, scales_per_octave=self.scales_per_octave, c_eta=self.c_eta,
                                   scale_count=self.scale_count if scale_count is None else scale_count,
                                   eta_range=self.eta_range)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def as_dict(self) -> dict:
        values = asdict(self)
        values['weight_exponents'] = list(self.weight_exponents)
        return {key: values[key] for key in CONFIG_KEYS}


def read_config_file(path: Union[str, Path]) -> dict:
    """KEY=VALUE pairs of a run configuration file, keys lower-cased"""
    path = Path(path)
    if not path.is_file():
        raise RunConfigError(f"Config file not found: {path}")
    raw = dotenv_values(path)
    values = {}
    for key, value in raw.items():
        name = key.strip().lower()
        if name not in CONFIG_KEYS:
            raise RunConfigError(f"{path}: unknown key {key}")
        if value is None or not value.strip():
            raise RunConfigError(f"{path}: key {key} has no value")
        values[name] = value.strip()
    logger.debug(f"Read {len(values)} config values from {path}")
    return values


def _format_errors(errors: dict) -> str:
    parts = []
    for name, messages in errors.items():
        messages = messages if isinstance(messages, list) else [messages]
        label = 'config' if name == 'non_field_errors' else name.upper()
        parts.append(f"{label}: {'; '.join(str(m) for m in messages)}")
    return ', '.join(parts)


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides) -> RunConfig:
    """Settings defaults, then the file, then explicit overrides; validated as one document"""
    data = default_values()
    if path:
        data.update(read_config_file(path))
    data.update({key: value for key, value in overrides.items() if value is not None})
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise RunConfigError(f"Invalid run configuration: {_format_errors(serializer.errors)}")
    validated = dict(serializer.validated_data)
    validated['weight_exponents'] = tuple(validated['weight_exponents'])
    return RunConfig(**validated)


def render_config(config: RunConfig) -> str:
    """Canonical KEY=VALUE text of a configuration, grouped by section"""
    representation = RunConfigSerializer(config.as_dict()).data
    lines = []
    for title, keys in CONFIG_SECTIONS:
        lines.append(f"# {title}")
        lines.extend(f"{key.upper()}={representation[key]}" for key in keys)
        lines.append('')
    return '\n'.join(lines)
