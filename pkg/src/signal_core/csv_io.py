# src/signal_core/csv_io.py
import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from .exceptions import SignalFileError
from .grids import SampledSignal
from .services import Spectrum

logger = logging.getLogger(__name__)

SIGNAL_COLUMNS = ['x', 're', 'im']
SPACING_TOLERANCE = 1e-9


def read_signal(path: Union[str, Path]) -> SampledSignal:
    """Load a uniformly sampled signal from CSV with header x,re,im"""
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise SignalFileError(f"Signal file not found: {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SignalFileError(f"Could not parse signal file {path}: {str(e)}")

    columns = [str(c).strip() for c in frame.columns]
    if columns != SIGNAL_COLUMNS:
        raise SignalFileError(f"{path}: expected header {','.join(SIGNAL_COLUMNS)}, got {','.join(columns)}")
    frame.columns = columns

    try:
        values = frame.astype(float).to_numpy()
    except ValueError as e:
        raise SignalFileError(f"{path}: non-numeric entries ({str(e)})")
    if values.shape[0] < 1:
        raise SignalFileError(f"{path}: no samples")
    if not np.all(np.isfinite(values)):
        raise SignalFileError(f"{path}: non-finite entries")

    x = values[:, 0]
    if x.size == 1:
        spacing = 1.0
        logger.warning(f"{path}: single sample, assuming unit spacing")
    else:
        steps = np.diff(x)
        spacing = float(np.mean(steps))
        if spacing <= 0 or np.max(np.abs(steps - spacing)) > SPACING_TOLERANCE * spacing:
            raise SignalFileError(f"{path}: x column is not uniformly increasing")

    logger.debug(f"Read {x.size} samples from {path} (spacing {spacing:g})")
    return SampledSignal(origin=float(x[0]), spacing=spacing, samples=values[:, 1] + 1j * values[:, 2])


def write_signal(path: Union[str, Path], signal: SampledSignal):
    frame = pd.DataFrame({'x': signal.x, 're': signal.samples.real, 'im': signal.samples.imag})
    frame.to_csv(path, index=False, float_format='%.17g')


def write_spectrum(path: Union[str, Path], spec: Spectrum):
    frame = pd.DataFrame({
        'xi': spec.frequencies,
        're': spec.coefficients.real,
        'im': spec.coefficients.imag,
    })
    frame.to_csv(path, index=False, float_format='%.17g')


def write_values(path: Union[str, Path], x, values, column: str = 'value'):
    """Real-valued profile as CSV x,<column>"""
    frame = pd.DataFrame({'x': np.asarray(x, dtype=float), column: np.asarray(values, dtype=float)})
    frame.to_csv(path, index=False, float_format='%.17g')


def write_frame(path: Union[str, Path], frame: pd.DataFrame):
    frame.to_csv(path, index=False, float_format='%.17g')
