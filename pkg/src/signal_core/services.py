# src/signal_core/services.py
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.ndimage import maximum_filter1d

from .exceptions import ExponentError, OrderingError
from .grids import Interval, SampledSignal

logger = logging.getLogger(__name__)

DEFAULT_PAD_FACTOR = 2


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Discrete realization of f^ on an ascending frequency grid"""
    frequencies: np.ndarray
    coefficients: np.ndarray
    step: float

    def __len__(self) -> int:
        return int(self.frequencies.size)

    @property
    def band(self) -> tuple:
        """Half-open band [low, high) covered by the frequency cells"""
        return float(self.frequencies[0]), float(self.frequencies[-1] + self.step)

    def cumulative(self, x) -> np.ndarray:
        """Running sums of f^(zeta) e^{ix zeta} d zeta, with a leading zero column

        Row k of the result belongs to x[k]; column m holds the sum over the
        first m frequencies. Every partial integral is a difference of two
        columns, so splitting an interval at a grid frequency is exact up to
        one rounding.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        terms = np.exp(1j * np.outer(x, self.frequencies)) * (self.coefficients * self.step)
        running = np.cumsum(terms, axis=1)
        return np.concatenate([np.zeros((x.size, 1), dtype=complex), running], axis=1)

    def column_of(self, xi) -> np.ndarray:
        """Number of spectrum frequencies strictly below xi"""
        return np.searchsorted(self.frequencies, np.asarray(xi, dtype=float), side='left')


def spectrum(f: SampledSignal, pad_factor: int = DEFAULT_PAD_FACTOR) -> Spectrum:
    """f^(zeta) = int f(x) e^{-ix zeta} dx by the trapezoid rule on the zero-extended grid"""
    if pad_factor < 1:
        raise OrderingError(f"pad_factor must be >= 1, got {pad_factor}")
    n = f.count * int(pad_factor)
    padded = np.zeros(n, dtype=complex)
    padded[:f.count] = f.samples
    zeta = 2.0 * np.pi * np.fft.fftfreq(n, d=f.spacing)
    coefficients = f.spacing * np.fft.fft(padded) * np.exp(-1j * f.origin * zeta)
    order = np.argsort(zeta, kind='stable')
    step = 2.0 * np.pi / (n * f.spacing)
    return Spectrum(frequencies=zeta[order], coefficients=coefficients[order], step=step)


def partial_fourier_integral(f: SampledSignal, xi_minus: float, xi_plus: float, x,
                             spec: Optional[Spectrum] = None):
    """Quadrature of int_{xi_minus}^{xi_plus} f^(zeta) e^{ix zeta} d zeta over the cells [xi_minus, xi_plus)"""
    if not xi_minus < xi_plus:
        raise OrderingError(f"xi_minus must be below xi_plus, got ({xi_minus}, {xi_plus})")
    spec = spec if spec is not None else spectrum(f)
    cumulative = spec.cumulative(x)
    lo, hi = spec.column_of(xi_minus), spec.column_of(xi_plus)
    values = cumulative[:, hi] - cumulative[:, lo]
    return values[0] if np.ndim(x) == 0 else values


def prefix_partial_integrals(f: SampledSignal, points, x, spec: Optional[Spectrum] = None) -> np.ndarray:
    """P[k, j] = S(points[0], points[j], x[k]); S(points[i], points[j]) = P[:, j] - P[:, i]"""
    spec = spec if spec is not None else spectrum(f)
    cumulative = spec.cumulative(x)
    columns = spec.column_of(points)
    return cumulative[:, columns] - cumulative[:, columns[:1]]


def _check_exponent(p: float):
    if not p >= 1:
        raise ExponentError(f"Averaging exponent must satisfy p >= 1, got {p}")


class PowerIntegral:
    """Cumulative trapezoid integral of |f|^p in units of samples

    The signal is padded with one zero sample on each side so the trapezoid
    rule sees the zero extension; cumulative[m] is the integral up to padded
    index m, i.e. up to x = origin + (m - 1) * spacing.
    """

    def __init__(self, f: SampledSignal, p: float):
        _check_exponent(p)
        self.signal = f
        self.p = p
        padded = np.concatenate([[0.0], np.abs(f.samples) ** p, [0.0]])
        steps = (padded[1:] + padded[:-1]) / 2.0
        self.cumulative = np.concatenate([[0.0], np.cumsum(steps)])
        self.positions = np.arange(self.cumulative.size, dtype=float)

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def at_index(self, index) -> np.ndarray:
        """Cumulative value at (possibly fractional) signal index"""
        padded_index = np.asarray(index, dtype=float) + 1.0
        return np.interp(padded_index, self.positions, self.cumulative, left=0.0, right=self.total)

    def at(self, x) -> np.ndarray:
        return self.at_index(self.signal.index_of(x))

    def integral(self, left, right) -> np.ndarray:
        return self.signal.spacing * (self.at(right) - self.at(left))

    def mean_between_indices(self, lo, hi) -> np.ndarray:
        """Average of |f|^p over [x_lo, x_hi] for lattice indices lo < hi"""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return (self.at_index(hi) - self.at_index(lo)) / (hi - lo)


def local_average(f: SampledSignal, interval: Interval, p: float) -> float:
    """<f>_{I,p} = (|I|^{-1} int_I |f|^p)^{1/p}"""
    power = PowerIntegral(f, p)
    mean = float(power.integral(interval.left, interval.right)) / interval.length
    return max(mean, 0.0) ** (1.0 / p)


def _octave_count(f: SampledSignal, lo_index: float, hi_index: float) -> int:
    """Smallest K with 2**K samples covering the span [lo_index, hi_index]"""
    span = max(hi_index - lo_index, 1.0)
    return int(np.ceil(np.log2(span))) if span > 1 else 0


def maximal_function(f: SampledSignal, p: float, x) -> np.ndarray:
    """M_p f(x) over the family of intervals [x_m, x_m + 2^k dx] containing x

    Endpoints lie on the sampling lattice (extended past the window) and the
    lengths run over 2^k * spacing until one interval covers the window and
    x together. Every interval containing x sits inside a family member at
    most twice as long, so the result is within a factor 2 of the true sup.
    """
    power = PowerIntegral(f, p)
    points = np.atleast_1d(f.index_of(x))
    lo = min(0.0, float(points.min()))
    hi = max(float(f.count), float(points.max()))
    octaves = _octave_count(f, lo, hi) + 1
    best = np.zeros(points.size)
    for k in range(octaves + 1):
        width = 2 ** k
        first = np.ceil(points - width - 1e-9)
        last = np.floor(points + 1e-9)
        for offset in range(width + 1):
            left = first + offset
            valid = left <= last
            means = power.mean_between_indices(left, left + width)
            best = np.where(valid, np.maximum(best, means), best)
    values = np.maximum(best, 0.0) ** (1.0 / p)
    return values[0] if np.ndim(x) == 0 else values


def maximal_profile(f: SampledSignal, p: float) -> np.ndarray:
    """M_p at every grid point of f, with the same interval family as maximal_function"""
    power = PowerIntegral(f, p)
    n = f.count
    octaves = _octave_count(f, 0.0, float(n)) + 1
    reach = 2 ** octaves
    # left endpoints m run over [-reach, n - 1]
    lefts = np.arange(-reach, n, dtype=float)
    best = np.zeros(n)
    for k in range(octaves + 1):
        width = 2 ** k
        means = power.mean_between_indices(lefts, lefts + width)
        # filtered[i] is the max over means[i - (w+1)//2 : i - (w+1)//2 + w + 1]
        filtered = maximum_filter1d(means, size=width + 1, mode='nearest')
        target = np.arange(n) - width + reach + (width + 1) // 2
        best = np.maximum(best, filtered[target])
    return np.maximum(best, 0.0) ** (1.0 / p)
