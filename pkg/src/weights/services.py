# src/weights/services.py
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
import pandas as pd

from core.exceptions import InvariantViolation
from signal_core.grids import FrequencyGrid, SampledSignal
from varcarleson.partitions import conjugate_exponent
from varcarleson.services import check_variation_exponent, var_carleson_function
from .exceptions import ExponentError, WeightParameterError

logger = logging.getLogger(__name__)

WEIGHT_FLOOR = 1e-8
SLOPE_SLACK = 0.5


@dataclass(frozen=True, eq=False)
class WeightSample:
    """Nonnegative real weight on a sampling grid, clipped below at floor"""
    signal: SampledSignal
    floor: float = WEIGHT_FLOOR

    def __post_init__(self):
        if not self.floor > 0:
            raise WeightParameterError(f"Weight floor must be positive, got {self.floor}")
        samples = self.signal.samples
        if np.any(samples.imag != 0):
            raise WeightParameterError("Weights must be real")
        if np.any(samples.real < 0):
            raise WeightParameterError("Weights must be nonnegative")
        object.__setattr__(self, 'signal', self.signal.with_samples(np.maximum(samples.real, self.floor)))

    @classmethod
    def power(cls, template: SampledSignal, a: float, floor: float = WEIGHT_FLOOR) -> 'WeightSample':
        """(1 + |x|)^a on the grid of template"""
        return cls(template.with_samples((1.0 + np.abs(template.x)) ** a), floor)

    @classmethod
    def constant(cls, template: SampledSignal, value: float = 1.0, floor: float = WEIGHT_FLOOR) -> 'WeightSample':
        return cls(template.with_samples(np.full(template.count, float(value))), floor)

    @property
    def values(self) -> np.ndarray:
        return self.signal.samples.real

    def scaled(self, factor: float) -> 'WeightSample':
        return WeightSample(self.signal.scaled(factor), self.floor)


def _check_t(t: float):
    if not t > 1:
        raise ExponentError(f"A_t needs t > 1, got {t}")


def a_t_constant(w: WeightSample, t: float) -> float:
    """sup over runs of 2^k consecutive samples of <w> <w^{1/(1-t)}>^{t-1}, with sample means

    Runs of one sample give exactly 1 (Jensen makes it the floor of the sup).
    """
    _check_t(t)
    values = w.values
    dual = values ** (1.0 / (1.0 - t))
    direct = np.concatenate([[0.0], np.cumsum(values)])
    inverse = np.concatenate([[0.0], np.cumsum(dual)])
    best = 1.0
    width = 2
    while width <= values.size:
        means = (direct[width:] - direct[:-width]) / width
        dual_means = (inverse[width:] - inverse[:-width]) / width
        best = max(best, float(np.max(means * dual_means ** (t - 1.0))))
        width *= 2
    return best


def weighted_norm(f: SampledSignal, w: WeightSample, q: float) -> float:
    """(int |f|^q w dx)^{1/q} by the rectangle rule on the sample grid"""
    if not q > 0:
        raise ExponentError(f"Weighted norms need q > 0, got {q}")
    f.require_same_grid(w.signal)
    return float(np.sum(np.abs(f.samples) ** q * w.values) * f.spacing) ** (1.0 / q)


def operator_ratio(w: WeightSample, corpus: Sequence[SampledSignal], transforms: Sequence[SampledSignal],
                   q: float) -> float:
    """max over the corpus of ||C_r f||_{L^q(w)} / ||f||_{L^q(w)}"""
    ratios = [weighted_norm(Cf, w, q) / weighted_norm(f, w, q)
              for f, Cf in zip(corpus, transforms) if not f.is_zero()]
    return max(ratios) if ratios else 0.0


def slope_bound(q: float, t: float, slack: float = SLOPE_SLACK) -> float:
    return max(1.0, t / (q * (t - 1.0))) + slack


def check_experiment_exponents(r: float, q: float, t: float):
    check_variation_exponent(r)
    dual = conjugate_exponent(r)
    if not q > dual:
        raise WeightParameterError(f"Need q > r' = {dual:.4g}, got q={q}")
    if not 1 < t < q / dual:
        raise WeightParameterError(f"Need 1 < t < q/r' = {q / dual:.4g}, got t={t}")


@dataclass
class WeightExperiment:
    """Rows (a, A_t, ratio) and the log-log fit of ratio against A_t"""
    table: pd.DataFrame
    slope: float
    intercept: float
    bound: float
    exponents: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.slope <= self.bound

    def summary(self) -> dict:
        return {'slope': self.slope, 'intercept': self.intercept, 'bound': self.bound, 'pass': self.passed,
                **self.exponents}


def _fit(table: pd.DataFrame):
    usable = table[table['ratio'] > 0]
    if usable['A_t'].nunique() < 2:
        return 0.0, float(np.log(usable['ratio'].iloc[0])) if len(usable) else 0.0
    slope, intercept = np.polyfit(np.log(usable['A_t']), np.log(usable['ratio']), 1)
    return float(slope), float(intercept)


def weighted_bound_experiment(r: float, q: float, t: float, weight_exponents: Sequence[float],
                              corpus: List[SampledSignal], grid: FrequencyGrid, threads: int = 1,
                              slack: float = SLOPE_SLACK, strict: bool = True) -> WeightExperiment:
    """Power weights (1 + |x|)^a: [w]_{A_t} against the corpus operator ratio of C_r on L^q(w)

    The fitted slope must stay within max{1, t/(q(t-1))} + slack. A miss raises
    InvariantViolation, or with strict=False is logged and flagged in the summary.
    """
    check_experiment_exponents(r, q, t)
    if not corpus:
        raise WeightParameterError("The experiment needs a non-empty corpus")
    template = corpus[0]
    for f in corpus[1:]:
        template.require_same_grid(f)

    if threads > 1 and len(corpus) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            transforms = list(pool.map(lambda f: var_carleson_function(f, grid, r), corpus))
    else:
        transforms = [var_carleson_function(f, grid, r) for f in corpus]

    rows = []
    for a in weight_exponents:
        w = WeightSample.power(template, a)
        rows.append({'a': float(a), 'A_t': a_t_constant(w, t), 'ratio': operator_ratio(w, corpus, transforms, q)})
    table = pd.DataFrame(rows, columns=['a', 'A_t', 'ratio'])
    slope, intercept = _fit(table)
    experiment = WeightExperiment(table=table, slope=slope, intercept=intercept, bound=slope_bound(q, t, slack),
                                  exponents={'r': r, 'q': q, 't': t})
    if not experiment.passed:
        message = f"Fitted slope {slope:.4g} exceeds the bound {experiment.bound:.4g}"
        if strict:
            raise InvariantViolation(message)
        logger.warning(message)
    logger.info(f"Weight experiment: {len(rows)} weights, {len(corpus)} signals, slope {slope:.4g}")
    return experiment
