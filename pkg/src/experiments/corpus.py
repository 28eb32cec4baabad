# src/experiments/corpus.py
from typing import List, Tuple

import numpy as np

from signal_core.grids import SampledSignal

BUMPS_PER_SIGNAL = 3


def random_signal(template: SampledSignal, rng: np.random.Generator, band: Tuple[float, float],
                  bumps: int = BUMPS_PER_SIGNAL) -> SampledSignal:
    """Sum of Gaussian bumps modulated into band, centred in the middle half of the window"""
    window = template.window
    x = template.x
    samples = np.zeros(template.count, dtype=complex)
    for _ in range(bumps):
        center = rng.uniform(window.center - window.length / 4, window.center + window.length / 4)
        width = rng.uniform(0.05, 0.15) * window.length
        frequency = rng.uniform(*band)
        amplitude = rng.normal() + 1j * rng.normal()
        samples += amplitude * np.exp(-((x - center) / width) ** 2) * np.exp(1j * frequency * x)
    return template.with_samples(samples)


def random_corpus(template: SampledSignal, rng: np.random.Generator, size: int,
                  band: Tuple[float, float]) -> List[SampledSignal]:
    return [random_signal(template, rng, band) for _ in range(size)]
