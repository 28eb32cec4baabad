# src/weights/tests.py
import numpy as np
from django.test import SimpleTestCase

from core.exceptions import InvariantViolation
from signal_core.grids import FrequencyGrid, SampledSignal
from varcarleson.services import var_carleson_function
from .exceptions import ExponentError, WeightParameterError
from .services import (
    WeightSample,
    a_t_constant,
    operator_ratio,
    weighted_bound_experiment,
    weighted_norm,
)

TEMPLATE = SampledSignal.zeros(-4.0, 1 / 8, 64)
GRID = FrequencyGrid.uniform(-2.0, 2.0, 6)


def brute_force_a_t(w: WeightSample, t: float) -> float:
    """sup over every run of consecutive samples"""
    values = w.values
    dual = values ** (1.0 / (1.0 - t))
    best = 0.0
    for start in range(values.size):
        for stop in range(start + 1, values.size + 1):
            best = max(best, values[start:stop].mean() * dual[start:stop].mean() ** (t - 1.0))
    return best


def smooth_corpus(seed: int, size: int = 4):
    rng = np.random.default_rng(seed)
    x = TEMPLATE.x
    corpus = []
    for _ in range(size):
        center, width = rng.uniform(-1.5, 1.5), rng.uniform(0.3, 0.8)
        corpus.append(TEMPLATE.with_samples(np.exp(-((x - center) / width) ** 2) * np.exp(1j * rng.uniform(-2, 2) * x)))
    return corpus


class WeightSampleTests(SimpleTestCase):
    def test_rejects_negative_and_complex(self):
        with self.assertRaises(WeightParameterError):
            WeightSample(TEMPLATE.with_samples(-np.ones(64)))
        with self.assertRaises(WeightParameterError):
            WeightSample(TEMPLATE.with_samples(np.full(64, 1 + 1j)))
        with self.assertRaises(WeightParameterError):
            WeightSample(TEMPLATE.with_samples(np.ones(64)), floor=0.0)

    def test_floor(self):
        w = WeightSample(TEMPLATE)
        np.testing.assert_array_equal(w.values, np.full(64, 1e-8))

    def test_power_weight(self):
        w = WeightSample.power(TEMPLATE, 0.5)
        np.testing.assert_allclose(w.values, np.sqrt(1 + np.abs(TEMPLATE.x)))


class ATConstantTests(SimpleTestCase):
    def test_constant_weight_is_one(self):
        for t in (1.1, 1.5, 2.0, 3.0):
            self.assertAlmostEqual(a_t_constant(WeightSample.constant(TEMPLATE, 3.0), t), 1.0, places=12)
            self.assertEqual(a_t_constant(WeightSample.constant(TEMPLATE), t), 1.0)

    def test_t_at_most_one(self):
        with self.assertRaises(ExponentError):
            a_t_constant(WeightSample.constant(TEMPLATE), 1.0)

    def test_power_weights_increase_with_a(self):
        values = [a_t_constant(WeightSample.power(TEMPLATE, a), 1.5) for a in (0.1, 0.2, 0.3)]
        self.assertGreater(values[0], 1.0)
        self.assertLess(values[0], values[1])
        self.assertLess(values[1], values[2])

    def test_close_to_brute_force(self):
        for a in (0.1, 0.3):
            w = WeightSample.power(TEMPLATE, a)
            ours, brute = a_t_constant(w, 1.5), brute_force_a_t(w, 1.5)
            self.assertLessEqual(ours, brute * (1 + 1e-12))
            self.assertGreaterEqual(ours, brute / 1.05)

    def test_scale_invariance(self):
        w = WeightSample.power(TEMPLATE, 0.2)
        for t in (1.25, 2.0):
            np.testing.assert_allclose(a_t_constant(w.scaled(4.0), t), a_t_constant(w, t), rtol=1e-12)

    def test_nonincreasing_in_t(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            w = WeightSample(TEMPLATE.with_samples(rng.lognormal(size=64)))
            values = [a_t_constant(w, t) for t in (1.2, 1.5, 2.0, 3.0, 5.0)]
            self.assertGreaterEqual(min(values), 1.0)
            for larger, smaller in zip(values, values[1:]):
                self.assertLessEqual(smaller, larger * (1 + 1e-9))


class WeightedNormTests(SimpleTestCase):
    def test_zero(self):
        self.assertEqual(weighted_norm(TEMPLATE, WeightSample.power(TEMPLATE, 0.2), 4.0), 0.0)

    def test_unit_weight_is_plain_norm(self):
        f = smooth_corpus(1, 1)[0]
        expected = (np.sum(np.abs(f.samples) ** 3) * f.spacing) ** (1 / 3)
        self.assertAlmostEqual(weighted_norm(f, WeightSample.constant(TEMPLATE), 3.0), expected, places=12)

    def test_homogeneity(self):
        f = smooth_corpus(2, 1)[0]
        w = WeightSample.power(TEMPLATE, 0.1)
        self.assertAlmostEqual(weighted_norm(f.scaled(3.0), w, 4.0), 3.0 * weighted_norm(f, w, 4.0), places=10)


class WeightedBoundExperimentTests(SimpleTestCase):
    def test_exponent_preconditions(self):
        corpus = smooth_corpus(3, 1)
        with self.assertRaises(WeightParameterError):
            weighted_bound_experiment(3.0, 1.2, 1.1, [0.1], corpus, GRID)
        with self.assertRaises(WeightParameterError):
            weighted_bound_experiment(3.0, 4.0, 3.0, [0.1], corpus, GRID)
        with self.assertRaises(WeightParameterError):
            weighted_bound_experiment(3.0, 4.0, 1.0, [0.1], corpus, GRID)
        with self.assertRaises(WeightParameterError):
            weighted_bound_experiment(3.0, 4.0, 1.2, [0.1], [], GRID)

    def test_ratio_invariant_under_scaling(self):
        corpus = smooth_corpus(4)
        transforms = [var_carleson_function(f, GRID, 3.0) for f in corpus]
        for w in (WeightSample.constant(TEMPLATE), WeightSample.power(TEMPLATE, 0.1)):
            np.testing.assert_allclose(operator_ratio(w.scaled(7.0), corpus, transforms, 4.0),
                                       operator_ratio(w, corpus, transforms, 4.0), rtol=1e-12)

    def test_table(self):
        experiment = weighted_bound_experiment(3.0, 4.0, 1.2, [0.0, 0.05, 0.1, 0.2], smooth_corpus(5), GRID)
        table = experiment.table
        self.assertEqual(list(table.columns), ['a', 'A_t', 'ratio'])
        self.assertEqual(table['A_t'].iloc[0], 1.0)
        self.assertTrue(np.all(table['A_t'] >= 1.0))
        self.assertTrue(np.all(np.isfinite(table['ratio'])) and np.all(table['ratio'] > 0))
        self.assertAlmostEqual(experiment.bound, 2.0)
        self.assertEqual(set(experiment.summary()), {'slope', 'intercept', 'bound', 'pass', 'r', 'q', 't'})

    def test_threads_match_serial(self):
        corpus = smooth_corpus(6)
        serial = weighted_bound_experiment(3.0, 4.0, 1.2, [0.05, 0.1], corpus, GRID)
        threaded = weighted_bound_experiment(3.0, 4.0, 1.2, [0.05, 0.1], corpus, GRID, threads=2)
        np.testing.assert_allclose(threaded.table['ratio'], serial.table['ratio'], rtol=1e-12)

    def test_slope_within_bound_for_power_weights(self):
        experiment = weighted_bound_experiment(3.0, 4.0, 1.2, [0.05, 0.1, 0.2], smooth_corpus(8), GRID)
        self.assertTrue(experiment.passed)
        self.assertLessEqual(experiment.slope, max(1.0, 1.2 / (4.0 * 0.2)) + 0.5)
        self.assertTrue(experiment.summary()['pass'])

    def test_slope_miss_raises(self):
        corpus = smooth_corpus(8)
        with self.assertRaises(InvariantViolation):
            weighted_bound_experiment(3.0, 4.0, 1.2, [0.05, 0.1, 0.2], corpus, GRID, slack=-50.0)
        relaxed = weighted_bound_experiment(3.0, 4.0, 1.2, [0.05, 0.1, 0.2], corpus, GRID, slack=-50.0, strict=False)
        self.assertFalse(relaxed.passed)
        self.assertFalse(relaxed.summary()['pass'])
