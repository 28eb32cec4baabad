# src/signal_core/tests.py
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from .csv_io import read_signal, write_signal
from .exceptions import ExponentError, OrderingError, SignalError, SignalFileError
from .grids import FrequencyGrid, Interval, SampledSignal
from .services import (
    local_average,
    maximal_function,
    maximal_profile,
    partial_fourier_integral,
    prefix_partial_integrals,
    spectrum,
)


def random_signal(seed: int, count: int = 96, spacing: float = 1 / 32, origin: float = -1.5) -> SampledSignal:
    rng = np.random.default_rng(seed)
    x = origin + spacing * np.arange(count)
    envelope = np.exp(-((x - x.mean()) / 0.6) ** 2)
    noise = rng.normal(size=count) + 1j * rng.normal(size=count)
    return SampledSignal(origin, spacing, envelope * noise)


def indicator_signal(spacing: float = 1 / 64, end: float = 5.0) -> SampledSignal:
    """1 on [0, 1): the trapezoid integral of the samples is exactly 1"""
    return SampledSignal.from_function(lambda x: (x < 1.0 - 1e-12).astype(float), 0.0, spacing, int(end / spacing) + 1)


class GridTypeTests(SimpleTestCase):
    def test_interval_dilate_keeps_center(self):
        interval = Interval(center=1.0, length=2.0)
        tripled = interval.dilate()
        self.assertEqual(tripled.center, 1.0)
        self.assertEqual(tripled.length, 6.0)
        self.assertEqual((tripled.left, tripled.right), (-2.0, 4.0))

    def test_interval_rejects_nonpositive_length(self):
        with self.assertRaises(SignalError):
            Interval(0.0, 0.0)

    def test_frequency_grid_must_increase(self):
        with self.assertRaises(SignalError):
            FrequencyGrid([0.0, 1.0, 1.0])
        self.assertEqual(len(FrequencyGrid.uniform(-1, 1, 5)), 5)

    def test_refined_grid_contains_original(self):
        grid = FrequencyGrid.uniform(-2, 2, 5)
        refined = grid.refined()
        self.assertEqual(len(refined), 9)
        self.assertTrue(np.all(np.isin(grid.points, refined.points)))

    def test_signal_invariants(self):
        with self.assertRaises(SignalError):
            SampledSignal(0.0, 0.0, [1.0])
        with self.assertRaises(SignalError):
            SampledSignal(0.0, 1.0, [])
        with self.assertRaises(SignalError):
            SampledSignal(0.0, 1.0, [np.nan])

    def test_restrict_zeroes_outside(self):
        f = SampledSignal(0.0, 0.25, np.ones(16))
        restricted = f.restrict(Interval.from_endpoints(1.0, 2.0))
        self.assertEqual(int(np.sum(np.abs(restricted.samples))), 4)


class SpectrumTests(SimpleTestCase):
    def test_zero_signal_has_zero_spectrum(self):
        spec = spectrum(SampledSignal.zeros(0.0, 0.1, 32))
        self.assertFalse(np.any(spec.coefficients))

    def test_impulse_has_flat_spectrum(self):
        spacing = 1 / 16
        samples = np.zeros(64)
        samples[16] = 1 / spacing
        spec = spectrum(SampledSignal(-1.0, spacing, samples))
        assert_allclose(np.abs(spec.coefficients), 1.0, atol=1e-12)

    def test_modulated_gaussian_peaks_at_carrier(self):
        xi0 = 6.0
        f = SampledSignal.from_function(lambda x: np.exp(-x ** 2) * np.exp(1j * xi0 * x), -4.0, 1 / 16, 129)
        spec = spectrum(f)
        peak = spec.frequencies[np.argmax(np.abs(spec.coefficients))]
        self.assertLessEqual(abs(peak - xi0), spec.step)

        # direct quadrature of the Fourier integral at a few frequencies
        for zeta in spec.frequencies[::97]:
            direct = np.sum(f.samples * np.exp(-1j * f.x * zeta)) * f.spacing
            index = np.searchsorted(spec.frequencies, zeta)
            self.assertAlmostEqual(abs(direct - spec.coefficients[index]), 0.0, places=10)

    def test_frequencies_span_nyquist_band(self):
        f = random_signal(1)
        low, high = spectrum(f).band
        self.assertAlmostEqual(low, -np.pi / f.spacing)
        self.assertAlmostEqual(high, np.pi / f.spacing)


class PartialFourierIntegralTests(SimpleTestCase):
    def test_full_band_inverts(self):
        f = random_signal(2)
        spec = spectrum(f)
        low, high = spec.band
        values = partial_fourier_integral(f, low, high, f.x, spec=spec)
        assert_allclose(values, 2 * np.pi * f.samples, rtol=1e-6, atol=1e-9)

    def test_gaussian_inverts_with_extra_padding(self):
        f = SampledSignal.from_function(lambda x: np.exp(-4 * x ** 2), -4.0, 1 / 32, 257)
        spec = spectrum(f, pad_factor=4)
        low, high = spec.band
        x = np.array([0.0, 0.5, 1.0])
        values = partial_fourier_integral(f, low, high, x, spec=spec)
        assert_allclose(values, 2 * np.pi * np.exp(-4 * x ** 2), rtol=1e-6, atol=1e-9)

    def test_empty_interval_is_zero(self):
        f = random_signal(3)
        spec = spectrum(f)
        zeta = spec.frequencies[40]
        value = partial_fourier_integral(f, zeta + spec.step / 4, zeta + spec.step / 2, 0.3, spec=spec)
        self.assertEqual(value, 0)

    def test_additive_at_grid_frequency(self):
        f = random_signal(4)
        spec = spectrum(f)
        a, b, c = spec.frequencies[[30, 70, 110]]
        x = f.x[::7]
        whole = partial_fourier_integral(f, a, c, x, spec=spec)
        split = partial_fourier_integral(f, a, b, x, spec=spec) + partial_fourier_integral(f, b, c, x, spec=spec)
        assert_allclose(whole, split, rtol=0, atol=1e-12)

    def test_prefix_integrals_match_partial_integrals(self):
        f = random_signal(5)
        spec = spectrum(f)
        points = np.array([-20.0, -3.0, 0.5, 11.0])
        prefix = prefix_partial_integrals(f, points, f.x, spec=spec)
        direct = partial_fourier_integral(f, points[1], points[3], f.x, spec=spec)
        assert_allclose(prefix[:, 3] - prefix[:, 1], direct, atol=1e-12)

    def test_ordering_error(self):
        f = random_signal(6)
        with self.assertRaises(OrderingError):
            partial_fourier_integral(f, 1.0, 1.0, 0.0)


class LocalAverageTests(SimpleTestCase):
    def test_constant_function(self):
        f = SampledSignal(0.0, 1 / 32, np.full(129, 3.0 - 4.0j))
        for p in (1.0, 1.5, 2.0, 4.0):
            self.assertAlmostEqual(local_average(f, Interval.from_endpoints(1.0, 2.0), p), 5.0, places=12)

    def test_indicator_proportion(self):
        f = indicator_signal()
        self.assertAlmostEqual(local_average(f, Interval.from_endpoints(0.0, 2.0), 1.0), 0.5, delta=1e-2)

    def test_rejects_small_exponent(self):
        with self.assertRaises(ExponentError):
            local_average(random_signal(7), Interval(0.0, 1.0), 0.5)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2 ** 31), left=st.floats(-1.5, 0.5), length=st.floats(0.05, 2.0))
    def test_nondecreasing_in_exponent(self, seed, left, length):
        f = random_signal(seed)
        interval = Interval.from_endpoints(left, left + length)
        one, two, four = (local_average(f, interval, p) for p in (1.0, 2.0, 4.0))
        self.assertLessEqual(one, two * (1 + 1e-12) + 1e-300)
        self.assertLessEqual(two, four * (1 + 1e-12) + 1e-300)


class MaximalFunctionTests(SimpleTestCase):
    def test_constant_function(self):
        f = SampledSignal(0.0, 1 / 32, np.full(129, 3.0))
        assert_allclose(maximal_function(f, 2.0, np.array([0.5, 2.0, 3.5])), 3.0, rtol=1e-12)

    def test_indicator_examples(self):
        f = indicator_signal()
        self.assertAlmostEqual(float(maximal_function(f, 1.0, 2.0)), 0.5, delta=1e-2)
        self.assertAlmostEqual(float(maximal_function(f, 1.0, 4.0)), 0.25, delta=1e-2)

    def test_dominates_family_averages(self):
        f = random_signal(8)
        x = f.x[40]
        value = float(maximal_function(f, 1.5, x))
        for k in range(0, 7):
            length = f.spacing * 2 ** k
            for m in range(2 ** k + 1):
                left = x - m * f.spacing
                average = local_average(f, Interval.from_endpoints(left, left + length), 1.5)
                self.assertLessEqual(average, value * (1 + 1e-12))

    def test_profile_matches_pointwise(self):
        f = random_signal(9, count=48)
        assert_allclose(maximal_profile(f, 1.0), maximal_function(f, 1.0, f.x), rtol=1e-12)

    def test_dominates_modulus_on_grid(self):
        f = SampledSignal.from_function(lambda x: np.exp(-(x / 0.4) ** 2), -2.0, 1 / 32, 129)
        profile = maximal_profile(f, 2.0)
        self.assertTrue(np.all(profile >= np.abs(f.samples) * (1 - 1e-2)))


class SignalCsvTests(SimpleTestCase):
    def test_written_signal_reads_back(self):
        f = random_signal(10, count=20)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'f.csv'
            write_signal(path, f)
            loaded = read_signal(path)
        self.assertTrue(loaded.same_grid(f))
        assert_allclose(loaded.samples, f.samples, rtol=1e-15)

    def test_nonuniform_grid_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'f.csv'
            path.write_text("x,re,im\n0,1,0\n0.1,1,0\n0.25,1,0\n")
            with self.assertRaises(SignalFileError):
                read_signal(path)

    def test_bad_header_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'f.csv'
            path.write_text("t,value\n0,1\n")
            with self.assertRaises(SignalFileError):
                read_signal(path)

    def test_missing_file_is_input_error(self):
        with self.assertRaises(SignalFileError) as caught:
            read_signal('/nonexistent/signal.csv')
        self.assertEqual(caught.exception.exit_code, 3)
