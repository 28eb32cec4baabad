# src/varcarleson/tests.py
import itertools

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from signal_core.grids import FrequencyGrid, SampledSignal
from signal_core.services import spectrum
from .exceptions import ExponentError, FrequencyGridTooSmall, GridMismatchError
from .partitions import LinearizationData, VariationPartition, random_linearization
from .services import (
    argmax_linearization,
    carleson_maximal,
    dual_pairing,
    linearized_form,
    partition_variation_value,
    var_carleson_dp,
    var_carleson_function,
)


def random_signal(rng: np.random.Generator, count: int = 64, spacing: float = 1 / 16) -> SampledSignal:
    origin = -spacing * (count // 2)
    x = origin + spacing * np.arange(count)
    envelope = np.exp(-(x / 1.0) ** 2)
    return SampledSignal(origin, spacing, envelope * (rng.normal(size=count) + 1j * rng.normal(size=count)))


def band_grid(f: SampledSignal, count: int) -> FrequencyGrid:
    low, high = spectrum(f).band
    return FrequencyGrid.uniform(low, high, count)


def brute_force_variation(prefix_row: np.ndarray, r: float) -> float:
    """Max over all partitions containing both ends, summed left to right"""
    size = prefix_row.size
    top = None
    for mask in itertools.product([False, True], repeat=size - 2):
        path = [0] + [i + 1 for i, keep in enumerate(mask) if keep] + [size - 1]
        total = 0.0
        for a, b in zip(path[:-1], path[1:]):
            total = total + abs(prefix_row[b] - prefix_row[a]) ** r
        top = total if top is None or total > top else top
    return top ** (1.0 / r)


class PartitionValueTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_zero_signal(self):
        f = SampledSignal.zeros(-2.0, 1 / 16, 64)
        grid = band_grid(f, 6)
        partition = VariationPartition(grid, [0, 2, 5])
        self.assertEqual(partition_variation_value(f, 0.0, partition, 3.0), 0.0)

    def test_single_jump_is_inversion(self):
        f = random_signal(self.rng)
        grid = band_grid(f, 2)
        x = f.x[20]
        value = partition_variation_value(f, x, VariationPartition(grid, [0, 1]), 3.0)
        self.assertAlmostEqual(value, abs(2 * np.pi * f.samples[20]), delta=1e-9)

    def test_smaller_exponent_gives_larger_value(self):
        f = random_signal(self.rng)
        partition = VariationPartition(band_grid(f, 9), [0, 2, 3, 6, 8])
        x = f.x[33]
        self.assertGreaterEqual(partition_variation_value(f, x, partition, 2.0),
                                partition_variation_value(f, x, partition, 4.0))

    def test_exponent_error(self):
        f = random_signal(self.rng)
        partition = VariationPartition(band_grid(f, 3), [0, 2])
        with self.assertRaises(ExponentError):
            partition_variation_value(f, 0.0, partition, 1.0)


class VariationDynamicProgramTests(SimpleTestCase):
    def test_two_point_grid_is_single_jump(self):
        rng = np.random.default_rng(12)
        f = random_signal(rng)
        grid = FrequencyGrid([-10.0, 7.0])
        spec = spectrum(f)
        x = f.x[40]
        result = var_carleson_dp(f, x, grid, 3.0, spec=spec)
        direct = partition_variation_value(f, x, VariationPartition(grid, [0, 1]), 3.0, spec=spec)
        self.assertEqual(result.value, direct)
        self.assertEqual(result.partition.indices.tolist(), [0, 1])

    def test_matches_exhaustive_enumeration(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            f = random_signal(rng)
            spec = spectrum(f)
            low, high = spec.band
            x = float(f.x[rng.integers(f.count)])
            r = float(rng.uniform(1.5, 5.0))
            for size in range(2, 11):
                grid = FrequencyGrid(np.sort(rng.uniform(low, high, size)))
                result = var_carleson_dp(f, x, grid, r, spec=spec)
                prefix = spec.cumulative([x])[0][spec.column_of(grid.points)]
                prefix = prefix - prefix[0]
                self.assertEqual(result.value, brute_force_variation(prefix, r))
                check = partition_variation_value(f, x, result.partition, r, spec=spec)
                self.assertAlmostEqual(check, result.value, delta=1e-12 * max(1.0, result.value))

    def test_zero_signal_prefers_finest_partition(self):
        f = SampledSignal.zeros(-2.0, 1 / 16, 64)
        grid = band_grid(f, 5)
        result = var_carleson_dp(f, 0.0, grid, 3.0)
        self.assertEqual(result.value, 0.0)
        self.assertEqual(result.partition.indices.tolist(), [0, 1, 2, 3, 4])

    def test_grid_too_small(self):
        f = SampledSignal.zeros(-2.0, 1 / 16, 64)
        with self.assertRaises(FrequencyGridTooSmall):
            var_carleson_dp(f, 0.0, FrequencyGrid([0.0]), 3.0)


class VariationFunctionTests(SimpleTestCase):
    def test_monotone_in_exponent(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            f = random_signal(rng, count=32, spacing=1 / 8)
            grid = band_grid(f, 12)
            spec = spectrum(f)
            three = var_carleson_function(f, grid, 3.0, spec=spec).samples.real
            six = var_carleson_function(f, grid, 6.0, spec=spec).samples.real
            self.assertTrue(np.all(three >= six * (1 - 1e-12)))

    def test_monotone_under_refinement(self):
        rng = np.random.default_rng(15)
        for _ in range(100):
            f = random_signal(rng, count=32, spacing=1 / 8)
            grid = band_grid(f, 7)
            spec = spectrum(f)
            coarse = var_carleson_function(f, grid, 3.0, spec=spec).samples.real
            fine = var_carleson_function(f, grid.refined(), 3.0, spec=spec).samples.real
            self.assertTrue(np.all(fine >= coarse * (1 - 1e-12)))

    def test_wave_packet_dominates_inversion(self):
        f = SampledSignal.from_function(lambda x: np.exp(-x ** 2) * np.exp(3j * x), -4.0, 1 / 16, 128)
        values = var_carleson_function(f, band_grid(f, 16), 3.0).samples.real
        self.assertTrue(np.all(values >= np.abs(2 * np.pi * f.samples) - 1e-9))

    def test_zero_signal(self):
        f = SampledSignal.zeros(-2.0, 1 / 16, 64)
        self.assertTrue(var_carleson_function(f, band_grid(f, 8), 3.0).is_zero())

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2 ** 31), scale_re=st.floats(-4, 4), scale_im=st.floats(-4, 4))
    def test_homogeneous(self, seed, scale_re, scale_im):
        f = random_signal(np.random.default_rng(seed), count=32, spacing=1 / 8)
        c = complex(scale_re, scale_im)
        grid = band_grid(f, 8)
        base = var_carleson_function(f, grid, 3.0).samples.real
        scaled = var_carleson_function(f.scaled(c), grid, 3.0).samples.real
        assert_allclose(scaled, abs(c) * base, rtol=1e-10, atol=1e-12)

    def test_profile_agrees_with_pointwise_program(self):
        f = random_signal(np.random.default_rng(16), count=32, spacing=1 / 8)
        grid = band_grid(f, 9)
        spec = spectrum(f)
        profile = var_carleson_function(f, grid, 2.5, spec=spec).samples.real
        pointwise = [var_carleson_dp(f, x, grid, 2.5, spec=spec).value for x in f.x]
        assert_allclose(profile, pointwise, rtol=1e-12)

    def test_threads_do_not_change_result(self):
        f = random_signal(np.random.default_rng(17))
        grid = band_grid(f, 10)
        single = var_carleson_function(f, grid, 3.0, threads=1).samples
        pooled = var_carleson_function(f, grid, 3.0, threads=3).samples
        assert_allclose(single, pooled, rtol=1e-13)

    def test_carleson_maximal_below_variation(self):
        f = random_signal(np.random.default_rng(18))
        grid = band_grid(f, 10)
        plain = carleson_maximal(f, grid).samples.real
        for r in (2.5, 3.0, 6.0):
            variation = var_carleson_function(f, grid, r).samples.real
            self.assertTrue(np.all(plain <= variation * (1 + 1e-12)))


class LinearizedFormTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(19)
        self.f = random_signal(self.rng)
        self.grid = band_grid(self.f, 10)

    def test_zero_g(self):
        g = SampledSignal.zeros(self.f.origin, self.f.spacing, self.f.count)
        linearization = random_linearization(self.grid, self.f, 3.0, self.rng)
        self.assertEqual(linearized_form(self.f, g, linearization, 3.0), 0)

    def test_coefficients_are_normalized(self):
        linearization = random_linearization(self.grid, self.f, 3.0, self.rng)
        assert_allclose(linearization.dual_norms(), 1.0, rtol=1e-12)

    def test_argmax_linearization_attains_pairing(self):
        g = SampledSignal(self.f.origin, self.f.spacing, self.rng.uniform(0, 1, self.f.count))
        linearization = argmax_linearization(self.f, self.grid, 3.0)
        value = linearized_form(self.f, g, linearization, 3.0)
        self.assertAlmostEqual(abs(value), dual_pairing(self.f, g, self.grid, 3.0), delta=1e-9)

    def test_random_linearization_bounded_by_pairing(self):
        g = random_signal(self.rng)
        pairing = dual_pairing(self.f, g, self.grid, 3.0)
        for _ in range(20):
            linearization = random_linearization(self.grid, self.f, 3.0, self.rng)
            value = linearized_form(self.f, g, linearization, 3.0)
            self.assertLessEqual(abs(value), pairing * (1 + 1e-9))

    def test_grid_mismatch(self):
        other = SampledSignal.zeros(self.f.origin, self.f.spacing / 2, self.f.count)
        linearization = random_linearization(self.grid, self.f, 3.0, self.rng)
        with self.assertRaises(GridMismatchError):
            linearized_form(self.f, other, linearization, 3.0)

    def test_unused_slots_carry_no_weight(self):
        linearization = LinearizationData(self.grid, self.f.origin, self.f.spacing,
                                          [[0, 9]] + [[0, 3, 9]] * (self.f.count - 1),
                                          [[2.0]] + [[1.0, 1.0]] * (self.f.count - 1), 3.0)
        self.assertEqual(linearization.coefficients[0, 1], 0)
        self.assertEqual(linearization.coefficients_at(0).tolist(), [1.0])


class DualPairingTests(SimpleTestCase):
    def test_zero_g(self):
        f = random_signal(np.random.default_rng(20))
        g = SampledSignal.zeros(f.origin, f.spacing, f.count)
        self.assertEqual(dual_pairing(f, g, band_grid(f, 6), 3.0), 0.0)

    def test_gaussian_bumps_positive(self):
        f = SampledSignal.from_function(lambda x: np.exp(-x ** 2), -4.0, 1 / 16, 128)
        g = SampledSignal.from_function(lambda x: np.exp(-(x - 0.5) ** 2), -4.0, 1 / 16, 128)
        value = dual_pairing(f, g, band_grid(f, 8), 3.0)
        self.assertTrue(np.isfinite(value))
        self.assertGreater(value, 0.0)

    def test_scaling(self):
        rng = np.random.default_rng(21)
        f, g = random_signal(rng), random_signal(rng)
        grid = band_grid(f, 8)
        base = dual_pairing(f, g, grid, 3.0)
        self.assertAlmostEqual(dual_pairing(f.scaled(-2.5j), g, grid, 3.0), 2.5 * base, delta=1e-9 * base)
