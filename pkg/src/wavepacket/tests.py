# src/wavepacket/tests.py
import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from signal_core.grids import FrequencyGrid, SampledSignal
from signal_core.services import spectrum
from varcarleson.partitions import LinearizationData, random_linearization
from .exceptions import OrderingError, ScaleError, TileGridError, WavePacketParameterError
from .params import WavePacketParams, chi, packet_normalization, psi_hat, smooth_step_down, transition_band
from .services import (
    bilinear_form_B,
    embed_A,
    embed_A_field,
    embed_F,
    embed_F_field,
    half_line_multiplier,
    mother_wavepacket,
    multiplier_grid,
    multiplier_reconstruction,
    packet_tail,
    psi_values,
    truncated_wavepacket,
    truncation_weight,
    truncation_weights,
    wave_packet_domination,
    wavepacket_samples,
)
from .tiles import Tile, TileField, TileGrid, TileRegion

PARAMS = WavePacketParams()
# wide separation between chi and psi^ keeps the blend error small
RECONSTRUCTION_PARAMS = WavePacketParams(b=1.0, d=4.0, eps=0.125, d_prime=0.5, d_doubleprime=32.0)


def smooth_signal(rng: np.random.Generator, count: int = 64, spacing: float = 1 / 8, carrier: float = 0.0) -> SampledSignal:
    origin = -spacing * (count // 2)
    x = origin + spacing * np.arange(count)
    bumps = sum(rng.normal() * np.exp(-((x - rng.uniform(-1, 1)) / 0.5) ** 2) for _ in range(3))
    return SampledSignal(origin, spacing, bumps * np.exp(1j * carrier * x))


def direct_packet_convolution(h: SampledSignal, u: float, t: float, eta: float) -> complex:
    """sum_j h(x_j) psi_{t,eta}(u - x_j) dx with psi evaluated by quadrature"""
    lag = u - h.x
    packet = np.exp(1j * eta * lag) * psi_values(lag / t, PARAMS) / t
    return complex(np.sum(h.samples * packet) * h.spacing)


class WavePacketParamsTests(SimpleTestCase):
    def test_defaults_from_settings(self):
        self.assertEqual(WavePacketParams.from_settings(), PARAMS)

    def test_invalid_constants(self):
        with self.assertRaises(WavePacketParameterError):
            WavePacketParams(b=1.0, d=0.5)
        with self.assertRaises(WavePacketParameterError):
            WavePacketParams(eps=0.3)
        with self.assertRaises(WavePacketParameterError):
            WavePacketParams(d_prime=2.0, d_doubleprime=1.0)
        with self.assertRaises(WavePacketParameterError):
            WavePacketParams(d_doubleprime=PARAMS.d)
        with self.assertRaises(WavePacketParameterError):
            WavePacketParams(d_prime=PARAMS.d - PARAMS.eps)

    def test_transition_band_respects_both_thresholds(self):
        bottom, top = transition_band(PARAMS)
        debias = packet_normalization(PARAMS).debias
        self.assertAlmostEqual(bottom + top, 1.0, places=12)
        self.assertGreaterEqual(bottom, debias * PARAMS.transition_bottom)
        self.assertLessEqual(top, debias * PARAMS.transition_top)
        self.assertEqual(float(smooth_step_down(bottom, PARAMS)), 1.0)
        self.assertEqual(float(smooth_step_down(top, PARAMS)), 0.0)

    def test_chi_normalization_positive(self):
        norm = packet_normalization(PARAMS)
        self.assertGreater(norm.mass, 0.0)
        self.assertAlmostEqual(norm.debias, 1.0, delta=0.05)
        self.assertEqual(chi(PARAMS.d + PARAMS.eps, PARAMS), 0.0)


class MotherWavePacketTests(SimpleTestCase):
    def test_transform_support_and_positivity(self):
        zeta = np.linspace(-2, 2, 4001)
        values = psi_hat(zeta, PARAMS)
        outside = np.abs(zeta) > PARAMS.b / 2 + zeta[1] - zeta[0]
        self.assertTrue(np.all(values[outside] < 1e-10))
        self.assertTrue(np.all(values >= 0))
        self.assertGreater(np.sum(values) * (zeta[1] - zeta[0]), 0.0)
        self.assertEqual(float(psi_hat(0.0, PARAMS)), 1.0)

    def test_even_real_and_unit_mass(self):
        psi = mother_wavepacket(PARAMS)
        assert_allclose(psi.samples, psi.samples[::-1], rtol=0, atol=0)
        self.assertFalse(np.any(psi.samples.imag))
        self.assertAlmostEqual(float(np.sum(psi.samples.real) * psi.spacing), 1.0, delta=1e-4)

    def test_packet_tail_dominates_and_decreases(self):
        s = np.array([0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])
        tail = packet_tail(s, PARAMS, reach=64.0)
        self.assertTrue(np.all(np.diff(tail) <= 0))
        self.assertGreaterEqual(tail[0], abs(float(psi_values(0.0, PARAMS)[0])))
        y = np.linspace(4.0, 64.0, 2001)
        self.assertLessEqual(np.max(np.abs(psi_values(y, PARAMS))), float(packet_tail(4.0, PARAMS, reach=64.0)))
        self.assertLess(tail[-1], 1e-3 * tail[0])

    def test_sampled_spectrum_concentrates_on_support(self):
        spec = spectrum(mother_wavepacket(PARAMS))
        outside = np.abs(spec.frequencies) > PARAMS.b / 2 + spec.step
        peak = np.max(np.abs(spec.coefficients))
        self.assertLess(np.max(np.abs(spec.coefficients[outside])), 1e-3 * peak)


class TruncatedWavePacketTests(SimpleTestCase):
    def test_zero_when_eta_outside(self):
        packet = truncated_wavepacket(1.0, 5.0, -1.0, 3.0, PARAMS)
        self.assertTrue(packet.is_zero())

    def test_zero_when_lower_distance_outside_chi_support(self):
        t = 2.0
        packet = truncated_wavepacket(t, 0.0, -(PARAMS.d + 2 * PARAMS.eps) / t, np.inf, PARAMS)
        self.assertTrue(packet.is_zero())

    def test_half_line_regime(self):
        t, eta = 1.5, 3.0
        xi_minus = eta - PARAMS.d / t
        packet = truncated_wavepacket(t, eta, xi_minus, np.inf, PARAMS)
        plain = wavepacket_samples(t, eta, PARAMS)
        assert_allclose(packet.samples, chi(PARAMS.d, PARAMS) * plain.samples, rtol=1e-12, atol=1e-15)

    def test_plain_packet_matches_dilated_mother(self):
        t, eta = 1.5, 3.0
        plain = wavepacket_samples(t, eta, PARAMS)
        expected = np.exp(1j * eta * plain.x) * psi_values(plain.x / t, PARAMS) / t
        peak = np.max(np.abs(expected))
        central = np.abs(plain.x) <= 8 * t
        assert_allclose(plain.samples[central], expected[central], atol=1e-4 * peak)

    def test_frequency_support(self):
        rng = np.random.default_rng(30)
        for _ in range(20):
            t = float(rng.uniform(0.5, 4.0))
            xi_minus = float(rng.uniform(-5, 0))
            eta = xi_minus + float(rng.uniform(PARAMS.d - PARAMS.eps / 2, PARAMS.d + PARAMS.eps / 2)) / t
            packet = truncated_wavepacket(t, eta, xi_minus, xi_minus + 40.0, PARAMS)
            spec = spectrum(packet, pad_factor=1)
            outside = np.abs(spec.frequencies - eta) >= PARAMS.b / t
            peak = np.max(np.abs(spec.coefficients))
            self.assertGreater(peak, 0.0)
            self.assertLess(np.max(np.abs(spec.coefficients[outside])), 1e-8 * peak)

    def test_ordering_error(self):
        with self.assertRaises(OrderingError):
            truncated_wavepacket(1.0, 0.0, 2.0, 1.0, PARAMS)

    @settings(max_examples=200, deadline=None)
    @given(t=st.floats(0.1, 10.0), xi_minus=st.floats(-10, 10), width=st.floats(0.01, 20),
           offset=st.floats(-1.5, 1.5), from_top=st.booleans())
    def test_only_if_support_conditions(self, t, xi_minus, width, offset, from_top):
        xi_plus = xi_minus + width
        distance = (PARAMS.d + offset * PARAMS.eps) / t
        eta = xi_plus - distance if from_top else xi_minus + distance
        lower, upper = (float(w) for w in truncation_weights(t, eta, xi_minus, xi_plus, PARAMS))
        a, c = t * (eta - xi_minus), t * (xi_plus - eta)
        low, high = PARAMS.d - PARAMS.eps, PARAMS.d + PARAMS.eps
        lower_regime = low < a < high and c > PARAMS.d_prime
        upper_regime = low < c < high and a > PARAMS.d_prime
        if lower != 0.0:
            self.assertTrue(lower_regime)
        if upper != 0.0:
            self.assertTrue(upper_regime)
        if not (lower_regime or upper_regime):
            self.assertEqual(float(truncation_weight(t, eta, xi_minus, xi_plus, PARAMS)), 0.0)

    def test_lower_summand_alone_near_xi_minus(self):
        t = 1.0
        eta = PARAMS.d / t
        lower, upper = truncation_weights(t, eta, 0.0, eta + 2.0 * PARAMS.d_doubleprime / t, PARAMS)
        self.assertEqual(float(lower), float(chi(PARAMS.d, PARAMS)))
        self.assertEqual(float(upper), 0.0)

    def test_upper_summand_alone_near_xi_plus(self):
        t = 1.0
        xi_plus = 3.0
        eta = xi_plus - PARAMS.d / t
        lower, upper = truncation_weights(t, eta, eta - 2.0 * PARAMS.d_doubleprime / t, xi_plus, PARAMS)
        self.assertEqual(float(lower), 0.0)
        self.assertEqual(float(upper), float(chi(PARAMS.d, PARAMS)))

    def test_both_summands_off_between_chi_supports(self):
        t = 1.0
        gap = PARAMS.d + 2 * PARAMS.eps
        lower, upper = truncation_weights(t, gap / t, 0.0, 2 * gap / t, PARAMS)
        self.assertEqual(float(lower), 0.0)
        self.assertEqual(float(upper), 0.0)

    def test_lower_summand_needs_d_prime_clearance(self):
        t = 1.0
        eta = PARAMS.d / t
        lower, _ = truncation_weights(t, eta, 0.0, eta + 0.9 * PARAMS.d_prime / t, PARAMS)
        self.assertEqual(float(lower), 0.0)

    def test_blend_in_transition_regime(self):
        t = 1.0
        eta = PARAMS.d / t
        xi_plus = eta + (PARAMS.d_prime + PARAMS.d_doubleprime) / (2 * t)
        lower, _ = truncation_weights(t, eta, 0.0, xi_plus, PARAMS)
        self.assertGreater(float(lower), 0.0)
        self.assertLess(float(lower), float(chi(PARAMS.d, PARAMS)))

    @settings(max_examples=200, deadline=None)
    @given(t=st.floats(0.1, 10.0), xi_minus=st.floats(-10, 10), offset=st.floats(-0.9, 0.9),
           excess=st.floats(1.001, 50.0))
    def test_ignores_xi_plus_beyond_d_doubleprime(self, t, xi_minus, offset, excess):
        eta = xi_minus + (PARAMS.d + offset * PARAMS.eps) / t
        xi_plus = eta + excess * PARAMS.d_doubleprime / t
        moved = float(truncation_weight(t, eta, xi_minus, xi_plus, PARAMS))
        self.assertEqual(moved, float(truncation_weight(t, eta, xi_minus, np.inf, PARAMS)))
        self.assertEqual(moved, float(truncation_weight(t, eta, xi_minus, 2 * xi_plus - eta, PARAMS)))

    def test_flat_in_xi_plus_for_short_d_doubleprime(self):
        params = WavePacketParams(d_doubleprime=4.0)
        values = [float(truncation_weight(1.0, 2.0, 0.0, xi_plus, params)) for xi_plus in (6.5, 7.5, 20.0)]
        self.assertGreater(values[0], 0.0)
        self.assertEqual(values[0], values[1])
        self.assertEqual(values[0], values[2])


class EmbedFTests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(31)

    def test_zero_signal(self):
        f = SampledSignal.zeros(-4.0, 1 / 8, 64)
        grid = TileGrid.for_signal(f, eta_range=(-6, 6))
        self.assertEqual(embed_F_field(f, grid, PARAMS).sup(), 0.0)
        self.assertEqual(embed_F(f, Tile(0.0, 1.0, 0.0), PARAMS), 0.0)

    def test_field_matches_direct_convolution(self):
        f = smooth_signal(self.rng, carrier=2.0)
        grid = TileGrid.for_signal(f, eta_range=(-6, 6))
        field = embed_F_field(f, grid, PARAMS)
        for layer_index in (0, 2, 4):
            layer = grid.layers[layer_index]
            for eta_index in (0, layer.size // 2, layer.size - 1):
                for u_index in (5, 32, 60):
                    u, eta = grid.u[u_index], layer.etas[eta_index]
                    direct = abs(direct_packet_convolution(f, u, layer.t, eta))
                    peak = field.sup()
                    self.assertAlmostEqual(field.values[layer_index][eta_index, u_index], direct, delta=1e-3 * peak)
                    self.assertAlmostEqual(embed_F(f, Tile(u, layer.t, eta), PARAMS), direct, delta=1e-3 * peak)

    def test_peaks_at_packet_position_and_frequency(self):
        t0, eta0 = 1.0, 6.0
        f = SampledSignal.from_function(
            lambda x: np.real(np.exp(1j * eta0 * x) * psi_values(x / t0, PARAMS) / t0), -4.0, 1 / 16, 128)
        grid = TileGrid([t0], f.origin, f.spacing, f.count, c_eta=0.25, eta_range=(0.0, 12.0))
        values = embed_F_field(f, grid, PARAMS).values[0]
        eta_index, u_index = np.unravel_index(np.argmax(values), values.shape)
        self.assertLessEqual(abs(grid.layers[0].etas[eta_index] - eta0), 1.0 / t0)
        self.assertLessEqual(abs(grid.u[u_index]), t0)

    def test_modulation_covariance(self):
        f = smooth_signal(self.rng)
        theta = 3.0
        modulated = f.with_samples(f.samples * np.exp(1j * theta * f.x))
        for tile in (Tile(0.0, 1.0, 0.5), Tile(-1.0, 2.0, -1.0), Tile(0.75, 0.5, 0.0)):
            shifted = Tile(tile.u, tile.t, tile.eta + theta)
            self.assertAlmostEqual(embed_F(modulated, shifted, PARAMS), embed_F(f, tile, PARAMS), delta=1e-3)

    def test_triangle_inequality(self):
        f, g = smooth_signal(self.rng), smooth_signal(self.rng, carrier=1.0)
        total = f.with_samples(f.samples + g.samples)
        grid = TileGrid.for_signal(f, eta_range=(-4, 4))
        combined = embed_F_field(total, grid, PARAMS)
        separate = [embed_F_field(h, grid, PARAMS) for h in (f, g)]
        for joint, a, b in zip(combined.values, separate[0].values, separate[1].values):
            self.assertTrue(np.all(joint <= a + b + 1e-12))

    def test_decays_away_from_support(self):
        f = SampledSignal.from_function(lambda x: ((x >= 0) & (x <= 1)) * np.sin(np.pi * x) ** 2, -8.0, 1 / 16, 256)
        t = 0.25
        peak = embed_F(f, Tile(0.5, t, 0.0), PARAMS)
        far = [embed_F(f, Tile(-k * t, t, 0.0), PARAMS) for k in (16, 20, 24)]
        self.assertTrue(all(v < 1e-2 * peak for v in far))

    def test_scale_error(self):
        f = SampledSignal.zeros(-4.0, 1 / 8, 64)
        with self.assertRaises(ScaleError):
            embed_F(f, Tile(0.0, 0.2, 0.0), PARAMS)


class EmbedATests(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(32)
        self.g = smooth_signal(self.rng, carrier=-8.0)
        low, _ = spectrum(self.g).band
        self.grid = FrequencyGrid([low, 10.0])
        self.block = LinearizationData(self.grid, self.g.origin, self.g.spacing,
                                       [[0, 1]] * self.g.count, [[1.0]] * self.g.count, 3.0)

    def test_zero_g(self):
        zero = SampledSignal.zeros(self.g.origin, self.g.spacing, self.g.count)
        self.assertEqual(embed_A(zero, Tile(0.0, 1.0, 8.0), self.block, PARAMS), 0.0)

    def test_single_block_reduces_to_convolution(self):
        t = 1.0
        eta = 10.0 - PARAMS.d / t
        for u in (-1.0, 0.0, 0.5):
            value = embed_A(self.g, Tile(u, t, eta), self.block, PARAMS)
            lag = self.g.x - u
            packet = np.exp(1j * eta * lag) * psi_values(lag / t, PARAMS) / t
            direct = chi(PARAMS.d, PARAMS) * abs(np.sum(self.g.samples * packet) * self.g.spacing)
            self.assertAlmostEqual(value, direct, delta=1e-3 * direct)

    def test_vanishes_outside_every_interval(self):
        for tile in (Tile(0.0, 1.0, 11.0), Tile(0.5, 2.0, 20.0)):
            self.assertEqual(embed_A(self.g, tile, self.block, PARAMS), 0.0)

    def test_field_matches_single_tiles(self):
        linearization = random_linearization(FrequencyGrid.uniform(-6, 6, 9), self.g, 3.0, self.rng)
        tiles = TileGrid.for_signal(self.g, eta_range=(-6, 6))
        field = embed_A_field(self.g, tiles, linearization, PARAMS)
        for layer_index in (1, 3):
            layer = tiles.layers[layer_index]
            for eta_index in range(0, layer.size, max(1, layer.size // 5)):
                tile = Tile(tiles.u[20], layer.t, layer.etas[eta_index])
                single = embed_A(self.g, tile, linearization, PARAMS)
                self.assertAlmostEqual(field.values[layer_index][eta_index, 20], single, delta=1e-9 * max(1.0, single))


class MultiplierReconstructionTests(SimpleTestCase):
    def test_half_line_identity(self):
        xi_minus = 0.5
        grid = TileGrid.geometric(0.25, 4.0, scales_per_octave=32, c_eta=PARAMS.eps / 16,
                                  eta_range=(xi_minus, xi_minus + 9.0))
        above = half_line_multiplier(xi_minus, xi_minus + np.array([1.0, 2.0, 3.0]), grid, PARAMS)
        assert_allclose(above, 1.0, atol=1e-3)
        self.assertEqual(float(half_line_multiplier(xi_minus, xi_minus - 0.1, grid, PARAMS)), 0.0)

    def test_zero_outside_interval(self):
        grid = multiplier_grid(-1.0, 2.0, PARAMS, scales_per_octave=8)
        values = multiplier_reconstruction(-1.0, 2.0, np.array([-4.5, -1.5, 2.5, 5.5]), grid, PARAMS)
        assert_allclose(values, 0.0, atol=1e-3)

    def test_random_intervals_reconstruct_indicator(self):
        rng = np.random.default_rng(33)
        params = RECONSTRUCTION_PARAMS
        for _ in range(10):
            xi_minus = float(rng.uniform(-5, 5))
            width = float(rng.uniform(2.0, 8.0))
            xi_plus = xi_minus + width
            grid = multiplier_grid(xi_minus, xi_plus, params)
            middle = xi_minus + width * np.linspace(0.25, 0.75, 9)
            assert_allclose(multiplier_reconstruction(xi_minus, xi_plus, middle, grid, params), 1.0, atol=2e-2)
            outside = np.array([xi_minus - 1.5 * width, xi_plus + 1.5 * width])
            assert_allclose(multiplier_reconstruction(xi_minus, xi_plus, outside, grid, params), 0.0, atol=1e-3)

    def test_translation_invariance(self):
        params = RECONSTRUCTION_PARAMS
        zeta = np.linspace(-0.5, 3.5, 9)
        base = multiplier_reconstruction(0.0, 3.0, zeta, multiplier_grid(0.0, 3.0, params), params)
        shift = 1.3
        moved = multiplier_reconstruction(shift, 3.0 + shift, zeta + shift,
                                          multiplier_grid(shift, 3.0 + shift, params), params)
        assert_allclose(moved, base, atol=1e-3)

    def test_ordering_error(self):
        grid = multiplier_grid(0.0, 1.0, PARAMS, scales_per_octave=4)
        with self.assertRaises(OrderingError):
            multiplier_reconstruction(1.0, 1.0, 0.5, grid, PARAMS)


class BilinearFormTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(34)
        self.f = smooth_signal(rng)
        self.tiles = TileGrid.for_signal(self.f, eta_range=(-4, 4))
        self.F = embed_F_field(self.f, self.tiles, PARAMS)
        self.A = TileField(self.tiles, [rng.uniform(0, 1, shape) for shape in self.tiles.shapes()])

    def test_zero_field(self):
        self.assertEqual(bilinear_form_B(self.F, TileField.zeros(self.tiles)), 0.0)

    def test_empty_region(self):
        self.assertEqual(bilinear_form_B(self.F, self.A, TileRegion.empty(self.tiles)), 0.0)

    def test_additive_over_disjoint_regions(self):
        left = TileRegion.from_predicate(self.tiles, lambda u, t, eta: u < 0.0)
        whole = bilinear_form_B(self.F, self.A)
        parts = bilinear_form_B(self.F, self.A, left) + bilinear_form_B(self.F, self.A, ~left)
        self.assertAlmostEqual(whole, parts, delta=1e-12 * whole)

    def test_time_cutoff_drops_fine_scales(self):
        cutoff = self.tiles.scales[2]
        coarse = TileRegion.from_predicate(self.tiles, lambda u, t, eta: np.full(u.shape, t > cutoff))
        self.assertAlmostEqual(bilinear_form_B(self.F, self.A, epsilon=cutoff),
                               bilinear_form_B(self.F, self.A, coarse), delta=1e-14)

    def test_grid_mismatch(self):
        other = TileGrid.for_signal(self.f, eta_range=(-2, 2))
        with self.assertRaises(TileGridError):
            bilinear_form_B(self.F, TileField.zeros(other))


class WavePacketDominationTests(SimpleTestCase):
    def test_ratio_finite_on_corpus(self):
        rng = np.random.default_rng(35)
        for _ in range(3):
            f = smooth_signal(rng, count=32, spacing=1 / 4)
            g = smooth_signal(rng, count=32, spacing=1 / 4)
            low, high = spectrum(f).band
            linearization = random_linearization(FrequencyGrid.uniform(low, high, 8), f, 3.0, rng)
            tiles = TileGrid.for_signal(f)
            report = wave_packet_domination(f, g, linearization, 3.0, tiles, PARAMS)
            self.assertGreater(report['bilinear_form'], 0.0)
            self.assertTrue(np.isfinite(report['ratio']))

    def test_ratio_stable_under_refinement(self):
        frequencies = FrequencyGrid.uniform(-2.0, 2.0, 5)
        ratios = []
        for spacing in (1 / 4, 1 / 8):
            count = int(round(8.0 / spacing))
            x = -4.0 + spacing * np.arange(count)
            f = SampledSignal(-4.0, spacing, np.exp(-(x / 0.7) ** 2) * np.exp(0.5j * x))
            g = SampledSignal(-4.0, spacing, np.exp(-((x - 0.3) / 0.6) ** 2))
            linearization = LinearizationData(frequencies, f.origin, spacing, [[0, 2, 4]] * count,
                                              [[1.0, 0.5]] * count, 3.0)
            report = wave_packet_domination(f, g, linearization, 3.0, TileGrid.for_signal(f), PARAMS)
            self.assertGreater(report['bilinear_form'], 0.0)
            ratios.append(report['ratio'])
        self.assertGreater(ratios[0], 0.0)
        self.assertLess(abs(ratios[1] / ratios[0] - 1.0), 0.2)
