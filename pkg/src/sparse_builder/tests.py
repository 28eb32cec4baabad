# src/sparse_builder/tests.py
import numpy as np
from django.test import SimpleTestCase

from core.exceptions import SignalInputError
from outer_lp.geometry import TentGeometry
from signal_core.grids import FrequencyGrid, Interval, SampledSignal
from varcarleson.partitions import LinearizationData, random_linearization
from wavepacket.params import WavePacketParams
from wavepacket.tiles import TileGrid, TileRegion
from .context import IterationSettings, SparseContext, embedding_exponents
from .embedding import EmbeddingKind, embedding_exceptional_set, removal_sequence, tent_over_open_set
from .exceptions import ConstructionFailure, GenerationCapExceeded, IterationConfigError
from .intervals import CellSet, dyadic_candidates, on_lattice
from .services import (
    box_tail_bound,
    build_sparse,
    carleson_box,
    distance_decay,
    exceptional_set,
    generation_count,
    principal_iteration,
    sparse_maximal_bound,
    stopping_bounds,
    tail_decay_check,
    verify_domination,
)

GEOMETRY = TentGeometry(theta=(-8.0, 8.0), theta_o=(-2.0, 2.0))
P, R = 2.0, 3.0
ROOT = Interval.from_endpoints(-2.0, 2.0)
FREQUENCIES = FrequencyGrid.uniform(-2.0, 2.0, 5)


def smooth_signal(rng: np.random.Generator, count: int = 32, spacing: float = 1 / 8) -> SampledSignal:
    x = -count * spacing / 2 + spacing * np.arange(count)
    values = np.zeros(count, dtype=complex)
    for _ in range(3):
        center, width = rng.uniform(-1.0, 1.0), rng.uniform(0.2, 0.6)
        values += rng.normal() * np.exp(-((x - center) / width) ** 2) * np.exp(1j * rng.uniform(-2.0, 2.0) * x)
    return SampledSignal(x[0], spacing, values)


def spike(count: int = 32, index: int = 16, height: float = 1.0) -> SampledSignal:
    samples = np.zeros(count)
    samples[index] = height
    return SampledSignal(-count / 16, 1 / 8, samples)


def make_context(f: SampledSignal, seed: int = 0, **iteration) -> SparseContext:
    linearization = random_linearization(FREQUENCIES, f, R, np.random.default_rng(seed))
    options = {'packing_exponent': 2, 'max_removals': 2}
    options.update(iteration)
    return SparseContext.for_signal(
        f, linearization, P, R, params=WavePacketParams(), geometry=GEOMETRY,
        iteration=IterationSettings(**options), scale_count=3, scales_per_octave=1, c_eta=0.25, eta_range=(-4.0, 4.0),
    )


class CellSetTests(SimpleTestCase):
    def test_components_of_runs(self):
        cells = CellSet(0.0, 0.5, [False, True, True, False, True])
        self.assertEqual(cells.components(), [Interval.from_endpoints(0.5, 1.5), Interval.from_endpoints(2.0, 2.5)])
        self.assertEqual(cells.measure, 1.5)

    def test_interval_round_trip(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        interval = Interval.from_endpoints(-0.75, 0.5)
        cells = CellSet.from_interval(f, interval)
        self.assertEqual(cells.cell_count, 10)
        self.assertEqual(cells.components(), [interval])

    def test_set_algebra(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        left = CellSet.from_interval(f, Interval.from_endpoints(-2.0, 0.0))
        middle = CellSet.from_interval(f, Interval.from_endpoints(-1.0, 1.0))
        self.assertEqual((left | middle).measure, 3.0)
        self.assertEqual((left & middle).measure, 1.0)
        self.assertEqual((left - middle).measure, 1.0)
        self.assertTrue((left & middle).issubset(left))
        self.assertTrue((left - middle).isdisjoint(middle))
        self.assertTrue(CellSet.empty(f).is_empty())

    def test_lattice(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        self.assertTrue(on_lattice(f, ROOT))
        self.assertFalse(on_lattice(f, Interval.from_endpoints(-1.9, 2.0)))

    def test_dyadic_candidates(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        candidates = dyadic_candidates(f, ROOT, 3)
        self.assertEqual(len(candidates), 14)
        self.assertEqual(candidates[:2], ROOT.dyadic_children(1))
        for candidate in candidates:
            self.assertTrue(on_lattice(f, candidate))
            self.assertTrue(ROOT.contains_interval(candidate))

    def test_dyadic_candidates_stop_at_one_cell(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        candidates = dyadic_candidates(f, Interval.from_endpoints(0.0, 0.5), 10)
        self.assertEqual(min(c.length for c in candidates), 0.125)


class TentOverOpenSetTests(SimpleTestCase):
    def setUp(self):
        self.grid = TileGrid([0.5, 0.25], u_origin=-2.0, u_spacing=1 / 8, u_count=32, eta_range=(-2.0, 2.0))
        self.f = SampledSignal.zeros(-2.0, 1 / 8, 32)

    def oracle(self, interval: Interval) -> TileRegion:
        return TileRegion.from_predicate(
            self.grid, lambda u, t, eta: (t < interval.length) & (np.abs(u - interval.center) < interval.length - t)
        )

    def test_empty_set(self):
        self.assertTrue(tent_over_open_set([], self.grid).is_empty())
        self.assertTrue(tent_over_open_set(CellSet.empty(self.f), self.grid).is_empty())

    def test_single_interval_is_spatial_tent(self):
        interval = Interval.from_endpoints(-0.5, 0.25)
        region = tent_over_open_set([interval], self.grid)
        self.assertFalse(region.is_empty())
        for ours, expected in zip(region.masks, self.oracle(interval).masks):
            np.testing.assert_array_equal(ours, expected)

    def test_disjoint_components_add(self):
        first = Interval.from_endpoints(-2.0, -1.5)
        second = Interval.from_endpoints(1.0, 1.5)
        one = tent_over_open_set([first], self.grid)
        two = tent_over_open_set([second], self.grid)
        both = tent_over_open_set(CellSet.from_intervals(self.f, [first, second]), self.grid)
        self.assertTrue((one & two).is_empty())
        self.assertEqual(both.count(), one.count() + two.count())
        self.assertGreater(one.count(), 0)


class ContextTests(SimpleTestCase):
    def test_embedding_exponents_are_dual(self):
        sigma, tau = embedding_exponents(2.0, 3.0)
        self.assertAlmostEqual(tau, 1.75)
        self.assertAlmostEqual(1 / sigma + 1 / tau, 1.0)

    def test_endpoint_exponent_warns(self):
        with self.assertLogs('sparse_builder.context', level='WARNING'):
            sigma, tau = embedding_exponents(1.5, 3.0)
        self.assertAlmostEqual(tau, 1.575)
        self.assertAlmostEqual(1 / sigma + 1 / tau, 1.0)

    def test_iteration_settings_validation(self):
        with self.assertRaises(IterationConfigError):
            IterationSettings(c_initial=1.5)
        with self.assertRaises(IterationConfigError):
            IterationSettings(packing_exponent=0)
        self.assertAlmostEqual(IterationSettings(packing_exponent=2).eta, 0.25)
        self.assertAlmostEqual(IterationSettings().eta, (1 - 2.0 ** -12) / 3)

    def test_epsilon_below_finest_scale(self):
        with self.assertRaises(IterationConfigError):
            make_context(SampledSignal.zeros(-2.0, 1 / 8, 32), epsilon=0.5)

    def test_default_epsilon_is_finest_scale(self):
        context = make_context(SampledSignal.zeros(-2.0, 1 / 8, 32))
        self.assertEqual(context.epsilon, 1.0)

    def test_generation_count(self):
        self.assertEqual(generation_count(4.0, 1.0, 2), 2)
        self.assertEqual(generation_count(4.0, 1.0, 1), 3)
        self.assertEqual(generation_count(4.0, 1.0, 12), 1)
        self.assertEqual(generation_count(0.5, 1.0, 12), 0)


class EmbeddingExceptionalSetTests(SimpleTestCase):
    def test_zero_signal(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        context = make_context(f)
        for kind in EmbeddingKind:
            result = embedding_exceptional_set(f, ROOT, kind, 0.25, context)
            self.assertTrue(result.cells.is_empty())
            self.assertEqual(result.achieved, 0.0)
            self.assertTrue(result.satisfied)

    def test_flat_signal_respects_budget(self):
        f = SampledSignal(-2.0, 1 / 8, np.ones(32))
        context = make_context(f, max_removals=4)
        for kind in EmbeddingKind:
            result = embedding_exceptional_set(f, ROOT, kind, 0.25, context)
            self.assertLessEqual(result.cells.measure, 0.25 * ROOT.length)
            self.assertTrue(np.isfinite(result.achieved))

    def test_larger_budget_never_increases_constant(self):
        rng = np.random.default_rng(3)
        f = smooth_signal(rng)
        context = make_context(f, max_removals=4)
        sequence = removal_sequence(f, ROOT, EmbeddingKind.ENERGY, context)
        achieved = [embedding_exceptional_set(f, ROOT, EmbeddingKind.ENERGY, c, context, sequence).achieved
                    for c in (0.01, 0.05, 0.1, 0.25, 0.5, 0.9)]
        self.assertTrue(all(a >= b for a, b in zip(achieved, achieved[1:])))
        self.assertGreater(achieved[0], 0.0)


class ExceptionalSetTests(SimpleTestCase):
    def test_zero_signals(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        result = exceptional_set(f, f, ROOT, P, 0.25, make_context(f))
        self.assertEqual(result.intervals, [])
        self.assertEqual(result.halvings, 0)

    def test_spike_is_packed(self):
        f = spike(height=10.0)
        g = SampledSignal(-2.0, 1 / 8, np.full(32, 0.01))
        context = make_context(f)
        result = exceptional_set(f, g, ROOT, P, 0.25, context)
        self.assertLessEqual(result.measure, ROOT.length / 4)
        for child in result.intervals:
            self.assertTrue(ROOT.contains_interval(child))
            self.assertTrue(on_lattice(f, child))

    def test_stopping_bounds(self):
        rng = np.random.default_rng(11)
        for seed in range(3):
            f, g = smooth_signal(rng), smooth_signal(rng)
            result = exceptional_set(f, g, ROOT, P, 0.25, make_context(f, seed))
            self.assertTrue(stopping_bounds(f, g, result, P)['holds'])

    def test_budget_exhaustion_is_surfaced(self):
        f = spike()
        context = make_context(f, max_halvings=0)
        with self.assertRaises(ConstructionFailure):
            exceptional_set(f, SampledSignal.zeros(-2.0, 1 / 8, 32), ROOT, P, 0.9, context)

    def test_off_lattice_interval(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        with self.assertRaises(IterationConfigError):
            exceptional_set(f, f, Interval.from_endpoints(-1.9, 1.0), P, 0.25, make_context(f))


class PrincipalIterationTests(SimpleTestCase):
    def test_zero_signals(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        step = principal_iteration(f, f, ROOT, make_context(f))
        self.assertEqual(step.children, [])
        self.assertEqual(step.local_term, 0.0)
        self.assertTrue(step.decomposition['holds'])

    def test_packing_and_decomposition(self):
        rng = np.random.default_rng(5)
        for seed in range(3):
            f, g = smooth_signal(rng), smooth_signal(rng)
            step = principal_iteration(f, g, ROOT, make_context(f, seed))
            self.assertLessEqual(sum(child.length for child in step.children), ROOT.length / 4 + 1e-12)
            self.assertTrue(step.decomposition['holds'])
            self.assertLessEqual(step.local_term, step.decomposition['total'] * (1 + 1e-12))
            self.assertTrue(np.isfinite(step.local_ratio))


class TailDecayTests(SimpleTestCase):
    def test_no_tail_when_g_lives_in_3I(self):
        rng = np.random.default_rng(2)
        f = smooth_signal(rng)
        x = f.x
        g = f.with_samples(np.where(np.abs(x) < 1.0, 1.0, 0.0))
        I = Interval.from_endpoints(-0.5, 0.5)
        table = tail_decay_check(f, g, ROOT, I, 3, make_context(f))
        self.assertEqual(list(table['contribution']), [0.0] * 4)
        self.assertEqual(list(table['mass_bound']), [0.0] * 4)

    def test_dyadic_partition_per_level(self):
        rng = np.random.default_rng(4)
        f, g = smooth_signal(rng), smooth_signal(rng)
        I = Interval.from_endpoints(-1.0, 1.0)
        table = tail_decay_check(f, g, ROOT, I, 3, make_context(f))
        self.assertEqual(list(table['pieces']), [1, 2, 4, 8])
        np.testing.assert_allclose(table['length_sum'], I.length)
        self.assertIn('decay_rate', table.attrs)
        self.assertIn('decay_ratio', table.columns)
        self.assertTrue(np.all(table['contribution'] >= 0))

    def test_far_mass_held_to_tail_bound(self):
        rng = np.random.default_rng(6)
        f = smooth_signal(rng)
        x = f.x
        g = f.with_samples(np.exp(-((x - 1.75) / 0.15) ** 2))
        linearization = random_linearization(FREQUENCIES, f, R, np.random.default_rng(0))
        context = SparseContext.for_signal(
            f, linearization, P, R, params=WavePacketParams(), geometry=GEOMETRY,
            iteration=IterationSettings(packing_exponent=2, max_removals=2), scale_count=5,
            scales_per_octave=1, c_eta=0.25, eta_range=(-4.0, 4.0),
        )
        I = Interval.from_endpoints(-0.5, 0.5)
        table = tail_decay_check(f, g, ROOT, I, 1, context)
        self.assertTrue(np.all(table['mass_bound'] > 0))
        self.assertTrue(np.all(table['mass_norm'] <= table['mass_bound']))
        self.assertTrue(np.all(table['contribution'] <= table['tail_bound'] * (1 + 1e-9)))
        self.assertLessEqual(table.attrs['geometric_sum'], table.attrs['geometric_bound'] * (1 + 1e-9))

    def test_default_band_rejected(self):
        rng = np.random.default_rng(6)
        f = smooth_signal(rng)
        linearization = random_linearization(FREQUENCIES, f, R, np.random.default_rng(0))
        context = SparseContext.for_signal(
            f, linearization, P, R, params=WavePacketParams(), geometry=GEOMETRY,
            iteration=IterationSettings(packing_exponent=2, max_removals=2), scale_count=3,
            scales_per_octave=1, c_eta=0.25,
        )
        with self.assertRaises(SignalInputError):
            tail_decay_check(f, f, ROOT, Interval.from_endpoints(-0.5, 0.5), 1, context)


class DistanceDecayTests(SimpleTestCase):
    spacing = 1 / 8

    def setUp(self):
        x = -16.0 + self.spacing * np.arange(256)
        self.h = SampledSignal(-16.0, self.spacing, np.exp(-(x / 0.5) ** 2) * (np.abs(x) < 1.5))
        self.grid = TileGrid([1.0, 0.5], u_origin=-16.0, u_spacing=self.spacing, u_count=256, eta_range=(-4.0, 4.0))
        self.P = Interval.from_endpoints(-12.0, -11.0)

    def test_box_norm_within_tail_bound_at_dyadic_distances(self):
        distances = [1.0, 2.0, 4.0, 8.0, 16.0]
        table = distance_decay(self.h, self.P, distances, self.grid, WavePacketParams())
        np.testing.assert_allclose(table['relative_distance'], [2.0, 3.0, 5.0, 9.0, 17.0])
        norms, bounds = table['box_norm'].to_numpy(), table['bound'].to_numpy()
        self.assertGreater(norms[0], 0.0)
        self.assertTrue(np.all(norms <= bounds))
        self.assertTrue(np.all(np.diff(bounds) <= 0))
        self.assertLess(norms[-1], norms[0])
        self.assertLess(table.attrs['exponent'], 0.0)

    def test_shift_past_window_raises(self):
        with self.assertRaises(SignalInputError):
            distance_decay(self.h, self.P, [1.0, 40.0], self.grid, WavePacketParams())
        with self.assertRaises(SignalInputError):
            distance_decay(self.h, self.P, [-1.0], self.grid, WavePacketParams())

    def test_zero_signal_rejected(self):
        with self.assertRaises(SignalInputError):
            distance_decay(self.h.scaled(0.0), self.P, [1.0], self.grid, WavePacketParams())

    def test_tail_bound_shrinks_with_separation(self):
        box = carleson_box(self.grid, self.P)
        params = WavePacketParams()
        bounds = [box_tail_bound(1.0, D, self.P, box, 32.0, params) for D in (0.0, 1.0, 4.0, 16.0, 32.0)]
        self.assertTrue(all(a >= b for a, b in zip(bounds, bounds[1:])))
        self.assertGreater(bounds[0], 100.0 * bounds[-1])
        self.assertEqual(box_tail_bound(0.0, 1.0, self.P, box, 32.0, params), 0.0)


class BuildSparseTests(SimpleTestCase):
    def test_zero_signals_give_root(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        collection, trace = build_sparse(f, f, ROOT, make_context(f))
        self.assertEqual(collection.intervals, [ROOT.dilate(3.0)])
        self.assertEqual(collection.witnesses[0].measure, ROOT.length)
        self.assertEqual(trace.generation_sizes[0], 1)

    def test_certificate_and_generation_sizes(self):
        rng = np.random.default_rng(7)
        for seed in range(3):
            f, g = smooth_signal(rng), smooth_signal(rng)
            context = make_context(f, seed)
            collection, trace = build_sparse(f, g, ROOT, context)
            certificate = collection.certify()
            self.assertTrue(certificate['pass'])
            self.assertGreaterEqual(certificate['min_witness_ratio'], context.iteration.eta * (1 - 1e-12))
            for n, generation in enumerate(trace.generations):
                for Q in generation:
                    self.assertLessEqual(Q.length, ROOT.length * 4.0 ** -n + 1e-12)
            self.assertLessEqual(len(trace.generations), generation_count(ROOT.length, context.epsilon, 2) + 1)
            for first in range(len(collection)):
                for second in range(first + 1, len(collection)):
                    self.assertTrue(collection.witnesses[first].isdisjoint(collection.witnesses[second]))

    def test_default_packing_keeps_root_only(self):
        rng = np.random.default_rng(8)
        f, g = smooth_signal(rng), smooth_signal(rng)
        collection, trace = build_sparse(f, g, ROOT, make_context(f, packing_exponent=12))
        self.assertEqual(len(collection), 1)
        self.assertAlmostEqual(collection.eta, (1 - 2.0 ** -12) / 3)

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        f, g = smooth_signal(rng), smooth_signal(rng)
        first = build_sparse(f, g, ROOT, make_context(f, 1))
        second = build_sparse(f, g, ROOT, make_context(f, 1))
        self.assertEqual(first[0].as_dict(), second[0].as_dict())
        self.assertEqual(first[1].as_dict(), second[1].as_dict())

    def test_threads_match_serial(self):
        rng = np.random.default_rng(10)
        f, g = smooth_signal(rng), smooth_signal(rng)
        serial = build_sparse(f, g, ROOT, make_context(f, 2))[0]
        threaded = build_sparse(f, g, ROOT, make_context(f, 2, threads=3))[0]
        self.assertEqual(serial.as_dict(), threaded.as_dict())

    def test_support_outside_root(self):
        f = spike(index=2)
        with self.assertRaises(SignalInputError):
            build_sparse(f, f, Interval.from_endpoints(-1.0, 1.0), make_context(f))

    def test_generation_cap(self):
        f = SampledSignal.zeros(-2.0, 1 / 8, 32)
        with self.assertRaises(GenerationCapExceeded):
            build_sparse(f, f, ROOT, make_context(f, packing_exponent=1, generation_cap=2))


class DominationTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(12)
        self.f, self.g = smooth_signal(rng), smooth_signal(rng)
        self.collection, _ = build_sparse(self.f, self.g, ROOT, make_context(self.f))

    def test_zero_g(self):
        zero = SampledSignal.zeros(-2.0, 1 / 8, 32)
        report = verify_domination(self.f, zero, self.collection, P, R, FREQUENCIES)
        self.assertEqual(report['lhs'], 0.0)
        self.assertEqual(report['ratio'], 0.0)

    def test_ratio_finite(self):
        report = verify_domination(self.f, self.g, self.collection, P, R, FREQUENCIES)
        self.assertGreater(report['rhs'], 0.0)
        self.assertTrue(np.isfinite(report['ratio']))

    def test_rhs_sees_modulus(self):
        plain = verify_domination(self.f, self.g, self.collection, P, R, FREQUENCIES)
        modulus = verify_domination(self.f.modulus(), self.g, self.collection, P, R, FREQUENCIES)
        self.assertAlmostEqual(plain['rhs'], modulus['rhs'], places=12)

    def test_witness_chain(self):
        report = sparse_maximal_bound(self.f, self.g, self.collection, P)
        self.assertTrue(report['witness_chain_holds'])
        self.assertGreater(report['maximal_pairing'], 0.0)


def gaussian_pair(spacing: float):
    """The same smooth f, g sampled on [-2, 2) at the given spacing"""
    count = int(round(4.0 / spacing))
    x = -2.0 + spacing * np.arange(count)
    f = SampledSignal(-2.0, spacing, np.exp(-(x / 0.7) ** 2) * np.exp(0.5j * x))
    g = SampledSignal(-2.0, spacing, np.exp(-((x - 0.3) / 0.6) ** 2))
    return f, g


def banded_context(f: SampledSignal, p: float, **iteration) -> SparseContext:
    """Partition (-2, 0, 2) with coefficients (1, 1/2) at every sample, so it is the same map on any grid"""
    linearization = LinearizationData(FREQUENCIES, f.origin, f.spacing, [[0, 2, 4]] * f.count,
                                      [[1.0, 0.5]] * f.count, R)
    return SparseContext.for_signal(
        f, linearization, p, R, params=WavePacketParams(), geometry=GEOMETRY,
        iteration=IterationSettings(**iteration), scale_count=3, scales_per_octave=1, c_eta=0.25,
        eta_range=(-4.0, 4.0),
    )


class DiscretizationStabilityTests(SimpleTestCase):
    def setUp(self):
        self.coarse = gaussian_pair(1 / 8)
        self.fine = gaussian_pair(1 / 16)

    def test_sparse_ratio_under_refinement_and_frequency_doubling(self):
        p = 1.5
        ratios = []
        for f, g in (self.coarse, self.fine):
            collection, _ = build_sparse(f, g, ROOT, banded_context(f, p, packing_exponent=12))
            self.assertEqual(len(collection), 1)
            ratios.append(verify_domination(f, g, collection, p, R, FREQUENCIES)['ratio'])
        f, g = self.coarse
        collection, _ = build_sparse(f, g, ROOT, banded_context(f, p, packing_exponent=12))
        doubled = verify_domination(f, g, collection, p, R, FrequencyGrid.uniform(-2.0, 2.0, 9))['ratio']
        self.assertGreater(ratios[0], 0.0)
        self.assertLess(abs(ratios[1] / ratios[0] - 1.0), 0.3)
        self.assertLess(abs(doubled / ratios[0] - 1.0), 0.3)

    def test_fixed_collection_ratio_under_refinement(self):
        p = 1.5
        f, g = self.coarse
        collection, _ = build_sparse(f, g, ROOT, banded_context(f, p, packing_exponent=2, max_removals=2))
        coarse = verify_domination(f, g, collection, p, R, FREQUENCIES)['ratio']
        fine = verify_domination(*self.fine, collection, p, R, FREQUENCIES)['ratio']
        self.assertGreater(coarse, 0.0)
        self.assertLess(abs(fine / coarse - 1.0), 0.3)

    def test_local_term_under_refinement(self):
        terms = []
        for f, g in (self.coarse, self.fine):
            step = principal_iteration(f, g, ROOT, banded_context(f, P, c_initial=1e-3, packing_exponent=2))
            self.assertEqual(step.children, [])
            terms.append(step.local_term)
        self.assertGreater(terms[0], 0.0)
        self.assertLess(abs(terms[1] / terms[0] - 1.0), 0.2)
