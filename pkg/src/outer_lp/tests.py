# src/outer_lp/tests.py
import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from signal_core.exceptions import ExponentError
from signal_core.grids import Interval, SampledSignal
from wavepacket.tiles import Tile, TileField, TileGrid, TileRegion
from .exceptions import IncoverableError, TentGeometryError
from .geometry import Tent, TentFamily, TentGeometry, TentMembership, tent_membership
from .services import (
    SizeKind,
    family_sizes,
    greedy_cover,
    lambda_levels,
    outer_holder_check,
    outer_holder_integral_check,
    outer_lp_norm,
    outer_measure,
    size_e,
    size_m,
    super_level_measure,
    super_level_profile,
)

GEOMETRY = TentGeometry(theta=(-8.0, 8.0), theta_o=(-2.0, 2.0))


def small_grid(count: int = 32, scale_count: int = 3) -> TileGrid:
    f = SampledSignal.zeros(-count / 16, 1 / 8, count)
    return TileGrid.for_signal(f, scale_count=scale_count, eta_range=(-4.0, 4.0))


def random_field(rng: np.random.Generator, grid: TileGrid, density: float = 0.3) -> TileField:
    return TileField(grid, [rng.exponential(size=shape) * (rng.random(shape) < density) for shape in grid.shapes()])


def indicator(region: TileRegion, value: float = 1.0) -> TileField:
    return TileField(region.grid, [np.where(m, value, 0.0) for m in region.masks])


def find_tent(family: TentFamily, center: float, length: float, xi: float) -> int:
    return next(j for j, tent in enumerate(family.tents)
                if tent.interval.center == center and tent.length == length and tent.xi == xi)


def membership_masks(grid: TileGrid, tent: Tent):
    """Classification of every tile by the scalar membership test"""
    overlap, lacunary = [], []
    for layer in grid.layers:
        kinds = np.array([[tent_membership(Tile(u, layer.t, eta), tent, GEOMETRY) for u in grid.u]
                          for eta in layer.etas], dtype=object).reshape(layer.size, grid.u_count)
        overlap.append(kinds == TentMembership.OVERLAP)
        lacunary.append(kinds == TentMembership.LACUNARY)
    return overlap, lacunary


class TentGeometryTests(SimpleTestCase):
    def test_defaults_from_settings(self):
        self.assertEqual(TentGeometry.from_settings(b=1.0), GEOMETRY)

    def test_invalid_geometry(self):
        with self.assertRaises(TentGeometryError):
            TentGeometry(theta=(-8.0, 8.0), theta_o=(0.5, 2.0))
        with self.assertRaises(TentGeometryError):
            TentGeometry(theta=(-1.0, 1.0), theta_o=(-2.0, 2.0))
        with self.assertRaises(TentGeometryError):
            GEOMETRY.require_packet_support(3.0)


class TentMembershipTests(SimpleTestCase):
    def setUp(self):
        self.tent = Tent(Interval(0.0, 1.0), 0.0)

    def test_scale_too_large(self):
        self.assertEqual(tent_membership(Tile(0.0, 1.0, 0.0), self.tent, GEOMETRY), TentMembership.OUTSIDE)

    def test_overlap_at_locus(self):
        self.assertEqual(tent_membership(Tile(0.0, 0.5, 0.0), self.tent, GEOMETRY), TentMembership.OVERLAP)

    def test_lacunary_between_theta_tops(self):
        z = (GEOMETRY.theta[1] + GEOMETRY.theta_o[1]) / 2
        tile = Tile(0.0, 0.5, z / 0.5)
        self.assertEqual(tent_membership(tile, self.tent, GEOMETRY), TentMembership.LACUNARY)

    def test_outside_theta_and_spatial_boundary(self):
        self.assertEqual(tent_membership(Tile(0.0, 0.5, 20.0), self.tent, GEOMETRY), TentMembership.OUTSIDE)
        self.assertEqual(tent_membership(Tile(0.5, 0.5, 0.0), self.tent, GEOMETRY), TentMembership.OUTSIDE)
        self.assertEqual(tent_membership(Tile(0.25, 0.5, 0.0), self.tent, GEOMETRY), TentMembership.OVERLAP)


class TentFamilyTests(SimpleTestCase):
    def setUp(self):
        self.grid = small_grid()
        self.family = TentFamily(self.grid, GEOMETRY)

    def test_footprints_agree_with_membership(self):
        for j in (0, len(self.family) // 3, len(self.family) - 1, find_tent(self.family, 0.0, 4.0, 0.0)):
            overlap, lacunary = membership_masks(self.grid, self.family.tents[j])
            full = self.family.region(j)
            inner = self.family.region(j, overlap_only=True)
            for a, b, m_full, m_inner in zip(overlap, lacunary, full.masks, inner.masks):
                np.testing.assert_array_equal(m_full, a | b)
                np.testing.assert_array_equal(m_inner, a)

    def test_order_by_length_then_position(self):
        keys = [(-tent.length, tent.interval.left, tent.xi) for tent in self.family.tents]
        self.assertEqual(keys, sorted(keys))

    def test_family_covers_grid(self):
        self.family.require_covers(TileRegion.full(self.grid))

    def test_incoverable_region(self):
        far = TentFamily(self.grid, GEOMETRY, window=Interval(100.0, 1.0))
        with self.assertRaises(IncoverableError):
            greedy_cover(TileRegion.full(self.grid), far)

    def test_describe_counts(self):
        j = find_tent(self.family, 0.0, 4.0, 0.0)
        summary = self.family.describe(j)
        self.assertEqual(summary['overlap_tiles'], self.family.region(j, overlap_only=True).count())
        self.assertEqual(summary['overlap_tiles'] + summary['lacunary_tiles'], self.family.region(j).count())


class SizeTests(SimpleTestCase):
    def setUp(self):
        self.grid = small_grid()
        self.tent = Tent(Interval(0.0, 2.0), 0.5)
        self.rng = np.random.default_rng(41)

    def direct_sums(self, field: TileField):
        overlap, lacunary = membership_masks(self.grid, self.tent)
        sums = {'lac2': 0.0, 'all2': 0.0, 'over1': 0.0, 'top': 0.0}
        for index, (values, o, lac) in enumerate(zip(field.values, overlap, lacunary)):
            w = self.grid.layer_weight(index)
            v = np.abs(values)
            sums['lac2'] += float(np.sum(v[lac] ** 2)) * w
            sums['all2'] += float(np.sum(v[o | lac] ** 2)) * w
            sums['over1'] += float(np.sum(v[o])) * w
            if np.any(o | lac):
                sums['top'] = max(sums['top'], float(v[o | lac].max()))
        return sums

    def test_zero_field(self):
        zero = TileField.zeros(self.grid)
        self.assertEqual(size_e(zero, self.tent, GEOMETRY), 0.0)
        self.assertEqual(size_m(zero, self.tent, GEOMETRY), 0.0)

    def test_constant_field_matches_direct_summation(self):
        ones = TileField.constant(self.grid, 1.0)
        sums = self.direct_sums(ones)
        length = self.tent.length
        self.assertAlmostEqual(size_e(ones, self.tent, GEOMETRY), np.sqrt(sums['lac2'] / length) + 1.0, delta=1e-12)
        self.assertAlmostEqual(size_m(ones, self.tent, GEOMETRY),
                               np.sqrt(sums['all2'] / length) + sums['over1'] / length, delta=1e-12)

    def test_random_field_matches_direct_summation(self):
        field = random_field(self.rng, self.grid)
        sums = self.direct_sums(field)
        length = self.tent.length
        self.assertAlmostEqual(size_e(field, self.tent, GEOMETRY), np.sqrt(sums['lac2'] / length) + sums['top'],
                               delta=1e-10)
        self.assertAlmostEqual(size_m(field, self.tent, GEOMETRY),
                               np.sqrt(sums['all2'] / length) + sums['over1'] / length, delta=1e-10)

    def test_homogeneous(self):
        field = random_field(self.rng, self.grid)
        for c in (0.5, -3.0, 2j):
            scaled = field.scaled(c)
            self.assertAlmostEqual(size_e(scaled, self.tent, GEOMETRY), abs(c) * size_e(field, self.tent, GEOMETRY),
                                   delta=1e-10)
            self.assertAlmostEqual(size_m(scaled, self.tent, GEOMETRY), abs(c) * size_m(field, self.tent, GEOMETRY),
                                   delta=1e-10)

    def test_family_sizes_match_single_tents(self):
        family = TentFamily(self.grid, GEOMETRY)
        field = random_field(self.rng, self.grid)
        sizes = family_sizes(field, SizeKind.E, family)
        for j in range(0, len(family), 7):
            self.assertEqual(sizes[j], size_e(field, family.tents[j], GEOMETRY))


class OuterMeasureTests(SimpleTestCase):
    def setUp(self):
        self.grid = small_grid()
        self.family = TentFamily(self.grid, GEOMETRY)
        self.rng = np.random.default_rng(42)

    def random_region(self, density: float) -> TileRegion:
        return TileRegion(self.grid, [self.rng.random(shape) < density for shape in self.grid.shapes()])

    def test_empty_region(self):
        self.assertEqual(outer_measure(TileRegion.empty(self.grid), self.family), 0.0)

    def test_single_tent(self):
        j = find_tent(self.family, 0.0, 4.0, 0.0)
        self.assertEqual(outer_measure(self.family.region(j), self.family), 4.0)

    def test_two_separated_tents(self):
        grid = small_grid(count=64, scale_count=4)
        family = TentFamily(grid, GEOMETRY)
        left = family.region(find_tent(family, -3.0, 2.0, 0.0))
        right = family.region(find_tent(family, 3.0, 2.0, 0.0))
        self.assertEqual(outer_measure(left | right, family), 4.0)

    def test_monotone_with_superset_cover(self):
        for _ in range(5):
            small = self.random_region(0.002)
            large = small | self.random_region(0.002)
            self.assertLessEqual(outer_measure(small, self.family, [greedy_cover(large, self.family)]),
                                 outer_measure(large, self.family))

    def test_subadditive_with_merged_covers(self):
        for _ in range(5):
            first, second = self.random_region(0.002), self.random_region(0.002)
            cover_first, cover_second = greedy_cover(first, self.family), greedy_cover(second, self.family)
            union = outer_measure(first | second, self.family, [cover_first.merged(cover_second)])
            self.assertLessEqual(union, cover_first.total + cover_second.total)

    def test_greedy_cover_covers(self):
        region = self.random_region(0.01)
        self.assertTrue(greedy_cover(region, self.family).covers(region))


class SuperLevelMeasureTests(SimpleTestCase):
    def setUp(self):
        self.grid = small_grid()
        self.family = TentFamily(self.grid, GEOMETRY)
        self.rng = np.random.default_rng(43)

    def test_above_sup_is_zero(self):
        field = random_field(self.rng, self.grid)
        for kind in SizeKind:
            top = family_sizes(field, kind, self.family).max()
            self.assertEqual(super_level_measure(field, kind, top, self.family), 0.0)

    def test_field_on_first_tent(self):
        field = indicator(self.family.region(0), 2.0)
        for kind in SizeKind:
            self.assertEqual(super_level_measure(field, kind, 1e-9, self.family), self.family.lengths[0])

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2 ** 31))
    def test_nonincreasing_in_lambda(self, seed):
        field = random_field(np.random.default_rng(seed), self.grid, density=0.05)
        sizes = family_sizes(field, SizeKind.E, self.family)
        levels = np.linspace(0.0, sizes.max(), 12)
        measures = [entry.measure for entry in super_level_profile(field, SizeKind.E, levels, self.family, sizes)]
        self.assertTrue(all(a >= b for a, b in zip(measures, measures[1:])))


class OuterLpNormTests(SimpleTestCase):
    def setUp(self):
        self.grid = small_grid()
        self.family = TentFamily(self.grid, GEOMETRY)
        self.rng = np.random.default_rng(44)

    def test_zero_field(self):
        self.assertEqual(outer_lp_norm(TileField.zeros(self.grid), SizeKind.E, 2.0, self.family), 0.0)

    def test_homogeneous(self):
        field = random_field(self.rng, self.grid, density=0.05)
        for kind in SizeKind:
            base = outer_lp_norm(field, kind, 2.0, self.family)
            self.assertAlmostEqual(outer_lp_norm(field.scaled(3.0), kind, 2.0, self.family), 3.0 * base,
                                   delta=0.05 * 3.0 * base)

    def test_single_tent_layer_cake_lower_bound(self):
        j = 0
        field = indicator(self.family.region(j), 1.5)
        for kind, size in ((SizeKind.E, size_e), (SizeKind.M, size_m)):
            value = size(field, self.family.tents[j], GEOMETRY)
            for p in (1.5, 3.0):
                expected = self.family.lengths[j] ** (1 / p) * value
                self.assertGreaterEqual(outer_lp_norm(field, kind, p, self.family), expected * (1 - 1e-12))

    def test_left_endpoint_layer_cake(self):
        field = random_field(self.rng, self.grid, density=0.05)
        p = 2.0
        for kind in SizeKind:
            initial = family_sizes(field, kind, self.family)
            levels = lambda_levels(float(initial.max()))
            measures = np.array([entry.measure for entry in super_level_profile(field, kind, levels, self.family,
                                                                                initial)])
            steps = np.diff(levels ** p)
            head = measures[0] * levels[0] ** p
            left = head + float(np.sum(measures[:-1] * steps))
            trapezoid = head + float(np.sum((measures[:-1] + measures[1:]) / 2.0 * steps))
            norm = outer_lp_norm(field, kind, p, self.family)
            self.assertAlmostEqual(norm ** p, left, delta=1e-9 * left)
            self.assertGreaterEqual(norm ** p, trapezoid * (1 - 1e-12))

    def test_exponent_error(self):
        with self.assertRaises(ExponentError):
            outer_lp_norm(TileField.zeros(self.grid), SizeKind.E, 0.0, self.family)


class OuterHolderTests(SimpleTestCase):
    def setUp(self):
        self.grid = small_grid()
        self.family = TentFamily(self.grid, GEOMETRY)
        self.rng = np.random.default_rng(45)

    def test_zero_field_passes(self):
        tent = self.family.tents[3]
        check = outer_holder_check(TileField.zeros(self.grid), random_field(self.rng, self.grid), tent, GEOMETRY)
        self.assertEqual(check.lhs, 0.0)
        self.assertTrue(check.passed)

    def test_constant_fields_pass(self):
        ones = TileField.constant(self.grid, 1.0)
        for tent in self.family.tents[::10]:
            self.assertTrue(outer_holder_check(ones, ones, tent, GEOMETRY).passed)

    def test_rhs_carries_base_length(self):
        F = random_field(self.rng, self.grid, density=0.3)
        A = random_field(self.rng, self.grid, density=0.3)
        for tent in self.family.tents[::7]:
            check = outer_holder_check(F, A, tent, GEOMETRY)
            expected = 2.0 * tent.length * size_e(F, tent, GEOMETRY) * size_m(A, tent, GEOMETRY)
            self.assertAlmostEqual(check.rhs, expected, delta=1e-12 * max(1.0, expected))

    def test_random_pairs(self):
        for _ in range(1000):
            tent = self.family.tents[int(self.rng.integers(len(self.family)))]
            F = random_field(self.rng, self.grid, density=float(self.rng.uniform(0.01, 1.0)))
            A = random_field(self.rng, self.grid, density=float(self.rng.uniform(0.01, 1.0)))
            check = outer_holder_check(F, A, tent, GEOMETRY)
            self.assertTrue(check.passed, check.as_dict())

    def test_integral_check_reports_ratio(self):
        F = random_field(self.rng, self.grid, density=0.05)
        A = random_field(self.rng, self.grid, density=0.05)
        report = outer_holder_integral_check(F, A, None, 2.0, 2.0, self.family)
        self.assertGreater(report['integral'], 0.0)
        self.assertTrue(np.isfinite(report['ratio']))
        with self.assertRaises(ExponentError):
            outer_holder_integral_check(F, A, None, 2.0, 3.0, self.family)
