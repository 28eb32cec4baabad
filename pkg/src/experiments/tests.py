# src/experiments/tests.py
import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from signal_core.csv_io import read_signal, write_signal
from signal_core.grids import SampledSignal
from signal_core.services import partial_fourier_integral, spectrum
from .corpus import random_corpus
from .exceptions import RunConfigError
from .reports import plain
from .run_config import load_run_config, render_config

SMALL_RUN = """\
SPACING=0.125
WINDOW=4
SCALE_COUNT=3
SPARSE_SCALE_COUNT=3
FREQUENCY_COUNT=5
FREQUENCY_LOW=-2
FREQUENCY_HIGH=2
ETA_LOW=-4
ETA_HIGH=4
PACKING_EXPONENT=2
MAX_REMOVALS=2
CORPUS_SIZE=3
WEIGHT_EXPONENTS=0,0.1,0.2
"""


def smooth_signal(seed: int, count: int = 32, spacing: float = 1 / 8) -> SampledSignal:
    rng = np.random.default_rng(seed)
    x = -count * spacing / 2 + spacing * np.arange(count)
    values = np.zeros(count, dtype=complex)
    for _ in range(3):
        center, width = rng.uniform(-1.0, 1.0), rng.uniform(0.2, 0.6)
        values += rng.normal() * np.exp(-((x - center) / width) ** 2) * np.exp(1j * rng.uniform(-2.0, 2.0) * x)
    return SampledSignal(x[0], spacing, values)


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.config = self.write_config(SMALL_RUN)

    def tearDown(self):
        self._tmp.cleanup()

    def write_config(self, text: str, name: str = 'run.env') -> Path:
        path = self.tmp / name
        path.write_text(text)
        return path

    def write_signal(self, f: SampledSignal, name: str) -> Path:
        path = self.tmp / name
        write_signal(path, f)
        return path

    def call(self, name, *args, **options) -> str:
        out = StringIO()
        options.setdefault('config', str(self.config))
        options.setdefault('out_dir', str(self.tmp / 'out'))
        call_command(name, *[str(a) for a in args], verbosity=0, stdout=out, **options)
        return out.getvalue()

    def call_fails(self, name, *args, **options) -> int:
        with self.assertRaises(CommandError) as cm:
            self.call(name, *args, **options)
        return cm.exception.returncode

    def read_json(self, name: str) -> dict:
        return json.loads((self.tmp / 'out' / name).read_text())


class RunConfigTests(CommandTestCase):
    def test_settings_defaults(self):
        config = load_run_config()
        toolkit = settings.CARLESON_TOOLKIT
        self.assertEqual(config.r, toolkit['EXPONENTS']['R'])
        self.assertEqual(config.packing_exponent, toolkit['ITERATION']['PACKING_EXPONENT'])
        self.assertEqual(config.frequency_grid().points.size, toolkit['GRIDS']['FREQUENCY_COUNT'])

    def test_file_then_overrides(self):
        config = load_run_config(self.config, seed=11)
        self.assertEqual(config.spacing, 0.125)
        self.assertEqual(config.weight_exponents, (0.0, 0.1, 0.2))
        self.assertEqual(config.seed, 11)
        self.assertEqual(config.template().count, 32)

    def test_rendered_defaults_load_back(self):
        config = load_run_config(self.config, seed=5)
        path = self.write_config(render_config(config), 'rendered.env')
        self.assertEqual(load_run_config(path), config)

    def test_unknown_key(self):
        with self.assertRaises(RunConfigError) as cm:
            load_run_config(self.write_config(SMALL_RUN + "RADIUS=3\n"))
        self.assertEqual(cm.exception.exit_code, 2)

    def test_cross_field_invariants(self):
        for extra in ("D=0.5\n", "EPS=0.3\n", "THETA_O_LOW=-0.5\n", "FREQUENCY_COUNT=1\n", "T=3\n",
                      "C_INITIAL=1.5\n", "R=1\n", "ETA_LOW=5\n", "D_DOUBLEPRIME=2\n", "D_PRIME=1.9\n"):
            with self.subTest(extra=extra.strip()):
                with self.assertRaises(RunConfigError):
                    load_run_config(self.write_config(SMALL_RUN + extra))

    def test_missing_file(self):
        with self.assertRaises(RunConfigError):
            load_run_config(self.tmp / 'absent.env')


class CorpusTests(SimpleTestCase):
    def test_seeded_corpus_is_reproducible(self):
        template = SampledSignal.zeros(-2.0, 1 / 8, 32)
        first = random_corpus(template, np.random.default_rng(4), 3, (-2.0, 2.0))
        second = random_corpus(template, np.random.default_rng(4), 3, (-2.0, 2.0))
        for a, b in zip(first, second):
            self.assertTrue(a.same_grid(template))
            np.testing.assert_array_equal(a.samples, b.samples)

    def test_plain_converts_numpy(self):
        converted = plain({'a': np.float64(1.5), 'b': np.array([1, 2]), 'c': (np.bool_(True),)})
        self.assertEqual(json.dumps(converted), '{"a": 1.5, "b": [1, 2], "c": [true]}')


class DefaultsCommandTests(CommandTestCase):
    def test_prints_canonical_file(self):
        output = self.call('defaults', config=None)
        self.assertIn(f"R={float(settings.CARLESON_TOOLKIT['EXPONENTS']['R'])}", output)
        self.assertIn("PACKING_EXPONENT=", output)
        self.assertEqual(load_run_config(self.write_config(output, 'defaults.env')), load_run_config())

    def test_flags_override(self):
        self.assertIn("SEED=42", self.call('defaults', seed=42))

    def test_invalid_config_exit_code(self):
        bad = self.write_config("D=0.5\n", 'bad.env')
        self.assertEqual(self.call_fails('defaults', config=str(bad)), 2)


class CarlesonCommandTests(CommandTestCase):
    def test_zero_signal(self):
        path = self.write_signal(SampledSignal.zeros(-2.0, 1 / 8, 32), 'zero.csv')
        self.call('carleson', path)
        table = pd.read_csv(self.tmp / 'out' / 'carleson.csv')
        self.assertEqual(list(table.columns), ['x', 'value'])
        self.assertTrue(np.all(table['value'] == 0.0))
        self.assertEqual(self.read_json('carleson.json')['max_value'], 0.0)

    def test_two_frequencies_give_single_jump(self):
        path = self.write_signal(smooth_signal(1), 'f.csv')
        two = self.write_config(SMALL_RUN + "FREQUENCY_COUNT=2\n", 'two.env')
        self.call('carleson', path, config=str(two))
        f = read_signal(path)
        expected = np.abs(partial_fourier_integral(f, -2.0, 2.0, f.x, spec=spectrum(f, 2)))
        table = pd.read_csv(self.tmp / 'out' / 'carleson.csv')
        assert_allclose(table['value'], expected, rtol=1e-10, atol=1e-14)

    def test_probe_partition_and_maximal(self):
        path = self.write_signal(smooth_signal(2), 'f.csv')
        self.call('carleson', path, probe=[0.0], spectrum=True)
        report = self.read_json('carleson.json')
        self.assertEqual(report['probes'][0]['x'], 0.0)
        self.assertEqual(report['probes'][0]['partition'][0], -2.0)
        self.assertTrue((self.tmp / 'out' / 'spectrum.csv').exists())
        variation = pd.read_csv(self.tmp / 'out' / 'carleson.csv')['value'].to_numpy()
        self.call('carleson', path, operator='maximal')
        maximal = pd.read_csv(self.tmp / 'out' / 'carleson.csv')['value'].to_numpy()
        self.assertTrue(np.all(maximal <= variation * (1 + 1e-12) + 1e-14))

    def test_input_errors(self):
        self.assertEqual(self.call_fails('carleson', self.tmp / 'absent.csv'), 3)
        bad = self.tmp / 'bad.csv'
        bad.write_text("t,value\n0,1\n")
        self.assertEqual(self.call_fails('carleson', bad), 3)


class EmbeddingCommandTests(CommandTestCase):
    def test_transform_dump(self):
        path = self.write_signal(smooth_signal(3), 'f.csv')
        self.call('transform', path)
        table = pd.read_csv(self.tmp / 'out' / 'transform.csv')
        report = self.read_json('transform.json')
        self.assertEqual(list(table.columns), ['u', 't', 'eta', 'value'])
        self.assertEqual(len(table), report['tile_grid']['tile_count'])
        self.assertEqual(report['embedding'], 'F')
        self.assertAlmostEqual(report['max_value'], table['value'].max())

    def test_embed_a_linearizations(self):
        g = self.write_signal(smooth_signal(4), 'g.csv')
        f = self.write_signal(smooth_signal(5), 'f.csv')
        self.call('embed_a', g)
        self.assertEqual(self.read_json('embed_a.json')['linearization'], 'random')
        self.call('embed_a', g, linearize=str(f))
        self.assertEqual(self.read_json('embed_a.json')['linearization'], 'argmax')
        self.assertTrue(np.all(pd.read_csv(self.tmp / 'out' / 'embed_a.csv')['value'] >= 0))


class SparseCommandTests(CommandTestCase):
    def test_same_seed_gives_identical_json(self):
        self.call('sparse', seed=3, out_dir=str(self.tmp / 'first'))
        self.call('sparse', seed=3, out_dir=str(self.tmp / 'second'))
        first = (self.tmp / 'first' / 'sparse.json').read_bytes()
        self.assertEqual(first, (self.tmp / 'second' / 'sparse.json').read_bytes())
        self.assertEqual((self.tmp / 'first' / 'verification.json').read_bytes(),
                         (self.tmp / 'second' / 'verification.json').read_bytes())

    def test_certificate_and_packing(self):
        f = self.write_signal(smooth_signal(6), 'f.csv')
        g = self.write_signal(smooth_signal(7), 'g.csv')
        self.call('sparse', f, g)
        report = self.read_json('sparse.json')
        self.assertTrue(report['certificate']['pass'])
        self.assertAlmostEqual(report['eta'], (1 - 2.0 ** -2) / 3)
        self.assertTrue(all(ratio <= 0.25 * (1 + 1e-9) for ratio in report['trace']['packing_ratios']))
        self.assertEqual(report['intervals'][0], {'center': 0.0, 'length': 12.0})
        verification = self.read_json('verification.json')
        self.assertTrue(np.isfinite(verification['ratio']))
        self.assertTrue(verification['maximal_chain']['witness_chain_holds'])

    def test_zero_g_ratio(self):
        f = self.write_signal(smooth_signal(8), 'f.csv')
        g = self.write_signal(SampledSignal.zeros(-2.0, 1 / 8, 32), 'g.csv')
        self.call('sparse', f, g)
        verification = self.read_json('verification.json')
        self.assertEqual(verification['lhs'], 0.0)
        self.assertEqual(verification['ratio'], 0.0)

    def test_verify_round_trip_and_tampering(self):
        f = self.write_signal(smooth_signal(9), 'f.csv')
        g = self.write_signal(smooth_signal(10), 'g.csv')
        self.call('sparse', f, g)
        stored = self.read_json('verification.json')
        collection = self.tmp / 'out' / 'sparse.json'
        self.call('verify', f, g, collection, out_dir=str(self.tmp / 'checked'))
        checked = json.loads((self.tmp / 'checked' / 'verification.json').read_text())
        self.assertAlmostEqual(checked['ratio'], stored['ratio'], places=12)

        report = json.loads(collection.read_text())
        report['witnesses'][0] = []
        tampered = self.tmp / 'tampered.json'
        tampered.write_text(json.dumps(report))
        self.assertEqual(self.call_fails('verify', f, g, tampered), 4)
        tampered.write_text("{}")
        self.assertEqual(self.call_fails('verify', f, g, tampered), 3)

    def test_grid_mismatch_is_configuration_error(self):
        f = self.write_signal(smooth_signal(11), 'f.csv')
        g = self.write_signal(smooth_signal(12, count=16), 'g.csv')
        self.assertEqual(self.call_fails('sparse', f, g), 2)


class ReconstructCommandTests(CommandTestCase):
    def test_plateaus(self):
        wide = self.write_config(SMALL_RUN + "D=4\nD_DOUBLEPRIME=32\n", 'wide.env')
        self.call('reconstruct', 0.0, 3.0, config=str(wide))
        report = self.read_json('reconstruct.json')
        self.assertFalse(report['low_confidence'])
        self.assertLess(report['middle_error'], 2e-2)
        self.assertLess(report['outside_error'], 1e-3)
        table = pd.read_csv(self.tmp / 'out' / 'reconstruct.csv')
        self.assertEqual(list(table.columns), ['zeta', 'value'])
        self.assertEqual(len(table), 161)

    def test_narrow_interval_flagged(self):
        output = self.call('reconstruct', 1.0, 1.01, voices=4, zeta_count=41)
        self.assertTrue(self.read_json('reconstruct.json')['low_confidence'])
        self.assertIn('low confidence', output)

    def test_ordering_error(self):
        self.assertEqual(self.call_fails('reconstruct', 2.0, 1.0), 2)


class WeightsCommandTests(CommandTestCase):
    def test_table_and_summary(self):
        self.call('weights')
        table = pd.read_csv(self.tmp / 'out' / 'weights.csv')
        self.assertEqual(list(table.columns), ['a', 'A_t', 'ratio'])
        self.assertEqual(table['A_t'].iloc[0], 1.0)
        self.assertEqual(len(table), 3)
        report = self.read_json('weights.json')
        self.assertEqual(set(report) - {'config'},
                         {'slope', 'intercept', 'bound', 'pass', 'r', 'q', 't', 'rows'})
        self.assertAlmostEqual(report['bound'], max(1.0, 1.2 / (4.0 * 0.2)) + 0.5)

    def test_t_beyond_q_over_dual(self):
        bad = self.write_config(SMALL_RUN + "T=3\n", 'bad.env')
        self.assertEqual(self.call_fails('weights', config=str(bad)), 2)
