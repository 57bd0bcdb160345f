import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from construct.builders import build
from construct.models import StratumSamplingError

from .checks import SUITES
from .forms import BuildForm, ExperimentForm, SweepForm
from .models import at_least, at_most
from .runner import ConfigError, validate

SWEEP_FILES = ('results.csv', 'means.csv', 'fits.json', 'manifest.json')
BUILD_FILES = ('combination.json', 'report.csv', 'manifest.json')


def quiet(name, *args, **options):
    out, err = StringIO(), StringIO()
    call_command(name, *args, stdout=out, stderr=err, **options)
    return out.getvalue()


def read_rows(path):
    with open(path, newline='') as handle:
        return list(csv.DictReader(handle))


class TempDirTestCase(SimpleTestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)


class ExperimentFormTests(SimpleTestCase):
    def data(self, **fields):
        data = {'target': 'sine-ridge:1', 'methods': ['iid'], 'm': [16, 32, 64], 'seeds': [0, 1]}
        data.update(fields)
        return data

    def test_defaults(self):
        config = validate(ExperimentForm, self.data())
        self.assertEqual((config.s, config.sampler, config.mode, config.masses), (2, 'exact', 'fractional', 'exact'))
        self.assertEqual(config.m, (16, 32, 64))

    def test_m_strictly_increasing(self):
        form = ExperimentForm(self.data(m=[16, 16, 32]))
        self.assertFalse(form.is_valid())
        self.assertIn('m', form.errors)

    def test_comma_separated_lists(self):
        config = validate(ExperimentForm, self.data(m='4, 8,16', seeds='3,4'))
        self.assertEqual((config.m, config.seeds), ((4, 8, 16), (3, 4)))

    def test_order(self):
        self.assertFalse(ExperimentForm(self.data(s=4)).is_valid())
        self.assertEqual(validate(ExperimentForm, self.data(s=3)).s, 3)

    @override_settings(RIDGE_DEFAULT_SEED=7)
    def test_seed_defaults(self):
        self.assertEqual(validate(ExperimentForm, self.data(seeds=[])).seeds, (7,))
        self.assertEqual(validate(SweepForm, self.data(seeds=None)).seeds, tuple(range(7, 17)))

    def test_unknown_target(self):
        form = ExperimentForm(self.data(target='gaussian'))
        self.assertFalse(form.is_valid())
        self.assertIn('target', form.errors)

    def test_builder_options(self):
        with self.assertRaises(ConfigError):
            validate(ExperimentForm, self.data(methods=['sparse']))
        with self.assertRaises(ConfigError):
            validate(ExperimentForm, self.data(methods=['stratified'], sampler='simplified'))
        config = validate(ExperimentForm, self.data(methods=['iid', 'stratified'], epsilon=0.1))
        self.assertEqual(config.epsilon, 0.1)

    @override_settings(RIDGE_MAX_M=64, RIDGE_MAX_SEEDS=2)
    def test_desk_scale(self):
        with self.assertRaises(ConfigError):
            validate(ExperimentForm, self.data(m=[64, 128]))
        with self.assertRaises(ConfigError):
            validate(ExperimentForm, self.data(seeds=[0, 1, 2]))
        validate(ExperimentForm, self.data(m=[64, 128], force=True))

    def test_build_takes_single_values(self):
        self.assertFalse(BuildForm(self.data()).is_valid())
        self.assertTrue(BuildForm(self.data(m=[16], seeds=[1])).is_valid())

    def test_sweep_minimums(self):
        self.assertFalse(SweepForm(self.data(m=[16, 32])).is_valid())
        self.assertFalse(SweepForm(self.data()).is_valid())
        self.assertTrue(SweepForm(self.data(seeds=list(range(10)))).is_valid())

    def test_config_hash(self):
        first = validate(ExperimentForm, self.data())
        self.assertEqual(first.config_hash, validate(ExperimentForm, self.data()).config_hash)
        self.assertNotEqual(first.config_hash, validate(ExperimentForm, self.data(seeds=[0, 2])).config_hash)


class BuildCommandTests(TempDirTestCase):
    def run_build(self, out, **options):
        options = {'target': 'sine-ridge:1', 'methods': ['iid'], 'm': [16], 'seeds': [1], **options}
        return quiet('build', out=str(out), **options)

    def test_writes_artifacts(self):
        self.run_build(self.tmp)
        for name in BUILD_FILES:
            self.assertTrue((self.tmp / name).exists(), name)
        [row] = read_rows(self.tmp / 'report.csv')
        self.assertEqual((row['m'], row['method'], row['seed'], row['terms']), ('16', 'iid', '1', '16'))
        combination = json.loads((self.tmp / 'combination.json').read_text())
        self.assertEqual(len(combination['terms']), 16)
        manifest = json.loads((self.tmp / 'manifest.json').read_text())
        self.assertEqual(set(manifest['files']), {'combination.json', 'report.csv'})
        self.assertEqual(set(manifest['versions']), {'django', 'numpy', 'scipy'})

    def test_tuple_target(self):
        self.run_build(self.tmp, target='sine-ridge:(1,)', seeds=[0])
        [row] = read_rows(self.tmp / 'report.csv')
        self.assertEqual((row['m'], row['terms']), ('16', '16'))
        manifest = json.loads((self.tmp / 'manifest.json').read_text())
        self.assertEqual(manifest['config']['target'], 'sine-ridge:(1,)')

    @override_settings(RIDGE_QMC_POINTS=2 ** 10, RIDGE_LINF_RANDOM_POINTS=1000)
    def test_sparse_column(self):
        self.run_build(self.tmp, target='sine-ridge:1,1,1,1', methods=['sparse'], m0=2)
        [row] = read_rows(self.tmp / 'report.csv')
        self.assertLessEqual(int(row['sparsity']), 2)

    def test_byte_identical_reruns(self):
        self.run_build(self.tmp / 'a', methods=['stratified'], m=[32])
        self.run_build(self.tmp / 'b', methods=['stratified'], m=[32])
        for name in BUILD_FILES:
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_config_file_with_overrides(self):
        path = self.tmp / 'config.json'
        path.write_text(json.dumps({'target': 'sine-ridge:2', 'method': 'iid', 'm': [16], 'seeds': [3]}))
        self.run_build(self.tmp / 'out', config=str(path), target=None, methods=None, seeds=None, m=[32])
        [row] = read_rows(self.tmp / 'out' / 'report.csv')
        self.assertEqual((row['m'], row['seed']), ('32', '3'))

    def test_invalid_target(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_build(self.tmp, target='sine-ridge:0')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_out(self):
        with self.assertRaises(CommandError) as ctx:
            quiet('build', target='sine-ridge:1', methods=['iid'], m=[16])
        self.assertEqual(ctx.exception.returncode, 2)

    def test_builder_failure(self):
        with mock.patch('experiments.runner.build', side_effect=StratumSamplingError(7, 10 ** 6)):
            with self.assertRaises(CommandError) as ctx:
                self.run_build(self.tmp)
        self.assertEqual(ctx.exception.returncode, 3)


@override_settings(RIDGE_LINF_RESOLUTION={1: 257})
class RateSweepCommandTests(TempDirTestCase):
    def run_sweep(self, out, **options):
        options = {
            'target': 'sine-ridge:1', 'methods': ['iid', 'stratified'], 'm': [16, 32, 64],
            'seeds': list(range(10)), 'nodes': 32, **options,
        }
        return quiet('rate_sweep', out=str(out), **options)

    def test_writes_artifacts(self):
        self.run_sweep(self.tmp)
        rows = read_rows(self.tmp / 'results.csv')
        self.assertEqual(len(rows), 60)
        self.assertEqual(list(rows[0]), ['m', 'method', 'seed', 'l2', 'linf', 'terms', 'sparsity', 'floor', 'status'])
        self.assertEqual([(r['method'], r['m'], r['seed']) for r in rows[:2]], [('iid', '16', '0'), ('iid', '16', '1')])
        self.assertTrue(all(r['status'] == 'ok' for r in rows))
        for row in rows:
            self.assertGreaterEqual(float(row['l2']), float(row['floor']))
            self.assertLessEqual(float(row['l2']), float(row['linf']))
        fits = json.loads((self.tmp / 'fits.json').read_text())
        self.assertEqual(set(fits), {'iid', 'stratified'})
        for method in fits:
            self.assertEqual(set(fits[method]), {'l2', 'linf'})
            self.assertIn('slope', fits[method]['l2'])
        means = read_rows(self.tmp / 'means.csv')
        self.assertEqual(len(means), 6)

    def test_deterministic_across_runs_and_workers(self):
        self.run_sweep(self.tmp / 'a', workers=1)
        self.run_sweep(self.tmp / 'b', workers=3)
        for name in SWEEP_FILES:
            self.assertEqual((self.tmp / 'a' / name).read_bytes(), (self.tmp / 'b' / name).read_bytes(), name)

    def test_partial_failures(self):
        def flaky(rep, target, method, m, **kwargs):
            if m == 32:
                raise StratumSamplingError(3, 10)
            return build(rep, target, method, m, **kwargs)

        with mock.patch('experiments.runner.build', side_effect=flaky):
            self.run_sweep(self.tmp, methods=['iid'])
        rows = read_rows(self.tmp / 'results.csv')
        failed = [r for r in rows if r['status'] == 'failed']
        self.assertEqual(len(failed), 10)
        self.assertTrue(all(r['m'] == '32' and r['l2'] == '' for r in failed))

    def test_all_cells_fail(self):
        with mock.patch('experiments.runner.build', side_effect=ValueError("no atoms")):
            with self.assertRaises(CommandError) as ctx:
                self.run_sweep(self.tmp, methods=['iid'])
        self.assertEqual(ctx.exception.returncode, 3)

    def test_needs_ten_seeds(self):
        with self.assertRaises(CommandError) as ctx:
            self.run_sweep(self.tmp, seeds=[0, 1])
        self.assertEqual(ctx.exception.returncode, 2)


class VerifyCommandTests(TempDirTestCase):
    def report(self, which):
        quiet('verify', which, out=str(self.tmp))
        return json.loads((self.tmp / 'verify.json').read_text())

    def assert_all_pass(self, report):
        self.assertTrue(report)
        for check in report:
            self.assertEqual(set(check), {'check', 'value', 'tolerance', 'pass'})
            self.assertTrue(check['pass'], check)

    def test_identities(self):
        self.assert_all_pass(self.report('identities'))

    def test_sine_family(self):
        self.assert_all_pass(self.report('sine-family'))

    def test_packing(self):
        report = self.report('packing')
        self.assert_all_pass(report)
        size = next(check for check in report if check['check'] == 'packing-size')
        self.assertGreaterEqual(size['value'], 4)

    def test_sampler_fit(self):
        report = self.report('sampler-fit')
        self.assert_all_pass(report)
        fits = [check for check in report if check['check'].startswith('threshold-fit-')]
        self.assertEqual(len(fits), 4)
        self.assertTrue(all(check['tolerance'] == 0.01 for check in fits))

    def test_failing_check(self):
        with mock.patch.dict(SUITES, {'packing': lambda seed: [at_most('broken', 1.0, 0.5)]}):
            with self.assertRaises(CommandError) as ctx:
                quiet('verify', 'packing')
        self.assertEqual(ctx.exception.returncode, 1)


class CheckTests(SimpleTestCase):
    def test_comparisons(self):
        self.assertTrue(at_most('a', 1e-9, 1e-8).passed)
        self.assertFalse(at_least('b', 3, 4).passed)
        self.assertEqual(at_least('c', 5, 4).to_dict(), {'check': 'c', 'value': 5.0, 'tolerance': 4.0, 'pass': True})


class CatalogCommandTests(SimpleTestCase):
    def test_lists_targets(self):
        output = quiet('catalog')
        for name in ('sine-ridge:1', 'sine-ridge:1,1', 'cosine-pair', 'cosine-sum:<path>'):
            self.assertIn(name, output)
