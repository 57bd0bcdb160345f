import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from construct.builders import build_iid, build_stratified
from ridge_core.models import RidgeAtom, RidgeCombination
from ridge_core.rng import make_rng
from spectral.catalog import sine_ridge_target
from spectral.models import SpectralMeasure, TargetFunction
from spectral.sampling import exact_sine_representation, simplified_representation

from .errors import fit_rate, l2_error, linf_error, lower_bound_floor, measure
from .models import REPORT_FIELDS, ErrorReport

SINE_1D_TARGET = sine_ridge_target((1,))
SWEEP = [2 ** k for k in range(4, 11)]
SEEDS = range(20)


def affine(d, a0, b0=0.0):
    return RidgeCombination(d=d, s=2, b0=b0, a0=a0, v=0.0, coefs=[], signs=[],
                            weights=np.zeros((0, d)), thresholds=[])


def ramp_target(t):
    return TargetFunction(d=1, evaluator=lambda x: np.maximum(x[:, 0] - t, 0.0), b0=0.0, a0=np.zeros(1))


def seed_means(build, error, target):
    return [np.mean([error(target, build(m, seed)) for seed in SEEDS]) for m in SWEEP]


class L2ErrorTests(SimpleTestCase):
    def test_exact_match(self):
        meas = SpectralMeasure.from_atoms(2, [((0.0, 0.0), 0.7, 0.0)])
        target = TargetFunction.from_measure(meas)
        c = build_iid(simplified_representation(meas, 2), 5, target, seed=0)
        self.assertEqual(l2_error(target, c), 0.0)
        self.assertEqual(linf_error(target, c), 0.0)

    def test_affine_part_of_sine(self):
        c = affine(1, [0.25])
        expected = math.sqrt(math.pi ** 2 / 3 - 1.5) / (4 * math.pi)
        self.assertAlmostEqual(l2_error(SINE_1D_TARGET, c), expected, places=12)
        c = affine(1, [1 / (4 * math.pi)])
        expected = math.sqrt(1 / 2 - 2 / math.pi + 1 / 3) / (4 * math.pi)
        self.assertAlmostEqual(l2_error(SINE_1D_TARGET, c), expected, places=12)

    def test_refinement_self_consistent(self):
        target = sine_ridge_target((1, 2))
        c = affine(2, [0.1, -0.2], b0=0.05)
        self.assertAlmostEqual(l2_error(target, c, nodes=64), l2_error(target, c, nodes=128), places=10)

    def test_permutation_invariant(self):
        rep = exact_sine_representation((1, 1))
        target = sine_ridge_target((1, 1))
        c = build_iid(rep, 64, target, seed=3)
        order = make_rng(1).permutation(c.term_count)
        shuffled = RidgeCombination(
            d=2, s=2, b0=c.b0, a0=c.a0, v=c.v, m=c.m, coefs=c.coefs[order],
            signs=c.signs[order], weights=c.weights[order], thresholds=c.thresholds[order],
        )
        self.assertAlmostEqual(l2_error(target, c), l2_error(target, shuffled), places=13)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            l2_error(SINE_1D_TARGET, affine(2, [0.0, 0.0]))

    @override_settings(RIDGE_QMC_POINTS=2 ** 12, RIDGE_LINF_RANDOM_POINTS=1000)
    def test_high_dimension_uses_low_discrepancy_points(self):
        target = TargetFunction(d=4, evaluator=lambda x: x[:, 0], b0=0.0, a0=np.array([1.0, 0, 0, 0]))
        c = affine(4, np.zeros(4))
        self.assertAlmostEqual(l2_error(target, c), math.sqrt(1 / 3), places=2)
        self.assertEqual(linf_error(target, c), 1.0)


class LinfErrorTests(SimpleTestCase):
    def test_single_ramp_discrepancy(self):
        atom = RidgeAtom(sign=1, a=[1.0], t=0.5, s=2)
        c = RidgeCombination.from_terms(1, 2, 0.0, [0.0], 1.0, [(1.0, atom)])
        self.assertAlmostEqual(linf_error(ramp_target(0.2), c), 0.3, delta=1e-6)

    def test_refinement_never_lowers_grid_maximum(self):
        target = sine_ridge_target((3,))
        c = affine(1, [0.0])
        grid = np.linspace(-1, 1, 9)[:, None]
        grid_max = float(np.max(np.abs(target(grid))))
        refined = linf_error(target, c, resolution=9)
        self.assertGreaterEqual(refined, grid_max)
        self.assertAlmostEqual(refined, 1 / (4 * math.pi * 9), places=8)

    def test_sup_bounds_l2(self):
        rep = exact_sine_representation((2, 1))
        target = sine_ridge_target((2, 1))
        for seed in range(5):
            report = measure(target, build_iid(rep, 8, target, seed=seed), method='iid', seed=seed)
            self.assertLessEqual(report.l2, report.linf)


class ErrorReportTests(SimpleTestCase):
    def test_row(self):
        report = ErrorReport(m=16, method='iid', seed=1, l2=0.125, linf=0.5, term_count=16, inner_sparsity_max=1)
        self.assertEqual(len(report.as_row()), len(REPORT_FIELDS))
        self.assertEqual(report.as_row(), ['16', 'iid', '1', '0.125', '0.5', '16', '1'])

    def test_negative_fields(self):
        with self.assertRaises(ValidationError):
            ErrorReport(m=16, method='iid', seed=1, l2=-1.0, linf=0.5, term_count=16, inner_sparsity_max=1)

    def test_measure_fills_counts(self):
        rep = exact_sine_representation((1, 1))
        target = sine_ridge_target((1, 1))
        report = measure(target, build_iid(rep, 32, target, seed=0), m=32, method='iid', seed=0)
        self.assertEqual((report.m, report.term_count, report.inner_sparsity_max), (32, 32, 2))


class RateFitTests(SimpleTestCase):
    def test_exact_power_law(self):
        fit = fit_rate([(m, 3.0 / m) for m in (8, 16, 64, 512)])
        self.assertAlmostEqual(fit.slope, -1.0, places=12)
        self.assertAlmostEqual(fit.r2, 1.0, places=12)
        self.assertEqual(fit.to_dict()['n'], 4)

    def test_constant_errors(self):
        self.assertEqual(fit_rate([(m, 0.2) for m in (4, 8, 16)]).slope, 0.0)

    def test_drops_nonpositive_errors(self):
        with self.assertLogs('metrics.errors', 'WARNING'):
            fit = fit_rate([(4, 0.5), (8, 0.0), (16, 0.25), (32, -1.0), (64, 0.125)])
        self.assertEqual(len(fit.points), 3)
        with self.assertRaises(ValueError):
            fit_rate([(4, 0.5), (8, 0.0), (16, 0.25)])

    def test_distinct_m(self):
        with self.assertRaises(ValueError):
            fit_rate([(4, 0.5), (4, 0.4), (16, 0.25)])


class FloorTests(SimpleTestCase):
    def test_formula(self):
        expected = (256 * 2 ** 5 * math.log(512)) ** -1.5
        self.assertAlmostEqual(lower_bound_floor(256, 2, 2), expected, places=15)

    def test_decreasing_in_m(self):
        values = [lower_bound_floor(m, 3, 2) for m in (2, 4, 64, 1024)]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_preconditions(self):
        with self.assertRaises(ValueError):
            lower_bound_floor(1, 1, 2)
        with self.assertRaises(ValueError):
            lower_bound_floor(16, 1, 2, A=0)


class SweepRateTests(SimpleTestCase):
    def test_monte_carlo_rate(self):
        rep = exact_sine_representation((1, 1))
        target = sine_ridge_target((1, 1))
        means = seed_means(lambda m, seed: build_iid(rep, m, target, seed=seed), l2_error, target)
        for m, err in zip(SWEEP, means):
            self.assertLessEqual(err, 3 * rep.v / math.sqrt(m))
        slope = fit_rate(zip(SWEEP, means)).slope
        self.assertTrue(-0.65 <= slope <= -0.35, slope)

    def test_stratified_improves_rate(self):
        rep = exact_sine_representation((1,))
        iid = seed_means(lambda m, seed: build_iid(rep, m, SINE_1D_TARGET, seed=seed), linf_error, SINE_1D_TARGET)
        strat = seed_means(
            lambda m, seed: build_stratified(rep, m, 1 / m, 'fractional', SINE_1D_TARGET, seed=seed),
            linf_error, SINE_1D_TARGET,
        )
        for m, a, b in zip(SWEEP, strat, iid):
            if m in (64, 256, 1024):
                self.assertLess(a, b)
            self.assertGreaterEqual(a, lower_bound_floor(m, 1, 2))
        iid_slope = fit_rate(zip(SWEEP, iid)).slope
        self.assertTrue(-0.65 <= iid_slope <= -0.35, iid_slope)
        self.assertLessEqual(fit_rate(zip(SWEEP, strat)).slope, iid_slope - 0.15)
