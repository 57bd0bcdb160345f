import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase
from scipy import integrate, stats

from ridge_core.evaluation import relu_power
from ridge_core.rng import make_rng

from . import arcs
from .catalog import cosine_pair_measure, parse_theta, resolve_target, sine_ridge_target
from .identities import verify_ramp_identity, verify_square_identity
from .models import SpectralMeasure, TargetFunction, wrap_phase
from .sampling import (
    exact_sine_representation, represented_by_quadrature, residual, sample_atom,
    sample_atom_simplified, simplified_representation, spectral_representation, v_fs,
)

SINE_1D = SpectralMeasure.from_atoms(1, [((math.pi,), 1.0, -math.pi / 2)], name='sin(pi x)')


def estimator_values(rep, draws, points):
    """One-term estimates scale * v * coef * h(x) for every (point, draw)."""
    scale = 1.0 if rep.s == 2 else 0.5
    ridge = relu_power(points @ draws.weights.T - draws.thresholds, rep.s - 1)
    return scale * rep.v * ridge * draws.coefs


class SpectralNormTests(SimpleTestCase):
    def test_single_atom(self):
        meas = SpectralMeasure.from_atoms(2, [((1.0, -2.0), 0.3, 0.0)])
        self.assertAlmostEqual(v_fs(meas, 2), 9 * 0.3)
        self.assertAlmostEqual(v_fs(meas, 3), 27 * 0.3)
        self.assertAlmostEqual(v_fs(meas, 0), 0.3)

    def test_sine_ridge(self):
        meas = SpectralMeasure.from_atoms(2, [((math.pi, math.pi), 1.0, -math.pi / 2)])
        self.assertAlmostEqual(v_fs(meas, 2), 4 * math.pi ** 2)

    def test_linear_in_magnitudes(self):
        meas = cosine_pair_measure()
        doubled = SpectralMeasure(d=2, omegas=meas.omegas, mags=2 * meas.mags, phases=meas.phases)
        for s in (1, 2, 3):
            self.assertAlmostEqual(v_fs(doubled, s), 2 * v_fs(meas, s))

    def test_order_out_of_range(self):
        with self.assertRaises(ValueError):
            v_fs(SINE_1D, 4)


class SpectralMeasureTests(SimpleTestCase):
    def test_wrap_phase(self):
        self.assertAlmostEqual(wrap_phase(-math.pi), math.pi)
        self.assertAlmostEqual(wrap_phase(3 * math.pi / 2), -math.pi / 2)
        self.assertAlmostEqual(wrap_phase(0.4), 0.4)

    def test_rejects_bad_atoms(self):
        with self.assertRaises(ValidationError):
            SpectralMeasure.from_atoms(1, [((1.0,), 0.5, 0.0), ((1.0,), 0.2, 1.0)])
        with self.assertRaises(ValidationError):
            SpectralMeasure.from_atoms(1, [((1.0,), 0.0, 0.0)])
        with self.assertRaises(ValidationError):
            SpectralMeasure(d=1, omegas=[[1.0]], mags=[1.0], phases=[4.0])

    def test_taylor_data_matches_finite_differences(self):
        meas = cosine_pair_measure()
        h = 1e-4
        basis = np.eye(2)
        self.assertAlmostEqual(meas.value_at_zero, meas.evaluate(np.zeros(2))[0])
        grad = [(meas.evaluate(h * b)[0] - meas.evaluate(-h * b)[0]) / (2 * h) for b in basis]
        np.testing.assert_allclose(meas.gradient_at_zero, grad, atol=1e-6)
        hess = [[
            (meas.evaluate(h * (bi + bj))[0] - meas.evaluate(h * (bi - bj))[0]
             - meas.evaluate(h * (bj - bi))[0] + meas.evaluate(-h * (bi + bj))[0]) / (4 * h * h)
            for bj in basis] for bi in basis]
        np.testing.assert_allclose(meas.hessian_at_zero, hess, atol=1e-5)

    def test_json_document(self):
        meas = cosine_pair_measure()
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'pair.json'
            meas.save(path)
            doc = json.loads(path.read_text())
            self.assertEqual(doc['dim'], 2)
            self.assertEqual(sorted(doc['atoms'][0]), ['mag', 'omega', 'phase'])
            loaded = SpectralMeasure.load(path)
        np.testing.assert_array_equal(loaded.omegas, meas.omegas)
        np.testing.assert_array_equal(loaded.phases, meas.phases)

    def test_malformed_document(self):
        with self.assertRaises(ValidationError):
            SpectralMeasure.from_dict({'dim': 1})


class ArcTests(SimpleTestCase):
    def test_primitive_matches_quadrature(self):
        for u in (-4.0, -0.3, 0.0, 1.2, 2.0, 7.5):
            expected, _ = integrate.quad(lambda r: abs(math.cos(r)), 0.0, u, limit=200)
            self.assertAlmostEqual(float(arcs.abs_cos_primitive(u)), expected, places=8)

    def test_inverse(self):
        u = np.linspace(-9.0, 9.0, 101)
        np.testing.assert_allclose(arcs.abs_cos_primitive_inverse(arcs.abs_cos_primitive(u)), u, atol=1e-9)

    def test_cdf_inverse_stays_in_unit_interval(self):
        rate, offset = 7.0, -2.5
        total = arcs.abs_cdf(1.0, rate, offset)
        t = arcs.abs_cdf_inverse(np.linspace(0.0, total, 50), rate, offset)
        self.assertTrue(np.all((t >= 0) & (t <= 1)))
        np.testing.assert_allclose(arcs.abs_cdf(t, rate, offset), np.linspace(0.0, total, 50), atol=1e-12)

    def test_zeros(self):
        zeros = arcs.zeros_in_unit_interval(3 * math.pi, 0.0)
        np.testing.assert_allclose(zeros, [1 / 6, 1 / 2, 5 / 6])
        np.testing.assert_allclose(np.cos(3 * math.pi * zeros), 0.0, atol=1e-12)


class ExactSineTests(SimpleTestCase):
    def test_unit_mass(self):
        for theta in ((1,), (1, 1), (2, 1, 3)):
            rep = exact_sine_representation(theta)
            self.assertEqual(rep.v, 1.0)
            self.assertAlmostEqual(float(rep.pairs.exact_weight.sum()), 1.0, places=12)

    def test_abs_sine_integral(self):
        for k in (1, 2, 3):
            value, _ = integrate.quad(lambda t: abs(math.sin(math.pi * k * t)), 0, 1,
                                      points=[j / k for j in range(1, k)] or None)
            self.assertAlmostEqual(value, 2 / math.pi, places=10)

    def test_rejects_non_integer_theta(self):
        for theta in ((1.5,), (0, 1), (-1,), ()):
            with self.assertRaises(ValueError):
                exact_sine_representation(theta)

    def test_residual_vanishes_at_origin(self):
        target = sine_ridge_target((1, 2))
        self.assertEqual(residual(target, np.zeros(2), 2)[0], 0.0)
        rep = exact_sine_representation((1, 2))
        self.assertEqual(represented_by_quadrature(rep, np.zeros(2))[0], 0.0)

    def test_eta_rule(self):
        rep = exact_sine_representation((2, 1))
        draws = sample_atom(rep, 2000, seed=5)
        z = np.sign(draws.weights[:, 0])
        np.testing.assert_allclose(np.abs(draws.weights), np.tile([2 / 3, 1 / 3], (2000, 1)))
        expected = -z * np.sign(np.sin(3 * math.pi * draws.thresholds))
        np.testing.assert_array_equal(draws.signs, expected)

    def test_quadrature_matches_sine_residual(self):
        rep = exact_sine_representation((1,))
        x = np.linspace(-1, 1, 101)[:, None]
        expected = np.sin(math.pi * x[:, 0]) / (4 * math.pi) - x[:, 0] / 4
        np.testing.assert_allclose(represented_by_quadrature(rep, x), expected, atol=1e-6)

    def test_quadrature_matches_sine_residual_2d(self):
        rep = exact_sine_representation((1, 2))
        grid = np.linspace(-1, 1, 21)
        x = np.stack(np.meshgrid(grid, grid), axis=-1).reshape(-1, 2)
        expected = residual(sine_ridge_target((1, 2)), x, 2)
        np.testing.assert_allclose(represented_by_quadrature(rep, x), expected, atol=1e-6)

    def test_threshold_histogram(self):
        draws = sample_atom(exact_sine_representation((1,)), 10 ** 5, seed=2024)
        edges = np.linspace(0, 1, 21)
        observed, _ = np.histogram(draws.thresholds, bins=edges)
        probs = (np.cos(math.pi * edges[:-1]) - np.cos(math.pi * edges[1:])) / 2
        _, pvalue = stats.chisquare(observed, probs * observed.sum())
        self.assertGreater(pvalue, 0.01)


class SamplerTests(SimpleTestCase):
    def test_draw_invariants(self):
        meas = cosine_pair_measure()
        for s in (2, 3):
            draws = sample_atom(spectral_representation(meas, s), 5000, seed=s)
            np.testing.assert_allclose(np.abs(draws.weights).sum(axis=1), 1.0, atol=1e-12)
            self.assertTrue(np.all((draws.thresholds >= 0) & (draws.thresholds <= 1)))
            self.assertTrue(set(np.unique(draws.signs).tolist()) <= {-1, 1})

    def test_scale_bounded_by_twice_spectral_norm(self):
        meas = cosine_pair_measure()
        for s in (2, 3):
            rep = spectral_representation(meas, s)
            self.assertGreater(rep.v, 0)
            self.assertLessEqual(rep.v, 2 * v_fs(meas, s))

    def test_reproducible(self):
        rep = spectral_representation(cosine_pair_measure(), 2, seed=9)
        first, second = sample_atom(rep, 100), sample_atom(rep, 100)
        np.testing.assert_array_equal(first.thresholds, second.thresholds)
        other = sample_atom(rep, 100, seed=10)
        self.assertFalse(np.array_equal(first.thresholds, other.thresholds))

    def test_atoms_iterate_as_ridge_atoms(self):
        draws = sample_atom(exact_sine_representation((1, 1)), 5, seed=1)
        terms = list(draws)
        self.assertEqual(len(terms), 5)
        for coef, atom in terms:
            self.assertEqual(coef, atom.sign)
            self.assertEqual(atom.s, 2)

    def test_zero_frequency_has_no_weight(self):
        meas = SpectralMeasure.from_atoms(1, [((0.0,), 2.0, 0.0)])
        rep = spectral_representation(meas, 2)
        self.assertEqual(rep.v, 0.0)
        with self.assertRaises(ValueError):
            sample_atom(rep, 10)
        draws, v = sample_atom_simplified(meas, 2, 10)
        self.assertEqual((len(draws), v), (0, 0.0))
        np.testing.assert_allclose(residual(rep.target(), np.ones((3, 1)), 2), 0.0, atol=1e-15)

    def test_nonpositive_count(self):
        with self.assertRaises(ValueError):
            sample_atom(exact_sine_representation((1,)), 0)

    def test_unbiased_at_fixed_points(self):
        meas = cosine_pair_measure()
        points = make_rng(77).uniform(-1, 1, size=(10, 2))
        n = 10 ** 5
        for s in (2, 3):
            target = residual(TargetFunction.from_measure(meas), points, s)
            for rep in (spectral_representation(meas, s, seed=s), simplified_representation(meas, s, seed=s)):
                with self.subTest(s=s, kind=rep.kind):
                    values = estimator_values(rep, sample_atom(rep, n), points)
                    error = np.abs(values.mean(axis=1) - target)
                    self.assertTrue(np.all(error <= 4 * values.std(axis=1) / math.sqrt(n)))

    def test_quadrature_oracle_matches_residual(self):
        meas = cosine_pair_measure()
        points = make_rng(78).uniform(-1, 1, size=(25, 2))
        for s in (2, 3):
            rep = spectral_representation(meas, s)
            np.testing.assert_allclose(
                represented_by_quadrature(rep, points),
                residual(rep.target(), points, s), atol=1e-6,
            )

    def test_simplified_one_term_estimator(self):
        draws, v = sample_atom_simplified(SINE_1D, 2, 10 ** 6, seed=4)
        self.assertAlmostEqual(v, 2 * math.pi ** 2)
        self.assertTrue(np.all(np.abs(draws.coefs) <= 1))
        x = 0.37
        values = v * draws.coefs * relu_power(draws.weights[:, 0] * x - draws.thresholds, 1)
        expected = math.sin(math.pi * x) - math.pi * x
        self.assertLessEqual(abs(values.mean() - expected), 3 * values.std() / 1000)

    def test_simplified_frequency_marginal(self):
        meas = SpectralMeasure.from_atoms(2, [
            ((math.pi, math.pi / 2), 0.5, 0.3),
            ((-math.pi / 4, 2 * math.pi), 0.25, -1.0),
        ])
        draws, _ = sample_atom_simplified(meas, 2, 10 ** 5, seed=6)
        first = np.abs(draws.weights[:, 0]) > np.abs(draws.weights[:, 1])
        observed = [first.sum(), (~first).sum()]
        weights = meas.mags * meas.l1_norms ** 2
        _, pvalue = stats.chisquare(observed, weights / weights.sum() * len(draws))
        self.assertGreater(pvalue, 0.01)


class IdentityTests(SimpleTestCase):
    def test_ramp_identity(self):
        self.assertEqual(verify_ramp_identity(0.0, 1.0), 0.0)
        self.assertLessEqual(verify_ramp_identity(1.0, 1.0), 1e-8)
        self.assertLessEqual(verify_ramp_identity(-0.7, 2.0), 1e-8)

    def test_ramp_identity_requires_wide_limit(self):
        with self.assertRaises(ValueError):
            verify_ramp_identity(1.5, 1.0)

    def test_square_identity(self):
        self.assertLessEqual(verify_square_identity([0.0], [math.pi]), 1e-12)
        self.assertLessEqual(verify_square_identity([0.5], [math.pi]), 1e-8)
        self.assertLessEqual(verify_square_identity([0.3, -0.4], [math.pi, 2 * math.pi]), 1e-8)

    def test_square_identity_requires_frequency(self):
        with self.assertRaises(ValueError):
            verify_square_identity([0.3], [0.0])


class CatalogTests(SimpleTestCase):
    def test_sine_ridge(self):
        entry = resolve_target('sine-ridge:(1,2)')
        self.assertEqual(entry.theta, (1, 2))
        self.assertEqual(entry.d, 2)
        x = np.array([[0.2, -0.1]])
        np.testing.assert_allclose(entry.target()(x), entry.measure.evaluate(x), atol=1e-15)

    def test_cosine_pair(self):
        entry = resolve_target('cosine-pair')
        self.assertEqual(entry.d, 2)
        self.assertEqual(len(entry.measure), 2)

    def test_cosine_sum_from_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'f.json'
            path.write_text(json.dumps({'dim': 1, 'atoms': [{'omega': [2.0], 'mag': 0.5, 'phase': 0.1}]}))
            entry = resolve_target(f'cosine-sum:{path}')
        self.assertEqual(entry.d, 1)
        self.assertAlmostEqual(entry.target().b0, 0.5 * math.cos(0.1))

    def test_unknown_targets(self):
        for spec in ('sine-ridge:', 'sine-ridge:1.5', 'gaussian', 'cosine-sum:/nonexistent.json'):
            with self.assertRaises(ValueError):
                resolve_target(spec)

    def test_parse_theta(self):
        self.assertEqual(parse_theta('(3, 1)'), (3, 1))
        self.assertEqual(parse_theta('1,'), (1,))

    def test_tuple_with_trailing_comma(self):
        entry = resolve_target('sine-ridge:(1,)')
        self.assertEqual(entry.theta, (1,))
        self.assertEqual(entry.name, 'sine-ridge:1')
        for spec in ('sine-ridge:()', 'sine-ridge:(,)'):
            with self.assertRaises(ValueError):
                resolve_target(spec)
