import itertools
import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings
from scipy import integrate

from ridge_core.evaluation import relu_power
from ridge_core.rng import make_rng
from spectral.sampling import exact_sine_representation, sample_atom

from .codes import (
    ENTROPY_QUARTER, binary_entropy, gilbert_varshamov_target, packing_lower_curve,
    packing_scale, pairwise_distance, select_packing, separation_bound, sine_family,
    sine_family_gram,
)
from .models import PackingSet


class SineFamilyTests(SimpleTestCase):
    def test_enumeration(self):
        fam = sine_family(2, 2)
        self.assertEqual(len(fam), 4)
        self.assertEqual([tuple(t) for t in fam.thetas], [(1, 1), (1, 2), (2, 1), (2, 2)])
        self.assertEqual(fam.l1_norms.tolist(), [2, 3, 3, 4])

    def test_norm_formula(self):
        fam = sine_family(2, 2)
        self.assertAlmostEqual(fam.norms[0], 1 / (16 * math.sqrt(2) * math.pi), places=15)

    def test_gram_matches_closed_form(self):
        for R, d in itertools.product(range(1, 5), (1, 2)):
            fam = sine_family(R, d)
            gram = sine_family_gram(fam)
            off = gram - np.diag(np.diag(gram))
            self.assertLessEqual(np.abs(off).max(), 1e-8)
            np.testing.assert_allclose(np.sqrt(np.diag(gram)), fam.norms, rtol=0, atol=1e-8)

    def test_pair_inner_product(self):
        fam = sine_family(2, 2)
        gram = sine_family_gram(fam)
        # theta = (1, 1) and (2, 1)
        self.assertLessEqual(abs(gram[0, 2]), 1e-8)

    def test_unit_interval_abs_sine(self):
        for k in range(1, 9):
            value, _ = integrate.quad(lambda t: abs(math.sin(math.pi * k * t)), 0, 1,
                                      points=[j / k for j in range(1, k)] or None,
                                      epsabs=1e-12, epsrel=1e-12, limit=200)
            self.assertAlmostEqual(value, 2 / math.pi, places=10)

    def test_size_guard(self):
        with self.assertRaises(ValueError):
            sine_family(11, 6)
        with self.assertRaises(ValueError):
            sine_family(0, 1)

    def test_members_are_in_the_relu_hull(self):
        x = make_rng(5).uniform(-1, 1, size=(10, 2))
        fam = sine_family(2, 2)
        for column, theta in enumerate(fam.thetas):
            draws = sample_atom(exact_sine_representation(tuple(theta)), 200_000, seed=column)
            values = draws.coefs * relu_power(x @ draws.weights.T - draws.thresholds, 1)
            linear = x @ theta / (4 * theta.sum() ** 2)
            expected = fam.evaluate(x)[:, column] - linear
            se = values.std(axis=1) / math.sqrt(values.shape[1])
            np.testing.assert_array_less(np.abs(values.mean(axis=1) - expected), 5 * se + 1e-12)


class DistanceTests(SimpleTestCase):
    def setUp(self):
        self.fam = sine_family(2, 2)

    def test_identical_codewords(self):
        self.assertEqual(pairwise_distance(self.fam, [1, 0, 1, 1], [1, 0, 1, 1]), 0.0)

    def test_single_flip(self):
        self.assertAlmostEqual(
            pairwise_distance(self.fam, [1, 0, 1, 1], [1, 1, 1, 1]), self.fam.norms[1] / 4, places=15,
        )

    def test_matches_quadrature(self):
        rng = make_rng(2)
        gram = sine_family_gram(self.fam)
        for _ in range(5):
            u, w = rng.integers(0, 2, size=(2, 4))
            diff = (u - w) / len(self.fam)
            self.assertAlmostEqual(pairwise_distance(self.fam, u, w), math.sqrt(diff @ gram @ diff), delta=1e-8)

    def test_length_mismatch(self):
        with self.assertRaises(ValueError):
            pairwise_distance(self.fam, [1, 0], [1, 0, 0, 1])


class PackingTests(SimpleTestCase):
    def test_entropy(self):
        self.assertAlmostEqual(ENTROPY_QUARTER, 0.8112781244591328, places=12)
        self.assertEqual(binary_entropy(0), 0.0)
        self.assertAlmostEqual(binary_entropy(0.5), 1.0)

    def test_target_size(self):
        self.assertEqual(gilbert_varshamov_target(16), 5)

    def test_sixteen_member_family(self):
        fam = sine_family(4, 2)
        packing = select_packing(fam, seed=0)
        self.assertGreaterEqual(len(packing), 4)
        self.assertFalse(packing.shortfall)
        self.assertGreaterEqual(packing.min_distance, fam.min_norm / (2 * math.sqrt(16)))
        self.assertAlmostEqual(packing.separation_bound, fam.min_norm / 8, places=15)
        for u, w in itertools.combinations(packing.codewords, 2):
            self.assertGreaterEqual(pairwise_distance(fam, u, w), packing.separation_bound)

    def test_quarter_hamming_distance_meets_bound(self):
        fam = sine_family(4, 2)
        u = np.zeros(16, dtype=int)
        w = u.copy()
        w[np.argsort(fam.norms)[:4]] = 1
        self.assertGreaterEqual(pairwise_distance(fam, u, w), separation_bound(fam))

    def test_deterministic(self):
        fam = sine_family(3, 2)
        a = select_packing(fam, target_size=4, seed=4)
        b = select_packing(fam, target_size=4, seed=4)
        np.testing.assert_array_equal(a.codewords, b.codewords)

    @override_settings(RIDGE_PACKING_TRIALS=3)
    def test_shortfall(self):
        fam = sine_family(4, 1)
        with self.assertLogs('packing.codes', 'WARNING'):
            packing = select_packing(fam, target_size=50, seed=0)
        self.assertTrue(packing.shortfall)
        self.assertLessEqual(packing.trials, 3)

    def test_averages_of_members(self):
        fam = sine_family(2, 1)
        packing = PackingSet(family=fam, codewords=[[1, 0], [1, 1]], min_distance=0.0,
                             separation_bound=0.0, target_size=2, trials=2)
        x = np.array([[0.3], [-0.7]])
        np.testing.assert_allclose(packing.evaluate(x)[:, 1], fam.evaluate(x).mean(axis=1))
        with self.assertRaises(ValidationError):
            PackingSet(family=fam, codewords=[[1, 0, 1]], min_distance=0.0,
                       separation_bound=0.0, target_size=2, trials=1)

    def test_degenerate_family(self):
        with self.assertRaises(ValueError):
            select_packing(sine_family(1, 1))
        with self.assertRaises(ValueError):
            select_packing(sine_family(4, 1), target_size=1)


class PackingCurveTests(SimpleTestCase):
    def test_consistent_with_family_count(self):
        for R, d in ((4, 1), (4, 2), (3, 3)):
            curve = packing_lower_curve(packing_scale(R, d), d)
            self.assertAlmostEqual(curve, math.log(2) * (1 - ENTROPY_QUARTER) * R ** d - 1, places=9)
            self.assertGreaterEqual(math.log(2) * ((1 - ENTROPY_QUARTER) * R ** d - 1), curve - 1e-9)

    def test_increases_as_scale_shrinks(self):
        values = [packing_lower_curve(eps, 2) for eps in (1e-1, 1e-2, 1e-3, 1e-4)]
        self.assertEqual(values, sorted(values))

    def test_positive_scale(self):
        with self.assertRaises(ValueError):
            packing_lower_curve(0.0, 1)
