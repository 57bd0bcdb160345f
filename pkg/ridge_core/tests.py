import json
import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase

from .evaluation import atom_sup_distance, eval_atom, eval_combination, relu_power
from .models import CubeDomain, DimensionMismatch, RidgeAtom, RidgeCombination
from .rng import make_rng
from .serializers import combination_to_dict, dumps, loads


def e(j, d):
    out = np.zeros(d)
    out[j] = 1.0
    return out


def random_atom(rng, d, s, sign=None):
    a = rng.normal(size=d)
    a /= np.abs(a).sum()
    return RidgeAtom(sign=sign or int(rng.choice([-1, 1])), a=a, t=rng.random(), s=s)


class RidgeAtomTests(SimpleTestCase):
    def test_ramp_value(self):
        atom = RidgeAtom(sign=1, a=e(0, 3), t=0.5, s=2)
        self.assertEqual(eval_atom(atom, [1.0, 0.0, 0.0]), 0.5)

    def test_squared_ramp_value(self):
        atom = RidgeAtom(sign=1, a=e(0, 3), t=0.5, s=3)
        self.assertEqual(eval_atom(atom, [1.0, 0.0, 0.0]), 0.25)

    def test_unit_threshold_vanishes_on_cube(self):
        rng = make_rng(3)
        atom = RidgeAtom(sign=-1, a=[0.5, -0.5], t=1.0, s=2)
        points = rng.uniform(-1, 1, size=(200, 2))
        self.assertTrue(np.all(eval_atom(atom, points) == 0))
        self.assertEqual(eval_atom(atom, [1.0, -1.0]), 0.0)

    def test_dimension_mismatch(self):
        atom = RidgeAtom(sign=1, a=e(0, 2), t=0.0, s=2)
        with self.assertRaises(DimensionMismatch):
            eval_atom(atom, [0.1, 0.2, 0.3])

    def test_invalid_atoms_rejected(self):
        with self.assertRaises(ValidationError):
            RidgeAtom(sign=1, a=[0.8, 0.8], t=0.2, s=2)
        with self.assertRaises(ValidationError):
            RidgeAtom(sign=1, a=[1.0], t=1.5, s=2)
        with self.assertRaises(ValidationError):
            RidgeAtom(sign=0, a=[1.0], t=0.5, s=2)
        with self.assertRaises(ValidationError):
            RidgeAtom(sign=1, a=[1.0], t=0.5, s=4)

    def test_atoms_bounded_on_cube(self):
        rng = make_rng(11)
        points = rng.uniform(-1, 1, size=(500, 4))
        for s in (2, 3):
            for _ in range(20):
                values = eval_atom(random_atom(rng, 4, s), points)
                self.assertLessEqual(np.abs(values).max(), 1.0)

    def test_cube_membership(self):
        cube = CubeDomain(2)
        self.assertTrue(cube.contains([1.0, -1.0]))
        self.assertFalse(cube.contains([1.01, 0.0]))
        with self.assertRaises(DimensionMismatch):
            cube.contains([0.0])


class ActivationPropertyTests(SimpleTestCase):
    def setUp(self):
        rng = make_rng(5)
        self.z = rng.uniform(-3, 3, size=10000)
        self.w = rng.uniform(-3, 3, size=10000)

    def test_ramp_is_one_lipschitz(self):
        gap = np.abs(relu_power(self.z, 1) - relu_power(self.w, 1))
        self.assertTrue(np.all(gap <= np.abs(self.z - self.w) + 1e-15))

    def test_squared_ramp_smoothness(self):
        lhs = np.abs(
            relu_power(self.z, 2) - relu_power(self.w, 2)
            - 2 * (self.z - self.w) * relu_power(self.w, 1)
        )
        self.assertTrue(np.all(lhs <= (self.z - self.w) ** 2 + 1e-12))


class RidgeCombinationTests(SimpleTestCase):
    def test_empty_combination_is_constant(self):
        c = RidgeCombination(d=2, s=2, b0=2.0, a0=[0, 0], v=1.0, coefs=[], signs=[], weights=[], thresholds=[])
        self.assertEqual(eval_combination(c, [0.3, -0.9]), 2.0)
        self.assertEqual(c.term_count, 0)
        self.assertEqual(c.inner_sparsity_max, 0)

    def test_value_at_origin_is_constant_term(self):
        rng = make_rng(2)
        atoms = [random_atom(rng, 3, 2) for _ in range(10)]
        c = RidgeCombination.from_terms(
            d=3, s=2, b0=-0.7, a0=[1.0, 2.0, 3.0], v=4.0,
            terms=[(atom.sign, atom) for atom in atoms],
        )
        self.assertEqual(eval_combination(c, np.zeros(3)), -0.7)

    def test_single_ramp(self):
        atom = RidgeAtom(sign=1, a=e(0, 2), t=0.0, s=2)
        c = RidgeCombination.from_terms(d=2, s=2, b0=0.0, a0=[0, 0], v=1.0, terms=[(1.0, atom)])
        self.assertAlmostEqual(eval_combination(c, [0.3, 0.5]), 0.3, places=15)

    def test_outer_factor_matches_order(self):
        atom = RidgeAtom(sign=1, a=e(0, 1), t=0.0, s=3)
        c = RidgeCombination.from_terms(d=1, s=3, b0=0.0, a0=[0], v=2.0, terms=[(1.0, atom)] * 4)
        # v / (2m) * 4 * x^2 = x^2
        self.assertAlmostEqual(eval_combination(c, [0.5]), 0.25, places=15)

    def test_quadratic_term_is_halved(self):
        c = RidgeCombination(
            d=2, s=3, b0=0.0, a0=[0, 0], A0=[[2.0, 0.0], [0.0, 0.0]], v=0.0,
            coefs=[], signs=[], weights=[], thresholds=[],
        )
        self.assertAlmostEqual(eval_combination(c, [0.5, 0.9]), 0.25)

    def test_explicit_normalizer(self):
        atom = RidgeAtom(sign=1, a=e(0, 1), t=0.0, s=2)
        c = RidgeCombination.from_terms(d=1, s=2, b0=0.0, a0=[0], v=1.0, terms=[(0.5, atom)], m=4)
        self.assertAlmostEqual(eval_combination(c, [1.0]), 0.125)

    def test_batch_matches_pointwise(self):
        rng = make_rng(9)
        atoms = [random_atom(rng, 2, 3) for _ in range(7)]
        c = RidgeCombination.from_terms(
            d=2, s=3, b0=0.1, a0=[0.2, -0.3], A0=[[0.5, 0.1], [0.1, -0.4]], v=1.5,
            terms=[(atom.sign * 0.5, atom) for atom in atoms],
        )
        points = rng.uniform(-1, 1, size=(5, 2))
        batch = eval_combination(c, points)
        for point, value in zip(points, batch):
            expected = 0.1 + point @ c.a0 + 0.5 * point @ c.A0 @ point
            expected += 1.5 / (2 * 7) * sum(0.5 * eval_atom(atom, point) for atom in atoms)
            self.assertAlmostEqual(value, expected, places=12)

    def test_permutation_invariance(self):
        rng = make_rng(4)
        atoms = [random_atom(rng, 2, 2) for _ in range(12)]
        terms = [(atom.sign * 1.0, atom) for atom in atoms]
        c1 = RidgeCombination.from_terms(d=2, s=2, b0=0, a0=[0, 0], v=1, terms=terms)
        c2 = RidgeCombination.from_terms(d=2, s=2, b0=0, a0=[0, 0], v=1, terms=terms[::-1])
        points = rng.uniform(-1, 1, size=(50, 2))
        np.testing.assert_allclose(eval_combination(c1, points), eval_combination(c2, points), atol=1e-14)

    def test_invalid_combinations_rejected(self):
        atom = RidgeAtom(sign=1, a=e(0, 2), t=0.0, s=2)
        with self.assertRaises(ValidationError):
            RidgeCombination.from_terms(d=2, s=2, b0=0, a0=[0, 0], v=1, terms=[(1.5, atom)])
        with self.assertRaises(ValidationError):
            RidgeCombination.from_terms(d=2, s=2, b0=0, a0=[0, 0], v=1, terms=[(-1.0, atom)])
        with self.assertRaises(ValidationError):
            RidgeCombination(
                d=2, s=2, b0=0, a0=[0, 0], A0=np.eye(2), v=1,
                coefs=[], signs=[], weights=[], thresholds=[],
            )
        with self.assertRaises(ValidationError):
            RidgeCombination.from_terms(
                d=2, s=3, b0=0, a0=[0, 0], v=1, terms=[(1.0, atom)],
            )

    def test_combination_is_immutable(self):
        atom = RidgeAtom(sign=1, a=e(0, 2), t=0.0, s=2)
        c = RidgeCombination.from_terms(d=2, s=2, b0=0, a0=[0, 0], v=1, terms=[(1.0, atom)])
        with self.assertRaises(ValueError):
            c.weights[0, 0] = 0.5


class SupDistanceTests(SimpleTestCase):
    def test_identical_atoms(self):
        atom = RidgeAtom(sign=1, a=[0.25, -0.75], t=0.3, s=3)
        self.assertEqual(atom_sup_distance(atom, atom), 0.0)

    def test_opposite_weights(self):
        u = RidgeAtom(sign=1, a=e(0, 2), t=0.4, s=2)
        w = RidgeAtom(sign=1, a=-e(0, 2), t=0.4, s=2)
        self.assertEqual(atom_sup_distance(u, w), 2.0)

    def test_different_signs_are_infinitely_far(self):
        u = RidgeAtom(sign=1, a=e(0, 2), t=0.4, s=2)
        w = RidgeAtom(sign=-1, a=e(0, 2), t=0.4, s=2)
        self.assertEqual(atom_sup_distance(u, w), math.inf)

    def test_surrogate_tight_for_threshold_shift(self):
        u = RidgeAtom(sign=1, a=[1.0], t=0.2, s=2)
        w = RidgeAtom(sign=1, a=[1.0], t=0.5, s=2)
        grid = np.linspace(-1, 1, 2001)[:, None]
        true_gap = np.abs(eval_atom(u, grid) - eval_atom(w, grid)).max()
        self.assertAlmostEqual(atom_sup_distance(u, w), 0.3, places=15)
        self.assertAlmostEqual(true_gap, 0.3, places=12)

    def test_surrogate_dominates_grid_distance(self):
        rng = make_rng(21)
        axis = np.linspace(-1, 1, 41)
        grid = np.stack(np.meshgrid(axis, axis), axis=-1).reshape(-1, 2)
        for s in (2, 3):
            for _ in range(50):
                sign = int(rng.choice([-1, 1]))
                u, w = random_atom(rng, 2, s, sign), random_atom(rng, 2, s, sign)
                gap = np.abs(eval_atom(u, grid) - eval_atom(w, grid)).max()
                self.assertLessEqual(gap, atom_sup_distance(u, w) + 1e-12)

    def test_mismatched_atoms(self):
        u = RidgeAtom(sign=1, a=e(0, 2), t=0.4, s=2)
        with self.assertRaises(ValueError):
            atom_sup_distance(u, RidgeAtom(sign=1, a=e(0, 2), t=0.4, s=3))
        with self.assertRaises(DimensionMismatch):
            atom_sup_distance(u, RidgeAtom(sign=1, a=e(0, 3), t=0.4, s=2))


class SerializerTests(SimpleTestCase):
    def setUp(self):
        rng = make_rng(8)
        atoms = [random_atom(rng, 2, 3) for _ in range(3)]
        self.c = RidgeCombination.from_terms(
            d=2, s=3, b0=0.125, a0=[1 / 3, -0.5], A0=[[0.2, 0.1], [0.1, 0.3]], v=2.5,
            terms=[(atom.sign * 0.75, atom) for atom in atoms],
        )

    def test_field_order(self):
        doc = combination_to_dict(self.c)
        self.assertEqual(list(doc), ['version', 'dim', 'order', 'b0', 'a0', 'A0', 'v', 'm', 'terms'])
        self.assertEqual(list(doc['terms'][0]), ['b', 'sign', 'a', 't'])

    def test_reload_preserves_values(self):
        reloaded = loads(dumps(self.c))
        np.testing.assert_array_equal(reloaded.weights, self.c.weights)
        np.testing.assert_array_equal(reloaded.coefs, self.c.coefs)
        self.assertEqual(reloaded.a0[0], 1 / 3)
        self.assertEqual(json.loads(dumps(reloaded)), json.loads(dumps(self.c)))

    def test_relu_document_has_no_quadratic_term(self):
        c = RidgeCombination(d=1, s=2, b0=1.0, a0=[0.0], v=0.0, coefs=[], signs=[], weights=[], thresholds=[])
        self.assertNotIn('A0', combination_to_dict(c))


class RngTests(SimpleTestCase):
    def test_streams_are_reproducible_and_distinct(self):
        first = make_rng(7, 1).random(5)
        np.testing.assert_array_equal(first, make_rng(7, 1).random(5))
        self.assertFalse(np.array_equal(first, make_rng(7, 2).random(5)))
        self.assertFalse(np.array_equal(first, make_rng(8, 1).random(5)))
