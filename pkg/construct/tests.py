import itertools
import math

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from ridge_core.evaluation import atom_sup_distance, eval_atom, eval_combination
from ridge_core.models import RidgeAtom, RidgeCombination
from ridge_core.quadrature import tensor_gauss_legendre
from ridge_core.rng import make_rng
from spectral.catalog import cosine_pair_measure, sine_ridge_target
from spectral.models import SpectralMeasure, TargetFunction
from spectral.sampling import exact_sine_representation, simplified_representation, spectral_representation

from .builders import build, build_iid, build_sparse, build_stratified, sparsify
from .forms import BuilderConfigForm
from .models import SparsifierConfig, StratifiedPlan, StratumSamplingError
from .strata import allocate, estimated_plan, exact_plan, partition_parameters, sample_plan

SINE_1D = exact_sine_representation((1,))
SINE_1D_TARGET = sine_ridge_target((1,))


def sup_error_1d(c, target):
    x = np.linspace(-1, 1, 1025)[:, None]
    return float(np.max(np.abs(eval_combination(c, x) - target(x))))


def l2_error(c, target, nodes=32):
    points, weights = tensor_gauss_legendre(nodes, c.d)
    return math.sqrt(weights @ (eval_combination(c, points) - target(points)) ** 2)


def unit_atom(rng, d, s):
    a = rng.normal(size=d)
    return RidgeAtom(sign=int(rng.choice([-1, 1])), a=a / np.abs(a).sum(), t=rng.random(), s=s)


class PartitionTests(SimpleTestCase):
    def test_one_dimensional_count(self):
        self.assertEqual(partition_parameters(1, 2, 0.5).M, 32)
        self.assertEqual(partition_parameters(1, 3, 0.5).M, 64)

    def test_count_grows_like_inverse_square_in_two_dimensions(self):
        scaled = [partition_parameters(2, 2, eps).M * eps ** 2 for eps in (1 / 2, 1 / 4, 1 / 8)]
        self.assertLessEqual(max(scaled) / min(scaled), 4)

    def test_nonpositive_width(self):
        for eps in (0, -0.1):
            with self.assertRaises(ValueError):
                partition_parameters(2, 2, eps)

    def test_locate_conventions(self):
        partition = partition_parameters(2, 2, 0.5)
        keys = partition.locate([1, 1, 1], [1.0, 0.99, 0.0], [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]])
        self.assertEqual(keys[0], keys[1])
        sign, t_idx, orthant, _ = partition.decode(keys[0])
        self.assertEqual((sign, t_idx, orthant), (1, partition.bins - 1, 0))
        self.assertEqual(partition.decode(keys[2])[1], 0)
        negative = partition.locate([-1], [0.3], [[-0.5, 0.5]])[0]
        self.assertEqual(partition.decode(negative)[0], -1)
        self.assertEqual(partition.decode(negative)[2], 1)

    def test_representatives_are_atoms(self):
        partition = partition_parameters(3, 3, 0.5)
        rng = make_rng(4)
        for _ in range(50):
            atom = unit_atom(rng, 3, 3)
            key = partition.locate([atom.sign], [atom.t], [atom.a])[0]
            rep = partition.representative(key)
            self.assertAlmostEqual(float(np.abs(rep.a).sum()), 1.0)
            self.assertEqual(rep.sign, atom.sign)
            self.assertTrue(np.all(np.sign(rep.a[atom.a != 0]) == np.sign(atom.a[atom.a != 0])))

    def test_cells_have_small_diameter(self):
        rng = make_rng(5)
        for d, s, eps in ((1, 2, 0.5), (2, 2, 0.4), (3, 2, 0.5), (3, 3, 0.5), (4, 2, 0.8)):
            partition = partition_parameters(d, s, eps)
            atoms = []
            for _ in range(150):
                base = unit_atom(rng, d, s)
                for _ in range(12):
                    a = base.a + rng.uniform(-eps / 8, eps / 8, size=d)
                    t = float(np.clip(base.t + rng.uniform(-eps / 8, eps / 8), 0, 1))
                    atoms.append(RidgeAtom(sign=base.sign, a=a / np.abs(a).sum(), t=t, s=s))
            keys = partition.locate([u.sign for u in atoms], [u.t for u in atoms], [u.a for u in atoms])
            groups = {}
            for key, atom in zip(keys, atoms):
                groups.setdefault(int(key), []).append(atom)
            self.assertLess(len(groups), len(atoms))
            for members in groups.values():
                for u, w in itertools.combinations(members, 2):
                    self.assertLess(atom_sup_distance(u, w), eps)


class MassTests(SimpleTestCase):
    def test_exact_masses_are_normalized(self):
        for rep in (SINE_1D, spectral_representation(cosine_pair_measure(), 3)):
            plan = exact_plan(rep, partition_parameters(rep.d, rep.s, 0.5))
            self.assertTrue(plan.is_normalized)
            self.assertTrue(np.all(plan.masses > 0))
            self.assertLessEqual(plan.keys.size, plan.M)

    def test_exact_masses_match_binned_draws(self):
        partition = partition_parameters(1, 2, 0.5)
        exact = exact_plan(SINE_1D, partition)
        estimated = estimated_plan(SINE_1D, partition, seed=3)
        n = 10 ** 4
        lookup = dict(zip(estimated.keys.tolist(), estimated.masses))
        for key, mass in zip(exact.keys.tolist(), exact.masses):
            self.assertLessEqual(abs(lookup.get(key, 0.0) - mass), 5 * math.sqrt(mass * (1 - mass) / n) + 1e-12)

    def test_strata_list_representatives(self):
        plan = exact_plan(SINE_1D, partition_parameters(1, 2, 0.5))
        strata = plan.strata
        self.assertEqual(len(strata), plan.keys.size)
        self.assertAlmostEqual(sum(mass for _, mass in strata), 1.0)


class AllocationTests(SimpleTestCase):
    def plan(self, masses):
        partition = partition_parameters(1, 2, 0.5)
        return StratifiedPlan(partition=partition, keys=np.arange(len(masses)), masses=masses)

    def test_point_mass(self):
        plan = allocate(self.plan([1.0, 0.0]), 17, 'signed', seed=1)
        self.assertEqual(plan.allocations.tolist(), [17, 0])
        self.assertEqual(plan.sizes.tolist(), [17, 1])

    def test_signed_allocation_is_unbiased(self):
        masses = np.array([0.13, 0.37, 0.5])
        plan = self.plan(masses)
        samples = np.array([allocate(plan, 7, 'signed', seed).allocations for seed in range(10 ** 4)])
        error = np.abs(samples.mean(axis=0) - 7 * masses)
        self.assertTrue(np.all(error <= 3 * samples.std(axis=0) / 100))

    def test_fractional_allocation(self):
        plan = allocate(self.plan([0.25, 0.7, 0.05]), 10, 'fractional', seed=0)
        np.testing.assert_allclose(plan.allocations, [2.5, 7.0, 0.5])
        self.assertEqual(plan.sizes.tolist(), [3, 7, 1])

    def test_sizes_stay_within_budget(self):
        rng = make_rng(8)
        for case in range(100):
            k = int(rng.integers(1, 33))
            plan = self.plan(rng.dirichlet(np.ones(k)))
            m = int(rng.integers(1, 200))
            for mode in ('signed', 'fractional'):
                allocated = allocate(plan, m, mode, seed=case)
                self.assertLessEqual(allocated.sizes.sum(), m + plan.M)

    def test_unnormalized_masses(self):
        with self.assertRaises(ValueError):
            allocate(self.plan([0.5, 0.4]), 10, 'signed', seed=0)
        with self.assertRaises(ValueError):
            allocate(self.plan([0.5, 0.5]), 10, 'uniform', seed=0)


class IidBuilderTests(SimpleTestCase):
    def test_single_term(self):
        c = build_iid(SINE_1D, 1, SINE_1D_TARGET, seed=0)
        self.assertEqual(c.term_count, 1)
        self.assertEqual(c.v, 1.0)
        self.assertEqual(abs(c.coefs[0]), 1.0)
        self.assertAlmostEqual(c.a0[0], 0.25)

    def test_constant_target(self):
        meas = SpectralMeasure.from_atoms(2, [((0.0, 0.0), 1.5, 0.0)])
        c = build_iid(simplified_representation(meas, 2), 8, TargetFunction.from_measure(meas), seed=0)
        self.assertEqual(c.term_count, 0)
        points = make_rng(1).uniform(-1, 1, size=(50, 2))
        np.testing.assert_allclose(eval_combination(c, points), 1.5)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            build_iid(SINE_1D, 4, sine_ridge_target((1, 1)))

    def test_monte_carlo_rate(self):
        rep = exact_sine_representation((1, 1))
        target = sine_ridge_target((1, 1))
        errors = [l2_error(build_iid(rep, 256, target, seed=7 + k), target) for k in range(20)]
        self.assertLessEqual(np.mean(errors), 3 * rep.v / math.sqrt(256))

    def test_unbiased_across_seeds(self):
        meas = cosine_pair_measure()
        target = TargetFunction.from_measure(meas)
        points = make_rng(2).uniform(-1, 1, size=(10, 2))
        for s in (2, 3):
            rep = spectral_representation(meas, s)
            values = np.array([eval_combination(build_iid(rep, 4, target, seed=k), points) for k in range(200)])
            studentized = np.abs(values.mean(axis=0) - target(points)) / (values.std(axis=0) / math.sqrt(200))
            self.assertTrue(np.all(studentized <= 4))

    def test_reproducible(self):
        first = build_iid(SINE_1D, 16, SINE_1D_TARGET, seed=3)
        second = build_iid(SINE_1D, 16, SINE_1D_TARGET, seed=3)
        np.testing.assert_array_equal(first.thresholds, second.thresholds)


class StratifiedBuilderTests(SimpleTestCase):
    def test_fractional_coefficients(self):
        c = build_stratified(SINE_1D, 64, 0.25, 'fractional', SINE_1D_TARGET, seed=1)
        self.assertTrue(np.all(np.abs(c.coefs) <= 1))
        self.assertLessEqual(c.term_count, 64 + partition_parameters(1, 2, 0.25).M)
        self.assertEqual(c.m, 64)

    def test_signed_coefficients(self):
        rep = spectral_representation(cosine_pair_measure(), 3)
        target = TargetFunction.from_measure(cosine_pair_measure())
        c = build_stratified(rep, 128, 0.5, 'signed', target, seed=2)
        self.assertTrue(set(np.unique(c.coefs).tolist()) <= {-1.0, 1.0})
        self.assertLessEqual(c.term_count, 128 + partition_parameters(2, 3, 0.5).M)

    def test_coarse_partition(self):
        c = build_stratified(SINE_1D, 32, 8.0, 'signed', SINE_1D_TARGET, seed=4)
        self.assertEqual(partition_parameters(1, 2, 8.0).bins, 1)
        self.assertLessEqual(abs(c.term_count - 32), 4)

    def test_beats_iid(self):
        for m in (64, 256, 1024):
            eps = m ** (-1 / 3)
            iid = [sup_error_1d(build_iid(SINE_1D, m, SINE_1D_TARGET, seed=k), SINE_1D_TARGET) for k in range(20)]
            strat = [
                sup_error_1d(build_stratified(SINE_1D, m, eps, 'fractional', SINE_1D_TARGET, seed=k), SINE_1D_TARGET)
                for k in range(20)
            ]
            self.assertLess(np.mean(strat), np.mean(iid), msg=f"m={m}")

    def test_unbiased_across_seeds(self):
        rep = spectral_representation(cosine_pair_measure(), 2)
        target = TargetFunction.from_measure(cosine_pair_measure())
        points = make_rng(3).uniform(-1, 1, size=(10, 2))
        values = np.array([
            eval_combination(build_stratified(rep, 8, 0.5, 'signed', target, seed=k), points) for k in range(200)
        ])
        studentized = np.abs(values.mean(axis=0) - target(points)) / (values.std(axis=0) / math.sqrt(200))
        self.assertTrue(np.all(studentized <= 4))

    def test_within_stratum_spread(self):
        eps = 0.5
        rep = spectral_representation(cosine_pair_measure(), 2)
        plan = allocate(exact_plan(rep, partition_parameters(2, 2, eps)), 4000, 'fractional', seed=0)
        stratum, _, signs, t, weights = sample_plan(plan, rep, seed=0)
        self.assertTrue(np.all(np.diff(stratum) >= 0))
        for x in make_rng(6).uniform(-1, 1, size=(5, 2)):
            values = signs * np.maximum(weights @ x - t, 0)
            for k in np.unique(stratum):
                members = values[stratum == k]
                if members.size > 1:
                    self.assertLessEqual(members.var(), eps ** 2)

    def test_conditional_draws_land_in_their_stratum(self):
        rep = spectral_representation(cosine_pair_measure(), 3)
        plan = allocate(exact_plan(rep, partition_parameters(2, 3, 0.5)), 500, 'fractional', seed=0)
        stratum, _, signs, t, weights = sample_plan(plan, rep, seed=1)
        inside = (t > 1e-9) & (t < 1 - 1e-9)
        keys = plan.partition.locate(signs, t, weights)
        agree = keys == plan.keys[stratum]
        self.assertGreater(agree[inside].mean(), 0.99)

    def test_estimated_masses_route(self):
        c = build_stratified(SINE_1D, 32, 0.5, 'fractional', SINE_1D_TARGET, seed=5, masses='estimated')
        self.assertTrue(np.all(np.abs(c.coefs) <= 1))
        self.assertLess(sup_error_1d(c, SINE_1D_TARGET), 0.5)

    @override_settings(RIDGE_RETRY_BUDGET=10)
    def test_rejection_budget_exhausted(self):
        with self.assertRaises(StratumSamplingError) as ctx:
            build_stratified(SINE_1D, 64, 0.5, 'fractional', SINE_1D_TARGET, seed=5, masses='estimated')
        partition = partition_parameters(1, 2, 0.5)
        self.assertLess(partition.decode(ctx.exception.stratum_id)[1], partition.bins)

    def test_needs_signed_representation(self):
        rep = simplified_representation(cosine_pair_measure(), 2)
        with self.assertRaises(ValueError):
            build_stratified(rep, 16, 0.5, 'fractional', rep.target())


class SparsifyTests(SimpleTestCase):
    def combination(self, rows, s=2):
        n = len(rows)
        return RidgeCombination(
            d=len(rows[0]), s=s, b0=0.3, a0=np.full(len(rows[0]), 0.1), v=2.0,
            coefs=np.ones(n), signs=np.ones(n), weights=rows, thresholds=np.linspace(0, 1, n),
        )

    def test_basis_vectors_unchanged(self):
        c = self.combination([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])
        out = sparsify(c, SparsifierConfig(m0=5, seed=1))
        np.testing.assert_array_equal(out.weights, c.weights)

    def test_sparsity_and_norm(self):
        rng = make_rng(9)
        rows = [unit_atom(rng, 6, 2).a for _ in range(300)]
        out = sparsify(self.combination(rows), SparsifierConfig(m0=3, seed=2))
        self.assertLessEqual(out.inner_sparsity_max, 3)
        np.testing.assert_allclose(np.abs(out.weights).sum(axis=1), 1.0, atol=1e-12)
        self.assertTrue(np.all((out.weights == 0) | (np.sign(out.weights) == np.sign(np.array(rows)))))

    def test_other_fields_unchanged(self):
        rng = make_rng(10)
        c = build_iid(spectral_representation(cosine_pair_measure(), 3), 50,
                      TargetFunction.from_measure(cosine_pair_measure()), seed=1)
        out = sparsify(c, SparsifierConfig(m0=1, seed=int(rng.integers(100))))
        for name in ('coefs', 'signs', 'thresholds', 'a0', 'A0'):
            np.testing.assert_array_equal(getattr(out, name), getattr(c, name))
        self.assertEqual((out.b0, out.v, out.m, out.s), (c.b0, c.v, c.m, c.s))

    def test_draws_have_mean_a(self):
        a = np.array([0.5, -0.3, 0.2])
        out = sparsify(self.combination([a] * 10 ** 5), SparsifierConfig(m0=1, seed=3))
        mean = out.weights.mean(axis=0)
        se = out.weights.std(axis=0) / math.sqrt(10 ** 5)
        self.assertTrue(np.all(np.abs(mean - a) <= 4 * se))
        x = make_rng(11).uniform(-1, 1, size=3)
        self.assertLessEqual(float((out.weights @ x).var()), 1.0)

    def test_requires_unit_norm(self):
        with self.assertRaises(ValueError):
            sparsify(self.combination([[0.5, 0.2]]), SparsifierConfig(m0=2))

    def test_config_validation(self):
        with self.assertRaises(ValidationError):
            SparsifierConfig(m0=0)


class SparseBuilderTests(SimpleTestCase):
    def test_one_sparse_atoms_match_iid(self):
        c = build_iid(SINE_1D, 40, SINE_1D_TARGET, seed=12)
        sparse = build_sparse(SINE_1D, 40, 1, SINE_1D_TARGET, seed=12)
        np.testing.assert_array_equal(sparse.weights, c.weights)
        np.testing.assert_array_equal(sparse.coefs, c.coefs)

    def test_squared_relu_error_bound(self):
        meas = cosine_pair_measure()
        rep = spectral_representation(meas, 3)
        target = TargetFunction.from_measure(meas)
        for m0 in (4, 16, 64):
            errors = []
            for k in range(20):
                c = build_sparse(rep, 256, m0, target, seed=k)
                self.assertLessEqual(c.inner_sparsity_max, m0)
                np.testing.assert_allclose(np.abs(c.weights).sum(axis=1), 1.0, atol=1e-12)
                errors.append(l2_error(c, target) ** 2)
            self.assertLessEqual(np.mean(errors), 4 * rep.v ** 2 * (1 / 256 + 1 / m0 ** 2))

    def test_dispatch(self):
        c = build(SINE_1D, SINE_1D_TARGET, 'sparse', 8, seed=0, m0=1)
        self.assertEqual(c.term_count, 8)
        with self.assertRaises(ValueError):
            build(SINE_1D, SINE_1D_TARGET, 'sparse', 8)
        with self.assertRaises(ValueError):
            build(SINE_1D, SINE_1D_TARGET, 'greedy', 8)


class BuilderConfigFormTests(SimpleTestCase):
    def test_defaults(self):
        form = BuilderConfigForm(data={'method': 'stratified', 'm': 64})
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.cleaned_data['mode'], 'fractional')
        self.assertEqual(form.cleaned_data['masses'], 'exact')
        self.assertIsNone(form.cleaned_data['epsilon'])

    def test_invalid_configs(self):
        for data in (
            {'method': 'sparse', 'm': 64},
            {'method': 'iid', 'm': 64, 'epsilon': 0.5},
            {'method': 'stratified', 'm': 64, 'epsilon': -1},
            {'method': 'iid', 'm': 0},
            {'method': 'greedy', 'm': 4},
        ):
            self.assertFalse(BuilderConfigForm(data=data).is_valid(), data)
