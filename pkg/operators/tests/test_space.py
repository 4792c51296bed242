import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from wcond_modules.errors import InstanceError
from wcond_modules.space import (
    FiniteMeasureSpace,
    Partition,
    atom_masses,
    atom_means,
    build_unit_square_instance,
    cond_expect,
    expectation_matrix,
    indicator,
    is_measurable_wrt,
    support,
)

n_points = st.shared(st.integers(2, 10), key="n")
masses = n_points.flatmap(lambda n: arrays(float, n, elements=st.floats(0.1, 1.0)))
values = n_points.flatmap(lambda n: arrays(float, n, elements=st.floats(-10, 10)))
nonnegative = n_points.flatmap(
    lambda n: arrays(float, n, elements=st.one_of(st.just(0.0), st.floats(0.01, 10)))
)
positive = n_points.flatmap(lambda n: arrays(float, n, elements=st.floats(0.01, 10)))
labels = n_points.flatmap(
    lambda n: st.lists(st.integers(0, 2), min_size=n, max_size=n).map(lambda ls: [0] + ls[1:])
)


def _compact(labels):
    """Relabel so that labels 0..k-1 are all used"""
    _, inverse = np.unique(labels, return_inverse=True)
    return inverse


class MeasureSpaceTests(SimpleTestCase):
    def test_rejects_zero_mass(self):
        with self.assertRaises(InstanceError) as ctx:
            FiniteMeasureSpace([0.5, 0.0])
        self.assertEqual(ctx.exception.field, "mass")
        self.assertIn("mass must be positive", str(ctx.exception))

    def test_rejects_empty_and_non_numeric_mass(self):
        with self.assertRaises(InstanceError):
            FiniteMeasureSpace([])
        with self.assertRaises(InstanceError):
            FiniteMeasureSpace(["a", 1])

    def test_labels_must_name_every_point(self):
        with self.assertRaises(InstanceError) as ctx:
            FiniteMeasureSpace([1, 1], labels=["a"])
        self.assertEqual(ctx.exception.field, "labels")

    def test_restrict_keeps_masses(self):
        space = FiniteMeasureSpace([0.1, 0.2, 0.3])
        assert_allclose(space.restrict([2, 0]).mass, [0.3, 0.1])


class PartitionTests(SimpleTestCase):
    def test_overlapping_atoms(self):
        with self.assertRaises(InstanceError) as ctx:
            Partition(((0, 1), (1, 2)), 3)
        self.assertIn("disjoint", str(ctx.exception))
        self.assertEqual(ctx.exception.field, "atoms")

    def test_atoms_must_cover(self):
        with self.assertRaisesMessage(InstanceError, "cover every point"):
            Partition(((0,), (2,)), 3)

    def test_empty_atom(self):
        with self.assertRaisesMessage(InstanceError, "nonempty"):
            Partition(((0, 1), ()), 2)

    def test_out_of_range_point(self):
        with self.assertRaises(InstanceError):
            Partition(((0, 5),), 2)

    def test_from_labels(self):
        part = Partition.from_labels([1, 0, 1, 2])
        self.assertEqual(part.atoms, ((1,), (0, 2), (3,)))
        self.assertEqual(part.atom_of.tolist(), [1, 0, 1, 2])


class ConditionalExpectationTests(SimpleTestCase):
    def test_weighted_average_on_atom(self):
        space = FiniteMeasureSpace([1.0, 3.0])
        part = Partition.trivial(2)
        assert_allclose(cond_expect(space, part, [4.0, 0.0]), [1.0, 1.0])

    def test_atom_masses_and_means(self):
        space = FiniteMeasureSpace([0.25] * 4)
        part = Partition(((0, 1), (2, 3)), 4)
        assert_allclose(atom_masses(space, part), [0.5, 0.5])
        assert_allclose(atom_means(space, part, [1, 3, 2j, 0]), [2, 1j])

    def test_shape_mismatch(self):
        space = FiniteMeasureSpace([1.0, 1.0])
        with self.assertRaisesMessage(ValueError, "shape mismatch"):
            cond_expect(space, Partition.trivial(3), [1, 2, 3])

    def test_support_and_measurability(self):
        self.assertEqual(support([0, 1e-12, 2, -1j]), frozenset({2, 3}))
        part = Partition(((0, 1), (2,)), 3)
        self.assertTrue(is_measurable_wrt([5, 5, 1], part))
        self.assertFalse(is_measurable_wrt([5, 4, 1], part))
        with self.assertRaises(ValueError):
            support([1], tol=-1)

    def test_indicator(self):
        assert_allclose(indicator(4, [1, 3]), [0, 1, 0, 1])

    @settings(max_examples=50, deadline=None)
    @given(masses, values, labels)
    def test_expectation_properties(self, mass, f, atom_labels):
        space = FiniteMeasureSpace(mass)
        part = Partition.from_labels(_compact(atom_labels))
        Ef = cond_expect(space, part, f)

        # idempotent and measurable
        assert_allclose(cond_expect(space, part, Ef), Ef, atol=1e-9)
        self.assertTrue(is_measurable_wrt(Ef, part, tol=1e-9))
        # preserves the integral
        self.assertAlmostEqual(float(np.sum(Ef.real * mass)), float(np.sum(f * mass)), places=8)
        # pulls out measurable factors
        g = np.arange(part.count, dtype=float)[part.atom_of] + 1
        assert_allclose(cond_expect(space, part, g * f), g * Ef, atol=1e-8)
        # monotone
        self.assertTrue(np.all(cond_expect(space, part, np.abs(f)).real >= -1e-12))

    @settings(max_examples=50, deadline=None)
    @given(masses, values, values, labels)
    def test_self_adjoint_and_holder(self, mass, f, g, atom_labels):
        space = FiniteMeasureSpace(mass)
        part = Partition.from_labels(_compact(atom_labels))

        def inner(a, b):
            return np.sum(a * np.conj(b) * mass)

        Ef, Eg = cond_expect(space, part, f), cond_expect(space, part, g)
        self.assertAlmostEqual(abs(inner(Ef, g) - inner(f, Eg)), 0.0, delta=1e-10 * (1 + 100 * mass.sum()))

        lhs = np.abs(cond_expect(space, part, f * g)) ** 2
        rhs = (cond_expect(space, part, np.abs(f) ** 2) * cond_expect(space, part, np.abs(g) ** 2)).real
        self.assertTrue(np.all(lhs <= rhs + 1e-9 * (1.0 + rhs)))

    @settings(max_examples=50, deadline=None)
    @given(masses, nonnegative, labels)
    def test_support_grows_under_expectation(self, mass, f, atom_labels):
        space = FiniteMeasureSpace(mass)
        part = Partition.from_labels(_compact(atom_labels))
        self.assertLessEqual(support(f), support(cond_expect(space, part, f)))

    @settings(max_examples=30, deadline=None)
    @given(masses, positive, labels)
    def test_positive_stays_positive(self, mass, f, atom_labels):
        space = FiniteMeasureSpace(mass)
        part = Partition.from_labels(_compact(atom_labels))
        Ef = cond_expect(space, part, f)
        self.assertTrue(np.all(Ef.real > 0))
        assert_allclose(Ef.imag, 0, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(masses, labels)
    def test_expectation_matrix_is_stochastic(self, mass, atom_labels):
        space = FiniteMeasureSpace(mass)
        part = Partition.from_labels(_compact(atom_labels))
        E = expectation_matrix(space, part)
        assert_allclose(E.sum(axis=1), np.ones(space.n), atol=1e-12)
        assert_allclose(E @ E, E, atol=1e-12)


class UnitSquareInstanceTests(SimpleTestCase):
    def test_strips(self):
        space, part, u, w = build_unit_square_instance(4)
        self.assertEqual(space.n, 16)
        self.assertEqual(part.count, 4)
        self.assertAlmostEqual(space.total_mass, 1.0)
        # point 0 is (1/8, 1/8)
        self.assertAlmostEqual(u[0].real, 0.125 ** (0.125 / 8))
        self.assertAlmostEqual(w[0].real, np.sqrt((4 + 0.125) * 0.125))

    def test_grid_too_small(self):
        with self.assertRaises(ValueError):
            build_unit_square_instance(1)
