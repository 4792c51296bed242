import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from wcond_modules import oracle
from wcond_modules.condops import (
    WeightedCondOp,
    adjoint_operator,
    aluthge_closed,
    aluthge_modulus_closed,
    aluthge_operator,
    apply,
    assemble_matrix,
    factor_matrices,
    norm_formula,
    polar_closed,
    quasi_product_closed,
    self_product_power_closed,
)
from wcond_modules.instances import canonical_instance, random_instance, two_atom_instance
from wcond_modules.space import FiniteMeasureSpace, Partition, indicator

seeds = st.integers(0, 2 ** 32 - 1)


def _random(seed):
    return random_instance(np.random.default_rng(seed), max_points=8, max_atoms=3)


def _gap(T, X, Y):
    return oracle.op_norm(X - Y, T.space)


class CanonicalInstanceTests(SimpleTestCase):
    def setUp(self):
        self.T = canonical_instance()

    def test_conditional_statistics(self):
        assert_allclose(self.T.per_atom(self.T.eu2), [1, 4])
        assert_allclose(self.T.per_atom(self.T.ew2), [5, 1])
        assert_allclose(self.T.per_atom(self.T.euw), [2, 2])
        self.assertEqual(self.T.S, frozenset(range(4)))

    def test_apply(self):
        assert_allclose(apply(self.T, indicator(4, [0])), [0.5, 1.5, 0, 0])
        assert_allclose(assemble_matrix(self.T)[:, 0], [0.5, 1.5, 0, 0])

    def test_norm(self):
        self.assertAlmostEqual(norm_formula(self.T), np.sqrt(5))
        self.assertAlmostEqual(oracle.op_norm(assemble_matrix(self.T), self.T.space), np.sqrt(5))

    def test_factorization(self):
        Mw, E, Mu = factor_matrices(self.T)
        assert_allclose(Mw @ E @ Mu, assemble_matrix(self.T), atol=1e-15)

    def test_power_side_must_be_known(self):
        with self.assertRaises(ValueError):
            self_product_power_closed(self.T, 1.0, "middle")
        with self.assertRaises(ValueError):
            self_product_power_closed(self.T, 0.0)
        with self.assertRaises(ValueError):
            quasi_product_closed(self.T, -1.0)


class ConstructionTests(SimpleTestCase):
    def test_shape_mismatch(self):
        with self.assertRaisesMessage(ValueError, "shape mismatch"):
            WeightedCondOp(FiniteMeasureSpace([1.0, 1.0]), Partition.trivial(2), [1, 2, 3], [1, 2])

    def test_vanishing_weight(self):
        T = two_atom_instance([1, 1, 0, 0], [1, 1, 1, 1])
        self.assertEqual(T.S, frozenset({0, 1}))
        U, modulus = polar_closed(T)
        assert_allclose(U[2:, :], 0)
        assert_allclose(modulus[2:, :], 0)


class ClosedFormTests(SimpleTestCase):
    """Closed forms against the dense oracle on random instances"""

    @settings(max_examples=40, deadline=None)
    @given(seeds, st.sampled_from([0.5, 1.0, 2.0, 3.7]))
    def test_self_product_powers(self, seed, p):
        T = _random(seed)
        A = assemble_matrix(T)
        adjoint = oracle.weighted_adjoint(A, T.space)
        bound = 1e-8 * (1 + norm_formula(T) ** (2 * p))
        left = oracle.frac_power_psd(adjoint @ A, T.space, p)
        right = oracle.frac_power_psd(A @ adjoint, T.space, p)
        self.assertLessEqual(_gap(T, self_product_power_closed(T, p, "left"), left), bound)
        self.assertLessEqual(_gap(T, self_product_power_closed(T, p, "right"), right), bound)

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_adjoint_operator(self, seed):
        T = _random(seed)
        A = assemble_matrix(T)
        assert_allclose(
            assemble_matrix(adjoint_operator(T)), oracle.weighted_adjoint(A, T.space), atol=1e-12
        )

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_polar(self, seed):
        T = _random(seed)
        A = assemble_matrix(T)
        U, modulus = polar_closed(T)
        bound = 1e-8 * (1 + norm_formula(T))
        self.assertLessEqual(_gap(T, U @ modulus, A), bound)
        gram = oracle.weighted_adjoint(A, T.space) @ A
        self.assertLessEqual(_gap(T, modulus, oracle.frac_power_psd(gram, T.space, 0.5)), bound)
        self.assertTrue(oracle.kernel_subset(U, modulus, T.space))
        self.assertTrue(oracle.kernel_subset(modulus, U, T.space))

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_aluthge(self, seed):
        T = _random(seed)
        A = assemble_matrix(T)
        bound = 1e-8 * (1 + norm_formula(T))
        closed = aluthge_closed(T)
        self.assertLessEqual(_gap(T, closed, oracle.aluthge(A, T.space)), bound)
        assert_allclose(assemble_matrix(aluthge_operator(T)), closed, atol=1e-12)
        self.assertAlmostEqual(
            oracle.op_norm(closed, T.space), float(np.max(np.abs(T.euw))), delta=bound
        )

    def test_aluthge_modulus_exponents(self):
        T = canonical_instance()
        hat = aluthge_closed(T)
        modulus = oracle.polar(hat, T.space).modulus
        assert_allclose(aluthge_modulus_closed(T, -1.0), modulus, atol=1e-10)
        self.assertGreater(_gap(T, aluthge_modulus_closed(T, -1.5), modulus), 1e-3)

    @settings(max_examples=25, deadline=None)
    @given(seeds, st.sampled_from([0.5, 2.0]))
    def test_quasi_products(self, seed, p):
        T = _random(seed)
        A = assemble_matrix(T)
        adjoint = oracle.weighted_adjoint(A, T.space)
        left = adjoint @ oracle.frac_power_psd(adjoint @ A, T.space, p) @ A
        right = adjoint @ oracle.frac_power_psd(A @ adjoint, T.space, p) @ A
        bound = 1e-7 * (1 + norm_formula(T) ** (2 * p + 2))
        self.assertLessEqual(_gap(T, quasi_product_closed(T, p, "left"), left), bound)
        self.assertLessEqual(_gap(T, quasi_product_closed(T, p, "right"), right), bound)
