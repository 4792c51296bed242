import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from wcond_modules.classify import (
    WEAK_CRITERION_NOTE,
    ClassifyConfig,
    ClassVerdict,
    CriterionCheck,
    CriterionKind,
    Verdict,
    classify_all,
    evaluate_criteria,
    is_hyponormal_family,
    is_normal,
    is_normaloid,
    is_p_quasihyponormal,
    is_weakly_hyponormal,
    normaloid_criterion,
    quasihyponormal_criteria,
    scale_variant_weak_check,
    weak_criteria,
)
from wcond_modules.instances import canonical_instance, random_instance, scenario, two_atom_instance

CLASSES = {"normal", "hyponormal", "p_quasihyponormal", "weakly_hyponormal", "normaloid"}


class UnitOperatorTests(SimpleTestCase):
    def test_every_class_holds(self):
        report = classify_all(scenario("unit").T)
        self.assertTrue(report.passed, report.violations + report.errors)
        self.assertTrue(all(report.summary().values()))
        self.assertIn("p_hyponormal(p=0.5)", report.summary())
        self.assertIn("p_quasihyponormal(p=3.7)", report.summary())


class CanonicalInstanceTests(SimpleTestCase):
    def setUp(self):
        self.T = canonical_instance()
        self.report = classify_all(self.T)

    def test_oracle_verdicts(self):
        for name in ("normal", "hyponormal", "weakly_hyponormal", "normaloid"):
            self.assertFalse(self.report.oracle(name), name)
        for p in (0.5, 1.0, 2.0, 3.7):
            self.assertFalse(self.report.oracle("p_quasihyponormal", p))
            self.assertFalse(self.report.oracle("p_hyponormal", p))

    def test_criteria_agree(self):
        self.assertTrue(self.report.passed, self.report.violations + self.report.errors)

    def test_holder_saturation_witness(self):
        check = quasihyponormal_criteria(self.T)[0]
        self.assertEqual(check.kind, CriterionKind.EQUIVALENT)
        self.assertEqual(check.verdict, Verdict.FAILS)
        self.assertEqual([w.atom for w in check.witnesses], [0])
        self.assertAlmostEqual(check.witnesses[0].lhs.real, 4.0)
        self.assertAlmostEqual(check.witnesses[0].rhs.real, 5.0)
        self.assertAlmostEqual(check.margin, -0.2)

    def test_normaloid_margin(self):
        check = normaloid_criterion(self.T)
        self.assertEqual(check.verdict, Verdict.FAILS)
        self.assertAlmostEqual(check.margin, 2 / np.sqrt(5) - 1)

    def test_report_json(self):
        data = self.report.to_dict()
        self.assertEqual(
            list(data),
            ["fingerprint", "tolerances", "summary", "classes", "violations", "findings", "notes", "errors", "passed"],
        )
        self.assertEqual(data["tolerances"]["pGrid"], [0.5, 1.0, 2.0, 3.7])
        record = data["classes"][0]
        self.assertEqual(record["class"], "normal")
        self.assertEqual(record["name"], "aligned_weights")
        self.assertEqual(record["kind"], "sufficient")
        self.assertEqual(len(data["fingerprint"]), 64)


class ScenarioTests(SimpleTestCase):
    def _check(self, name):
        s = scenario(name)
        report = classify_all(s.T)
        for class_name, expected in s.expected.items():
            for verdict in report.verdicts:
                if verdict.class_name == class_name:
                    self.assertEqual(verdict.oracle_verdict, expected, f"{name}: {verdict.label}")
        return report

    def test_expectation_times_measurable_u(self):
        report = self._check("expectation_times_measurable_u")
        self.assertEqual(report.verdict("normal").criterion_verdict, Verdict.HOLDS)

    def test_expectation_times_nonmeasurable_u(self):
        self._check("expectation_times_nonmeasurable_u")

    def test_measurable_w_times_expectation(self):
        self._check("measurable_w_times_expectation")

    def test_proportional_weights(self):
        report = self._check("proportional_weights")
        self.assertTrue(report.passed, report.violations)

    def test_vanishing_atom(self):
        self._check("vanishing_atom")

    def test_dominant_weights_counterexample(self):
        s = scenario("dominant_weights_counterexample")
        report = self._check(s.name)
        verdict = report.verdict("hyponormal")
        self.assertEqual(verdict.criterion_verdict, Verdict.HOLDS)
        self.assertFalse(verdict.oracle_verdict)
        self.assertTrue(any(s.known_violations[0] in text for text in report.violations))

    def test_unknown_scenario(self):
        self.assertIsNone(scenario("missing"))


class CriterionTests(SimpleTestCase):
    def test_weak_criteria_on_vanishing_atom(self):
        T = two_atom_instance([1, 1, 0, 0], [1, 3, 1, 1])
        on_s, on_mean = weak_criteria(T)
        self.assertEqual(on_s.region, "S")
        self.assertEqual(on_s.verdict, Verdict.FAILS)
        self.assertEqual(on_mean.region, "supp E(u)")

    def test_scale_variant_check_depends_on_scale(self):
        self.assertEqual(scale_variant_weak_check(two_atom_instance([1] * 4, [1] * 4)).verdict, Verdict.HOLDS)
        self.assertEqual(scale_variant_weak_check(two_atom_instance([2] * 4, [1] * 4)).verdict, Verdict.FAILS)

    def test_evaluate_criteria_covers_every_class(self):
        self.assertEqual(set(evaluate_criteria(canonical_instance())), CLASSES)

    def test_directional_problems(self):
        check = CriterionCheck("c", CriterionKind.SUFFICIENT, Verdict.HOLDS, "X")
        self.assertEqual(len(ClassVerdict("hyponormal", False, [check]).directional_problems()), 1)
        self.assertEqual(ClassVerdict("hyponormal", True, [check]).directional_problems(), [])
        check = CriterionCheck("c", CriterionKind.NECESSARY, Verdict.FAILS, "X")
        self.assertEqual(len(ClassVerdict("hyponormal", True, [check]).directional_problems()), 1)
        check = CriterionCheck("c", CriterionKind.EQUIVALENT, Verdict.NOT_APPLICABLE, "X")
        self.assertEqual(ClassVerdict("hyponormal", False, [check]).directional_problems(), [])


class ArgumentTests(SimpleTestCase):
    def setUp(self):
        self.T = canonical_instance()

    def test_bad_p_grid(self):
        with self.assertRaises(ValueError):
            is_hyponormal_family(self.T, [])
        with self.assertRaises(ValueError):
            is_hyponormal_family(self.T, [1.0, -2.0])
        with self.assertRaises(ValueError):
            is_p_quasihyponormal(self.T, 0.0)

    def test_bad_max_power(self):
        with self.assertRaises(ValueError):
            is_normaloid(self.T, max_power=1)

    def test_single_tests(self):
        self.assertFalse(is_normal(self.T).oracle_verdict)
        self.assertFalse(is_weakly_hyponormal(self.T).oracle_verdict)
        self.assertEqual(is_p_quasihyponormal(self.T, 1.0).label, "p_quasihyponormal(p=1)")


class RandomInstanceTests(SimpleTestCase):
    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_criteria_and_oracle_agree(self, seed):
        T = random_instance(np.random.default_rng(seed), max_points=8, max_atoms=3)
        report = classify_all(T, ClassifyConfig(p_grid=(0.5, 2.0), max_power=4))
        self.assertEqual(report.errors, [])
        self.assertEqual(report.violations, [])
        if report.oracle("normal"):
            self.assertTrue(report.oracle("hyponormal"))


class NilpotentAtomTests(SimpleTestCase):
    """E(uw) = 0 on the first atom, so T squares to zero there"""

    def setUp(self):
        self.T = two_atom_instance([1, 1, 1, 1], [1j, -1j, 2, 2])

    def test_round_off_is_not_a_violation(self):
        report = classify_all(self.T)
        self.assertTrue(report.passed, report.violations + report.errors)
        self.assertFalse(report.oracle("weakly_hyponormal"))
        self.assertFalse(report.oracle("hyponormal"))

    def test_weak_verdict_fails_only_on_nilpotent_atom(self):
        verdict = is_weakly_hyponormal(self.T)
        self.assertEqual(verdict.violations, [])
        self.assertEqual({w.atom for w in verdict.oracle_witnesses}, {0})
        self.assertEqual(verdict.criterion_verdict, Verdict.FAILS)

    def test_quasi_products_agree_with_closed_form(self):
        for p in (0.5, 3.7):
            self.assertEqual(is_p_quasihyponormal(self.T, p).violations, [])

    def test_weak_criterion_note(self):
        self.assertIn(WEAK_CRITERION_NOTE, is_weakly_hyponormal(self.T).notes)
        self.assertIn(WEAK_CRITERION_NOTE, classify_all(self.T).notes)
