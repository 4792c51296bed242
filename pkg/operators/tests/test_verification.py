import math

from django.test import SimpleTestCase, override_settings

from wcond_modules.errors import ConfigError
from wcond_modules.instances import canonical_instance, scenario
from wcond_modules.verification import (
    RunConfig,
    Violation,
    check_instance,
    check_scenario,
    parse_p_grid,
    run_campaign,
)


class RunConfigTests(SimpleTestCase):
    def test_invalid_values(self):
        cases = [
            {"tol": 0},
            {"p_grid": ()},
            {"p_grid": (1.0, -0.5)},
            {"p_grid": "abc"},
            {"max_power": 1},
            {"seed": -1},
            {"instance_count": -3},
            {"max_atoms": 5, "max_points": 4},
            {"workers": 0},
            {"depth": 0},
        ]
        for values in cases:
            with self.subTest(**{k: str(v) for k, v in values.items()}):
                with self.assertRaises(ConfigError):
                    RunConfig(**values)

    def test_from_settings(self):
        config = RunConfig.from_settings(seed=7, tol=None)
        self.assertEqual(config.seed, 7)
        self.assertEqual(config.tol, 1e-8)
        self.assertEqual(config.p_grid, (0.5, 1.0, 2.0, 3.7))

    @override_settings(WCOND={"TOL": 1e-6, "SEED": 3, "P_GRID": [1.0]})
    def test_settings_override(self):
        config = RunConfig.from_settings()
        self.assertEqual((config.tol, config.seed, config.p_grid), (1e-6, 3, (1.0,)))
        self.assertEqual(config.depth, 5)

    def test_parse_p_grid(self):
        self.assertIsNone(parse_p_grid(None))
        self.assertEqual(parse_p_grid("0.5, 2"), (0.5, 2.0))
        self.assertEqual(parse_p_grid(3), (3.0,))
        self.assertEqual(parse_p_grid([1, "2"]), (1.0, 2.0))
        with self.assertRaises(ConfigError):
            parse_p_grid("1,x")


class CheckInstanceTests(SimpleTestCase):
    def setUp(self):
        self.config = RunConfig(p_grid=(0.5, 2.0), depth=2)

    def test_canonical_passes(self):
        outcome = check_instance(canonical_instance(), self.config)
        self.assertEqual(outcome.violations, [])
        self.assertFalse(outcome.fixed_point_triggered)

    def test_fault_injection_is_detected(self):
        outcome = check_instance(canonical_instance(), self.config, inject_fault=True)
        names = {v.property_name for v in outcome.violations}
        self.assertEqual(names, {"power_closed_form"})
        self.assertIn("side=", outcome.violations[0].detail)

    def test_known_violation_is_expected(self):
        outcome = check_scenario(scenario("dominant_weights_counterexample"), self.config)
        self.assertEqual(outcome.violations, [])
        # hyponormal plus one p_hyponormal entry per p
        self.assertEqual(len(outcome.known), 3)
        self.assertTrue(all("dominant_weights" in text for text in outcome.known))

    def test_fixed_point_scenario(self):
        outcome = check_scenario(scenario("measurable_w_times_expectation"), self.config)
        self.assertEqual(outcome.violations, [])
        self.assertTrue(outcome.fixed_point_triggered)


class CampaignTests(SimpleTestCase):
    def test_empty_campaign(self):
        outcome = run_campaign(RunConfig(instance_count=0))
        self.assertEqual(outcome.trials, 0)
        self.assertTrue(outcome.passed)

    def test_seeded_campaign(self):
        config = RunConfig(seed=11, instance_count=6, max_points=6, max_atoms=3, p_grid=(0.5, 2.0), depth=2)
        outcome = run_campaign(config)
        self.assertTrue(outcome.passed, [v.detail for v in outcome.violations])
        self.assertEqual(outcome.trials, 6 + 9)
        self.assertGreater(outcome.fixed_point_triggers, 0)
        self.assertEqual(len(outcome.known_violations), 3)

        again = run_campaign(RunConfig(**{**config.__dict__, "workers": 3}))
        self.assertEqual(again.to_dict(), outcome.to_dict())

    def test_fault_injection_fails_campaign(self):
        config = RunConfig(seed=1, instance_count=2, max_points=5, max_atoms=2, p_grid=(1.0,), depth=1)
        outcome = run_campaign(config, inject_fault=True)
        self.assertFalse(outcome.passed)
        self.assertIn("power_closed_form", {v.property_name for v in outcome.violations})


class ViolationTests(SimpleTestCase):
    def test_nan_margin_is_null(self):
        self.assertIsNone(Violation("x", {}).to_dict()["margin"])
        self.assertEqual(Violation("x", {}, margin=0.5).to_dict()["margin"], 0.5)
        self.assertTrue(math.isnan(Violation("x", {}).margin))
