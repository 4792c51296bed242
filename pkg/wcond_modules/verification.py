"""
Verification Campaigns
Seeded random instances (plus the named scenarios) run through every
closed-form, classification and spectral property; violations are data
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from wcond_modules import oracle
from wcond_modules.classify import ClassifyConfig, classify_all
from wcond_modules.condops import (
    WeightedCondOp,
    adjoint_operator,
    aluthge_closed,
    assemble_matrix,
    factor_matrices,
    norm_formula,
    polar_closed,
    self_product_power_closed,
)
from wcond_modules.errors import ConfigError, InvariantViolation
from wcond_modules.instances import Scenario, instance_to_dict, random_instance, scenario_instances
from wcond_modules.spectra import aluthge_fixed_point_check, fixed_point_hypotheses, spectrum_report

logger = logging.getLogger(__name__)

# Closed form against oracle, absolute plus relative in operator norm
PROPERTY_TOL = 1e-8
EXACT_TOL = 1e-12
# Relative corruption applied to closed-form powers in fault-injection runs
FAULT_SIZE = 1e-3
MAX_FINDING_SAMPLES = 10

SETTINGS_KEYS = {
    "TOL": "tol",
    "P_GRID": "p_grid",
    "MAX_POWER": "max_power",
    "SEED": "seed",
    "INSTANCES": "instance_count",
    "MAX_POINTS": "max_points",
    "MAX_ATOMS": "max_atoms",
    "WORKERS": "workers",
    "DEPTH": "depth",
}


@dataclass
class RunConfig(ClassifyConfig):
    seed: int = 42
    instance_count: int = 200
    max_points: int = 12
    max_atoms: int = 4
    workers: int = 1
    depth: int = 5

    def __post_init__(self):
        try:
            self.p_grid = tuple(float(p) for p in self.p_grid)
        except (TypeError, ValueError):
            raise ConfigError("p_grid must be a list of numbers")
        if not (self.tol > 0):
            raise ConfigError("tol must be positive")
        if not self.p_grid:
            raise ConfigError("p_grid must not be empty")
        if any(p <= 0 for p in self.p_grid):
            raise ConfigError("every p must be positive")
        if self.max_power < 2:
            raise ConfigError("max_power must be at least 2")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if self.instance_count < 0:
            raise ConfigError("instance_count must be nonnegative")
        if self.max_atoms < 1:
            raise ConfigError("max_atoms must be at least 1")
        if self.max_points < max(self.max_atoms, 2):
            raise ConfigError("max_points must be at least max_atoms and at least 2")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.depth < 1:
            raise ConfigError("depth must be at least 1")

    @classmethod
    def from_settings(cls, **overrides) -> "RunConfig":
        """Defaults from settings.WCOND; overrides set to None are ignored"""
        from django.conf import settings

        values = {
            name: settings.WCOND[key] for key, name in SETTINGS_KEYS.items() if key in settings.WCOND
        }
        values.update({name: value for name, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass
class Violation:
    property_name: str
    instance: Dict
    margin: float = math.nan
    detail: str = ""

    def to_dict(self) -> Dict:
        return {
            "property": self.property_name,
            "detail": self.detail,
            "margin": self.margin if math.isfinite(self.margin) else None,
            "instance": self.instance,
        }


@dataclass
class InstanceOutcome:
    violations: List[Violation] = field(default_factory=list)
    fixed_point_triggered: bool = False
    findings: List[str] = field(default_factory=list)
    known: List[str] = field(default_factory=list)


@dataclass
class VerifyOutcome:
    trials: int
    violations: List[Violation] = field(default_factory=list)
    fixed_point_triggers: int = 0
    finding_instances: int = 0
    finding_samples: List[str] = field(default_factory=list)
    known_violations: List[str] = field(default_factory=list)
    seed: Optional[int] = None
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "violations": [v.to_dict() for v in self.violations],
            "fixedPointTriggers": self.fixed_point_triggers,
            "findingInstances": self.finding_instances,
            "findingSamples": list(self.finding_samples),
            "knownViolations": list(self.known_violations),
        }


class _Checker:
    """Collects violations of one instance"""

    def __init__(self, T: WeightedCondOp):
        self.T = T
        self.outcome = InstanceOutcome()
        self._instance = None

    @property
    def instance(self) -> Dict:
        if self._instance is None:
            self._instance = instance_to_dict(self.T)
        return self._instance

    def fail(self, name: str, margin: float = math.nan, detail: str = ""):
        logger.warning("Property %s violated (margin %s) %s", name, margin, detail)
        self.outcome.violations.append(Violation(name, self.instance, float(margin), detail))

    def within(self, name: str, gap: float, bound: float, detail: str = ""):
        if not gap <= bound:
            self.fail(name, gap - bound, detail)


def _closed_form_checks(c: _Checker, A: np.ndarray, norm: float, config: RunConfig, inject_fault: bool):
    T, space = c.T, c.T.space
    Mw, E, Mu = factor_matrices(T)
    c.within("factorization", oracle.op_norm(A - Mw @ E @ Mu, space), EXACT_TOL * (1.0 + norm))

    adjoint = oracle.weighted_adjoint(A, space)
    c.within(
        "adjoint_symmetry",
        oracle.op_norm(adjoint - assemble_matrix(adjoint_operator(T)), space),
        EXACT_TOL * (1.0 + norm),
    )
    c.within("norm", abs(norm_formula(T) - norm), PROPERTY_TOL * max(1.0, norm))

    gram, cogram = adjoint @ A, A @ adjoint
    for p in config.p_grid:
        for side, base in (("left", gram), ("right", cogram)):
            closed = self_product_power_closed(T, p, side)
            if inject_fault:
                closed = closed * (1.0 + FAULT_SIZE)
            gap = oracle.op_norm(closed - oracle.frac_power_psd(base, space, p), space)
            c.within("power_closed_form", gap, PROPERTY_TOL * (1.0 + norm ** (2 * p)), f"p={p:g} side={side}")

    bound = PROPERTY_TOL * (1.0 + norm)
    U, modulus = polar_closed(T)
    c.within("polar_reconstruction", oracle.op_norm(U @ modulus - A, space), bound)
    c.within(
        "polar_modulus",
        oracle.op_norm(modulus - oracle.frac_power_psd(gram, space, 0.5), space),
        bound,
    )
    U_adj = oracle.weighted_adjoint(U, space)
    c.within("partial_isometry", oracle.op_norm(U @ U_adj @ U - U, space), PROPERTY_TOL)
    if not (oracle.kernel_subset(U, modulus, space) and oracle.kernel_subset(modulus, U, space)):
        c.fail("polar_kernel", detail="kernel of U differs from kernel of |T|")

    closed_aluthge = aluthge_closed(T)
    c.within("aluthge_closed_form", oracle.op_norm(closed_aluthge - oracle.aluthge(A, space), space), bound)
    iterate = A
    for n in range(1, config.depth + 1):
        iterate = oracle.aluthge(iterate, space)
        c.within(
            "aluthge_stability", oracle.op_norm(iterate - closed_aluthge, space), n * bound, f"n={n}"
        )
    c.within(
        "aluthge_norm",
        abs(oracle.op_norm(closed_aluthge, space) - float(np.max(np.abs(T.euw)))),
        bound,
    )


def check_instance(T: WeightedCondOp, config: RunConfig, inject_fault: bool = False) -> InstanceOutcome:
    """Run every property on one instance"""
    c = _Checker(T)
    try:
        A = assemble_matrix(T)
        norm = oracle.op_norm(A, T.space)
        _closed_form_checks(c, A, norm, config, inject_fault)

        report = classify_all(T, config)
        for text in report.violations:
            c.fail("classification", detail=text)
        for text in report.errors:
            c.fail("classification_error", detail=text)
        c.outcome.findings.extend(report.findings)

        spectral = spectrum_report(T, config.tol, config.depth)
        for text in spectral.violations:
            c.fail("spectra", detail=text)

        c.outcome.fixed_point_triggered = fixed_point_hypotheses(T, config.tol)
        aluthge_fixed_point_check(T, config.tol)
    except InvariantViolation as e:
        c.fail("invariant", e.margin, str(e))
    except Exception as e:
        logger.exception("Unexpected failure while checking an instance")
        c.fail("unexpected_error", detail=f"{type(e).__name__}: {e}")
    return c.outcome


def check_scenario(s: Scenario, config: RunConfig, inject_fault: bool = False) -> InstanceOutcome:
    """
    `check_instance` plus the scenario's expected verdicts

    Violations matching one of its known patterns are moved to `known`.
    """
    outcome = check_instance(s.T, config, inject_fault)
    kept = []
    for v in outcome.violations:
        if v.property_name == "classification" and any(k in v.detail for k in s.known_violations):
            outcome.known.append(f"{s.name}: {v.detail}")
        else:
            kept.append(v)
    outcome.violations = kept

    report = classify_all(s.T, config)
    for class_name, expected in s.expected.items():
        for verdict in report.verdicts:
            if verdict.class_name == class_name and verdict.oracle_verdict != expected:
                outcome.violations.append(
                    Violation(
                        "scenario",
                        instance_to_dict(s.T),
                        detail=f"{s.name}: expected {verdict.label}={expected}, got {verdict.oracle_verdict}",
                    )
                )
    for pattern in s.known_violations:
        if not any(pattern in k for k in outcome.known):
            outcome.violations.append(
                Violation("scenario", instance_to_dict(s.T), detail=f"{s.name}: expected violation '{pattern}' not observed")
            )
    if s.fixed_point and not outcome.fixed_point_triggered:
        outcome.violations.append(
            Violation("scenario", instance_to_dict(s.T), detail=f"{s.name}: fixed-point hypotheses not met")
        )
    return outcome


def run_campaign(config: RunConfig, inject_fault: bool = False) -> VerifyOutcome:
    """
    Seeded campaign over `instance_count` random instances and the scenarios

    Instances are drawn sequentially from the seed, checked on
    `config.workers` threads and merged in instance order. An empty campaign
    runs no scenarios.
    """
    started = time.monotonic()
    logger.info("Verification campaign: seed %d, %d instances", config.seed, config.instance_count)
    if config.instance_count == 0:
        return VerifyOutcome(trials=0, seed=config.seed)

    rng = np.random.default_rng(config.seed)
    instances = [
        random_instance(rng, config.max_points, config.max_atoms) for _ in range(config.instance_count)
    ]
    scenarios = scenario_instances()

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        outcomes = list(pool.map(lambda T: check_instance(T, config, inject_fault), instances))
        outcomes += list(pool.map(lambda s: check_scenario(s, config, inject_fault), scenarios))

    result = VerifyOutcome(trials=len(outcomes), seed=config.seed)
    for outcome in outcomes:
        result.violations.extend(outcome.violations)
        result.known_violations.extend(outcome.known)
        result.fixed_point_triggers += int(outcome.fixed_point_triggered)
        if outcome.findings:
            result.finding_instances += 1
            for text in outcome.findings:
                if text not in result.finding_samples and len(result.finding_samples) < MAX_FINDING_SAMPLES:
                    result.finding_samples.append(text)

    if result.fixed_point_triggers == 0:
        result.violations.append(Violation("fixed_point_coverage", {}, detail="fixed-point path never triggered"))

    result.elapsed = time.monotonic() - started
    logger.info(
        "Campaign finished: %d trials, %d violations in %.2fs",
        result.trials, len(result.violations), result.elapsed,
    )
    return result


def parse_p_grid(value) -> Optional[tuple]:
    """Accept "0.5,1,2", a number or a list of numbers; None stays None"""
    if value is None:
        return None
    if isinstance(value, str):
        value = [part for part in value.split(",") if part.strip()]
    elif not isinstance(value, (list, tuple)):
        value = [value]
    try:
        return tuple(float(p) for p in value)
    except (TypeError, ValueError):
        raise ConfigError(f"p must be a number or a list of numbers, got {value!r}")
