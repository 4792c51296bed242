"""
Unit-Square Reproduction
M_w E M_u on [0, 1]^2 with vertical-strip atoms, u = y^(x/8) and
w = sqrt((4 + x) y), compared strip by strip with its closed forms

E|u|^2 = 4 / (4 + x), E|w|^2 = (4 + x) / 2 and |E(uw)|^2 = 64 (4 + x) / (x + 12)^2,
so E|u|^2 E|w|^2 = 2 exceeds |E(uw)|^2 on every strip. The report states
the reverse direction as the claim under test and the computed sign.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from wcond_modules.classify import ClassifyConfig, DEFAULT_TOL, classify_all, evaluate_criteria
from wcond_modules.condops import WeightedCondOp, norm_formula
from wcond_modules.space import build_unit_square_instance, strip_midpoints

logger = logging.getLogger(__name__)

MIN_GRID = 8
CLAIMED_DIRECTION = "E|u|^2 E|w|^2 <= |E(uw)|^2"
GOVERNING_INEQUALITY = "conditional Hoelder inequality |E(uw)|^2 <= E|u|^2 E|w|^2"


def eu2_closed(x):
    return 4.0 / (4.0 + x)


def ew2_closed(x):
    return (4.0 + x) / 2.0


def euw_closed(x):
    """E(uw) = 8 sqrt(4 + x) / (x + 12)"""
    return 8.0 * np.sqrt(4.0 + x) / (x + 12.0)


def unit_square_operator(grid: int) -> WeightedCondOp:
    return WeightedCondOp(*build_unit_square_instance(grid))


@dataclass
class UnitSquareReport:
    grid: int
    oracle_grid: int
    strips: List[Dict]
    max_deviation: Dict[str, float]
    sign: Dict
    criteria: Dict[str, Dict[str, str]]
    oracle: Dict[str, bool]
    radius: float
    radius_closed: float
    norm: float
    findings: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "grid": self.grid,
            "oracleGrid": self.oracle_grid,
            "maxDeviation": self.max_deviation,
            "sign": self.sign,
            "criteria": self.criteria,
            "oracle": self.oracle,
            "radius": self.radius,
            "radiusClosed": self.radius_closed,
            "norm": self.norm,
            "findings": list(self.findings),
            "violations": list(self.violations),
            "strips": self.strips,
        }


def unit_square_report(grid: int = 256, oracle_grid: int = 8, tol: float = DEFAULT_TOL) -> UnitSquareReport:
    """
    Strip statistics against closed forms, the Hoelder sign report and the
    classification of the operator

    The full grid is classified by criteria only; the dense oracle runs on
    the coarser `oracle_grid`.

    Args:
        grid: Cells per side of the full discretization (at least 8)
        oracle_grid: Cells per side of the oracle discretization (at least 2)
        tol: Criterion tolerance
    """
    if grid < MIN_GRID:
        raise ValueError(f"grid must be at least {MIN_GRID}")
    if oracle_grid < 2:
        raise ValueError("oracle_grid must be at least 2")

    T = unit_square_operator(grid)
    x = strip_midpoints(grid)
    eu2 = T.per_atom(T.eu2)
    ew2 = T.per_atom(T.ew2)
    euw = T.per_atom(T.euw)
    euw2 = np.abs(euw) ** 2
    gap = euw2 - eu2 * ew2

    closed = {
        "eu2": eu2_closed(x),
        "ew2": ew2_closed(x),
        "euw2": euw_closed(x) ** 2,
    }
    max_deviation = {
        "eu2": float(np.max(np.abs(eu2 - closed["eu2"]))),
        "ew2": float(np.max(np.abs(ew2 - closed["ew2"]))),
        "euw2": float(np.max(np.abs(euw2 - closed["euw2"]))),
    }
    strips = [
        {
            "x": float(x[i]),
            "eu2": float(eu2[i]),
            "eu2Closed": float(closed["eu2"][i]),
            "ew2": float(ew2[i]),
            "ew2Closed": float(closed["ew2"][i]),
            "euw2": float(euw2[i]),
            "euw2Closed": float(closed["euw2"][i]),
            "holderGap": float(gap[i]),
        }
        for i in range(grid)
    ]

    negative = int(np.sum(gap < 0))
    sign = {
        "claimed": CLAIMED_DIRECTION,
        "computed": "negative on every strip" if negative == grid else f"negative on {negative} of {grid} strips",
        "negativeStrips": negative,
        "maxGap": float(np.max(gap)),
        "governedBy": GOVERNING_INEQUALITY,
    }
    findings = []
    if negative:
        findings.append(
            f"claimed direction {CLAIMED_DIRECTION} fails on {negative} of {grid} strips"
        )

    criteria = {
        class_name: {check.name: check.verdict.value for check in checks}
        for class_name, checks in evaluate_criteria(T, tol).items()
    }
    coarse = classify_all(unit_square_operator(oracle_grid), ClassifyConfig(tol=tol))
    findings.extend(f"oracle grid {oracle_grid}: {text}" for text in coarse.findings)

    radius = float(np.max(np.abs(euw)))
    logger.info("Unit-square report at grid %d: radius %.6f, norm %.6f", grid, radius, norm_formula(T))
    return UnitSquareReport(
        grid=grid,
        oracle_grid=oracle_grid,
        strips=strips,
        max_deviation=max_deviation,
        sign=sign,
        criteria=criteria,
        oracle=coarse.summary(),
        radius=radius,
        radius_closed=float(np.max(euw_closed(x))),
        norm=norm_formula(T),
        findings=findings,
        violations=coarse.violations + coarse.errors,
    )
