"""
Partial Normality Classification
Membership tests for normal, (p-)hyponormal, p-quasihyponormal, weakly
hyponormal and normaloid operators M_w E M_u

Every class is decided twice: by pointwise criteria on the conditional
statistics and by a definition-level oracle on dense matrices. The oracle
works atom block by atom block since every operator involved commutes with
the atom projections, and each block is judged relative to its own size.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from wcond_modules import oracle
from wcond_modules.condops import (
    WeightedCondOp,
    aluthge_modulus_closed,
    assemble_matrix,
    norm_formula,
    quasi_product_closed,
    self_product_power_closed,
)
from wcond_modules.errors import InvariantViolation
from wcond_modules.instances import fingerprint
from wcond_modules.space import SUPPORT_TOL, FiniteMeasureSpace

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_P_GRID = (0.5, 1.0, 2.0, 3.7)
DEFAULT_MAX_POWER = 8

# Closed forms must match oracle powers within this, relative to 1 + |T|^(2p)
CLOSED_FORM_TOL = 1e-8
# Magnitudes below this never count as a relative scale
CRITERION_FLOOR = 1e-12
MAX_WITNESSES = 5
# Atom blocks are never judged against less than this times |T_b|^degree
BLOCK_FLOOR = 1e-6

MEAN_SUPPORT_NOTE = (
    "the region where E(u) is nonzero is read as the support of E(u) on atoms"
)
WEAK_CRITERION_NOTE = (
    "the weak criterion is the homogeneous equality |E(uw)| = (E|u|^2)^1/2 (E|w|^2)^1/2; "
    "the scale-variant identity |E(uw)| = E|u|^2 (E|w|^2)^1/2 is only reported as a finding"
)


class CriterionKind(str, Enum):
    SUFFICIENT = "sufficient"
    NECESSARY = "necessary"
    EQUIVALENT = "equivalent"


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    NOT_APPLICABLE = "not_applicable"


def _number(value):
    value = complex(value)
    if value.imag == 0:
        return float(value.real)
    return {"re": float(value.real), "im": float(value.imag)}


@dataclass
class Witness:
    """Atom (and point) where a comparison was worst, with both sides"""
    atom: int
    lhs: complex
    rhs: complex
    point: Optional[int] = None

    def to_dict(self) -> Dict:
        data = {"atom": int(self.atom)}
        if self.point is not None:
            data["point"] = int(self.point)
        data["lhs"] = _number(self.lhs)
        data["rhs"] = _number(self.rhs)
        return data


@dataclass
class CriterionCheck:
    name: str
    kind: CriterionKind
    verdict: Verdict
    region: str
    margin: float = 0.0  # worst relative slack; below -tol means the check fails
    witnesses: List[Witness] = field(default_factory=list)


@dataclass
class ClassVerdict:
    """
    Oracle verdict of one class plus every criterion evaluated for it

    The first criterion is the primary one (`criterion_verdict`,
    `criterion_kind`); any further criteria carry the opposite direction.
    """
    class_name: str
    oracle_verdict: bool
    criteria: List[CriterionCheck]
    p: Optional[float] = None
    oracle_margin: float = 0.0
    oracle_witnesses: List[Witness] = field(default_factory=list)
    findings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    @property
    def label(self) -> str:
        return self.class_name if self.p is None else f"{self.class_name}(p={self.p:g})"

    @property
    def criterion_verdict(self) -> Verdict:
        return self.criteria[0].verdict if self.criteria else Verdict.NOT_APPLICABLE

    @property
    def criterion_kind(self) -> Optional[CriterionKind]:
        return self.criteria[0].kind if self.criteria else None

    @property
    def witnesses(self) -> List[Witness]:
        return [w for check in self.criteria for w in check.witnesses] + self.oracle_witnesses

    def directional_problems(self) -> List[str]:
        """Criteria whose verdict contradicts the oracle in their stated direction"""
        problems = []
        for check in self.criteria:
            if check.verdict is Verdict.NOT_APPLICABLE:
                continue
            holds = check.verdict is Verdict.HOLDS
            if check.kind is CriterionKind.SUFFICIENT and holds and not self.oracle_verdict:
                problems.append(f"{self.label}: sufficient criterion {check.name} holds but the oracle fails")
            elif check.kind is CriterionKind.NECESSARY and self.oracle_verdict and not holds:
                problems.append(f"{self.label}: oracle holds but necessary criterion {check.name} fails")
            elif check.kind is CriterionKind.EQUIVALENT and holds != self.oracle_verdict:
                problems.append(
                    f"{self.label}: equivalent criterion {check.name} {check.verdict.value} "
                    f"but the oracle says {self.oracle_verdict}"
                )
        return problems

    def to_records(self) -> List[Dict]:
        """One JSON record per evaluated criterion"""
        return [
            {
                "class": self.class_name,
                "p": self.p,
                "oracle": self.oracle_verdict,
                "criterion": check.verdict.value,
                "name": check.name,
                "kind": check.kind.value,
                "region": check.region,
                "margin": check.margin,
                "oracleMargin": self.oracle_margin,
                "witnesses": [w.to_dict() for w in check.witnesses],
            }
            for check in self.criteria
        ]


@dataclass
class ClassifyConfig:
    tol: float = DEFAULT_TOL
    p_grid: Tuple[float, ...] = DEFAULT_P_GRID
    max_power: int = DEFAULT_MAX_POWER


@dataclass
class ClassificationReport:
    verdicts: List[ClassVerdict]
    tol: float
    p_grid: List[float]
    max_power: int
    fingerprint: str
    violations: List[str] = field(default_factory=list)
    findings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    def verdict(self, class_name: str, p: Optional[float] = None) -> ClassVerdict:
        for v in self.verdicts:
            if v.class_name == class_name and (p is None or v.p == p):
                return v
        raise KeyError(f"no verdict for {class_name} (p={p})")

    def oracle(self, class_name: str, p: Optional[float] = None) -> bool:
        return self.verdict(class_name, p).oracle_verdict

    @property
    def passed(self) -> bool:
        return not self.violations and not self.errors

    def summary(self) -> Dict[str, bool]:
        return {v.label: v.oracle_verdict for v in self.verdicts}

    def to_dict(self) -> Dict:
        return {
            "fingerprint": self.fingerprint,
            "tolerances": {"tol": self.tol, "pGrid": list(self.p_grid), "maxPower": self.max_power},
            "summary": self.summary(),
            "classes": [record for v in self.verdicts for record in v.to_records()],
            "violations": list(self.violations),
            "findings": list(self.findings),
            "notes": list(self.notes),
            "errors": list(self.errors),
            "passed": self.passed,
        }


# -- criteria -----------------------------------------------------------------

def _compare(
    name: str,
    kind: CriterionKind,
    lhs: np.ndarray,
    rhs: np.ndarray,
    relation: str,
    region: np.ndarray,
    region_label: str,
    tol: float,
    atoms: np.ndarray,
    points: Optional[np.ndarray] = None,
) -> CriterionCheck:
    """
    Compare lhs against rhs entrywise on a region

    relation "eq" demands |lhs - rhs| small, "ge" demands lhs >= rhs for real
    values, "nonneg" demands lhs - rhs real and nonnegative. Slack is measured
    relative to max(|lhs|, |rhs|).
    """
    region = np.asarray(region, dtype=bool)
    if not region.any():
        return CriterionCheck(name, kind, Verdict.NOT_APPLICABLE, region_label)

    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    diff = lhs - rhs
    if relation == "eq":
        slack = -np.abs(diff)
    elif relation == "ge":
        slack = np.real(diff)
    elif relation == "nonneg":
        slack = np.minimum(np.real(diff), -np.abs(np.imag(diff)))
    else:
        raise ValueError(f"unknown relation {relation!r}")

    scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), CRITERION_FLOOR)
    relative = np.where(region, slack / scale, np.inf)
    failing = np.flatnonzero(relative < -tol)

    witnesses = [
        Witness(
            atom=int(atoms[i]),
            lhs=complex(lhs[i]),
            rhs=complex(rhs[i]),
            point=None if points is None else int(points[i]),
        )
        for i in failing[np.argsort(relative[failing])][:MAX_WITNESSES]
    ]
    return CriterionCheck(
        name,
        kind,
        Verdict.FAILS if failing.size else Verdict.HOLDS,
        region_label,
        margin=float(np.min(relative)),
        witnesses=witnesses,
    )


def _atom_check(T: WeightedCondOp, name, kind, lhs, rhs, relation, region, region_label, tol):
    atoms = np.arange(T.part.count)
    return _compare(name, kind, lhs, rhs, relation, region, region_label, tol, atoms)


def _point_check(T: WeightedCondOp, name, kind, lhs, rhs, relation, tol):
    return _compare(
        name, kind, lhs, rhs, relation, np.ones(T.n, dtype=bool), "X", tol,
        atoms=T.part.atom_of, points=np.arange(T.n),
    )


class _AtomStats:
    """Per-atom views of the conditional statistics of T"""

    def __init__(self, T: WeightedCondOp):
        self.eu2 = T.per_atom(T.eu2)
        self.ew2 = T.per_atom(T.ew2)
        self.euw = T.per_atom(T.euw)
        self.eu = T.mean_u()
        self.ew = T.mean_w()
        self.in_s = T.per_atom(T.s_mask)
        self.in_g = T.per_atom(T.g_mask)
        self.mean_support = np.abs(self.eu) > SUPPORT_TOL
        self.every = np.ones(T.part.count, dtype=bool)


def normal_criteria(T: WeightedCondOp, tol: float = DEFAULT_TOL) -> List[CriterionCheck]:
    """sqrt(E|u|^2) conj(w) = u sqrt(E|w|^2) pointwise (sufficient), balanced means (necessary)"""
    a = _AtomStats(T)
    aligned = _point_check(
        T, "aligned_weights", CriterionKind.SUFFICIENT,
        np.sqrt(T.eu2) * np.conj(T.w), T.u * np.sqrt(T.ew2), "eq", tol,
    )
    balanced = _atom_check(
        T, "balanced_means", CriterionKind.NECESSARY,
        np.abs(a.eu) ** 2 * a.ew2, np.abs(a.ew) ** 2 * a.eu2, "eq", a.every, "X", tol,
    )
    return [aligned, balanced]


def hyponormal_criteria(T: WeightedCondOp, tol: float = DEFAULT_TOL) -> List[CriterionCheck]:
    """u sqrt(E|w|^2) - sqrt(E|u|^2) conj(w) >= 0 (sufficient), mean dominance (necessary)"""
    a = _AtomStats(T)
    dominant = _point_check(
        T, "dominant_weights", CriterionKind.SUFFICIENT,
        T.u * np.sqrt(T.ew2), np.sqrt(T.eu2) * np.conj(T.w), "nonneg", tol,
    )
    dominance = _atom_check(
        T, "mean_dominance", CriterionKind.NECESSARY,
        np.abs(a.eu) ** 2 * a.ew2, np.abs(a.ew) ** 2 * a.eu2, "ge", a.every, "X", tol,
    )
    return [dominant, dominance]


def quasihyponormal_criteria(T: WeightedCondOp, tol: float = DEFAULT_TOL) -> List[CriterionCheck]:
    """
    |E(uw)|^2 >= E|u|^2 E|w|^2 on every atom, and the same on supp E(u) and G

    The full-region check is sufficient, and equivalent when u and w vanish
    nowhere; the restricted one is necessary.
    """
    a = _AtomStats(T)
    full_support = bool(
        np.all(np.abs(T.u) > SUPPORT_TOL) and np.all(np.abs(T.w) > SUPPORT_TOL)
    )
    lhs = np.abs(a.euw) ** 2
    rhs = a.eu2 * a.ew2
    saturation = _atom_check(
        T, "holder_saturation",
        CriterionKind.EQUIVALENT if full_support else CriterionKind.SUFFICIENT,
        lhs, rhs, "ge", a.every, "X", tol,
    )
    restricted = _atom_check(
        T, "holder_saturation_on_mean_support", CriterionKind.NECESSARY,
        lhs, rhs, "ge", a.mean_support & a.in_g, "supp E(u) & G", tol,
    )
    return [saturation, restricted]


def weak_criteria(T: WeightedCondOp, tol: float = DEFAULT_TOL) -> List[CriterionCheck]:
    """|E(uw)| = (E|u|^2 E|w|^2)^1/2 on S (sufficient) and on supp E(u) (necessary)"""
    a = _AtomStats(T)
    lhs = np.abs(a.euw)
    rhs = np.sqrt(a.eu2 * a.ew2)
    on_s = _atom_check(
        T, "holder_equality", CriterionKind.SUFFICIENT, lhs, rhs, "eq", a.in_s, "S", tol,
    )
    on_mean = _atom_check(
        T, "holder_equality_on_mean_support", CriterionKind.NECESSARY,
        lhs, rhs, "eq", a.mean_support, "supp E(u)", tol,
    )
    return [on_s, on_mean]


def scale_variant_weak_check(T: WeightedCondOp, tol: float = DEFAULT_TOL) -> CriterionCheck:
    """|E(uw)| = E|u|^2 (E|w|^2)^1/2 on S; not invariant under u -> c u"""
    a = _AtomStats(T)
    return _atom_check(
        T, "scale_variant_equality", CriterionKind.SUFFICIENT,
        np.abs(a.euw), a.eu2 * np.sqrt(a.ew2), "eq", a.in_s, "S", tol,
    )


def normaloid_criterion(T: WeightedCondOp, tol: float = DEFAULT_TOL) -> CriterionCheck:
    """max |E(uw)| = max (E|u|^2 E|w|^2)^1/2, i.e. r(T) = |T|"""
    a = _AtomStats(T)
    radius = float(np.max(np.abs(a.euw)))
    norm = norm_formula(T)
    if norm == 0:
        return CriterionCheck("radius_norm_balance", CriterionKind.EQUIVALENT, Verdict.HOLDS, "X")
    atom = int(np.argmax(np.sqrt(a.eu2 * a.ew2)))
    margin = radius / norm - 1.0
    return CriterionCheck(
        "radius_norm_balance",
        CriterionKind.EQUIVALENT,
        Verdict.HOLDS if margin >= -tol else Verdict.FAILS,
        "X",
        margin=margin,
        witnesses=[] if margin >= -tol else [Witness(atom, radius, norm)],
    )


def evaluate_criteria(T: WeightedCondOp, tol: float = DEFAULT_TOL) -> Dict[str, List[CriterionCheck]]:
    """Criteria of every class without building any matrix"""
    return {
        "normal": normal_criteria(T, tol),
        "hyponormal": hyponormal_criteria(T, tol),
        "p_quasihyponormal": quasihyponormal_criteria(T, tol),
        "weakly_hyponormal": weak_criteria(T, tol),
        "normaloid": [normaloid_criterion(T, tol)],
    }


# -- oracle -------------------------------------------------------------------

BlockFn = Callable[[np.ndarray, FiniteMeasureSpace], np.ndarray]


class OperatorMatrices:
    """Dense matrices of T and its derived operators, built on demand"""

    def __init__(self, T: WeightedCondOp):
        self.T = T
        self.space = T.space
        self._blockwise: Dict[str, np.ndarray] = {}

    @cached_property
    def matrix(self) -> np.ndarray:
        A = assemble_matrix(self.T)
        if oracle.off_atom_norm(A, self.T.part) != 0:
            raise InvariantViolation("operator matrix links different atoms")
        return A

    @cached_property
    def adjoint(self) -> np.ndarray:
        return oracle.weighted_adjoint(self.matrix, self.space)

    @cached_property
    def gram(self) -> np.ndarray:
        return self.adjoint @ self.matrix

    @cached_property
    def cogram(self) -> np.ndarray:
        return self.matrix @ self.adjoint

    @cached_property
    def norm(self) -> float:
        return oracle.op_norm(self.matrix, self.space)

    @cached_property
    def block_norms(self) -> np.ndarray:
        """Operator norm of T on each atom"""
        return np.array([
            oracle.op_norm(oracle.atom_block(self.matrix, idx), self.space.restrict(idx))
            for idx in self.T.part.index_arrays
        ])

    def blockwise(self, key: str, fn: BlockFn) -> np.ndarray:
        """Block-diagonal matrix whose atom blocks are fn(block of T, atom space)"""
        if key not in self._blockwise:
            result = np.zeros((self.T.n, self.T.n), dtype=complex)
            for idx in self.T.part.index_arrays:
                sub = self.space.restrict(idx)
                result[np.ix_(idx, idx)] = fn(oracle.atom_block(self.matrix, idx), sub)
            self._blockwise[key] = result
        return self._blockwise[key]


def _gram_power(A, sub, p):
    return oracle.frac_power_psd(oracle.weighted_adjoint(A, sub) @ A, sub, p)


def _cogram_power(A, sub, p):
    return oracle.frac_power_psd(A @ oracle.weighted_adjoint(A, sub), sub, p)


def _modulus(A, sub):
    return oracle.polar(A, sub).modulus


def _aluthge_modulus(A, sub):
    return oracle.polar(oracle.aluthge(A, sub), sub).modulus


def _aluthge_adjoint_modulus(A, sub):
    return oracle.polar(oracle.weighted_adjoint(oracle.aluthge(A, sub), sub), sub).modulus


def _atom_pairs(X: np.ndarray, Y: np.ndarray, m: OperatorMatrices, degree: float):
    """
    Yield (atom, atom space, X block, Y block, scale) for every atom worth judging

    The scale is the larger block norm, floored at BLOCK_FLOOR * |T_b|^degree.
    Atoms where T and both sides are zero are skipped.
    """
    for k, idx in enumerate(m.T.part.index_arrays):
        sub = m.space.restrict(idx)
        Xb, Yb = oracle.atom_block(X, idx), oracle.atom_block(Y, idx)
        floor = BLOCK_FLOOR * m.block_norms[k] ** degree
        scale = max(oracle.op_norm(Xb, sub), oracle.op_norm(Yb, sub), floor)
        if scale == 0:
            continue
        yield k, sub, Xb, Yb, scale


def _blockwise_order(X: np.ndarray, Y: np.ndarray, m: OperatorMatrices, degree: float, tol: float):
    """
    Decide X >= Y atom by atom, X and Y being homogeneous of the given degree in T

    Returns:
        Tuple of (holds, worst relative min eigenvalue of X - Y, witnesses)
    """
    holds, worst, witnesses = True, 0.0, []
    for k, sub, Xb, Yb, scale in _atom_pairs(X, Y, m, degree):
        diff = Xb - Yb
        relative = oracle.min_eigenvalue(diff, sub) / scale
        skew = oracle.hermitian_defect(diff, sub) / scale
        worst = min(worst, relative)
        if relative < -tol or skew > tol:
            holds = False
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append(Witness(k, lhs=relative, rhs=-tol))
    return holds, worst, witnesses


def _relative_gaps(X: np.ndarray, Y: np.ndarray, m: OperatorMatrices, degree: float):
    for k, sub, Xb, Yb, scale in _atom_pairs(X, Y, m, degree):
        yield k, oracle.op_norm(Xb - Yb, sub) / scale


def _blockwise_equal(X: np.ndarray, Y: np.ndarray, m: OperatorMatrices, degree: float, tol: float):
    """Decide X = Y atom by atom; returns (equal, worst relative gap, witnesses)"""
    equal, worst, witnesses = True, 0.0, []
    for k, gap in _relative_gaps(X, Y, m, degree):
        worst = max(worst, gap)
        if gap > tol:
            equal = False
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append(Witness(k, lhs=gap, rhs=tol))
    return equal, worst, witnesses


def _failing_atoms(X: np.ndarray, Y: np.ndarray, m: OperatorMatrices, degree: float, tol: float) -> List[int]:
    return [k for k, gap in _relative_gaps(X, Y, m, degree) if gap > tol]


def is_normal(
    T: WeightedCondOp, tol: float = DEFAULT_TOL, matrices: Optional[OperatorMatrices] = None
) -> ClassVerdict:
    """Oracle: T*T = TT* on every atom block"""
    m = matrices or OperatorMatrices(T)
    equal, gap, witnesses = _blockwise_equal(m.gram, m.cogram, m, 2, tol)
    return ClassVerdict(
        "normal", equal, normal_criteria(T, tol), oracle_margin=-gap, oracle_witnesses=witnesses,
    )


def _check_power_closed_form(T: WeightedCondOp, m: OperatorMatrices, p: float, side: str) -> Optional[str]:
    closed = self_product_power_closed(T, p, side)
    base = m.gram if side == "left" else m.cogram
    spectral = oracle.frac_power_psd(base, m.space, p)
    gap = oracle.op_norm(closed - spectral, m.space)
    bound = CLOSED_FORM_TOL * (1.0 + m.norm ** (2 * p))
    if gap > bound:
        return f"closed-form {side} power p={p:g} differs from the spectral power by {gap:.3e}"
    return None


def is_hyponormal_family(
    T: WeightedCondOp,
    p_grid: Sequence[float] = DEFAULT_P_GRID,
    tol: float = DEFAULT_TOL,
    matrices: Optional[OperatorMatrices] = None,
) -> List[ClassVerdict]:
    """
    Hyponormality (T*T >= TT*) followed by p-hyponormality for every p

    The p verdicts compare the closed forms of (T*T)^p and (TT*)^p, each
    cross-checked against the spectral power of the oracle.
    """
    if not p_grid:
        raise ValueError("p_grid must not be empty")
    if any(p <= 0 for p in p_grid):
        raise ValueError("every p must be positive")
    m = matrices or OperatorMatrices(T)

    holds, margin, witnesses = _blockwise_order(m.gram, m.cogram, m, 2, tol)
    verdicts = [
        ClassVerdict(
            "hyponormal", holds, hyponormal_criteria(T, tol),
            oracle_margin=margin, oracle_witnesses=witnesses,
        )
    ]
    for p in p_grid:
        left = self_product_power_closed(T, p, "left")
        right = self_product_power_closed(T, p, "right")
        holds, margin, witnesses = _blockwise_order(left, right, m, 2 * p, tol)
        verdict = ClassVerdict(
            "p_hyponormal", holds, hyponormal_criteria(T, tol), p=float(p),
            oracle_margin=margin, oracle_witnesses=witnesses,
        )
        for side in ("left", "right"):
            mismatch = _check_power_closed_form(T, m, p, side)
            if mismatch:
                verdict.violations.append(mismatch)
        verdicts.append(verdict)
    return verdicts


def is_p_quasihyponormal(
    T: WeightedCondOp, p: float, tol: float = DEFAULT_TOL, matrices: Optional[OperatorMatrices] = None
) -> ClassVerdict:
    """Oracle: T*(T*T)^p T >= T*(TT*)^p T, blocks raised separately"""
    if p <= 0:
        raise ValueError("p must be positive")
    m = matrices or OperatorMatrices(T)

    def left(A, sub):
        return oracle.weighted_adjoint(A, sub) @ _gram_power(A, sub, p) @ A

    def right(A, sub):
        return oracle.weighted_adjoint(A, sub) @ _cogram_power(A, sub, p) @ A

    X = m.blockwise(f"quasi-left-{p}", left)
    Y = m.blockwise(f"quasi-right-{p}", right)
    holds, margin, witnesses = _blockwise_order(X, Y, m, 2 * p + 2, tol)
    verdict = ClassVerdict(
        "p_quasihyponormal", holds, quasihyponormal_criteria(T, tol), p=float(p),
        oracle_margin=margin, oracle_witnesses=witnesses, notes=[MEAN_SUPPORT_NOTE],
    )
    for side, dense in (("left", X), ("right", Y)):
        bad = _failing_atoms(quasi_product_closed(T, p, side), dense, m, 2 * p + 2, CLOSED_FORM_TOL)
        if bad:
            verdict.violations.append(
                f"closed-form {side} quasi product p={p:g} differs from the oracle on atoms {bad}"
            )
    return verdict


def is_weakly_hyponormal(
    T: WeightedCondOp, tol: float = DEFAULT_TOL, matrices: Optional[OperatorMatrices] = None
) -> ClassVerdict:
    """
    Oracle: |T^| >= |T| >= |T^*| on every atom block

    Also compares the modulus-equality reading |T| = |T^|, the scale-variant
    identity and the exponent -3/2 modulus form with the oracle, recording
    each disagreement as a finding.
    """
    m = matrices or OperatorMatrices(T)
    modulus = m.blockwise("modulus", _modulus)
    aluthge_mod = m.blockwise("aluthge-modulus", _aluthge_modulus)
    aluthge_adj_mod = m.blockwise("aluthge-adjoint-modulus", _aluthge_adjoint_modulus)

    upper, upper_margin, upper_witnesses = _blockwise_order(aluthge_mod, modulus, m, 1, tol)
    lower, lower_margin, lower_witnesses = _blockwise_order(modulus, aluthge_adj_mod, m, 1, tol)
    holds = upper and lower
    verdict = ClassVerdict(
        "weakly_hyponormal", holds, weak_criteria(T, tol),
        oracle_margin=min(upper_margin, lower_margin),
        oracle_witnesses=upper_witnesses + lower_witnesses,
        notes=[MEAN_SUPPORT_NOTE, WEAK_CRITERION_NOTE],
    )

    equal_reading = _blockwise_equal(modulus, aluthge_mod, m, 1, tol)[0]
    if equal_reading != holds:
        verdict.findings.append(
            f"modulus-equality reading |T| = |T^| gives {equal_reading}, the inequalities give {holds}"
        )

    variant = scale_variant_weak_check(T, tol)
    if variant.verdict is not Verdict.NOT_APPLICABLE and (variant.verdict is Verdict.HOLDS) != holds:
        verdict.findings.append(
            f"scale-variant identity |E(uw)| = E|u|^2 (E|w|^2)^1/2 {variant.verdict.value} "
            f"while the oracle says {holds}"
        )

    bad = _failing_atoms(aluthge_modulus_closed(T, -1.0), aluthge_mod, m, 1, CLOSED_FORM_TOL)
    if bad:
        verdict.violations.append(f"closed-form modulus of the Aluthge transform differs on atoms {bad}")
    bad = _failing_atoms(aluthge_modulus_closed(T, -1.0), aluthge_adj_mod, m, 1, CLOSED_FORM_TOL)
    if bad:
        verdict.violations.append(f"|T^| and |T^*| differ on atoms {bad}")
    bad = _failing_atoms(aluthge_modulus_closed(T, -1.5), aluthge_mod, m, 1, CLOSED_FORM_TOL)
    if bad:
        verdict.findings.append(
            f"the E|u|^2 exponent -3/2 form of |T^| differs from the oracle modulus on atoms {bad}"
        )
    return verdict


def is_normaloid(
    T: WeightedCondOp,
    max_power: int = DEFAULT_MAX_POWER,
    tol: float = DEFAULT_TOL,
    matrices: Optional[OperatorMatrices] = None,
) -> ClassVerdict:
    """
    Oracle: |S^n| = 1 for S = T / |T| and n = 1..max_power, within n * tol

    Also asserts r(T) <= |T| with r taken from the dense eigenvalues.
    """
    if max_power < 2:
        raise ValueError("max_power must be at least 2")
    m = matrices or OperatorMatrices(T)
    criterion = normaloid_criterion(T, tol)
    if m.norm == 0:
        return ClassVerdict("normaloid", True, [criterion])

    S = m.matrix / m.norm
    holds, margin, witnesses = True, 0.0, []
    for n in range(1, max_power + 1):
        ratio = oracle.op_norm(oracle.matrix_power(S, n), m.space)
        margin = min(margin, (ratio - 1.0) / n)
        if abs(ratio - 1.0) > n * tol:
            holds = False
            if len(witnesses) < MAX_WITNESSES:
                witnesses.append(Witness(atom=-1, lhs=ratio, rhs=1.0, point=n))

    verdict = ClassVerdict(
        "normaloid", holds, [criterion], oracle_margin=margin, oracle_witnesses=witnesses,
    )
    radius = float(np.max(np.abs(linalg.eigvals(m.matrix)))) if T.n else 0.0
    if radius > m.norm * (1.0 + tol) + tol:
        verdict.violations.append(f"spectral radius {radius:.6g} exceeds the norm {m.norm:.6g}")
    return verdict


def _inclusion_problems(report: ClassificationReport) -> List[str]:
    problems = []

    def implies(premise: ClassVerdict, conclusion: ClassVerdict):
        if premise.oracle_verdict and not conclusion.oracle_verdict:
            problems.append(f"inclusion broken: {premise.label} holds but {conclusion.label} fails")

    by_label = {v.label: v for v in report.verdicts}
    normal = by_label.get("normal")
    hypo = by_label.get("hyponormal")
    normaloid = by_label.get("normaloid")
    if normal and hypo:
        implies(normal, hypo)
    if hypo and normaloid:
        implies(hypo, normaloid)
    if normal and normaloid:
        implies(normal, normaloid)
    for v in report.verdicts:
        if v.class_name == "p_quasihyponormal":
            if hypo:
                implies(hypo, v)
            p_hypo = by_label.get(f"p_hyponormal(p={v.p:g})")
            if p_hypo:
                implies(p_hypo, v)

    family = [v.oracle_verdict for v in report.verdicts if v.class_name in ("hyponormal", "p_hyponormal")]
    if len(set(family)) > 1:
        problems.append("p-hyponormality verdict varies across the p grid")
    return problems


def classify_all(T: WeightedCondOp, config: Optional[ClassifyConfig] = None) -> ClassificationReport:
    """
    Run every class test and check the report for consistency

    Failures inside one test become entries of `errors`; the remaining tests
    still run.
    """
    config = config or ClassifyConfig()
    m = OperatorMatrices(T)
    report = ClassificationReport(
        verdicts=[],
        tol=config.tol,
        p_grid=[float(p) for p in config.p_grid],
        max_power=config.max_power,
        fingerprint=fingerprint(T),
    )

    tests = [
        ("normal", lambda: [is_normal(T, config.tol, m)]),
        ("hyponormal", lambda: is_hyponormal_family(T, config.p_grid, config.tol, m)),
    ]
    tests += [
        (f"p_quasihyponormal(p={p:g})", lambda p=p: [is_p_quasihyponormal(T, p, config.tol, m)])
        for p in config.p_grid
    ]
    tests += [
        ("weakly_hyponormal", lambda: [is_weakly_hyponormal(T, config.tol, m)]),
        ("normaloid", lambda: [is_normaloid(T, config.max_power, config.tol, m)]),
    ]
    for label, run in tests:
        try:
            report.verdicts.extend(run())
        except Exception as exc:
            logger.exception("Class test %s failed", label)
            report.errors.append(f"{label}: {exc}")

    for v in report.verdicts:
        v.violations.extend(v.directional_problems())
        report.violations.extend(v.violations)
        report.findings.extend(f"{v.label}: {text}" for text in v.findings)
        for note in v.notes:
            if note not in report.notes:
                report.notes.append(note)
    report.violations.extend(_inclusion_problems(report))

    if report.violations:
        logger.warning("Instance %s: %d violations", report.fingerprint[:12], len(report.violations))
    return report
