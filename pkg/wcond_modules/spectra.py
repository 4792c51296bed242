"""
Spectra of Weighted Conditional Operators
Spectrum, point and joint point spectrum, spectral radius, iterated Aluthge
transforms and the Aluthge fixed-point property

On a finite space the approximate point spectrum is the spectrum (T - z is
bounded below iff it is injective), so it is reported as such.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from wcond_modules import oracle
from wcond_modules.classify import Verdict, is_weakly_hyponormal, weak_criteria
from wcond_modules.condops import WeightedCondOp, aluthge_closed, assemble_matrix
from wcond_modules.errors import InvariantViolation
from wcond_modules.instances import complex_to_json, fingerprint
from wcond_modules.space import indicator

logger = logging.getLogger(__name__)

# Greedy eigenvalue matching tolerance, relative to 1 + |T|
MULTISET_TOL = 1e-7
DEFAULT_DEPTH = 5

APPROXIMATE_POINT_NOTE = (
    "approximate point spectrum equals the spectrum in finite dimension"
)


@dataclass
class PointSpectrumEntry:
    """
    One eigenvalue with its level set A = {E(uw) = value}

    For a nonzero value the eigenfunction is w on A and 0 elsewhere; for 0
    `kernel_dimension` gives the dimension of ker T.
    """
    value: complex
    atoms: List[int]
    points: List[int]
    residual: float = 0.0
    kernel_dimension: int = 0

    def to_dict(self) -> Dict:
        data = {"lambda": complex_to_json(self.value), "atoms": self.atoms, "points": self.points}
        if self.value == 0:
            data["kernelDimension"] = self.kernel_dimension
        else:
            data["residual"] = self.residual
        return data


@dataclass
class IsolatedPointReport:
    condition_holds: bool
    spectrum: List[complex]
    point_spectrum: List[complex]
    ess_range: List[complex]
    isolated: bool = True
    note: str = APPROXIMATE_POINT_NOTE


@dataclass
class SpectrumReport:
    eigenvalues: List[complex]
    ess_range: List[complex]
    point_spectrum: List[PointSpectrumEntry] = field(default_factory=list)
    joint_point_spectrum: List[complex] = field(default_factory=list)
    spectral_radius: float = 0.0
    norm: float = 0.0
    aluthge_norms: List[float] = field(default_factory=list)
    adjoint_conjugate: bool = True
    fixed_point: Optional[bool] = None
    fingerprint: str = ""
    tol: float = oracle.PSD_TOL
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict:
        return {
            "fingerprint": self.fingerprint,
            "tol": self.tol,
            "eigenvalues": [complex_to_json(z) for z in self.eigenvalues],
            "essRange": [complex_to_json(z) for z in self.ess_range],
            "pointSpectrum": [entry.to_dict() for entry in self.point_spectrum],
            "jointPointSpectrum": [complex_to_json(z) for z in self.joint_point_spectrum],
            "approximatePointSpectrum": APPROXIMATE_POINT_NOTE,
            "radius": self.spectral_radius,
            "norm": self.norm,
            "aluthgeNorms": list(self.aluthge_norms),
            "adjointConjugate": bool(self.adjoint_conjugate),
            "fixedPoint": self.fixed_point,
            "violations": list(self.violations),
            "passed": self.passed,
        }


def _ordered(values) -> List[complex]:
    return sorted((complex(z) for z in values), key=lambda z: (-abs(z), z.real, z.imag))


def match_multisets(a: Sequence[complex], b: Sequence[complex], tol: float) -> Tuple[bool, float]:
    """
    Greedy matching of two multisets of complex numbers

    Each value of `a`, largest first, takes the nearest unused value of `b`.

    Returns:
        Tuple of (every pair within tol and sizes equal, worst pair distance)
    """
    if len(a) != len(b):
        return False, float("inf")
    remaining = list(b)
    worst = 0.0
    for z in _ordered(a):
        distances = [abs(z - y) for y in remaining]
        j = int(np.argmin(distances))
        worst = max(worst, distances[j])
        remaining.pop(j)
    return worst <= tol, worst


def _group_values(values: np.ndarray, tol: float) -> List[Tuple[complex, List[int]]]:
    """Group indices whose values agree within tol * (1 + |value|), in first-seen order"""
    groups: List[Tuple[complex, List[int]]] = []
    for i, z in enumerate(values):
        for center, members in groups:
            if abs(z - center) <= tol * (1.0 + abs(center)):
                members.append(i)
                break
        else:
            groups.append((complex(z), [i]))
    return groups


def _zero_tol(T: WeightedCondOp) -> float:
    return MULTISET_TOL * (1.0 + float(np.max(np.sqrt(T.eu2 * T.ew2))))


def ess_range(T: WeightedCondOp, tol: float = MULTISET_TOL) -> List[complex]:
    """Distinct atom values of E(uw)"""
    return _ordered(center for center, _ in _group_values(T.per_atom(T.euw), tol))


def spectral_radius(T: WeightedCondOp) -> float:
    """max over atoms of |E(uw)|"""
    return float(np.max(np.abs(T.euw)))


def spectrum(T: WeightedCondOp, tol: float = oracle.PSD_TOL) -> SpectrumReport:
    """
    Dense eigenvalues of T checked against the atom values of E(uw)

    The eigenvalues, padded atom values (one per atom plus n - atoms zeros)
    and the conjugated eigenvalues of T* must agree as multisets.
    """
    A = assemble_matrix(T)
    eigenvalues = _ordered(linalg.eigvals(A))
    norm = oracle.op_norm(A, T.space)
    report = SpectrumReport(
        eigenvalues=eigenvalues,
        ess_range=ess_range(T),
        spectral_radius=spectral_radius(T),
        norm=norm,
        fingerprint=fingerprint(T),
        tol=tol,
    )
    match_tol = MULTISET_TOL * (1.0 + norm)

    expected = list(T.per_atom(T.euw)) + [0j] * (T.n - T.part.count)
    ok, worst = match_multisets(eigenvalues, expected, match_tol)
    if not ok:
        report.violations.append(
            f"eigenvalues differ from the atom values of E(uw) (worst distance {worst:.3e})"
        )

    adjoint_eigs = np.conj(linalg.eigvals(oracle.weighted_adjoint(A, T.space)))
    report.adjoint_conjugate, worst = match_multisets(eigenvalues, adjoint_eigs, match_tol)
    if not report.adjoint_conjugate:
        report.violations.append(f"spectrum of T is not the conjugate spectrum of T* ({worst:.3e})")

    dense_radius = abs(eigenvalues[0]) if eigenvalues else 0.0
    if abs(dense_radius - report.spectral_radius) > match_tol:
        report.violations.append(
            f"max |eigenvalue| {dense_radius:.6g} differs from max |E(uw)| {report.spectral_radius:.6g}"
        )
    if report.spectral_radius > norm * (1.0 + tol) + tol:
        report.violations.append(f"spectral radius exceeds the norm {norm:.6g}")
    return report


def point_spectrum(T: WeightedCondOp, tol: float = oracle.PSD_TOL) -> List[PointSpectrumEntry]:
    """
    Eigenvalues grouped by the level sets of E(uw)

    Every nonzero value is confirmed by its eigenfunction w on A (relative
    residual at most tol) and by a vanishing singular value of T - value.
    Zero enters when ker T is nontrivial.

    Raises:
        InvariantViolation: an eigenfunction or the eigensolver disagrees
    """
    A = assemble_matrix(T)
    B = oracle.to_euclidean(A, T.space)
    norm = oracle.op_norm(A, T.space)
    zero_tol = _zero_tol(T)
    entries = []
    zero_atoms: List[int] = []

    for value, atoms in _group_values(T.per_atom(T.euw), MULTISET_TOL):
        points = sorted(p for k in atoms for p in T.part.atoms[k])
        if abs(value) <= zero_tol:
            zero_atoms.extend(atoms)
            continue
        f = T.w * indicator(T.n, points)
        image = A @ f
        residual = float(np.linalg.norm(image - value * f) / max(np.linalg.norm(f), 1e-300))
        if residual > tol * (1.0 + norm):
            raise InvariantViolation(f"w on A fails as eigenfunction for {value:.6g}", margin=residual)
        smallest = float(linalg.svdvals(B - value * np.eye(T.n))[-1])
        if smallest > MULTISET_TOL * (1.0 + norm):
            raise InvariantViolation(f"T - {value:.6g} is injective", margin=smallest)
        entries.append(PointSpectrumEntry(value, sorted(atoms), points, residual=residual))

    kernel_dimension = oracle.kernel_basis(A, T.space).shape[1]
    if kernel_dimension:
        points = sorted(p for k in zero_atoms for p in T.part.atoms[k])
        entries.append(
            PointSpectrumEntry(0j, sorted(zero_atoms), points, kernel_dimension=kernel_dimension)
        )
    return sorted(entries, key=lambda e: (-abs(e.value), e.value.real, e.value.imag))


def _weak_condition(T: WeightedCondOp, tol: float) -> bool:
    """Hoelder equality |E(uw)| = (E|u|^2 E|w|^2)^1/2 on S"""
    return weak_criteria(T, tol)[0].verdict is not Verdict.FAILS


def joint_point_spectrum(T: WeightedCondOp, tol: float = oracle.PSD_TOL) -> List[complex]:
    """
    Eigenvalues with a common eigenvector of T (for z) and T* (for conj z)

    Candidates are the point spectrum values; z is kept when the stacked
    operator [T - z; T* - conj z] has a vanishing singular value.

    Raises:
        InvariantViolation: the weak condition holds but the nonzero joint and
            point spectra differ
    """
    A = assemble_matrix(T)
    B = oracle.to_euclidean(A, T.space)
    norm = oracle.op_norm(A, T.space)
    identity = np.eye(T.n)
    candidates = [entry.value for entry in point_spectrum(T, tol)]

    joint = []
    for z in candidates:
        stacked = np.vstack([B - z * identity, B.conj().T - np.conj(z) * identity])
        if float(linalg.svdvals(stacked)[-1]) <= MULTISET_TOL * (1.0 + norm):
            joint.append(z)

    if _weak_condition(T, tol):
        nonzero_joint = [z for z in joint if z != 0]
        nonzero_point = [z for z in candidates if z != 0]
        if len(nonzero_joint) != len(nonzero_point):
            raise InvariantViolation(
                "joint point spectrum misses nonzero eigenvalues although |E(uw)|^2 = E|u|^2 E|w|^2 on S",
                margin=float(len(nonzero_point) - len(nonzero_joint)),
            )
    return joint


def iterated_aluthge(T: WeightedCondOp, n: int) -> np.ndarray:
    """Oracle Aluthge transform applied n times to the matrix of T"""
    if n < 1:
        raise ValueError("n must be at least 1")
    A = assemble_matrix(T)
    for _ in range(n):
        A = oracle.aluthge(A, T.space)
    return A


def aluthge_norms(T: WeightedCondOp, depth: int = DEFAULT_DEPTH) -> List[float]:
    """|Delta_k(T)| for k = 1..depth"""
    if depth < 1:
        raise ValueError("depth must be at least 1")
    norms = []
    A = assemble_matrix(T)
    for _ in range(depth):
        A = oracle.aluthge(A, T.space)
        norms.append(oracle.op_norm(A, T.space))
    return norms


def fixed_point_hypotheses(T: WeightedCondOp, tol: float = oracle.PSD_TOL) -> bool:
    """T weakly hyponormal with ker T contained in ker T*"""
    if not is_weakly_hyponormal(T, tol).oracle_verdict:
        return False
    A = assemble_matrix(T)
    return oracle.kernel_subset(A, oracle.weighted_adjoint(A, T.space), T.space, tol)


def aluthge_fixed_point_check(T: WeightedCondOp, tol: float = oracle.PSD_TOL) -> bool:
    """
    Whether T equals its Aluthge transform

    Raises:
        InvariantViolation: T is weakly hyponormal with ker T in ker T* but
            differs from its Aluthge transform by more than tol * (1 + |T|)
    """
    A = assemble_matrix(T)
    gap = oracle.op_norm(A - oracle.aluthge(A, T.space), T.space)
    bound = tol * (1.0 + oracle.op_norm(A, T.space))
    if fixed_point_hypotheses(T, tol):
        if gap > bound:
            raise InvariantViolation(
                "weakly hyponormal operator with ker T in ker T* is not its own Aluthge transform",
                margin=gap,
            )
        return True
    return gap <= bound


def isolated_point_check(T: WeightedCondOp, tol: float = oracle.PSD_TOL) -> IsolatedPointReport:
    """
    Every spectral value is isolated (finite dimension); under the weak
    condition each one is an eigenvalue and the nonzero spectrum equals the
    nonzero essential range of E(uw)

    Raises:
        InvariantViolation: one of those identities fails
    """
    report = spectrum(T, tol)
    points = [entry.value for entry in point_spectrum(T, tol)]
    distinct = [center for center, _ in _group_values(np.array(report.eigenvalues), MULTISET_TOL)]
    zero_tol = _zero_tol(T)
    result = IsolatedPointReport(
        condition_holds=_weak_condition(T, tol),
        spectrum=_ordered(distinct),
        point_spectrum=_ordered(points),
        ess_range=report.ess_range,
    )
    if not result.condition_holds:
        return result

    match_tol = MULTISET_TOL * (1.0 + report.norm)
    for z in distinct:
        if min((abs(z - p) for p in points), default=np.inf) > match_tol:
            raise InvariantViolation(f"isolated spectral value {z:.6g} is not an eigenvalue")

    nonzero_spectrum = [z for z in distinct if abs(z) > zero_tol]
    nonzero_range = [z for z in report.ess_range if abs(z) > zero_tol]
    ok, worst = match_multisets(nonzero_spectrum, nonzero_range, match_tol)
    if not ok:
        raise InvariantViolation(
            "nonzero spectrum differs from the nonzero essential range of E(uw)", margin=worst
        )
    return result


def spectrum_report(
    T: WeightedCondOp, tol: float = oracle.PSD_TOL, depth: int = DEFAULT_DEPTH
) -> SpectrumReport:
    """
    Full spectral report; raised invariant violations become report entries

    Besides the spectrum it checks r(T) = |Delta_k(T)| for k <= depth,
    |T^| = max |E(uw)|, the joint point spectrum, isolated points and the
    Aluthge fixed point.
    """
    report = spectrum(T, tol)
    radius_tol = MULTISET_TOL * (1.0 + report.norm)

    try:
        report.point_spectrum = point_spectrum(T, tol)
        report.joint_point_spectrum = joint_point_spectrum(T, tol)
        isolated_point_check(T, tol)
        report.fixed_point = aluthge_fixed_point_check(T, tol)
    except InvariantViolation as e:
        logger.warning("Spectral invariant failed: %s", e)
        report.violations.append(str(e))

    report.aluthge_norms = aluthge_norms(T, depth)
    for k, value in enumerate(report.aluthge_norms, start=1):
        if abs(value - report.spectral_radius) > radius_tol:
            report.violations.append(
                f"|Delta_{k}(T)| = {value:.6g} differs from r(T) = {report.spectral_radius:.6g}"
            )
    closed_norm = oracle.op_norm(aluthge_closed(T), T.space)
    if abs(closed_norm - report.spectral_radius) > radius_tol:
        report.violations.append(f"closed-form Aluthge norm {closed_norm:.6g} differs from r(T)")
    return report
