"""
Operator Instances
JSON reading and writing of weighted conditional operators, the seeded
random instance generator and the named scenario instances
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from wcond_modules.condops import WeightedCondOp
from wcond_modules.errors import InstanceError
from wcond_modules.space import FiniteMeasureSpace, MeasurableFn, Partition

logger = logging.getLogger(__name__)

# Share of random instances whose u or w vanishes on one atom
VANISH_FRACTION = 0.2
MASS_RANGE = (0.1, 1.0)
WEIGHT_RANGE = (-2.0, 2.0)


def _real_list(values, name: str, n: int) -> np.ndarray:
    if not isinstance(values, (list, tuple)):
        raise InstanceError(f"{name} must be a list of {n} numbers", field=name)
    if len(values) != n:
        raise InstanceError(f"{name} must have {n} values, got {len(values)}", field=name)
    try:
        array = np.array(values, dtype=float)
    except (TypeError, ValueError):
        raise InstanceError(f"{name} must contain only numbers", field=name)
    if not np.all(np.isfinite(array)):
        raise InstanceError(f"{name} must be finite", field=name)
    return array


def _complex_field(data: Mapping, name: str, n: int) -> MeasurableFn:
    """Read {"re": [...], "im": [...]} (im optional) or a plain list of reals"""
    if name not in data:
        raise InstanceError(f"{name} is required", field=name)
    value = data[name]
    if isinstance(value, Mapping):
        if "re" not in value:
            raise InstanceError(f"{name}.re is required", field=f"{name}.re")
        re = _real_list(value["re"], f"{name}.re", n)
        im = _real_list(value["im"], f"{name}.im", n) if value.get("im") is not None else np.zeros(n)
        return re + 1j * im
    return _real_list(value, name, n).astype(complex)


def parse_instance(data) -> WeightedCondOp:
    """
    Build an operator from instance JSON data

    Args:
        data: {"mass": [...], "atoms": [[...], ...], "u": {"re", "im"}, "w": {"re", "im"}}
            with optional "labels"

    Returns:
        WeightedCondOp

    Raises:
        InstanceError: naming the offending field
    """
    if not isinstance(data, Mapping):
        raise InstanceError("instance must be a JSON object")
    if "mass" not in data:
        raise InstanceError("mass is required", field="mass")
    space = FiniteMeasureSpace(data["mass"], labels=data.get("labels"))

    atoms = data.get("atoms")
    if not isinstance(atoms, (list, tuple)) or not all(isinstance(a, (list, tuple)) for a in atoms):
        raise InstanceError("atoms must be a list of index lists", field="atoms")
    part = Partition(tuple(tuple(a) for a in atoms), space.n)

    u = _complex_field(data, "u", space.n)
    w = _complex_field(data, "w", space.n)
    return WeightedCondOp(space, part, u, w)


def load_instance(path) -> WeightedCondOp:
    try:
        with open(path) as handle:
            data = json.load(handle)
    except OSError as e:
        raise InstanceError(f"cannot read {path}: {e.strerror}", field="path")
    except json.JSONDecodeError as e:
        raise InstanceError(f"invalid JSON in {path}: {e.msg} (line {e.lineno})")
    return parse_instance(data)


def complex_to_json(z) -> Dict[str, float]:
    z = complex(z)
    return {"re": float(z.real), "im": float(z.imag)}


def function_to_json(f) -> Dict[str, List[float]]:
    f = np.asarray(f, dtype=complex)
    return {"re": f.real.tolist(), "im": f.imag.tolist()}


def matrix_to_json(A) -> Dict:
    """Row-major {"rows", "cols", "re", "im"}"""
    A = np.asarray(A, dtype=complex)
    rows, cols = A.shape
    return {"rows": rows, "cols": cols, "re": A.real.ravel().tolist(), "im": A.imag.ravel().tolist()}


def instance_to_dict(T: WeightedCondOp) -> Dict:
    data = {
        "mass": T.space.mass.tolist(),
        "atoms": [list(atom) for atom in T.part.atoms],
        "u": function_to_json(T.u),
        "w": function_to_json(T.w),
    }
    if T.space.labels is not None:
        data["labels"] = list(T.space.labels)
    return data


def dump_instance(T: WeightedCondOp, path):
    with open(path, "w") as handle:
        json.dump(instance_to_dict(T), handle, indent=2)


def fingerprint(T: WeightedCondOp) -> str:
    """sha256 of the canonical instance JSON"""
    return hashlib.sha256(json.dumps(instance_to_dict(T), sort_keys=True).encode()).hexdigest()


def random_instance(
    rng: np.random.Generator, max_points: int = 12, max_atoms: int = 4
) -> WeightedCondOp:
    """
    Draw one random operator

    Point count is uniform in [2, max_points], atom count uniform in
    [1, min(points, max_atoms)] with a random surjective assignment. Masses
    are uniform in [0.1, 1]; real and imaginary parts of u and w are uniform
    in [-2, 2]. One instance in five has u or w vanish on a random atom.
    """
    n = int(rng.integers(2, max_points + 1))
    k = int(rng.integers(1, min(n, max_atoms) + 1))
    labels = np.concatenate([np.arange(k), rng.integers(0, k, size=n - k)])
    rng.shuffle(labels)

    mass = rng.uniform(*MASS_RANGE, size=n)
    u = rng.uniform(*WEIGHT_RANGE, size=n) + 1j * rng.uniform(*WEIGHT_RANGE, size=n)
    w = rng.uniform(*WEIGHT_RANGE, size=n) + 1j * rng.uniform(*WEIGHT_RANGE, size=n)

    if rng.random() < VANISH_FRACTION:
        atom = int(rng.integers(k))
        target = u if rng.random() < 0.5 else w
        target[labels == atom] = 0

    return WeightedCondOp(FiniteMeasureSpace(mass), Partition.from_labels(labels), u, w)


@dataclass
class Scenario:
    """
    A named instance with the oracle verdicts it must produce

    `known_violations` lists substrings of classification violations this
    instance is built to expose; they are expected, not failures.
    """
    name: str
    T: WeightedCondOp
    expected: Dict[str, bool] = field(default_factory=dict)
    known_violations: Tuple[str, ...] = ()
    fixed_point: bool = False
    description: str = ""


def two_atom_instance(u, w, mass=None) -> WeightedCondOp:
    """Four points split into atoms {0, 1} and {2, 3}, uniform mass 1/4 unless given"""
    space = FiniteMeasureSpace(mass if mass is not None else [0.25] * 4)
    return WeightedCondOp(space, Partition(((0, 1), (2, 3)), 4), u, w)


def canonical_instance() -> WeightedCondOp:
    """u = (1, 1, 2, 2), w = (1, 3, 1, 1) on the two-atom space"""
    return two_atom_instance([1, 1, 2, 2], [1, 3, 1, 1])


def scenario_instances() -> List[Scenario]:
    ones = [1, 1, 1, 1]
    proportional_w = np.array([1 + 1j, 2, 1, -1j])
    proportional_u = np.array([2, 2, 0.5, 0.5]) * np.conj(proportional_w)
    return [
        Scenario(
            "unit", two_atom_instance(ones, ones),
            expected={"normal": True, "hyponormal": True, "weakly_hyponormal": True, "normaloid": True},
            fixed_point=True,
            description="T = E",
        ),
        Scenario(
            "canonical", canonical_instance(),
            expected={"normal": False, "hyponormal": False, "weakly_hyponormal": False, "normaloid": False},
        ),
        Scenario(
            "expectation_times_measurable_u", two_atom_instance([5, 5, 2, 2], ones),
            expected={"normal": True, "hyponormal": True},
            description="E M_u with u constant on atoms",
        ),
        Scenario(
            "expectation_times_nonmeasurable_u", two_atom_instance([1, 2, 1, 2], ones),
            expected={"normal": False, "hyponormal": False, "weakly_hyponormal": False},
            description="E M_u with u not constant on atoms",
        ),
        Scenario(
            "measurable_w_times_expectation", two_atom_instance(ones, [2, 2, 3, 3]),
            expected={"normal": True, "weakly_hyponormal": True},
            fixed_point=True,
            description="M_w E with w constant on atoms",
        ),
        Scenario(
            "nonmeasurable_w_times_expectation", two_atom_instance(ones, [1, 3, 1, 2]),
            expected={"weakly_hyponormal": False},
            description="M_w E with w not constant on atoms",
        ),
        Scenario(
            "proportional_weights", two_atom_instance(proportional_u, proportional_w),
            expected={"normal": True, "p_quasihyponormal": True, "weakly_hyponormal": True},
            fixed_point=True,
            description="u = c conj(w) on every atom",
        ),
        Scenario(
            "vanishing_atom", two_atom_instance([1, 1, 0, 0], ones),
            expected={"normal": True},
            description="u vanishes on the second atom",
        ),
        Scenario(
            "dominant_weights_counterexample",
            WeightedCondOp(FiniteMeasureSpace([0.5, 0.5]), Partition.trivial(2), [1, 1], [-1, 1]),
            expected={"normal": False, "hyponormal": False},
            known_violations=("sufficient criterion dominant_weights holds",),
            description="u sqrt(E|w|^2) - sqrt(E|u|^2) conj(w) >= 0 yet T*T - TT* is indefinite",
        ),
    ]


def scenario(name: str) -> Optional[Scenario]:
    for s in scenario_instances():
        if s.name == name:
            return s
    return None
