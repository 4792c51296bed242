"""
Finite Measure Spaces for the Weighted Conditional Operator Toolkit
Point masses, sigma-subalgebras given as partitions into atoms, and the
conditional expectation E realized as a mass-weighted block average
"""
import logging
import operator
from dataclasses import dataclass, field
from functools import cached_property
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from wcond_modules.errors import InstanceError

logger = logging.getLogger(__name__)

# Type definitions
MeasurableFn = np.ndarray  # complex values, one per point
IndexSet = FrozenSet[int]  # set of point indices

# Absolute threshold separating "nonzero" from floating-point zero
SUPPORT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FiniteMeasureSpace:
    """
    Points 0..n-1 carrying strictly positive masses

    Null sets are quotiented out at construction time: a zero mass is
    rejected, so every comparison "up to a null set" becomes exact.
    """
    mass: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        try:
            mass = np.array(self.mass, dtype=float)
        except (TypeError, ValueError):
            raise InstanceError("mass must be a list of numbers", field="mass")
        if mass.ndim != 1 or mass.size < 1:
            raise InstanceError("mass must be a nonempty list of numbers", field="mass")
        if not np.all(np.isfinite(mass)):
            raise InstanceError("mass must be finite", field="mass")
        if np.any(mass <= 0):
            raise InstanceError("mass must be positive", field="mass")
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

        if self.labels is not None:
            if len(self.labels) != mass.size:
                raise InstanceError("labels must name every point", field="labels")
            object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))

    @property
    def n(self) -> int:
        return int(self.mass.size)

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    def restrict(self, indices: Sequence[int]) -> "FiniteMeasureSpace":
        """Measure space made of the given points only (e.g. one atom)"""
        return FiniteMeasureSpace(self.mass[np.asarray(indices, dtype=int)])

    @classmethod
    def uniform(cls, n: int) -> "FiniteMeasureSpace":
        return cls(np.full(n, 1.0 / n))


@dataclass(frozen=True, eq=False)
class Partition:
    """
    Disjoint nonempty atoms covering every point of an n-point space

    The atoms generate the sigma-subalgebra; `atom_of[x]` is the atom
    containing point x.
    """
    atoms: Tuple[Tuple[int, ...], ...]
    n: int
    atom_of: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        atom_of = np.full(self.n, -1, dtype=int)
        atoms = []
        for k, atom in enumerate(self.atoms):
            members = []
            for point in atom:
                try:
                    i = operator.index(point)
                except TypeError:
                    raise InstanceError(f"atom {k} contains a non-integer point {point!r}", field="atoms")
                if not 0 <= i < self.n:
                    raise InstanceError(
                        f"atom {k} names point {i} outside 0..{self.n - 1}", field="atoms"
                    )
                if atom_of[i] != -1:
                    raise InstanceError(
                        f"atoms must be pairwise disjoint (point {i} appears twice)", field="atoms"
                    )
                atom_of[i] = k
                members.append(i)
            if not members:
                raise InstanceError(f"atoms must be nonempty (atom {k} is empty)", field="atoms")
            atoms.append(tuple(members))

        missing = np.flatnonzero(atom_of < 0)
        if missing.size:
            raise InstanceError(
                f"atoms must cover every point (missing {missing.tolist()})", field="atoms"
            )

        atom_of.setflags(write=False)
        object.__setattr__(self, "atoms", tuple(atoms))
        object.__setattr__(self, "atom_of", atom_of)

    @property
    def count(self) -> int:
        return len(self.atoms)

    @cached_property
    def first_points(self) -> np.ndarray:
        """One representative point per atom, used to read atom values"""
        return np.array([atom[0] for atom in self.atoms], dtype=int)

    @cached_property
    def index_arrays(self) -> List[np.ndarray]:
        return [np.array(atom, dtype=int) for atom in self.atoms]

    @classmethod
    def from_labels(cls, labels: Iterable[int]) -> "Partition":
        """Build a partition from an atom label per point (labels 0..k-1, all used)"""
        labels = np.asarray(list(labels), dtype=int)
        count = int(labels.max()) + 1 if labels.size else 0
        atoms = tuple(tuple(np.flatnonzero(labels == k).tolist()) for k in range(count))
        return cls(atoms, int(labels.size))

    @classmethod
    def trivial(cls, n: int) -> "Partition":
        return cls((tuple(range(n)),), n)


def as_function(values, n: Optional[int] = None, name: str = "f") -> MeasurableFn:
    """Embed real or complex values as a complex measurable function"""
    f = np.array(values, dtype=complex)
    if f.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if n is not None and f.size != n:
        raise ValueError(f"shape mismatch: {name} has {f.size} values, space has {n} points")
    return f


def _require_shapes(space: FiniteMeasureSpace, part: Partition):
    if part.n != space.n:
        raise ValueError(f"shape mismatch: partition covers {part.n} points, space has {space.n}")


def atom_masses(space: FiniteMeasureSpace, part: Partition) -> np.ndarray:
    """Measure of every atom"""
    _require_shapes(space, part)
    return np.bincount(part.atom_of, weights=space.mass, minlength=part.count)


def atom_means(space: FiniteMeasureSpace, part: Partition, f) -> np.ndarray:
    """
    Mass-weighted mean of f over every atom

    Args:
        space: Measure space
        part: Partition into atoms
        f: Function values, one per point

    Returns:
        Complex array with one value per atom
    """
    _require_shapes(space, part)
    f = as_function(f, space.n)
    weighted = f * space.mass
    totals = (
        np.bincount(part.atom_of, weights=weighted.real, minlength=part.count)
        + 1j * np.bincount(part.atom_of, weights=weighted.imag, minlength=part.count)
    )
    return totals / atom_masses(space, part)


def cond_expect(space: FiniteMeasureSpace, part: Partition, f) -> MeasurableFn:
    """
    Conditional expectation of f given the atoms

    On each atom B the result is constant and equals
    sum_{x in B} f(x) mass(x) / mass(B).
    """
    return atom_means(space, part, f)[part.atom_of]


def expectation_matrix(space: FiniteMeasureSpace, part: Partition) -> np.ndarray:
    """Matrix of E acting on function values: E[i, j] = mass(j) / mass(atom) within an atom"""
    same_atom = part.atom_of[:, None] == part.atom_of[None, :]
    denominators = atom_masses(space, part)[part.atom_of]
    return np.where(same_atom, space.mass[None, :] / denominators[:, None], 0.0).astype(complex)


def support(f, tol: float = SUPPORT_TOL) -> IndexSet:
    """Indices where |f(x)| > tol"""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    f = as_function(f)
    return frozenset(np.flatnonzero(np.abs(f) > tol).tolist())


def support_mask(f, tol: float = SUPPORT_TOL) -> np.ndarray:
    """Boolean version of `support`"""
    return np.abs(as_function(f)) > tol


def is_measurable_wrt(f, part: Partition, tol: float = SUPPORT_TOL) -> bool:
    """
    Check whether f is constant on every atom

    Args:
        f: Function values
        part: Partition into atoms
        tol: Largest tolerated deviation from the atom mean

    Returns:
        True if f deviates from its atom mean by at most tol everywhere
    """
    f = as_function(f, part.n)
    counts = np.bincount(part.atom_of, minlength=part.count)
    means = (
        np.bincount(part.atom_of, weights=f.real, minlength=part.count)
        + 1j * np.bincount(part.atom_of, weights=f.imag, minlength=part.count)
    ) / counts
    return bool(np.max(np.abs(f - means[part.atom_of])) <= tol)


def indicator(n: int, indices: Iterable[int]) -> MeasurableFn:
    chi = np.zeros(n, dtype=complex)
    chi[list(indices)] = 1.0
    return chi


def build_unit_square_instance(
    grid: int,
) -> Tuple[FiniteMeasureSpace, Partition, MeasurableFn, MeasurableFn]:
    """
    Midpoint discretization of the unit square with vertical-strip atoms

    The square is cut into grid x grid cells of mass 1/grid^2. Point
    i * grid + j is the midpoint (x_i, y_j) of cell (i, j); atom i is the
    strip {x_i} x [0, 1]. The weights are u(x, y) = y^(x/8) and
    w(x, y) = sqrt((4 + x) y).

    Args:
        grid: Number of cells per side

    Returns:
        Tuple of (space, partition, u, w)
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")

    centers = (np.arange(grid) + 0.5) / grid
    x = np.repeat(centers, grid)
    y = np.tile(centers, grid)

    space = FiniteMeasureSpace.uniform(grid * grid)
    part = Partition(
        tuple(tuple(range(i * grid, (i + 1) * grid)) for i in range(grid)), grid * grid
    )
    u = as_function(y ** (x / 8.0))
    w = as_function(np.sqrt((4.0 + x) * y))

    logger.debug("Built unit-square instance with %d strips", grid)
    return space, part, u, w


def strip_midpoints(grid: int) -> np.ndarray:
    """x-coordinate of every strip of `build_unit_square_instance(grid)`"""
    return (np.arange(grid) + 0.5) / grid
