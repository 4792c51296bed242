"""
Dense Matrix Oracle
Definition-level eigen, SVD, polar and fractional-power computations for
operators on L2 of a finite measure space

Every routine works in the mass-weighted inner product
<f, g> = sum f(x) conj(g(x)) mass(x). With D = diag(sqrt(mass)), an operator
matrix A corresponds to the Euclidean matrix D A D^-1; adjoints, PSD tests,
SVDs and norms are computed there and mapped back.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

from wcond_modules.errors import NotPositiveSemidefinite
from wcond_modules.space import FiniteMeasureSpace, Partition

logger = logging.getLogger(__name__)

# Type definitions
ComplexMatrix = np.ndarray  # square complex matrix acting on function values

# Singular values at or below RANK_RCOND * largest define the kernel
RANK_RCOND = 1e-10
# Eigenvalues at or below POWER_RCOND * largest are treated as zero before powers
POWER_RCOND = 1e-12
PSD_TOL = 1e-8


class HermitianEig(NamedTuple):
    """Ascending eigenvalues and mass-orthonormal eigenvectors (columns)"""
    values: np.ndarray
    vectors: ComplexMatrix


class PolarFactors(NamedTuple):
    """A = isometry @ modulus with kernel(isometry) = kernel(modulus)"""
    isometry: ComplexMatrix
    modulus: ComplexMatrix


def _require_square(A: ComplexMatrix, space: Optional[FiniteMeasureSpace] = None):
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if space is not None and A.shape[0] != space.n:
        raise ValueError(f"shape mismatch: matrix is {A.shape[0]}x{A.shape[1]}, space has {space.n} points")


def to_euclidean(A: ComplexMatrix, space: FiniteMeasureSpace) -> ComplexMatrix:
    """D A D^-1, the plain-Euclidean form of A"""
    _require_square(A, space)
    d = np.sqrt(space.mass)
    return d[:, None] * A / d[None, :]


def from_euclidean(B: ComplexMatrix, space: FiniteMeasureSpace) -> ComplexMatrix:
    """D^-1 B D, inverse of `to_euclidean`"""
    _require_square(B, space)
    d = np.sqrt(space.mass)
    return B * d[None, :] / d[:, None]


def weighted_inner(f: np.ndarray, g: np.ndarray, space: FiniteMeasureSpace) -> complex:
    return complex(np.sum(f * np.conj(g) * space.mass))


def weighted_adjoint(A: ComplexMatrix, space: FiniteMeasureSpace) -> ComplexMatrix:
    """
    Adjoint of A in the mass-weighted inner product

    Returns:
        A* with <A f, g> = <f, A* g> for all f, g
    """
    return from_euclidean(to_euclidean(np.asarray(A, dtype=complex), space).conj().T, space)


def _hermitian_part(B: ComplexMatrix) -> ComplexMatrix:
    return (B + B.conj().T) / 2


def hermitian_eig(A: ComplexMatrix, space: FiniteMeasureSpace) -> HermitianEig:
    """Eigen-decomposition of an operator that is self-adjoint in the weighted product"""
    B = to_euclidean(np.asarray(A, dtype=complex), space)
    values, vectors = linalg.eigh(_hermitian_part(B))
    return HermitianEig(values, vectors / np.sqrt(space.mass)[:, None])


def op_norm(A: ComplexMatrix, space: FiniteMeasureSpace) -> float:
    """Largest singular value in the weighted inner product"""
    B = to_euclidean(np.asarray(A, dtype=complex), space)
    if B.size == 0:
        return 0.0
    return float(linalg.svdvals(B)[0])


def psd_margin(A: ComplexMatrix, space: FiniteMeasureSpace, scale: Optional[float] = None) -> float:
    """
    Smallest eigenvalue of the self-adjoint part of A relative to 1 + scale

    Args:
        A: Operator matrix
        space: Measure space
        scale: Magnitude the eigenvalues are judged against (default: max |eigenvalue|)

    Returns:
        min eigenvalue / (1 + scale); negative means A is not PSD at that scale
    """
    B = to_euclidean(np.asarray(A, dtype=complex), space)
    values = linalg.eigvalsh(_hermitian_part(B))
    if scale is None:
        scale = float(np.max(np.abs(values)))
    return float(values[0]) / (1.0 + scale)


def is_psd(
    A: ComplexMatrix, space: FiniteMeasureSpace, tol: float = PSD_TOL, scale: Optional[float] = None
) -> bool:
    """
    Check positive semidefiniteness in the weighted inner product

    A is accepted if it is self-adjoint within tol * (1 + scale) and its
    smallest eigenvalue is at least -tol * (1 + scale). Differences X - Y
    should pass scale = max(|X|, |Y|) so noise is judged against the operands.
    """
    B = to_euclidean(np.asarray(A, dtype=complex), space)
    if scale is None:
        scale = float(np.max(np.abs(linalg.eigvalsh(_hermitian_part(B)))))
    if np.linalg.norm(B - B.conj().T, 2) > tol * (1.0 + scale):
        return False
    return psd_margin(A, space, scale) >= -tol


def frac_power_psd(
    A: ComplexMatrix,
    space: FiniteMeasureSpace,
    p: float,
    tol: float = PSD_TOL,
    rcond: float = POWER_RCOND,
) -> ComplexMatrix:
    """
    Spectral power A^p of a PSD operator

    Eigenvalues at or below rcond * largest (negative noise included) are
    set to zero before raising to p.

    Raises:
        ValueError: p is not positive
        NotPositiveSemidefinite: A fails `is_psd`
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if not is_psd(A, space, tol):
        raise NotPositiveSemidefinite(f"cannot raise a non-PSD operator to the power {p}")

    B = to_euclidean(np.asarray(A, dtype=complex), space)
    values, vectors = linalg.eigh(_hermitian_part(B))
    top = max(float(values[-1]), 0.0)
    values = np.where(values > rcond * top, values, 0.0)
    powered = (vectors * values ** p) @ vectors.conj().T
    return from_euclidean(powered, space)


def polar(A: ComplexMatrix, space: FiniteMeasureSpace, tol: float = RANK_RCOND) -> PolarFactors:
    """
    Polar decomposition A = U |A| with the kernel condition

    Singular values at or below tol * largest are treated as kernel, so U is
    a partial isometry with kernel(U) = kernel(|A|).
    """
    B = to_euclidean(np.asarray(A, dtype=complex), space)
    W, s, Vh = linalg.svd(B)
    keep = s > tol * s[0] if s.size and s[0] > 0 else np.zeros(s.shape, dtype=bool)

    modulus = (Vh[keep].conj().T * s[keep]) @ Vh[keep]
    isometry = W[:, keep] @ Vh[keep]
    return PolarFactors(from_euclidean(isometry, space), from_euclidean(modulus, space))


def aluthge(A: ComplexMatrix, space: FiniteMeasureSpace) -> ComplexMatrix:
    """Aluthge transform |A|^1/2 U |A|^1/2 built from `polar`"""
    factors = polar(A, space)
    root = frac_power_psd(factors.modulus, space, 0.5)
    return root @ factors.isometry @ root


def kernel_basis(A: ComplexMatrix, space: FiniteMeasureSpace, tol: float = RANK_RCOND) -> ComplexMatrix:
    """Columns spanning kernel(A), orthonormal in the weighted inner product"""
    B = to_euclidean(np.asarray(A, dtype=complex), space)
    _, s, Vh = linalg.svd(B)
    rank = int(np.sum(s > tol * s[0])) if s.size and s[0] > 0 else 0
    return Vh[rank:].conj().T / np.sqrt(space.mass)[:, None]


def kernel_subset(
    A: ComplexMatrix, B: ComplexMatrix, space: FiniteMeasureSpace, tol: float = PSD_TOL
) -> bool:
    """True iff every kernel vector of A is annihilated by B within tol * (1 + |B|)"""
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    basis = kernel_basis(A, space)
    if basis.shape[1] == 0:
        return True
    image = to_euclidean(B, space) @ (basis * np.sqrt(space.mass)[:, None])
    return bool(np.linalg.norm(image, 2) <= tol * (1.0 + op_norm(B, space)))


def matrix_power(A: ComplexMatrix, n: int) -> ComplexMatrix:
    """A composed with itself n times"""
    if n < 1:
        raise ValueError("n must be at least 1")
    _require_square(A)
    return np.linalg.matrix_power(A, n)


def atom_block(A: ComplexMatrix, indices: np.ndarray) -> ComplexMatrix:
    """Diagonal block of A on the given points"""
    return A[np.ix_(indices, indices)]


def off_atom_norm(A: ComplexMatrix, part: Partition) -> float:
    """Largest entry of A linking two different atoms (zero for block-diagonal A)"""
    mask = part.atom_of[:, None] != part.atom_of[None, :]
    return float(np.max(np.abs(A[mask]))) if mask.any() else 0.0


def hermitian_defect(A: ComplexMatrix, space: FiniteMeasureSpace) -> float:
    """Norm of the skew-adjoint part of A (zero for self-adjoint A)"""
    B = to_euclidean(np.asarray(A, dtype=complex), space)
    return float(np.linalg.norm(B - B.conj().T, 2)) / 2 if B.size else 0.0


def min_eigenvalue(A: ComplexMatrix, space: FiniteMeasureSpace) -> float:
    """Smallest eigenvalue of the self-adjoint part of A"""
    return float(hermitian_eig(A, space).values[0])
