"""
Weighted Conditional Expectation Operators
The operator T = M_w E M_u and its closed-form powers, polar factors and
Aluthge transform, each expressed through the conditional statistics
E(|u|^2), E(|w|^2) and E(uw)
"""
import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from wcond_modules.errors import InvariantViolation
from wcond_modules.oracle import ComplexMatrix, PolarFactors
from wcond_modules.space import (
    FiniteMeasureSpace,
    IndexSet,
    MeasurableFn,
    Partition,
    as_function,
    atom_means,
    cond_expect,
    expectation_matrix,
    support,
    support_mask,
)

logger = logging.getLogger(__name__)

Side = Literal["left", "right"]  # left: (T*T)^p, right: (TT*)^p

# Relative slack for the conditional Hoelder guard |E(uw)|^2 <= E|u|^2 E|w|^2
HOLDER_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightedCondOp:
    """
    T f = w E(u f) on a finite measure space

    The conditional statistics eu2 = E(|u|^2), ew2 = E(|w|^2), euw = E(uw)
    and the supports S = S(eu2), G = S(ew2) are computed once here.
    """
    space: FiniteMeasureSpace
    part: Partition
    u: MeasurableFn
    w: MeasurableFn
    eu2: np.ndarray = field(init=False, repr=False)
    ew2: np.ndarray = field(init=False, repr=False)
    euw: np.ndarray = field(init=False, repr=False)
    s_mask: np.ndarray = field(init=False, repr=False)
    g_mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.part.n != self.space.n:
            raise ValueError(
                f"shape mismatch: partition covers {self.part.n} points, space has {self.space.n}"
            )
        u = as_function(self.u, self.space.n, name="u")
        w = as_function(self.w, self.space.n, name="w")

        eu2 = cond_expect(self.space, self.part, np.abs(u) ** 2).real
        ew2 = cond_expect(self.space, self.part, np.abs(w) ** 2).real
        euw = cond_expect(self.space, self.part, u * w)

        for name, value in (("u", u), ("w", w), ("eu2", eu2), ("ew2", ew2), ("euw", euw)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "s_mask", support_mask(eu2))
        object.__setattr__(self, "g_mask", support_mask(ew2))

        excess = np.abs(euw) ** 2 - eu2 * ew2
        bound = HOLDER_TOL * (1.0 + eu2 * ew2)
        if np.any(excess > bound):
            worst = int(np.argmax(excess - bound))
            raise InvariantViolation(
                f"conditional Hoelder inequality fails at point {worst}", margin=float(excess[worst])
            )

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def S(self) -> IndexSet:
        return support(self.eu2)

    @property
    def G(self) -> IndexSet:
        return support(self.ew2)

    def per_atom(self, values: np.ndarray) -> np.ndarray:
        """Read an atom-constant function once per atom"""
        return np.asarray(values)[self.part.first_points]

    def mean_u(self) -> np.ndarray:
        """E(u) per atom"""
        return atom_means(self.space, self.part, self.u)

    def mean_w(self) -> np.ndarray:
        """E(w) per atom"""
        return atom_means(self.space, self.part, self.w)


def adjoint_operator(T: WeightedCondOp) -> WeightedCondOp:
    """T* = M_conj(u) E M_conj(w), again a weighted conditional operator"""
    return WeightedCondOp(T.space, T.part, u=np.conj(T.w), w=np.conj(T.u))


def apply(T: WeightedCondOp, f) -> MeasurableFn:
    """w E(u f)"""
    f = as_function(f, T.n)
    return T.w * cond_expect(T.space, T.part, T.u * f)


def _closed_matrix(T: WeightedCondOp, left: np.ndarray, right: np.ndarray) -> ComplexMatrix:
    """Matrix of M_left E M_right"""
    return left[:, None] * expectation_matrix(T.space, T.part) * right[None, :]


def factor_matrices(T: WeightedCondOp):
    """The three factors M_w, E, M_u as matrices"""
    return np.diag(T.w), expectation_matrix(T.space, T.part), np.diag(T.u)


def assemble_matrix(T: WeightedCondOp) -> ComplexMatrix:
    """Matrix whose column j is apply(T, indicator of point j)"""
    return _closed_matrix(T, T.w, T.u)


def norm_formula(T: WeightedCondOp) -> float:
    """Largest atom value of E(|w|^2)^1/2 E(|u|^2)^1/2"""
    return float(np.max(np.sqrt(T.eu2 * T.ew2)))


def _masked_power(values: np.ndarray, exponent: float, mask: np.ndarray) -> np.ndarray:
    """values ** exponent on mask, 0 elsewhere (never evaluates 0 ** negative)"""
    out = np.zeros(values.shape, dtype=float)
    out[mask] = values[mask] ** exponent
    return out


def self_product_power_closed(T: WeightedCondOp, p: float, side: Side = "left") -> ComplexMatrix:
    """
    Closed form of (T*T)^p or (TT*)^p

    Args:
        T: Operator
        p: Positive exponent
        side: "left" for (T*T)^p, "right" for (TT*)^p

    Returns:
        Matrix of M_{conj(u) eu2^(p-1) chi_S ew2^p} E M_u (left) or
        M_{w ew2^(p-1) chi_G eu2^p} E M_{conj(w)} (right)
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if side == "left":
        coefficient = np.conj(T.u) * _masked_power(T.eu2, p - 1.0, T.s_mask) * T.ew2 ** p
        return _closed_matrix(T, coefficient, T.u)
    if side == "right":
        coefficient = T.w * _masked_power(T.ew2, p - 1.0, T.g_mask) * T.eu2 ** p
        return _closed_matrix(T, coefficient, np.conj(T.w))
    raise ValueError("`side` must be either 'left' or 'right'")


def quasi_product_closed(T: WeightedCondOp, p: float, side: Side = "left") -> ComplexMatrix:
    """
    Closed form of T*(T*T)^p T (left) or T*(TT*)^p T (right)

    Both are multiples of M_conj(u) E M_u: the left one by
    eu2^(p-1) chi_S ew2^p |E(uw)|^2, the right one by chi_G ew2^(p+1) eu2^p.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    if side == "left":
        factor = _masked_power(T.eu2, p - 1.0, T.s_mask) * T.ew2 ** p * np.abs(T.euw) ** 2
    elif side == "right":
        factor = np.where(T.g_mask, T.ew2 ** (p + 1.0), 0.0) * T.eu2 ** p
    else:
        raise ValueError("`side` must be either 'left' or 'right'")
    return _closed_matrix(T, np.conj(T.u) * factor, T.u)


def polar_closed(T: WeightedCondOp) -> PolarFactors:
    """
    Closed-form polar factors of T

    |T| f = (ew2 / eu2)^1/2 chi_S conj(u) E(u f)
    U f = (chi_{S and G} / (ew2 eu2))^1/2 w E(u f)

    The ratio is only evaluated on S, the reciprocal only on S and G.
    """
    ratio = np.zeros(T.n, dtype=float)
    ratio[T.s_mask] = np.sqrt(T.ew2[T.s_mask] / T.eu2[T.s_mask])
    both = T.s_mask & T.g_mask
    reciprocal = np.zeros(T.n, dtype=float)
    reciprocal[both] = 1.0 / np.sqrt(T.ew2[both] * T.eu2[both])

    modulus = _closed_matrix(T, ratio * np.conj(T.u), T.u)
    isometry = _closed_matrix(T, reciprocal * T.w, T.u)
    return PolarFactors(isometry=isometry, modulus=modulus)


def aluthge_weight(T: WeightedCondOp) -> MeasurableFn:
    """chi_S E(uw) / E(|u|^2) conj(u), the outer weight of the Aluthge transform"""
    ratio = np.zeros(T.n, dtype=complex)
    ratio[T.s_mask] = T.euw[T.s_mask] / T.eu2[T.s_mask]
    return ratio * np.conj(T.u)


def aluthge_operator(T: WeightedCondOp) -> WeightedCondOp:
    """The Aluthge transform as the weighted conditional operator M_{aluthge_weight} E M_u"""
    return WeightedCondOp(T.space, T.part, u=T.u, w=aluthge_weight(T))


def aluthge_closed(T: WeightedCondOp) -> ComplexMatrix:
    """Closed-form Aluthge transform: f -> chi_S E(uw) / E(|u|^2) conj(u) E(u f)"""
    return _closed_matrix(T, aluthge_weight(T), T.u)


def aluthge_modulus_closed(T: WeightedCondOp, exponent: float = -1.0) -> ComplexMatrix:
    """
    |E(uw)| chi_S E(|u|^2)^exponent conj(u) E(u .)

    With exponent -1 this is the modulus of the Aluthge transform (which is
    normal, so it also equals the modulus of its adjoint).
    """
    coefficient = np.abs(T.euw) * _masked_power(T.eu2, exponent, T.s_mask)
    return _closed_matrix(T, coefficient * np.conj(T.u), T.u)
