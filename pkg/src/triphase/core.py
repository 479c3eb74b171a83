"""Field algebra for plane three-phase conducting composites.

Two isotropic conductors k1 < k2 are mixed with a superconducting phase
(infinite conductivity) at fixed volume fractions.  A 2x2 gradient field is
decomposed in the orthonormal matrix basis (trace / antisymmetric /
deviatoric parts), which makes the determinant a simple quadratic form and
keeps every downstream energy expression diagonal.

Conventions used throughout the package:

* the external loading is ``E0 = diag(1, r)`` with anisotropy ratio
  ``0 <= r <= 1``;
* effective tensors are diagonal in the fixed axes ``x1, x2``;
* infinite conductivity is represented exactly by ``math.inf`` and never by
  a large float, so harmonic and arithmetic means of laminates stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

INF = math.inf
SQRT2 = math.sqrt(2.0)

__all__ = [
    "INF",
    "SQRT2",
    "BASIS",
    "CompositeSpec",
    "Loading",
    "FieldComponents",
    "ExtendedConductivity",
    "decompose",
    "reconstruct",
    "determinant",
    "energy_density",
    "harmonic_mean",
    "arithmetic_mean",
    "InvalidSpec",
    "InfiniteEnergy",
    "RegimeMismatch",
    "AmbiguousRegion",
    "DomainError",
    "IncompatibleLoading",
    "OutOfApplicability",
    "InfeasibleTopology",
    "EmptyRegion",
]


class InvalidSpec(ValueError):
    """Composite parameters violate the admissibility constraints."""


class InfiniteEnergy(ValueError):
    """A nonzero field was assigned to the superconducting phase."""


class RegimeMismatch(ValueError):
    """Translation parameter lies outside the requested regime interval."""


class AmbiguousRegion(RuntimeError):
    """Two regime validity conditions hold simultaneously beyond tolerance."""


class DomainError(ValueError):
    """A boundary curve does not exist for the given parameters."""


class IncompatibleLoading(ValueError):
    """The average field excites an infinite eigenvalue direction."""


class OutOfApplicability(ValueError):
    """A structure's fraction inequalities fail at the requested point."""


class InfeasibleTopology(ValueError):
    """Global fraction constraints cannot be met by the topology."""


class EmptyRegion(ValueError):
    """The requested parameter region is empty for this composite."""


#: Orthonormal basis of 2x2 matrices: a1 ~ identity, a2 ~ diagonal deviator,
#: a3 ~ rotation, a4 ~ shear.  Frobenius inner products are delta_ij.
BASIS = (
    np.array([[1.0, 0.0], [0.0, 1.0]]) / SQRT2,
    np.array([[1.0, 0.0], [0.0, -1.0]]) / SQRT2,
    np.array([[0.0, 1.0], [-1.0, 0.0]]) / SQRT2,
    np.array([[0.0, 1.0], [1.0, 0.0]]) / SQRT2,
)


@dataclass(frozen=True)
class CompositeSpec:
    """Problem instance: conductivities and volume fractions.

    Parameters
    ----------
    k1, k2 : float
        Finite conductivities, 0 < k1 < k2.  The third phase is a
        superconductor and is not stored.
    m1, m2 : float
        Volume fractions of the finite phases; m3 = 1 - m1 - m2 >= 0.
    """

    k1: float
    k2: float
    m1: float
    m2: float

    def __post_init__(self):
        if not (0.0 < self.k1 < self.k2 < INF):
            raise InvalidSpec(f"need 0 < k1 < k2 finite, got k1={self.k1}, k2={self.k2}")
        if self.m1 < 0.0 or self.m2 < 0.0:
            raise InvalidSpec(f"fractions must be nonnegative, got m1={self.m1}, m2={self.m2}")
        if self.m1 + self.m2 > 1.0 + 1e-12:
            raise InvalidSpec(f"m1 + m2 = {self.m1 + self.m2} exceeds 1")

    @property
    def m3(self) -> float:
        return max(0.0, 1.0 - self.m1 - self.m2)

    @property
    def k_tilde(self) -> float:
        """Coupling constant m1*k2 + m2*k1."""
        return self.m1 * self.k2 + self.m2 * self.k1

    def conductivity(self, material: int) -> float:
        if material == 1:
            return self.k1
        if material == 2:
            return self.k2
        if material == 3:
            return INF
        raise ValueError(f"unknown material {material}")

    def fraction(self, material: int) -> float:
        if material == 1:
            return self.m1
        if material == 2:
            return self.m2
        if material == 3:
            return self.m3
        raise ValueError(f"unknown material {material}")


@dataclass(frozen=True)
class Loading:
    """External loading: two orthogonal fields of relative magnitude r.

    The combined gradient matrix is E0 = diag(1, r); its basis averages are
    S01 = (1+r)/sqrt(2), D01 = (1-r)/sqrt(2) and S02 = D02 = 0.
    """

    r: float

    def __post_init__(self):
        if not (0.0 <= self.r <= 1.0):
            raise InvalidSpec(f"anisotropy ratio must lie in [0, 1], got {self.r}")

    @property
    def E0(self) -> np.ndarray:
        return np.diag([1.0, self.r])

    @property
    def S01(self) -> float:
        return (1.0 + self.r) / SQRT2

    @property
    def D01(self) -> float:
        return (1.0 - self.r) / SQRT2

    @property
    def det_E0(self) -> float:
        return self.r


@dataclass(frozen=True)
class FieldComponents:
    """Coefficients (s1, s2, d1, d2) of a 2x2 field in the matrix basis."""

    s1: float
    s2: float
    d1: float
    d2: float

    @classmethod
    def from_diagonal(cls, alpha: float, beta: float) -> "FieldComponents":
        """Components of diag(alpha, beta)."""
        return cls((alpha + beta) / SQRT2, 0.0, (alpha - beta) / SQRT2, 0.0)

    def to_eigen_pair(self) -> tuple[float, float]:
        """Diagonal entries (alpha, beta); requires an axis-aligned field."""
        if abs(self.s2) > 1e-12 or abs(self.d2) > 1e-12:
            raise ValueError("field is not diagonal in the fixed axes")
        return (self.s1 + self.d1) / SQRT2, (self.s1 - self.d1) / SQRT2

    def norm_sq(self) -> float:
        return self.s1**2 + self.s2**2 + self.d1**2 + self.d2**2


def decompose(E) -> FieldComponents:
    """Project a 2x2 matrix onto the orthonormal basis."""
    E = np.asarray(E, dtype=float)
    if E.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {E.shape}")
    return FieldComponents(
        s1=(E[0, 0] + E[1, 1]) / SQRT2,
        s2=(E[0, 1] - E[1, 0]) / SQRT2,
        d1=(E[0, 0] - E[1, 1]) / SQRT2,
        d2=(E[0, 1] + E[1, 0]) / SQRT2,
    )


def reconstruct(c: FieldComponents) -> np.ndarray:
    """Inverse of :func:`decompose`; exact round trip."""
    return np.array(
        [
            [(c.s1 + c.d1) / SQRT2, (c.s2 + c.d2) / SQRT2],
            [(c.d2 - c.s2) / SQRT2, (c.s1 - c.d1) / SQRT2],
        ]
    )


def determinant(c: FieldComponents) -> float:
    """det E = (s1^2 + s2^2 - d1^2 - d2^2) / 2."""
    return 0.5 * (c.s1**2 + c.s2**2 - c.d1**2 - c.d2**2)


def energy_density(k, c: FieldComponents) -> float:
    """Energy (k/2)|E|^2 of an isotropic conductor carrying field c.

    For the superconducting phase (k infinite) the field must vanish; a
    nonzero field signals an inadmissible configuration.
    """
    if isinstance(k, ExtendedConductivity):
        alpha, beta = c.to_eigen_pair()
        total = 0.0
        for lam, comp in ((k.lam1, alpha), (k.lam2, beta)):
            if math.isinf(lam):
                if comp != 0.0:
                    raise InfiniteEnergy("nonzero field along an infinite eigenvalue")
                continue
            total += 0.5 * lam * comp**2
        return total
    if math.isinf(k):
        if c.norm_sq() > 0.0:
            raise InfiniteEnergy("nonzero field in the superconducting phase")
        return 0.0
    return 0.5 * k * c.norm_sq()


@dataclass(frozen=True)
class ExtendedConductivity:
    """Eigenvalue pair on (0, +inf], eigenvectors fixed to the axes.

    Infinity is a first-class value: 1/inf = 0 and c + inf = inf for c > 0,
    so harmonic and arithmetic means of laminate stacks stay exact even when
    a sublaminate has a genuinely infinite tangential eigenvalue.
    """

    lam1: float
    lam2: float

    def __post_init__(self):
        if not (self.lam1 > 0.0 and self.lam2 > 0.0):
            raise InvalidSpec(f"eigenvalues must be positive, got {self.lam1}, {self.lam2}")

    @classmethod
    def isotropic(cls, k: float) -> "ExtendedConductivity":
        return cls(k, k)

    def along(self, axis: int) -> float:
        return self.lam1 if axis == 1 else self.lam2

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.lam1) and math.isfinite(self.lam2)


def harmonic_mean(values, weights) -> float:
    """Weighted harmonic mean with exact treatment of infinities."""
    acc = 0.0
    for v, w in zip(values, weights):
        if w == 0.0:
            continue
        acc += 0.0 if math.isinf(v) else w / v
    return INF if acc == 0.0 else 1.0 / acc


def arithmetic_mean(values, weights) -> float:
    """Weighted arithmetic mean; any infinite entry with weight > 0 wins."""
    acc = 0.0
    for v, w in zip(values, weights):
        if w == 0.0:
            continue
        if math.isinf(v):
            return INF
        acc += w * v
    return acc
