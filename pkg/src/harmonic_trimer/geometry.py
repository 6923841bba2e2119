"""Distance and perimetric charts, the configuration-space domain, and the potentials.

All quantities are in Hartree atomic units.  The dataclasses accept numpy
arrays in place of scalars so that the same formulas serve the mesh code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Perimetric components in ``[-BOUNDARY_TOL, 0)`` are clamped to zero.
BOUNDARY_TOL = 1e-12


class GeometryError(ValueError):
    """Raised for a distance triple outside the triangle-inequality domain."""


@dataclass(frozen=True)
class SystemParams:
    """Common mass ``m``, angular frequency ``omega`` and rest length ``R``."""

    mass: float = 1.0
    omega: float = 1.0
    rest_length: float = 0.0

    def __post_init__(self) -> None:
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.rest_length >= 0:
            raise ValueError(f"rest_length must be non-negative, got {self.rest_length}")


@dataclass(frozen=True)
class GeneralizedParams:
    """Per-pair couplings ``nu_ij`` and rest lengths ``R_ij`` (unit mass)."""

    nu12: float
    nu13: float
    nu23: float
    R12: float
    R13: float
    R23: float
    omega: float = 1.0

    def __post_init__(self) -> None:
        if min(self.R12, self.R13, self.R23) <= 0:
            raise ValueError("rest lengths must be positive")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def mass(self) -> float:
        return 1.0


@dataclass(frozen=True)
class Distances:
    r12: float
    r13: float
    r23: float

    @property
    def rho12(self) -> float:
        return self.r12 * self.r12

    @property
    def rho13(self) -> float:
        return self.r13 * self.r13

    @property
    def rho23(self) -> float:
        return self.r23 * self.r23

    def is_valid(self) -> bool:
        return bool(np.all(area_squared(self) >= 0))


@dataclass(frozen=True)
class PerimetricPoint:
    x: float
    y: float
    z: float


def perimetric_from_distances(d: Distances) -> PerimetricPoint:
    """Map distances to perimetric coordinates, rejecting non-triangles."""
    x = d.r12 + d.r13 - d.r23
    y = d.r12 - d.r13 + d.r23
    z = -d.r12 + d.r13 + d.r23
    comps = []
    for c in (x, y, z):
        c = np.asarray(c, dtype=float)
        if np.any(c < -BOUNDARY_TOL):
            raise GeometryError(f"distances {d} violate the triangle inequality")
        c = np.where(c < 0, 0.0, c)
        comps.append(c[()] if c.ndim == 0 else c)
    return PerimetricPoint(*comps)


def distances_from_perimetric(p: PerimetricPoint) -> Distances:
    return Distances((p.x + p.y) / 2, (p.x + p.z) / 2, (p.y + p.z) / 2)


def area_squared(d: Distances):
    """Heron's formula for the squared triangle area; negative off the domain."""
    a, b, c = d.r12, d.r13, d.r23
    return (a + b + c) * (a + b - c) * (a - b + c) * (-a + b + c) / 16.0


def potential(d: Distances, p: SystemParams):
    """Pairwise harmonic potential with common rest length."""
    R = p.rest_length
    return 1.5 * p.mass * p.omega**2 * ((d.r12 - R) ** 2 + (d.r13 - R) ** 2 + (d.r23 - R) ** 2)


def potential_generalized(d: Distances, g: GeneralizedParams):
    """Harmonic potential with individual couplings and rest lengths per pair."""
    return 1.5 * g.omega**2 * (
        g.nu12 * (d.r12 - g.R12) ** 2 + g.nu13 * (d.r13 - g.R13) ** 2 + g.nu23 * (d.r23 - g.R23) ** 2
    )


def evaluate_potential(d: Distances, params: SystemParams | GeneralizedParams):
    if isinstance(params, GeneralizedParams):
        return potential_generalized(d, params)
    return potential(d, params)


def radial_measure_weight(d: Distances):
    """Density of the S-state measure ``8 pi^2 r12 r13 r23``."""
    return 8.0 * math.pi**2 * d.r12 * d.r13 * d.r23


def perimetric_volume_weight(p: PerimetricPoint):
    """``(x+y)(x+z)(y+z)``, which equals ``8 r12 r13 r23``.

    Including the Jacobian ``1/4`` of the linear map, the radial measure is
    ``(pi^2 / 4) (x+y)(x+z)(y+z) dx dy dz``.
    """
    return (p.x + p.y) * (p.x + p.z) * (p.y + p.z)


#: Constant relating the radial measure to the perimetric volume weight.
PERIMETRIC_MEASURE_FACTOR = math.pi**2 / 4.0
