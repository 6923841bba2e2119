"""Closed-form results at zero rest length.

At ``R = 0`` the S-state spectrum is ``E_N = 3 omega (2N + 3)`` with
multiplicity ``(N+1)(N+2)/2``.  For ``R > 0`` each level unfolds into at most
``(N(N+1) + 2)/2`` sub-levels.

The eigenfunctions returned by :func:`psi0` and :func:`psi1` are normalized
with respect to the measure ``8 pi^2 r12 r13 r23 dr12 dr13 dr23`` on the
triangle domain.  The norm integral of the Gaussian factor is
``pi^3 / (3 sqrt(3) omega^3)``, which fixes both prefactors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Distances


@dataclass(frozen=True, order=True)
class RhoLabel:
    N1: int
    N2: int
    N3: int

    def __post_init__(self) -> None:
        if min(self.N1, self.N2, self.N3) < 0:
            raise ValueError("rho quantum numbers must be non-negative")

    @property
    def N(self) -> int:
        return self.N1 + self.N2 + self.N3


@dataclass(frozen=True)
class JacobiLabel:
    """S-state labels of the two Jacobi oscillators (``l1 = l2 = l``, ``s1 = -s2``)."""

    n1: int
    n2: int
    l: int  # noqa: E741
    s1: int = 0
    s2: int = 0

    def __post_init__(self) -> None:
        if min(self.n1, self.n2, self.l) < 0:
            raise ValueError("radial and angular quantum numbers must be non-negative")
        if self.s1 + self.s2 != 0 or abs(self.s1) > self.l:
            raise ValueError(f"invalid magnetic numbers ({self.s1}, {self.s2}) for l={self.l}")

    @property
    def N(self) -> int:
        return self.n1 + self.n2 + self.l

    def oscillator_energies(self, omega: float) -> tuple[float, float]:
        """Energies of the two individual Jacobi oscillators."""
        return (
            3.0 * omega * (2 * self.n1 + self.l + 1.5),
            3.0 * omega * (2 * self.n2 + self.l + 1.5),
        )


def energy_level(N: int, omega: float) -> float:
    return 3.0 * omega * (2 * N + 3)


def jacobi_energy(label: JacobiLabel, omega: float) -> float:
    return 3.0 * omega * (2 * (label.n1 + label.n2) + 2 * label.l + 3)


def degeneracy(N: int) -> int:
    return (N + 1) * (N + 2) // 2


def split_count(N: int) -> int:
    return (N * (N + 1) + 2) // 2


def _triples(N: int) -> list[tuple[int, int, int]]:
    return [(a, b, N - a - b) for a in range(N + 1) for b in range(N + 1 - a)]


def enumerate_labels(N: int) -> list[tuple[JacobiLabel, RhoLabel]]:
    """Pair up the Jacobi and rho labels of level ``N`` in the tabulated order.

    Jacobi labels are ordered by ``l`` ascending, then ``(n1, n2)`` by largest
    component first and lexicographically descending.  Rho labels are ordered
    by largest component first, then lexicographically descending.  The
    pairing is positional; the two bases are related by a linear map, not
    label by label.
    """
    if N < 0:
        raise ValueError("N must be non-negative")

    def spread_key(t: tuple[int, ...]) -> tuple:
        return (-max(t), tuple(-c for c in t))

    jac = []
    for l in range(N + 1):  # noqa: E741
        pairs = sorted(((a, N - l - a) for a in range(N - l + 1)), key=spread_key)
        jac.extend(JacobiLabel(n1, n2, l) for n1, n2 in pairs)
    rho = [RhoLabel(*t) for t in sorted(_triples(N), key=spread_key)]
    return list(zip(jac, rho))


def _gaussian(d: Distances, omega: float):
    return np.exp(-0.5 * omega * (d.rho12 + d.rho13 + d.rho23))


def psi0_prefactor(omega: float) -> float:
    return (3.0 * math.sqrt(3.0) * omega**3 / math.pi**3) ** 0.5


def psi1_prefactor(omega: float) -> float:
    return 3.0**1.25 * omega**1.5 / (math.sqrt(2.0 * math.pi) * math.pi)


def psi0(d: Distances, omega: float):
    """Normalized ground state at ``R = 0``."""
    return psi0_prefactor(omega) * _gaussian(d, omega)


def psi1(k: int, d: Distances, omega: float):
    """Normalized ``N = 1`` state with the node on pair ``(12, 13, 23)[k]``."""
    rho = (d.rho12, d.rho13, d.rho23)[k]
    return psi1_prefactor(omega) * (1.0 - omega * rho) * _gaussian(d, omega)
