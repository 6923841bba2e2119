"""Analytic baselines for the ground state: perturbation theory in ``R`` and a
two-parameter variational estimate.

The variational energy is a Rayleigh quotient evaluated on the Lagrange mesh.
A function sampled at the mesh points has coefficients
``c_ijk = psi(x_i, y_j, z_k) * sqrt(N_ijk lambda_i lambda_j lambda_k)`` in the
mesh basis, so ``<psi|H|psi> / <psi|psi>`` becomes ``c.Hc / c.c`` with the
assembled operator.  The quotient is only meaningful if the trial function has
decayed before the last mesh nodes; the share of ``|c|^2`` sitting on the
outer shell of nodes is reported and checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from .geometry import Distances, PerimetricPoint, SystemParams, distances_from_perimetric, potential
from .hamiltonian import AssembledOperator, assemble
from .mesh import MeshSpec, gauss_laguerre_rule
from .spectrum import auto_mesh

#: Largest tolerated share of the trial norm on the outer node shell.
LEAKAGE_LIMIT = 1e-6
OUTER_SHELL = 2
GRID_STEP = 0.005
VARIATIONAL_M = 24


class UnresolvedTrialError(ValueError):
    """The trial function is not contained in the mesh box."""


# --- perturbation theory -----------------------------------------------------


def pt_ground_energy(omega: float, R: float, mass: float = 1.0) -> float:
    """First-order ground-state energy in ``R``; other masses by ``E[m, w] = E[1, m w] / m``."""
    if omega <= 0 or mass <= 0 or R < 0:
        raise ValueError("omega and mass must be positive and R non-negative")
    w = mass * omega
    E = 9.0 * w + (3.0 * w / (2.0 * math.pi)) * (3.0 * math.pi * w * R**2 - 4.0 * R * math.sqrt(6.0 * math.pi * w))
    return E / mass


def pt_stationary_point(omega: float, mass: float = 1.0) -> float:
    """Rest length where the first-order energy is stationary."""
    return 2.0 * math.sqrt(2.0 / (3.0 * math.pi * mass * omega))


@dataclass(frozen=True)
class PTExpansion:
    omega: float
    R: float
    value: float

    @classmethod
    def evaluate(cls, omega: float, R: float) -> PTExpansion:
        return cls(omega, R, pt_ground_energy(omega, R))


def potential_split(d: Distances, omega: float, R: float) -> tuple[float, float, float]:
    """``(solvable, linear, constant)`` pieces of the unit-mass potential.

    The solvable piece is the ``R = 0`` oscillator; the sum of the three is
    the full potential.
    """
    s2 = d.r12**2 + d.r13**2 + d.r23**2
    s1 = d.r12 + d.r13 + d.r23
    w2 = omega**2
    return 1.5 * w2 * s2, -3.0 * w2 * R * s1, 4.5 * w2 * R**2


# --- variational method ------------------------------------------------------


@dataclass(frozen=True)
class VariationalParams:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


def trial_value(vp: VariationalParams, d: Distances, params: SystemParams):
    """Unnormalized trial function ``exp(-(a w / 2) sum (r - b R)^2)``."""
    bR = vp.beta * params.rest_length
    a = vp.alpha * params.mass * params.omega
    return np.exp(-0.5 * a * ((d.r12 - bR) ** 2 + (d.r13 - bR) ** 2 + (d.r23 - bR) ** 2))


class MeshProjector:
    """Samples trial functions on a mesh and evaluates their Rayleigh quotient."""

    def __init__(self, params: SystemParams, mesh: MeshSpec | None = None):
        self.params = params
        self.mesh = auto_mesh(params, VARIATIONAL_M) if mesh is None else mesh
        M = self.mesh.points_per_axis
        self.rule = gauss_laguerre_rule(M)
        self.operator: AssembledOperator = assemble(self.mesh, self.rule, params)
        u = self.mesh.scale * self.rule.nodes
        X, Y, Z = np.meshgrid(u, u, u, indexing="ij")
        self.distances = distances_from_perimetric(PerimetricPoint(X, Y, Z))
        lam = self.rule.mesh_weights
        norm = self.mesh.scale**3 * (X + Y) * (X + Z) * (Y + Z)
        self.weights = np.sqrt(norm * lam[:, None, None] * lam[None, :, None] * lam[None, None, :])

    @cached_property
    def _outer(self) -> NDArray[np.bool_]:
        M = self.mesh.points_per_axis
        return (np.indices((M, M, M)) >= M - OUTER_SHELL).any(axis=0)

    def coefficients(self, vp: VariationalParams) -> NDArray[np.float64]:
        return (trial_value(vp, self.distances, self.params) * self.weights).ravel()

    def leakage(self, c: NDArray[np.float64]) -> float:
        c2 = c * c
        total = c2.sum()
        return float(c2[self._outer.ravel()].sum() / total) if total > 0 else 1.0

    def energy(self, vp: VariationalParams, check: bool = True) -> float:
        c = self.coefficients(vp)
        if check:
            loss = self.leakage(c)
            if loss > LEAKAGE_LIMIT:
                raise UnresolvedTrialError(
                    f"trial (alpha={vp.alpha}, beta={vp.beta}) leaks {loss:.2e} of its norm "
                    f"onto the mesh boundary (limit {LEAKAGE_LIMIT:.0e})"
                )
        return float(c @ self.operator.matvec(c) / (c @ c))


def variational_energy(vp: VariationalParams, params: SystemParams, mesh: MeshSpec | None = None) -> float:
    return MeshProjector(params, mesh).energy(vp)


@dataclass(frozen=True)
class VariationalResult:
    params: VariationalParams
    energy: float
    grid_params: VariationalParams
    grid_energy: float


def optimize_variational(
    params: SystemParams, mesh: MeshSpec | None = None, step: float = GRID_STEP
) -> VariationalResult:
    """Minimize the variational energy over the unit square.

    Every point of a grid with spacing ``step`` is evaluated (points whose
    trial function leaks out of the mesh are skipped), then Nelder-Mead
    refines from the best grid point.  Both stages are deterministic.
    """
    proj = MeshProjector(params, mesh)
    n = round(1.0 / step)
    axis = np.linspace(0.0, 1.0, n + 1)
    best = (math.inf, 1.0, 0.0)
    for a in axis[1:]:
        for b in axis:
            vp = VariationalParams(float(a), float(b))
            c = proj.coefficients(vp)
            if proj.leakage(c) > LEAKAGE_LIMIT:
                continue
            E = float(c @ proj.operator.matvec(c) / (c @ c))
            if E < best[0]:
                best = (E, vp.alpha, vp.beta)
    if not math.isfinite(best[0]):
        raise UnresolvedTrialError("no grid point is resolved by the mesh")
    grid_E, a0, b0 = best

    def objective(v):
        a, b = v
        if not (0.0 < a <= 1.0 and 0.0 <= b <= 1.0):
            return math.inf
        vp = VariationalParams(float(a), float(b))
        c = proj.coefficients(vp)
        if proj.leakage(c) > LEAKAGE_LIMIT:
            return math.inf
        return float(c @ proj.operator.matvec(c) / (c @ c))

    da = -step if a0 - step > 0 else step
    db = -step if b0 - step >= 0 else step
    simplex = np.array([[a0, b0], [a0 + da, b0], [a0, b0 + db]])
    res = minimize(
        objective,
        x0=[a0, b0],
        method="Nelder-Mead",
        options={"xatol": 1e-7, "fatol": 1e-12, "initial_simplex": simplex, "maxiter": 2000},
    )
    if res.fun < grid_E:
        opt = VariationalParams(float(res.x[0]), float(res.x[1]))
        E = float(res.fun)
    else:
        opt, E = VariationalParams(a0, b0), grid_E
    return VariationalResult(opt, E, VariationalParams(a0, b0), grid_E)


# --- direct quadrature -------------------------------------------------------


def direct_variational_energy(
    vp: VariationalParams, params: SystemParams, points: int = 48, extent: float | None = None
) -> float:
    """Rayleigh quotient by Gauss-Legendre quadrature on a perimetric box.

    Independent of the Lagrange mesh: the kinetic energy is taken in its
    first-derivative form ``(1/2m) sum_i |grad_i psi|^2``, written with the
    derivatives along the three distances and the triangle angles.
    """
    m, w, R = params.mass, params.omega, params.rest_length
    if extent is None:
        extent = 2.0 * R + 16.0 / math.sqrt(3.0 * m * w * max(vp.alpha, 1e-3))
    t, wt = np.polynomial.legendre.leggauss(points)
    s = 0.5 * extent * (t + 1.0)
    ws = 0.5 * extent * wt
    X, Y, Z = np.meshgrid(s, s, s, indexing="ij")
    W = ws[:, None, None] * ws[None, :, None] * ws[None, None, :] * (X + Y) * (X + Z) * (Y + Z)
    d = distances_from_perimetric(PerimetricPoint(X, Y, Z))
    psi = trial_value(vp, d, params)
    k = vp.alpha * m * w
    bR = vp.beta * R
    g12, g13, g23 = (-k * (r - bR) * psi for r in (d.r12, d.r13, d.r23))
    r12, r13, r23 = d.r12, d.r13, d.r23
    with np.errstate(invalid="ignore", divide="ignore"):
        c1 = np.nan_to_num((r12**2 + r13**2 - r23**2) / (2 * r12 * r13))
        c2 = np.nan_to_num((r12**2 + r23**2 - r13**2) / (2 * r12 * r23))
        c3 = np.nan_to_num((r13**2 + r23**2 - r12**2) / (2 * r13 * r23))
    grad2 = 2.0 * (g12**2 + g13**2 + g23**2) + 2.0 * (g12 * g13 * c1 + g12 * g23 * c2 + g13 * g23 * c3)
    kinetic = np.sum(W * grad2) / (2.0 * m)
    pot = np.sum(W * potential(d, params) * psi**2)
    return float((kinetic + pot) / np.sum(W * psi**2))
