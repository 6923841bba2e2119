"""Discretized S-state Hamiltonian on the perimetric Lagrange mesh.

The basis function with mesh indices ``(i, j, k)`` is
``F_ijk = N_ijk^{-1/2} f_i(x/h) f_j(y/h) f_k(z/h)`` with the plain
Lagrange-Laguerre functions of :mod:`harmonic_trimer.mesh`.  The potential is
diagonal and the kinetic matrix couples only index triples sharing at least
one index.

Masses other than one enter only through a ``1/m`` factor on the kinetic
matrix, which is exact for ``-(1/2m) Laplacian``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator

from . import _backend
from .geometry import (
    GeneralizedParams,
    PerimetricPoint,
    SystemParams,
    distances_from_perimetric,
    evaluate_potential,
)
from .mesh import MAX_ORDER, MeshSpec, QuadratureRule, gauss_laguerre_rule, lagrange_deriv_at_nodes

#: Largest dimension for which a dense matrix may be materialized.
DENSE_LIMIT = 5000


class ResourceEnvelopeError(RuntimeError):
    """The requested mesh is larger than the supported envelope."""


class BasisIndex(NamedTuple):
    i: int
    j: int
    k: int


def a_coefficients(x, y, z) -> NDArray[np.float64]:
    """Symmetric 3x3 table of the kinetic coefficients ``A_pq(x, y, z)``.

    ``x, y, z`` are physical perimetric coordinates (already multiplied by h).
    """
    a11, a22, a33, a12, a13, a23 = _a_terms(x, y, z)
    return np.array([[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]], dtype=float)


def _a_terms(x, y, z):
    s = x + y + z
    yz = y * z * (y + z)
    xz = x * z * (x + z)
    xy = x * y * (x + y)
    return (
        x * (y + z) * s + xz + xy,
        yz + y * (x + z) * s + xy,
        yz + xz + z * (x + y) * s,
        -xy,
        -xz,
        -yz,
    )


def normalization(idx: BasisIndex, mesh: MeshSpec, rule: QuadratureRule) -> float:
    h = mesh.scale
    x, y, z = (h * rule.nodes[n] for n in idx)
    return h**3 * (x + y) * (x + z) * (y + z)


def kinetic_element(
    row: BasisIndex,
    col: BasisIndex,
    mesh: MeshSpec,
    rule: QuadratureRule,
    deriv: NDArray[np.float64],
    mass: float = 1.0,
) -> float:
    """Kinetic matrix element between ``F_row`` and ``F_col``, term by term.

    This is the slow scalar reference; :class:`AssembledOperator` applies the
    same sum in factorized form.  Primed indices belong to ``row``.
    """
    ip, jp, kp = row
    i, j, k = col
    h = mesh.scale
    u = rule.nodes
    lam = rule.mesh_weights
    D = deriv

    def A(p, q, a, b, c):
        return a_coefficients(h * u[a], h * u[b], h * u[c])[p, q]

    total = 0.0
    if j == jp and k == kp:
        total += sum(lam[n] * A(0, 0, n, j, k) * D[i, n] * D[ip, n] for n in range(rule.order)) / h**2
    if i == ip and k == kp:
        total += sum(lam[n] * A(1, 1, i, n, k) * D[j, n] * D[jp, n] for n in range(rule.order)) / h**2
    if i == ip and j == jp:
        total += sum(lam[n] * A(2, 2, i, j, n) * D[k, n] * D[kp, n] for n in range(rule.order)) / h**2
    if k == kp:
        total += (
            np.sqrt(lam[i] * lam[jp]) * A(0, 1, i, jp, k) * D[ip, i] * D[j, jp]
            + np.sqrt(lam[ip] * lam[j]) * A(0, 1, ip, j, k) * D[i, ip] * D[jp, j]
        ) / h**2
    if j == jp:
        total += (
            np.sqrt(lam[i] * lam[kp]) * A(0, 2, i, j, kp) * D[ip, i] * D[k, kp]
            + np.sqrt(lam[ip] * lam[k]) * A(0, 2, ip, j, k) * D[i, ip] * D[kp, k]
        ) / h**2
    if i == ip:
        total += (
            np.sqrt(lam[j] * lam[kp]) * A(1, 2, i, j, kp) * D[jp, j] * D[k, kp]
            + np.sqrt(lam[jp] * lam[k]) * A(1, 2, i, jp, k) * D[j, jp] * D[kp, k]
        ) / h**2
    prefactor = 2.0 * h**3 / np.sqrt(normalization(row, mesh, rule) * normalization(col, mesh, rule))
    return prefactor * total / mass


def potential_diagonal(
    idx: BasisIndex, mesh: MeshSpec, rule: QuadratureRule, params: SystemParams | GeneralizedParams
) -> float:
    h = mesh.scale
    point = PerimetricPoint(*(h * rule.nodes[n] for n in idx))
    return float(evaluate_potential(distances_from_perimetric(point), params))


@dataclass(frozen=True, eq=False)
class AssembledOperator:
    """Symmetric mesh Hamiltonian ``H = T + diag(V)`` of size ``M^3``.

    The kinetic part is kept in factorized form: the derivative table, three
    axis grids and three cross grids, each ``O(M^3)``.  A matrix-vector
    product costs ``O(M^4)``.
    """

    mesh: MeshSpec
    rule: QuadratureRule
    params: SystemParams | GeneralizedParams
    deriv: NDArray[np.float64]
    grids: tuple[NDArray[np.float64], ...]
    kinetic_scale: NDArray[np.float64]
    potential_cube: NDArray[np.float64]

    @property
    def dimension(self) -> int:
        return self.mesh.dimension

    @property
    def potential_diag(self) -> NDArray[np.float64]:
        return self.potential_cube.ravel()

    @property
    def is_permutation_symmetric(self) -> bool:
        """True when relabeling the particles leaves the operator unchanged."""
        g = self.params
        if isinstance(g, SystemParams):
            return True
        return g.nu12 == g.nu13 == g.nu23 and g.R12 == g.R13 == g.R23

    def _cube(self, v) -> NDArray[np.float64]:
        M = self.mesh.points_per_axis
        return np.ascontiguousarray(np.asarray(v, dtype=float).reshape(M, M, M))

    def kinetic_apply(self, v) -> NDArray[np.float64]:
        c = self._cube(v)
        s = self.kinetic_scale
        out = _backend.kinetic_apply(np.ascontiguousarray(s * c), self.deriv, *self.grids)
        return (s * out).ravel()

    def matvec(self, v) -> NDArray[np.float64]:
        c = self._cube(v)
        s = self.kinetic_scale
        out = _backend.kinetic_apply(np.ascontiguousarray(s * c), self.deriv, *self.grids)
        return (s * out + self.potential_cube * c).ravel()

    def matmat(self, V) -> NDArray[np.float64]:
        V = np.asarray(V, dtype=float)
        return np.column_stack([self.matvec(V[:, n]) for n in range(V.shape[1])])

    def as_linear_operator(self) -> LinearOperator:
        n = self.dimension
        return LinearOperator((n, n), matvec=self.matvec, matmat=self.matmat, dtype=float)

    def diagonal(self) -> NDArray[np.float64]:
        kin = _backend.kinetic_diagonal(self.deriv, *self.grids)
        return (self.kinetic_scale**2 * kin + self.potential_cube).ravel()

    def kinetic_dense(self) -> NDArray[np.float64]:
        self._check_dense()
        n = self.dimension
        T = np.empty((n, n))
        eye = np.zeros(n)
        for col in range(n):
            eye[col] = 1.0
            T[:, col] = self.kinetic_apply(eye)
            eye[col] = 0.0
        return T

    def to_dense(self) -> NDArray[np.float64]:
        H = self.kinetic_dense()
        H[np.diag_indices_from(H)] += self.potential_diag
        return H

    def kinetic_matrix(self) -> sp.csr_matrix:
        """Kinetic part as a sparse matrix holding only structurally nonzero entries."""
        T = self.kinetic_dense()
        M = self.mesh.points_per_axis
        idx = np.indices((M, M, M)).reshape(3, -1)
        share = np.zeros(T.shape, dtype=bool)
        for axis in range(3):
            share |= idx[axis][:, None] == idx[axis][None, :]
        return sp.csr_matrix(np.where(share, T, 0.0))

    @staticmethod
    def structural_nonzero_bound(M: int) -> int:
        return M**3 * (3 * M**2 + 3 * M + 1)

    def _check_dense(self) -> None:
        if self.dimension > DENSE_LIMIT:
            raise ResourceEnvelopeError(
                f"dense materialization limited to dimension {DENSE_LIMIT}, got {self.dimension}"
            )

    def dump(self, path: str | Path) -> None:
        """Write the operator data to an ``.npz`` file for inspection.

        Layout: ``header`` = [M, h, mass-or-nan, omega, R-or-nan]; ``generalized``
        (six values when applicable); then the blocks ``nodes``, ``mesh_weights``,
        ``deriv``, ``g1``..``g3``, ``w12``, ``w13``, ``w23``, ``kinetic_scale``
        and ``potential``.  Not a stable format.
        """
        p = self.params
        if isinstance(p, GeneralizedParams):
            header = [self.mesh.points_per_axis, self.mesh.scale, 1.0, p.omega, np.nan]
            extra = np.array([p.nu12, p.nu13, p.nu23, p.R12, p.R13, p.R23])
        else:
            header = [self.mesh.points_per_axis, self.mesh.scale, p.mass, p.omega, p.rest_length]
            extra = np.array([])
        names = ("g1", "g2", "g3", "w12", "w13", "w23")
        np.savez(
            path,
            header=np.array(header, dtype=float),
            generalized=extra,
            nodes=self.rule.nodes,
            mesh_weights=self.rule.mesh_weights,
            deriv=self.deriv,
            kinetic_scale=self.kinetic_scale,
            potential=self.potential_cube,
            **dict(zip(names, self.grids)),
        )


def assemble(
    mesh: MeshSpec,
    rule: QuadratureRule | None = None,
    params: SystemParams | GeneralizedParams | None = None,
) -> AssembledOperator:
    """Build the mesh Hamiltonian for ``params`` on ``mesh``."""
    M, h = mesh.points_per_axis, mesh.scale
    if M > MAX_ORDER:
        raise ResourceEnvelopeError(f"M={M} exceeds the supported envelope M <= {MAX_ORDER}")
    if rule is None:
        rule = gauss_laguerre_rule(M)
    if rule.order != M:
        raise ValueError(f"rule order {rule.order} does not match mesh order {M}")
    if params is None:
        params = SystemParams()

    u = h * rule.nodes
    X, Y, Z = np.meshgrid(u, u, u, indexing="ij")
    a11, a22, a33, a12, a13, a23 = _a_terms(X, Y, Z)
    lam = rule.mesh_weights
    sq = np.sqrt(lam)
    inv_h2 = 1.0 / h**2
    grids = tuple(
        np.ascontiguousarray(g)
        for g in (
            lam[:, None, None] * a11 * inv_h2,
            lam[None, :, None] * a22 * inv_h2,
            lam[None, None, :] * a33 * inv_h2,
            sq[:, None, None] * sq[None, :, None] * a12 * inv_h2,
            sq[:, None, None] * sq[None, None, :] * a13 * inv_h2,
            sq[None, :, None] * sq[None, None, :] * a23 * inv_h2,
        )
    )
    norm = h**3 * (X + Y) * (X + Z) * (Y + Z)
    kinetic_scale = np.sqrt(2.0 * h**3 / (params.mass * norm))
    pot = evaluate_potential(distances_from_perimetric(PerimetricPoint(X, Y, Z)), params)
    return AssembledOperator(
        mesh=mesh,
        rule=rule,
        params=params,
        deriv=np.ascontiguousarray(lagrange_deriv_at_nodes(rule)),
        grids=grids,
        kinetic_scale=kinetic_scale,
        potential_cube=np.ascontiguousarray(pot),
    )
