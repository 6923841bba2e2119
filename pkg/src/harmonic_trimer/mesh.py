"""One-dimensional Lagrange-Laguerre mesh: quadrature, cardinal functions, derivatives.

Weight conventions
------------------
Two sets of weights appear and it is easy to mix them up:

``QuadratureRule.weights``
    Classical Gauss-Laguerre weights ``w_k`` for ``int_0^inf G(x) exp(-x) dx``.
    They sum to one.

``QuadratureRule.mesh_weights``
    ``lambda_k = w_k * exp(x_k)``, the weights for ``int_0^inf G(x) dx``.
    The Lagrange functions carry ``exp(-x/2)`` explicitly, so products of two
    of them are integrated with these weights.  The Lagrange conditions read
    ``f_i(x_j) = lambda_i**-0.5 * delta_ij``.

Indices are zero-based throughout; the sign factor of function ``i`` is
``(-1)**(i + 1)`` so that ``f_i(x_i) > 0``.

Two cardinal families are provided.  The *plain* family
``sqrt(x_i) L_M(x) / (x - x_i) exp(-x/2)`` is finite at the origin and is the
one used to build the three-body Hamiltonian.  The *regularized* family
carries an extra ``x / x_i`` factor and vanishes at ``x = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import eigh_tridiagonal

#: Largest mesh order the package is validated for.
MAX_ORDER = 40

#: Relative half-width of the window around a node where the Taylor branch is used.
TAYLOR_WINDOW = 1e-6

FloatOrArray = Union[float, NDArray[np.float64]]


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Gauss-Laguerre nodes and weights of order ``M``."""

    order: int
    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]
    log_mesh_weights: NDArray[np.float64] = field(repr=False)

    @property
    def mesh_weights(self) -> NDArray[np.float64]:
        """Weights ``lambda_k`` for the unweighted integral over ``[0, inf)``."""
        return np.exp(self.log_mesh_weights)

    @property
    def inv_sqrt_mesh_weights(self) -> NDArray[np.float64]:
        return np.exp(-0.5 * self.log_mesh_weights)

    def integrate(self, values: ArrayLike) -> float:
        """Apply the classical rule to samples of ``G`` taken at the nodes."""
        return float(np.dot(self.weights, np.asarray(values, dtype=float)))


@dataclass(frozen=True)
class MeshSpec:
    """Common order ``M`` and scale ``h`` of the three perimetric axes."""

    points_per_axis: int
    scale: float

    def __post_init__(self) -> None:
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < 2:
            raise ValueError(f"points_per_axis must be an integer >= 2, got {self.points_per_axis}")
        if not (self.scale > 0 and np.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")

    @property
    def dimension(self) -> int:
        return self.points_per_axis**3


def laguerre_value(M: int, x: ArrayLike) -> FloatOrArray:
    """Laguerre polynomial ``L_M(x)`` (``L_M(0) = 1``) by the three-term recurrence."""
    if M < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(M):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur[()] if cur.ndim == 0 else cur


def _laguerre_pair(M: int, x: NDArray[np.float64]) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return ``(L_M(x), L_{M-1}(x))``."""
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for k in range(M):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur, prev


def gauss_laguerre_rule(M: int) -> QuadratureRule:
    """Gauss-Laguerre rule of order ``M``.

    Nodes come from the eigenvalues of the symmetric Jacobi matrix and are then
    polished with two Newton steps on the recurrence.  Weights use
    ``w_k = x_k / ((M + 1) L_{M+1}(x_k))**2``.  The rule integrates
    ``G(x) exp(-x)`` exactly for polynomial ``G`` of degree up to ``2M - 1``.
    """
    if int(M) != M or M < 1:
        raise ValueError(f"quadrature order must be a positive integer, got {M}")
    M = int(M)
    k = np.arange(M, dtype=float)
    diag = 2.0 * k + 1.0
    off = np.arange(1, M, dtype=float)
    x = np.sort(eigh_tridiagonal(diag, off, eigvals_only=True)) if M > 1 else np.array([1.0])

    for _ in range(2):
        lm, lm1 = _laguerre_pair(M, x)
        deriv = M * (lm - lm1) / x
        x = x - lm / deriv

    lm, lm1 = _laguerre_pair(M, x)
    lnext = ((2 * M + 1 - x) * lm - M * lm1) / (M + 1)
    log_w = np.log(x) - 2.0 * np.log((M + 1) * np.abs(lnext))
    return QuadratureRule(order=M, nodes=x, weights=np.exp(log_w), log_mesh_weights=log_w + x)


def _node_derivatives(rule: QuadratureRule) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """First three derivatives of ``L_M`` at the nodes (from the Laguerre ODE)."""
    M, x = rule.order, rule.nodes
    _, lm1 = _laguerre_pair(M, x)
    d1 = -M * lm1 / x
    d2 = (x - 1.0) * d1 / x
    d3 = ((x - 2.0) * d2 - (M - 1) * d1) / x
    return d1, d2, d3


def lagrange_fn(i: int, x: ArrayLike, rule: QuadratureRule, regularized: bool = False) -> FloatOrArray:
    """Lagrange-Laguerre cardinal function ``f_i`` evaluated at ``x``.

    Satisfies ``f_i(x_j) = lambda_i**-0.5 * delta_ij``.  Within a relative
    distance ``TAYLOR_WINDOW`` of ``x_i`` the quotient ``L_M(x) / (x - x_i)``
    is replaced by its second-order Taylor expansion.
    """
    M = rule.order
    if not 0 <= i < M:
        raise IndexError(f"index {i} outside 0..{M - 1}")
    x = np.asarray(x, dtype=float)
    xi = rule.nodes[i]
    sign = -1.0 if i % 2 == 0 else 1.0

    t = x - xi
    near = np.abs(t) < TAYLOR_WINDOW * xi
    safe_t = np.where(near, 1.0, t)
    quotient = laguerre_value(M, x) / safe_t
    if np.any(near):
        d1, d2, d3 = (d[i] for d in _node_derivatives(rule))
        quotient = np.where(near, d1 + d2 * t / 2.0 + d3 * t * t / 6.0, quotient)

    if regularized:
        out = sign * x / np.sqrt(xi) * quotient * np.exp(-x / 2.0)
    else:
        out = sign * np.sqrt(xi) * quotient * np.exp(-x / 2.0)
    return out[()] if out.ndim == 0 else out


def lagrange_deriv_at_nodes(rule: QuadratureRule, regularized: bool = False) -> NDArray[np.float64]:
    """Table ``D[i, j] = f_i'(x_j)`` from the closed-form derivatives.

    Off the diagonal, ``f_i'(x_j) = (-1)**(i+j) lambda_j**-0.5 q / (x_j - x_i)``
    with ``q = sqrt(x_i / x_j)`` (plain) or ``sqrt(x_j / x_i)`` (regularized).
    On the diagonal, ``f_i'(x_i) = -+ lambda_i**-0.5 / (2 x_i)``, negative for the
    plain family and positive for the regularized one.
    """
    x = rule.nodes
    M = rule.order
    inv_sqrt_lam = rule.inv_sqrt_mesh_weights
    idx = np.arange(M)
    sign = np.where((idx[:, None] + idx[None, :]) % 2 == 0, 1.0, -1.0)
    diff = x[None, :] - x[:, None]
    np.fill_diagonal(diff, 1.0)
    if regularized:
        ratio = np.sqrt(x[None, :] / x[:, None])
        diag = inv_sqrt_lam / (2.0 * x)
    else:
        ratio = np.sqrt(x[:, None] / x[None, :])
        diag = -inv_sqrt_lam / (2.0 * x)
    table = sign * inv_sqrt_lam[None, :] * ratio / diff
    table[idx, idx] = diag
    return table
