import math

import numpy as np
import pytest
import sympy as sp
from scipy.special import roots_laguerre

from harmonic_trimer.mesh import (
    MAX_ORDER,
    MeshSpec,
    gauss_laguerre_rule,
    lagrange_deriv_at_nodes,
    lagrange_fn,
    laguerre_value,
)


def test_order_one_rule():
    rule = gauss_laguerre_rule(1)
    assert rule.nodes == pytest.approx([1.0])
    assert rule.weights == pytest.approx([1.0])


def test_order_two_nodes_are_quadratic_roots():
    rule = gauss_laguerre_rule(2)
    s = math.sqrt(2.0)
    assert rule.nodes == pytest.approx([2 - s, 2 + s], rel=1e-15)
    # exactness on 1 and x fixes the weights
    assert rule.integrate(np.ones(2)) == pytest.approx(1.0, rel=1e-15)
    assert rule.integrate(rule.nodes) == pytest.approx(1.0, rel=1e-15)


def test_order_three_integrates_x4():
    rule = gauss_laguerre_rule(3)
    assert rule.integrate(rule.nodes**4) == pytest.approx(24.0, rel=1e-13)


@pytest.mark.parametrize("bad", [0, -1, 2.5])
def test_rejects_invalid_order(bad):
    with pytest.raises(ValueError):
        gauss_laguerre_rule(bad)


@pytest.mark.parametrize("M", [2, 5, 13, 24, 40])
def test_nodes_agree_with_scipy(M):
    x, w = roots_laguerre(M)
    rule = gauss_laguerre_rule(M)
    np.testing.assert_allclose(rule.nodes, x, rtol=1e-12)
    np.testing.assert_allclose(rule.weights, w, rtol=1e-9)


@pytest.mark.parametrize("M", [1, 2, 7, 20, 33, 40])
def test_rule_invariants(M):
    rule = gauss_laguerre_rule(M)
    assert np.all(np.diff(rule.nodes) > 0) and rule.nodes[0] > 0
    assert np.all(rule.weights > 0)
    assert abs(rule.weights.sum() - 1.0) < 1e-12
    scale = np.abs(laguerre_value(M - 1, rule.nodes)) + 1.0
    assert np.max(np.abs(laguerre_value(M, rule.nodes)) / scale) < 1e-12


@pytest.mark.parametrize("M", [3, 10, 20, 40])
def test_gauss_exactness(M):
    rule = gauss_laguerre_rule(M)
    for k in range(min(2 * M - 1, 20) + 1):
        assert rule.integrate(rule.nodes**k) == pytest.approx(math.factorial(k), rel=1e-10)


def test_laguerre_value_examples():
    assert laguerre_value(0, 3.7) == 1.0
    assert laguerre_value(1, 1.0) == 0.0
    assert abs(laguerre_value(2, 2 + math.sqrt(2))) < 1e-15
    t = sp.symbols("t")
    for M in (3, 6):
        ref = sp.lambdify(t, sp.laguerre(M, t))
        for x in (0.3, 2.0, 7.5):
            assert laguerre_value(M, x) == pytest.approx(ref(x), rel=1e-12)


def test_laguerre_value_rejects_negative_degree():
    with pytest.raises(ValueError):
        laguerre_value(-1, 1.0)


@pytest.mark.parametrize("regularized", [False, True])
@pytest.mark.parametrize("M", [2, 9, 30])
def test_lagrange_conditions(M, regularized):
    rule = gauss_laguerre_rule(M)
    inv = rule.inv_sqrt_mesh_weights
    for i in range(M):
        vals = lagrange_fn(i, rule.nodes, rule, regularized)
        expect = np.where(np.arange(M) == i, inv[i], 0.0)
        assert np.max(np.abs(vals - expect)) <= 1e-10 * inv[i]


def test_regularized_vanishes_at_origin():
    for M in (2, 5, 12):
        rule = gauss_laguerre_rule(M)
        assert lagrange_fn(0, 0.0, rule, regularized=True) == 0.0


def test_quadrature_orthonormality():
    rule = gauss_laguerre_rule(15)
    F = np.array([lagrange_fn(i, rule.nodes, rule) for i in range(15)])
    gram = (F * rule.mesh_weights) @ F.T
    np.testing.assert_allclose(gram, np.eye(15), atol=1e-12)


def test_no_blowup_near_node():
    rule = gauss_laguerre_rule(8)
    xi = rule.nodes[3]
    inv = rule.inv_sqrt_mesh_weights[3]
    for eps in (1e-7, 1e-9, 1e-12, 1e-15):
        for x in (xi * (1 + eps), xi * (1 - eps)):
            v = lagrange_fn(3, x, rule)
            assert np.isfinite(v)
            assert v == pytest.approx(inv, rel=1e-6)
    # the Taylor branch and the direct quotient join smoothly at the window edge
    slope = lagrange_deriv_at_nodes(rule)[3, 3]
    w = 1e-6 * xi
    for t in (0.999 * w, 1.001 * w, -0.999 * w, -1.001 * w):
        assert lagrange_fn(3, xi + t, rule) == pytest.approx(inv + slope * t, abs=1e-10)


@pytest.mark.parametrize("regularized", [False, True])
@pytest.mark.parametrize("M", [3, 8, 20])
def test_derivative_table_matches_finite_differences(M, regularized):
    rule = gauss_laguerre_rule(M)
    D = lagrange_deriv_at_nodes(rule, regularized)
    x = rule.nodes
    for i in range(M):

        def f(t, i=i):
            return lagrange_fn(i, t, rule, regularized)

        # five-point stencil: truncation O(step^4)
        step = 1e-3 * x
        fd = (-f(x + 2 * step) + 8 * f(x + step) - 8 * f(x - step) + f(x - 2 * step)) / (12 * step)
        assert np.max(np.abs(fd - D[i]) / np.abs(D[i])) < 1e-6


@pytest.mark.parametrize("regularized", [False, True])
def test_derivative_table_m2_symbolic(regularized):
    t = sp.symbols("t", positive=True)
    L2 = sp.expand(sp.laguerre(2, t))
    roots = sorted(sp.solve(L2, t), key=float)
    rule = gauss_laguerre_rule(2)
    D = lagrange_deriv_at_nodes(rule, regularized)
    for i, xi in enumerate(roots):
        pref = t / sp.sqrt(xi) if regularized else sp.sqrt(xi)
        f = (-1) ** (i + 1) * pref * L2 / (t - xi) * sp.exp(-t / 2)
        df = sp.diff(f, t)
        for j, xj in enumerate(roots):
            assert float(sp.limit(df, t, xj)) == pytest.approx(D[i, j], rel=1e-13, abs=1e-15)


def test_derivative_reproduces_smooth_function():
    # x exp(-x/2) = sqrt(x) * (sqrt(x) e^{-x/2}) lies in the span of the plain functions times sqrt(x)
    M = 20
    rule = gauss_laguerre_rule(M)
    x = rule.nodes
    g = x * np.exp(-x / 2)
    coeff = g * np.sqrt(rule.mesh_weights)
    deriv = coeff @ lagrange_deriv_at_nodes(rule)
    exact = (1 - x / 2) * np.exp(-x / 2)
    np.testing.assert_allclose(deriv, exact, atol=1e-10)


def test_mesh_spec_validation():
    assert MeshSpec(3, 0.5).dimension == 27
    with pytest.raises(ValueError):
        MeshSpec(1, 0.5)
    with pytest.raises(ValueError):
        MeshSpec(4, 0.0)
    assert MAX_ORDER == 40
