import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmonic_trimer.approx import MeshProjector, VariationalParams, trial_value
from harmonic_trimer.geometry import (
    Distances,
    PerimetricPoint,
    SystemParams,
    distances_from_perimetric,
    perimetric_from_distances,
    potential,
)
from harmonic_trimer.hamiltonian import assemble
from harmonic_trimer.mesh import MeshSpec, gauss_laguerre_rule
from harmonic_trimer.spectrum import auto_mesh, scale_energy

pos = st.floats(0.05, 5.0)
unit = st.floats(0.0, 1.0)


@st.composite
def triangles(draw):
    x, y, z = draw(pos), draw(pos), draw(pos)
    return distances_from_perimetric(PerimetricPoint(x, y, z))


@given(pos, pos, pos)
def test_perimetric_round_trip(x, y, z):
    d = distances_from_perimetric(PerimetricPoint(x, y, z))
    assert d.is_valid
    back = perimetric_from_distances(d)
    assert (back.x, back.y, back.z) == pytest.approx((x, y, z), rel=1e-12, abs=1e-12)


@given(triangles(), st.floats(0.1, 3.0), st.floats(0.0, 3.0))
def test_potential_is_symmetric_and_nonnegative(d, omega, R):
    p = SystemParams(1.0, omega, R)
    v = potential(d, p)
    assert v >= 0
    for perm in ((d.r13, d.r12, d.r23), (d.r23, d.r13, d.r12), (d.r12, d.r23, d.r13)):
        assert potential(Distances(*perm), p) == pytest.approx(v, rel=1e-12)


@given(triangles(), st.floats(0.01, 1.0), unit, st.floats(0.0, 3.0))
def test_trial_value_bounded_and_symmetric(d, a, b, R):
    p = SystemParams(1.0, 1.0, R)
    vp = VariationalParams(a, b)
    t = trial_value(vp, d, p)
    assert 0.0 <= t <= 1.0
    assert trial_value(vp, Distances(d.r23, d.r12, d.r13), p) == pytest.approx(t, rel=1e-12)


@given(st.floats(0.1, 10.0), st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.0, 4.0), st.floats(0.1, 3.0))
def test_scale_energy_inverts(E, m, w, R, w2):
    E2, R2 = scale_energy(E, SystemParams(m, w, R), 1.0, w2)
    E3, R3 = scale_energy(E2, SystemParams(1.0, w2, R2), m, w)
    assert (E3, R3) == pytest.approx((E, R), rel=1e-12, abs=1e-12)


_OP = assemble(MeshSpec(6, 0.5), gauss_laguerre_rule(6), SystemParams(1.0, 0.7, 1.0))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_operator_linear_and_symmetric(seed):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, _OP.dimension))
    a = rng.uniform(-2, 2)
    np.testing.assert_allclose(_OP.matvec(a * u + v), a * _OP.matvec(u) + _OP.matvec(v), rtol=1e-10, atol=1e-10)
    assert u @ _OP.matvec(v) == pytest.approx(v @ _OP.matvec(u), rel=1e-10, abs=1e-10)
    assert u @ _OP.matvec(u) > 0


_PROJ = {}


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 1.0), unit, st.sampled_from([0.0, 1.0, 2.5]))
def test_variational_quotient_above_mesh_ground(a, b, R):
    if R not in _PROJ:
        p = SystemParams(1.0, 1.0, R)
        proj = MeshProjector(p, auto_mesh(p, 10))
        _PROJ[R] = (proj, np.linalg.eigvalsh(proj.operator.to_dense())[0])
    proj, E0 = _PROJ[R]
    assert proj.energy(VariationalParams(a, b), check=False) >= E0 - 1e-10 * abs(E0)


@given(st.integers(1, 30), st.integers(0, 59))
def test_gauss_rule_exact_to_degree_2m_minus_1(M, k):
    k = k % (2 * M)
    rule = gauss_laguerre_rule(M)
    assert np.sum(rule.weights * rule.nodes**k) == pytest.approx(math.factorial(k), rel=1e-9)
