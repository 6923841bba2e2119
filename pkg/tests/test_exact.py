import math

import numpy as np
import pytest

from harmonic_trimer.exact import (
    JacobiLabel,
    RhoLabel,
    degeneracy,
    energy_level,
    enumerate_labels,
    jacobi_energy,
    psi0,
    psi0_prefactor,
    psi1,
    split_count,
)
from harmonic_trimer.geometry import Distances

from .conftest import perimetric_box


def test_energy_levels():
    assert energy_level(0, 1.0) == 9.0
    assert energy_level(1, 1.0) == 15.0
    assert energy_level(3, 0.5) == 13.5


def test_jacobi_energy():
    assert jacobi_energy(JacobiLabel(0, 0, 0), 1.0) == 9.0
    assert jacobi_energy(JacobiLabel(1, 0, 0), 1.0) == 15.0
    for N in range(6):
        for jl, _ in enumerate_labels(N):
            assert jacobi_energy(jl, 0.7) == pytest.approx(energy_level(N, 0.7))
            e1, e2 = jl.oscillator_energies(0.7)
            assert e1 + e2 == pytest.approx(energy_level(N, 0.7))


def test_label_validation():
    with pytest.raises(ValueError):
        JacobiLabel(0, 0, 1, s1=1, s2=1)
    with pytest.raises(ValueError):
        JacobiLabel(0, 0, 1, s1=2, s2=-2)
    with pytest.raises(ValueError):
        RhoLabel(-1, 0, 0)
    assert JacobiLabel(0, 0, 2, s1=-1, s2=1).N == 2


def test_counts():
    assert [degeneracy(N) for N in range(4)] == [1, 3, 6, 10]
    assert [split_count(N) for N in range(4)] == [1, 2, 4, 7]
    for N in range(21):
        assert degeneracy(N) >= split_count(N)
        assert (degeneracy(N) == split_count(N)) == (N == 0)


def test_table_one():
    def rows(N):
        return [((j.n1, j.n2, j.l), (r.N1, r.N2, r.N3)) for j, r in enumerate_labels(N)]

    assert rows(0) == [((0, 0, 0), (0, 0, 0))]
    assert rows(1) == [((1, 0, 0), (1, 0, 0)), ((0, 1, 0), (0, 1, 0)), ((0, 0, 1), (0, 0, 1))]
    assert rows(2) == [
        ((2, 0, 0), (2, 0, 0)),
        ((0, 2, 0), (0, 2, 0)),
        ((1, 1, 0), (0, 0, 2)),
        ((1, 0, 1), (1, 1, 0)),
        ((0, 1, 1), (1, 0, 1)),
        ((0, 0, 2), (0, 1, 1)),
    ]
    for N in range(7):
        labels = enumerate_labels(N)
        assert len(labels) == degeneracy(N)
        assert sorted((r.N1, r.N2, r.N3) for _, r in labels) == sorted(
            (a, b, N - a - b) for a in range(N + 1) for b in range(N + 1 - a)
        )
        assert all(j.s1 == j.s2 == 0 and j.N == N for j, _ in labels)
    with pytest.raises(ValueError):
        enumerate_labels(-1)


def test_psi0_shape():
    w = 0.8
    assert psi0(Distances(0, 0, 0), w) == pytest.approx(psi0_prefactor(w))
    t = np.linspace(0, 3, 20)
    assert np.all(np.diff(psi0(Distances(t, t, t), w)) < 0)


def test_psi1_node_and_permutation():
    w = 1.3
    r = 1 / math.sqrt(w)
    assert psi1(0, Distances(r, 0.7, 0.9), w) == pytest.approx(0.0, abs=1e-15)
    d = Distances(0.4, 0.9, 1.1)
    perm = Distances(d.r13, d.r12, d.r23)  # swap particles 2 and 3
    assert psi1(0, d, w) == pytest.approx(psi1(1, perm, w))
    assert psi1(2, d, w) == pytest.approx(psi1(2, perm, w))


@pytest.mark.parametrize("omega", [0.5, 1.0, 2.0])
def test_normalization_and_orthogonality_by_quadrature(omega):
    d, W = perimetric_box(64, 14.0 / math.sqrt(omega))
    p0 = psi0(d, omega)
    assert np.sum(W * p0 * p0) == pytest.approx(1.0, abs=1e-6)
    for k in range(3):
        p1 = psi1(k, d, omega)
        assert np.sum(W * p1 * p1) == pytest.approx(1.0, abs=1e-6)
        assert abs(np.sum(W * p1 * p0)) < 1e-6
