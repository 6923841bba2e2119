import math

import numpy as np
import pytest

from harmonic_trimer.geometry import PerimetricPoint, distances_from_perimetric

_CRITERIA: dict[int, tuple[bool, str]] = {}


def perimetric_box(points: int, extent: float):
    """Gauss-Legendre grid on ``[0, extent]^3`` with the radial S-state measure folded in."""
    t, wt = np.polynomial.legendre.leggauss(points)
    s = 0.5 * extent * (t + 1.0)
    ws = 0.5 * extent * wt
    X, Y, Z = np.meshgrid(s, s, s, indexing="ij")
    W = ws[:, None, None] * ws[None, :, None] * ws[None, None, :]
    W = W * (math.pi**2 / 4.0) * (X + Y) * (X + Z) * (Y + Z)
    return distances_from_perimetric(PerimetricPoint(X, Y, Z)), W


@pytest.fixture
def criterion():
    """Record one acceptance line; lines are printed in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _CRITERIA[number] = (ok, detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
