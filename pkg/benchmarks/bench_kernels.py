"""Compare the compiled and numpy kinetic kernels on random coefficient cubes.

    python3 benchmarks/bench_kernels.py [M ...]
"""

import sys
import timeit

import numpy as np

from harmonic_trimer import SystemParams, assemble
from harmonic_trimer._backend import get
from harmonic_trimer.spectrum import auto_mesh


def bench(M: int, repeat: int = 5) -> dict[str, float]:
    op = assemble(auto_mesh(SystemParams(1.0, 0.5, 1.0), M), params=SystemParams(1.0, 0.5, 1.0))
    u = np.random.default_rng(0).standard_normal((M, M, M))
    args = (u, op.deriv, *op.grids)
    ref = get("python").kinetic_apply(*args)
    out = {}
    for name in ("python", "cython"):
        try:
            mod = get(name)
        except ImportError:
            continue
        np.testing.assert_allclose(mod.kinetic_apply(*args), ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())
        number = max(1, int(2000 / M**2))
        t = min(timeit.repeat(lambda: mod.kinetic_apply(*args), number=number, repeat=repeat)) / number
        out[name] = t
    return out


def main(argv):
    sizes = [int(a) for a in argv] or [8, 16, 24, 32]
    print(f"{'M':>4} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for M in sizes:
        t = bench(M)
        py, cy = t["python"] * 1e3, t.get("cython", float("nan")) * 1e3
        print(f"{M:>4} {py:12.4f} {cy:12.4f} {py / cy:8.2f}")


if __name__ == "__main__":
    main(sys.argv[1:])
