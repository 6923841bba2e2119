"""Eigenvalues of the mesh Hamiltonian, level labeling, R-scans and minimization.

Eigensolver
-----------
Relabeling the three particles permutes the perimetric axes, and with equal
orders and scales on all axes the mesh Hamiltonian commutes with these
permutations exactly.  Two consequences matter for a Krylov solver: the
two-dimensional irreducible representation produces exactly degenerate
pairs, and a start vector with a definite symmetry never leaves its sector.
A single-vector Lanczos run therefore misses states.

The solver handles this by running the implicitly restarted Lanczos method
(ARPACK) separately in the three sectors A1 (symmetric), A2 (antisymmetric)
and one row of E, then merging the results with each E level counted twice.
Every eigenpair carries a residual computed with the full, unprojected
operator.  The start vector is a projected standard-normal vector from a
fixed seed, so runs are reproducible.

Accidental near-degeneracies inside one sector (at ``R = 0`` every level is
exactly degenerate) are caught by deflation: converged vectors are shifted up
and a loosely converged probe checks for anything left below the cutoff.  The
ground state is nondegenerate and extreme in the A1 sector, so ground-state
solves skip this step.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .exact import degeneracy
from .geometry import GeneralizedParams, SystemParams
from .hamiltonian import AssembledOperator, assemble
from .mesh import MeshSpec, gauss_laguerre_rule

log = logging.getLogger(__name__)

DENSE_DIMENSION = 2000
DEFAULT_TOL = 1e-10
DEFAULT_CLUSTER_TOL = 1e-7
START_SEED = 20240601
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class ConvergenceError(RuntimeError):
    """The eigensolver did not converge; ``energies``/``residuals`` hold the best values."""

    def __init__(self, message: str, energies=None, residuals=None):
        super().__init__(message)
        self.energies = energies
        self.residuals = residuals


class NoMinimumError(RuntimeError):
    pass


@dataclass
class SpectrumResult:
    energies: NDArray[np.float64]
    residuals: NDArray[np.float64]
    mesh: MeshSpec
    params: SystemParams | GeneralizedParams
    count_requested: int
    tolerance: float
    symmetry: list[str] = field(default_factory=list)
    eigenvectors: NDArray[np.float64] | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return bool(np.all(self.residuals <= self.tolerance * np.maximum(1.0, np.abs(self.energies))))


# --- symmetry sectors --------------------------------------------------------

_PERMS = [(0, 1, 2), (1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0), (2, 0, 1)]
_SIGNS = [1, -1, -1, -1, 1, 1]


def _project(sector: str, c: NDArray[np.float64]) -> NDArray[np.float64]:
    if sector == "A1":
        return sum(c.transpose(p) for p in _PERMS) / 6.0
    if sector == "A2":
        return sum(s * c.transpose(p) for s, p in zip(_SIGNS, _PERMS)) / 6.0
    if sector == "E":
        # one row of the two-dimensional representation: symmetric under y <-> z
        c = 0.5 * (c + c.transpose(0, 2, 1))
        return (2.0 * c - c.transpose(1, 2, 0) - c.transpose(2, 0, 1)) / 3.0
    raise ValueError(sector)


def sector_dimension(sector: str, M: int) -> int:
    a1 = math.comb(M + 2, 3)
    a2 = math.comb(M, 3)
    return {"A1": a1, "A2": a2, "E": (M**3 - a1 - a2) // 2}[sector]


SECTOR_WEIGHT = {"A1": 1, "A2": 1, "E": 2}


def _start_vector(op: AssembledOperator, sector: str | None) -> NDArray[np.float64]:
    M = op.mesh.points_per_axis
    v = np.random.default_rng(START_SEED).standard_normal((M, M, M))
    if sector is not None:
        v = _project(sector, v)
    return (v / np.linalg.norm(v)).ravel()


def _residuals(op: AssembledOperator, vals, vecs) -> NDArray[np.float64]:
    out = np.empty(len(vals))
    for n, e in enumerate(vals):
        v = vecs[:, n] / np.linalg.norm(vecs[:, n])
        out[n] = np.linalg.norm(op.matvec(v) - e * v)
    return out


DEFLATION_ROUNDS = 12
DEFLATION_BLOCK = 4
PROBE_TOL = 1e-4


def _arpack(
    op: AssembledOperator,
    k: int,
    tol: float,
    sector: str | None,
    v0: NDArray[np.float64] | None = None,
    maxiter: int | None = None,
    deflate: bool = True,
):
    """Lowest ``k`` eigenpairs of ``op`` (restricted to ``sector``).

    Near-degenerate clusters can leave a single-vector Lanczos run short of
    some cluster members.  After the first run the converged vectors are
    shifted out of the way and the solver is rerun; any eigenvalue that then
    appears below the current ``k``-th value is a missed state and is
    merged in.  The loop stops when a deflated run finds nothing new.
    """
    M = op.mesh.points_per_axis
    n = op.dimension
    shift = float(np.max(op.diagonal()))
    if sector is None:
        avail = n

        def base(v):
            return op.matvec(v)

    else:
        avail = sector_dimension(sector, M)

        def base(v):
            c = v.reshape(M, M, M)
            pc = _project(sector, c)
            hv = _project(sector, op.matvec(pc).reshape(M, M, M))
            return (hv + shift * (c - pc)).ravel()

    k = min(k, avail - 1)
    if k < 1:
        return np.empty(0), np.empty((n, 0))
    if v0 is None:
        v0 = _start_vector(op, sector)
    elif sector is not None:
        v0 = _project(sector, v0.reshape(M, M, M)).ravel()

    def run(matvec, kk, start, rtol=tol):
        lin = LinearOperator((n, n), matvec=matvec, dtype=float)
        ncv = min(n, max(2 * kk + 20, 60))
        try:
            vals, vecs = eigsh(lin, k=kk, which="SA", v0=start, tol=rtol, ncv=ncv, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            vals, vecs = exc.eigenvalues, exc.eigenvectors
            raise ConvergenceError(
                f"ARPACK did not converge in sector {sector}: {len(vals)} of {kk} eigenpairs",
                energies=np.sort(vals),
                residuals=_residuals(op, vals, vecs) if len(vals) else np.empty(0),
            ) from exc
        return vals, vecs

    vals, vecs = run(base, k, v0)
    for _ in range(DEFLATION_ROUNDS if deflate else 0):
        order = np.argsort(vals)[:k]
        vals, vecs = vals[order], vecs[:, order]
        if len(vals) >= avail - 1 - DEFLATION_BLOCK:
            break
        V = vecs

        def deflated(v, V=V):
            return base(v) + shift * (V @ (V.T @ v))

        start = v0 - V @ (V.T @ v0)
        # the probe only has to decide whether anything sits below the
        # cutoff, which a loose residual settles without a full solve
        probe, _ = run(deflated, 1, start, PROBE_TOL)
        if probe[0] > vals[-1] + PROBE_TOL * max(1.0, abs(vals[-1])):
            break
        new_vals, new_vecs = run(deflated, min(DEFLATION_BLOCK, k), start)
        # a residual-level margin keeps converged duplicates from re-entering
        missed = new_vals < vals[-1] - tol * max(1.0, abs(vals[-1]))
        if not np.any(missed):
            break
        add = new_vecs[:, missed]
        add -= V @ (V.T @ add)
        q, _ = np.linalg.qr(add)
        vals = np.concatenate([vals, new_vals[missed]])
        vecs = np.column_stack([vecs, q])
        log.debug("deflation found %d missed state(s) in sector %s", int(missed.sum()), sector)
    order = np.argsort(vals)[:k]
    return vals[order], vecs[:, order]


def _dense(op: AssembledOperator, count: int):
    vals, vecs = np.linalg.eigh(op.to_dense())
    return vals[:count], vecs[:, :count]


def _classify(op: AssembledOperator, vecs) -> list[str]:
    M = op.mesh.points_per_axis
    labels = []
    for n in range(vecs.shape[1]):
        c = vecs[:, n].reshape(M, M, M)
        w = {s: np.linalg.norm(_project(s, c)) for s in ("A1", "A2")}
        best = max(w, key=w.get)
        labels.append(best if w[best] > 0.9 * np.linalg.norm(c) else "E")
    return labels


def lowest_eigenvalues(
    op: AssembledOperator,
    count: int,
    tol: float = DEFAULT_TOL,
    method: str = "auto",
    sectors: Sequence[str] | None = None,
    keep_vectors: bool = False,
    v0: NDArray[np.float64] | None = None,
    deflate: bool = True,
) -> SpectrumResult:
    """The ``count`` algebraically smallest eigenvalues with residual certificates.

    Args:
        op: assembled mesh Hamiltonian.
        count: number of eigenvalues wanted (multiplicities counted).
        tol: residual tolerance, ``||Hv - Ev|| <= tol * max(1, |E|)``.
        method: ``"dense"``, ``"lanczos"`` or ``"auto"`` (dense up to
            dimension 2000).
        sectors: restrict the Lanczos run to some of ``("A1", "A2", "E")``;
            the result then holds the lowest states of those sectors only.
        keep_vectors: attach eigenvectors to the result.
        v0: optional start vector (e.g. from a neighbouring solve).
        deflate: rerun Lanczos with converged vectors shifted away to catch
            missed members of near-degenerate clusters.

    Raises:
        ConvergenceError: ARPACK exhausted its iteration budget, or a
            returned pair fails the residual certificate.
    """
    if count < 1 or count > op.dimension:
        raise ValueError(f"count must lie in 1..{op.dimension}")
    if tol < 1e-13:
        raise ValueError("tol below 1e-13 is not supported")
    if method == "auto":
        method = "dense" if op.dimension <= DENSE_DIMENSION and sectors is None else "lanczos"

    if method == "dense":
        vals, vecs = _dense(op, count)
        symmetry = _classify(op, vecs) if op.is_permutation_symmetric else ["-"] * count
    elif method == "lanczos":
        if op.is_permutation_symmetric:
            vals, vecs, symmetry = _sector_solve(
                op, count, tol, tuple(sectors or ("A1", "A2", "E")), v0, deflate
            )
        else:
            k = min(op.dimension - 1, count + max(4, count // 4))
            vals, vecs = _arpack(op, k, tol, None, v0, deflate=deflate)
            vals, vecs = vals[:count], vecs[:, :count]
            symmetry = ["-"] * len(vals)
    else:
        raise ValueError(f"unknown method {method!r}")

    res = _residuals(op, vals, vecs)
    result = SpectrumResult(
        energies=np.asarray(vals),
        residuals=res,
        mesh=op.mesh,
        params=op.params,
        count_requested=count,
        tolerance=tol,
        symmetry=symmetry,
        eigenvectors=vecs if keep_vectors else None,
    )
    if method == "lanczos" and not result.converged:
        raise ConvergenceError(
            f"residual certificate failed (max {res.max():.3e})", energies=result.energies, residuals=res
        )
    return result


def _sector_solve(op, count, tol, sectors, v0, deflate=True):
    M = op.mesh.points_per_axis
    weight = {s: SECTOR_WEIGHT[s] for s in sectors}
    share = sum(weight.values())
    k = {s: min(sector_dimension(s, M) - 1, math.ceil(count / share) + 3) for s in sectors}
    found: dict[str, tuple] = {}
    while True:
        for s in sectors:
            if s not in found or len(found[s][0]) < k[s]:
                found[s] = _arpack(op, k[s], tol, s, v0, deflate=deflate)
        merged = sorted(
            (e, s, n) for s in sectors for n, e in enumerate(found[s][0]) for _ in range(weight[s])
        )
        if len(merged) < count:
            grow = [s for s in sectors if k[s] < sector_dimension(s, M) - 1]
            if not grow:
                raise ConvergenceError("sectors exhausted before reaching count")
            for s in grow:
                k[s] = min(sector_dimension(s, M) - 1, k[s] + max(2, count // 4))
            continue
        cutoff = merged[count - 1][0]
        short = [
            s
            for s in sectors
            if len(found[s][0]) < sector_dimension(s, M) - 1 and found[s][0][-1] <= cutoff
        ]
        if not short:
            break
        for s in short:
            k[s] = min(sector_dimension(s, M) - 1, k[s] + max(2, count // 4))
    merged = merged[:count]
    vals = np.array([e for e, _, _ in merged])
    vecs = np.column_stack([found[s][1][:, n] for _, s, n in merged])
    return vals, vecs, [s for _, s, _ in merged]


# --- labeling ----------------------------------------------------------------


@dataclass(frozen=True)
class LevelRow:
    N: int
    n: int
    energy: float
    multiplicity: int
    residual: float = 0.0
    symmetry: str = ""


@dataclass
class LevelTable:
    rows: list[LevelRow]
    params: SystemParams | GeneralizedParams | None = None
    mesh: MeshSpec | None = None
    complete_levels: tuple[int, ...] = ()
    ambiguous: bool = False

    def energy(self, N: int, n: int) -> float:
        for row in self.rows:
            if row.N == N and row.n == n:
                return row.energy
        raise KeyError((N, n))

    def multiplicities(self, N: int) -> tuple[int, ...]:
        return tuple(r.multiplicity for r in self.rows if r.N == N)


def label_levels(res: SpectrumResult, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> LevelTable:
    """Group eigenvalues into degenerate clusters and attach ``(N, n)`` labels.

    States are assigned to ``N`` by counting against the ``R = 0``
    multiplicities ``1, 3, 6, 10, ...``.  A cluster that straddles two such
    blocks, or a gap within ten times ``cluster_tol``, sets ``ambiguous`` and
    logs a warning.
    """
    E = np.asarray(res.energies)
    clusters: list[list[int]] = []
    ambiguous = False
    for idx in range(len(E)):
        if clusters:
            gap = (E[idx] - E[idx - 1]) / max(abs(E[idx]), 1e-300)
            if gap < cluster_tol:
                clusters[-1].append(idx)
                continue
            if gap < 10 * cluster_tol:
                ambiguous = True
                log.warning("gap %.3e between states %d and %d is close to cluster_tol", gap, idx - 1, idx)
        clusters.append([idx])

    rows: list[LevelRow] = []
    complete = []
    N, used, n = 0, 0, 0
    for cl in clusters:
        if used >= degeneracy(N):
            complete.append(N)
            N, used, n = N + 1, 0, 0
        if used + len(cl) > degeneracy(N):
            ambiguous = True
            log.warning("cluster of %d states at E=%.12g straddles level N=%d", len(cl), E[cl[0]], N)
        sym = {res.symmetry[i] for i in cl} if res.symmetry else set()
        rows.append(
            LevelRow(
                N=N,
                n=n,
                energy=float(np.mean(E[cl])),
                multiplicity=len(cl),
                residual=float(np.max(res.residuals[cl])),
                symmetry="/".join(sorted(sym)),
            )
        )
        used += len(cl)
        n += 1
    if used == degeneracy(N):
        complete.append(N)
    return LevelTable(rows, res.params, res.mesh, tuple(complete), ambiguous)


# --- mesh scale ---------------------------------------------------------------

#: Extent of the mesh in units of the oscillator length beyond the rest length.
EXTENT_OSCILLATOR = 16.0
EXTENT_REST = 2.0


def _effective(params: SystemParams | GeneralizedParams) -> tuple[float, float]:
    if isinstance(params, GeneralizedParams):
        nus = [n for n in (params.nu12, params.nu13, params.nu23) if n > 0]
        return (min(nus) if nus else 1.0) * params.omega, max(params.R12, params.R13, params.R23)
    return params.mass * params.omega, params.rest_length


def default_scale(params: SystemParams | GeneralizedParams, M: int) -> float:
    """Mesh scale placing the last node at ``2R + 16/sqrt(3 m omega)``."""
    mw, R = _effective(params)
    x_max = gauss_laguerre_rule(M).nodes[-1]
    return (EXTENT_REST * R + EXTENT_OSCILLATOR / math.sqrt(3.0 * mw)) / x_max


def auto_mesh(params: SystemParams | GeneralizedParams, M: int, scale: float | None = None) -> MeshSpec:
    return MeshSpec(M, default_scale(params, M) if scale is None else scale)


# --- drivers -----------------------------------------------------------------

DEFAULT_M = 24


def solve(
    params: SystemParams | GeneralizedParams,
    count: int,
    M: int = DEFAULT_M,
    scale: float | None = None,
    tol: float = DEFAULT_TOL,
    method: str = "auto",
    **kwargs,
) -> SpectrumResult:
    mesh = auto_mesh(params, M, scale)
    op = assemble(mesh, gauss_laguerre_rule(M), params)
    return lowest_eigenvalues(op, count, tol, method, **kwargs)


def ground_energy(
    params: SystemParams,
    M: int = DEFAULT_M,
    scale: float | None = None,
    tol: float = DEFAULT_TOL,
) -> float:
    """Lowest eigenvalue; the nodeless ground state lies in the symmetric sector."""
    res = solve(params, 1, M, scale, tol, method="lanczos", sectors=("A1",), deflate=False)
    return float(res.energies[0])


def _scan_point(args) -> LevelTable:
    params, M, scale, count, tol, cluster_tol = args
    return label_levels(solve(params, count, M, scale, tol), cluster_tol)


def worker_count() -> int:
    return max(1, int(os.environ.get("HARMONIC_TRIMER_WORKERS", "1")))


def energy_scan(
    base: SystemParams,
    R_values: Iterable[float],
    M: int = DEFAULT_M,
    scale: float | None = None,
    count: int = 20,
    tol: float = DEFAULT_TOL,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    workers: int | None = None,
) -> list[LevelTable]:
    """One labeled level table per rest length (the scale is re-fitted per point)."""
    jobs = [(replace(base, rest_length=float(R)), M, scale, count, tol, cluster_tol) for R in R_values]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(jobs) <= 1:
        return [_scan_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_scan_point, jobs))


def golden_section(
    f: Callable[[float], float], lo: float, hi: float, tol: float, maxiter: int = 200
) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on ``[lo, hi]`` to an interval of width ``tol``."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(maxiter):
        if b - a <= tol:
            break
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


#: Residual tolerance for the minimum search.  The eigenvalue error is bounded
#: by ``|r|^2 / gap``, so this still resolves E to far below 1e-10.
GROUND_TOL = 1e-7


def find_minimum(
    omega: float,
    bracket: tuple[float, float],
    M: int = DEFAULT_M,
    tol_R: float = 1e-6,
    mass: float = 1.0,
    coarse_step: float = 0.25,
    tol: float = GROUND_TOL,
) -> tuple[float, float]:
    """Rest length minimizing the ground-state energy, and that energy.

    A coarse scan (step ``coarse_step``) over the bracket locates the lowest
    grid point, which must be interior; golden-section search then refines
    ``R`` on the two neighbouring intervals.  The mesh scale is re-fitted at
    every ``R``.
    """
    lo, hi = bracket
    if not hi > lo >= 0:
        raise ValueError("bracket must satisfy 0 <= lo < hi")
    cache: dict[float, float] = {}

    def energy(R: float) -> float:
        if R not in cache:
            cache[R] = ground_energy(SystemParams(mass, omega, R), M, tol=tol)
        return cache[R]

    n = max(2, math.ceil((hi - lo) / coarse_step))
    grid = np.linspace(lo, hi, n + 1)
    values = [energy(float(R)) for R in grid]
    best = int(np.argmin(values))
    if best in (0, len(grid) - 1):
        raise NoMinimumError(f"ground-state energy has no interior minimum in [{lo}, {hi}]")
    return golden_section(energy, float(grid[best - 1]), float(grid[best + 1]), tol_R)


def scale_energy(
    E: float, source: SystemParams, to_mass: float, to_omega: float
) -> tuple[float, float]:
    """Map ``E[m, omega, R]`` to the system ``(m', omega')``.

    Returns ``(E', R')`` with ``E = (omega / omega') E'`` and
    ``R' = sqrt(m omega / (m' omega')) R``.
    """
    factor = source.mass * source.omega / (to_mass * to_omega)
    return E * to_omega / source.omega, math.sqrt(factor) * source.rest_length


@dataclass(frozen=True)
class ConvergenceRow:
    M: int
    scale: float
    energies: tuple[float, ...]
    stable_digits: float | None


def convergence_study(
    params: SystemParams | GeneralizedParams,
    M_list: Sequence[int],
    scales: Sequence[float | None] | None = None,
    count: int = 1,
    tol: float = DEFAULT_TOL,
) -> list[ConvergenceRow]:
    """Energies on a grid of ``(M, h)``; ``None`` scales use :func:`default_scale`.

    ``stable_digits`` compares each row with the previous row of the same scale
    entry: ``-log10(max |dE| / |E|)``.
    """
    scales = list(scales) if scales is not None else [None]
    rows = []
    for s in scales:
        prev = None
        for M in M_list:
            res = solve(params, count, M, s, tol)
            E = tuple(float(e) for e in res.energies)
            digits = None
            if prev is not None:
                rel = max(abs(a - b) / abs(a) for a, b in zip(E, prev))
                digits = float("inf") if rel == 0 else -math.log10(rel)
            rows.append(ConvergenceRow(M, res.mesh.scale, E, digits))
            prev = E
    return rows
