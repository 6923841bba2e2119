"""Command-line front end.

Every subcommand writes one table, either CSV (``# key=value`` metadata lines,
a header, then rows) or JSON (``{"command", "metadata", "columns", "rows"}``).
Floats are written with 12 significant digits, so identical inputs give
byte-identical output.

Settings can also come from an INI file given with ``--config``: the
``[common]`` section applies to every subcommand, a section named after the
subcommand overrides it, and command-line flags override both.  Keys are the
long flag names (``omega``, ``R``, ``states``, ``h``, ...).

Exit codes: 0 success, 1 other failure, 2 usage error, 3 solver did not
converge, 4 resource envelope exceeded.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import _backend
from .approx import VARIATIONAL_M, UnresolvedTrialError, optimize_variational, pt_ground_energy, pt_stationary_point
from .exact import degeneracy, energy_level, enumerate_labels, split_count
from .geometry import GeneralizedParams, SystemParams
from .hamiltonian import ResourceEnvelopeError
from .mesh import MAX_ORDER, MeshSpec, gauss_laguerre_rule
from .spectrum import (
    DEFAULT_CLUSTER_TOL,
    DEFAULT_M,
    DEFAULT_TOL,
    GROUND_TOL,
    ConvergenceError,
    NoMinimumError,
    auto_mesh,
    convergence_study,
    energy_scan,
    find_minimum,
    ground_energy,
    label_levels,
    solve,
)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_ENVELOPE = 0, 1, 2, 3, 4

COMMANDS = ("exact", "spectrum", "scan", "minimize", "variational", "pt", "convergence", "quadrature-dump", "table3")

TABLE3_OMEGA = 0.5
TABLE3_R = tuple(0.5 * k for k in range(9))
TABLE3_STATES = 20


class UsageError(ValueError):
    pass


def fmt(x: Any) -> str:
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else f"{float(x):.12g}"
    return str(x)


# --- configuration --------------------------------------------------------------


@dataclass
class RunConfig:
    command: str
    params: SystemParams | GeneralizedParams
    mesh: MeshSpec | str
    M: int
    count: int
    tol: float
    cluster_tol: float
    output: str | None = None
    fmt: str = "csv"
    workers: int | None = None
    extra: dict[str, Any] = field(default_factory=dict)


# flag name -> (type, default); ``None`` default means "required by some command"
_OPTIONS: dict[str, tuple[Any, Any]] = {
    "mass": (float, 1.0),
    "omega": (float, 1.0),
    "R": (float, 0.0),
    "M": (int, DEFAULT_M),
    "h": (str, "auto"),
    "states": (int, 20),
    "tol": (float, DEFAULT_TOL),
    "cluster-tol": (float, DEFAULT_CLUSTER_TOL),
    "format": (str, "csv"),
    "output": (str, None),
    "workers": (int, None),
    "N": (int, 0),
    "R-values": (str, None),
    "R-range": (str, None),
    "bracket": (str, "1.0 3.0"),
    "tol-R": (float, 1e-6),
    "M-list": (str, "12 16 20 24"),
    "h-list": (str, "auto"),
    "compare": (str, "no"),
    "generalized": (str, None),
}


def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"{key}: expected numbers, got {text!r}") from None


def _bool(text: str, key: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise UsageError(f"{key}: expected yes/no, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmonic-trimer", description="S-state spectrum of the harmonic trimer.")
    parser.add_argument("--config", help="INI file with [common] and per-command sections")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_, *keys):
        p = sub.add_parser(name, help=help_)
        for key in ("format", "output") + keys:
            dest = key.replace("-", "_")
            kw: dict[str, Any] = {"dest": dest, "default": None}
            if key in ("bracket", "R-values", "M-list", "h-list", "R-range", "generalized"):
                kw["nargs"] = "+"
            elif key == "compare":
                kw["action"] = "store_const"
                kw["const"] = "yes"
            else:
                kw["type"] = str
            p.add_argument(f"--{key}", **kw)
        return p

    phys = ("mass", "omega", "M", "h", "tol", "workers")
    add("exact", "closed-form levels and quantum-number tables at R = 0", "N", "omega")
    add("spectrum", "lowest eigenvalues with (N, n) labels", *phys, "R", "states", "cluster-tol", "generalized")
    add("scan", "labeled spectra over a grid of rest lengths", *phys, "R-values", "R-range", "states", "cluster-tol")
    add("minimize", "rest length minimizing the ground-state energy", "mass", "omega", "M", "tol", "bracket", "tol-R")
    add("variational", "optimal two-parameter trial energies", "mass", "omega", "M", "h", "tol", "R", "R-values")
    add("pt", "first-order perturbative ground-state energy", "mass", "omega", "M", "R", "R-values", "compare")
    add("convergence", "energies over a grid of mesh sizes and scales", *phys, "R", "states", "M-list", "h-list")
    add("quadrature-dump", "Gauss-Laguerre nodes and weights", "M")
    add("table3", "lowest 20 levels at omega = 0.5 for R = 0, 0.5, ..., 4", "M", "tol", "workers", "cluster-tol")
    return parser


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    """Merge defaults, the config file and flags into a validated :class:`RunConfig`."""
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise UsageError("invalid command line") from exc
    cmd = ns.command
    values: dict[str, Any] = {}
    if ns.config:
        cp = configparser.ConfigParser()
        cp.optionxform = str  # keys are case sensitive (R vs r)
        if not cp.read(ns.config):
            raise UsageError(f"config: cannot read {ns.config!r}")
        for section in ("common", cmd):
            if cp.has_section(section):
                for key, val in cp.items(section):
                    if key not in _OPTIONS:
                        raise UsageError(f"config [{section}]: unknown key {key!r}")
                    values[key] = val
        unknown = [s for s in cp.sections() if s != "common" and s not in COMMANDS]
        if unknown:
            raise UsageError(f"config: unknown section [{unknown[0]}]")
    for key in _OPTIONS:
        v = getattr(ns, key.replace("-", "_"), None)
        if v is not None:
            values[key] = " ".join(v) if isinstance(v, list) else v

    def get(key):
        typ, default = _OPTIONS[key]
        raw = values.get(key, default)
        if raw is None or typ is str:
            return raw
        try:
            return typ(raw)
        except ValueError:
            raise UsageError(f"{key}: cannot parse {raw!r} as {typ.__name__}") from None

    mass, omega, R = get("mass"), get("omega"), get("R")
    for key, v in (("mass", mass), ("omega", omega)):
        if not v > 0:
            raise UsageError(f"{key} must be positive, got {v}")
    if not R >= 0:
        raise UsageError(f"R must be non-negative, got {R}")
    M = get("M")
    if M < 2:
        raise UsageError(f"M must be at least 2, got {M}")
    if M > MAX_ORDER:
        raise ResourceEnvelopeError(f"M={M} exceeds the supported envelope M <= {MAX_ORDER}")
    count, tol, ctol = get("states"), get("tol"), get("cluster-tol")
    if cmd == "minimize" and "tol" not in values:
        tol = GROUND_TOL
    if count < 1:
        raise UsageError(f"states must be positive, got {count}")
    if not 1e-13 <= tol < 1:
        raise UsageError(f"tol must lie in [1e-13, 1), got {tol}")
    if not ctol > 0:
        raise UsageError(f"cluster-tol must be positive, got {ctol}")
    fmt_ = get("format")
    if fmt_ not in ("csv", "json"):
        raise UsageError(f"format must be csv or json, got {fmt_!r}")
    workers = get("workers")
    if workers is not None and workers < 1:
        raise UsageError(f"workers must be positive, got {workers}")

    params: SystemParams | GeneralizedParams = SystemParams(mass, omega, R)
    gen = get("generalized")
    if gen is not None:
        g = _floats(gen, "generalized")
        if len(g) != 6:
            raise UsageError("generalized: expected nu12 nu13 nu23 R12 R13 R23")
        if "mass" in values:
            raise UsageError("generalized: mass is fixed to 1 for per-pair couplings")
        try:
            params = GeneralizedParams(*g, omega=omega)
        except ValueError as exc:
            raise UsageError(f"generalized: {exc}") from None

    h = get("h")
    if h == "auto":
        mesh: MeshSpec | str = "auto"
    else:
        try:
            mesh = MeshSpec(M, float(h))
        except ValueError:
            raise UsageError(f"h must be 'auto' or a positive number, got {h!r}") from None

    extra: dict[str, Any] = {}
    if cmd == "exact":
        extra["N"] = get("N")
        if extra["N"] < 0:
            raise UsageError("N must be non-negative")
    if cmd in ("scan", "variational", "pt"):
        Rs: list[float] = []
        if get("R-values") is not None:
            Rs += _floats(get("R-values"), "R-values")
        if cmd == "scan" and get("R-range") is not None:
            lo, hi, step = (_floats(get("R-range"), "R-range") + [math.nan] * 3)[:3]
            if not (hi >= lo >= 0 and step > 0):
                raise UsageError("R-range: expected 'start stop step' with 0 <= start <= stop, step > 0")
            Rs += list(np.round(np.arange(lo, hi + 0.5 * step, step), 12))
        if not Rs:
            if cmd == "scan":
                raise UsageError("scan requires R-values or R-range")
            Rs = [R]
        if min(Rs) < 0:
            raise UsageError("R-values must be non-negative")
        extra["R_values"] = [float(r) for r in Rs]
    if cmd == "variational":
        extra["M_variational"] = M if "M" in values else VARIATIONAL_M
    if cmd in ("variational", "pt"):
        extra["compare"] = cmd == "variational" or _bool(get("compare"), "compare")
    if cmd == "minimize":
        b = _floats(get("bracket"), "bracket")
        if len(b) != 2 or not b[1] > b[0] >= 0:
            raise UsageError("bracket: expected 'lo hi' with 0 <= lo < hi")
        extra["bracket"] = (b[0], b[1])
        extra["tol_R"] = get("tol-R")
        if not extra["tol_R"] > 0:
            raise UsageError("tol-R must be positive")
    if cmd == "convergence":
        Ms = [int(m) for m in _floats(get("M-list"), "M-list")]
        if min(Ms) < 2:
            raise UsageError("M-list: orders must be at least 2")
        if max(Ms) > MAX_ORDER:
            raise ResourceEnvelopeError(f"M={max(Ms)} exceeds the supported envelope M <= {MAX_ORDER}")
        hs: list[float | None] = []
        for t in get("h-list").replace(",", " ").split():
            if t == "auto":
                hs.append(None)
            else:
                v = _floats(t, "h-list")[0]
                if not v > 0:
                    raise UsageError("h-list: scales must be positive")
                hs.append(v)
        extra["M_list"], extra["h_list"] = Ms, hs
    if cmd in ("spectrum", "scan", "convergence") and count > M**3:
        raise UsageError(f"states={count} exceeds the basis size {M**3}")

    return RunConfig(cmd, params, mesh, M, count, tol, ctol, get("output"), fmt_, workers, extra)


# --- output -------------------------------------------------------------------


def _params_meta(p: SystemParams | GeneralizedParams) -> dict[str, Any]:
    if isinstance(p, GeneralizedParams):
        return {k: getattr(p, k) for k in ("omega", "nu12", "nu13", "nu23", "R12", "R13", "R23")}
    return {"mass": p.mass, "omega": p.omega, "R": p.rest_length}


def render(command: str, meta: dict[str, Any], columns: Sequence[str], rows: Sequence[Sequence[Any]], fmt_: str) -> str:
    if fmt_ == "json":
        def num(x):
            if isinstance(x, (float, np.floating)):
                return None if math.isnan(x) else float(fmt(x))
            return x.item() if isinstance(x, np.generic) else x

        doc = {
            "command": command,
            "metadata": {k: num(v) for k, v in meta.items()},
            "columns": list(columns),
            "rows": [{c: num(v) for c, v in zip(columns, r)} for r in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}={fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


# --- commands -------------------------------------------------------------------


def _mesh_meta(mesh: MeshSpec, tol: float) -> dict[str, Any]:
    return {"M": mesh.points_per_axis, "h": mesh.scale, "tol": tol, "backend": _backend.BACKEND}


def _scale(cfg: RunConfig) -> float | None:
    return cfg.mesh.scale if isinstance(cfg.mesh, MeshSpec) else None


def _cmd_exact(cfg: RunConfig):
    N, w = cfg.extra["N"], cfg.params.omega
    meta = {"N": N, "omega": w, "E": energy_level(N, w), "degeneracy": degeneracy(N), "split_bound": split_count(N)}
    rows = [(jl.n1, jl.n2, jl.l, rl.N1, rl.N2, rl.N3) for jl, rl in enumerate_labels(N)]
    return meta, ("n1", "n2", "l", "N1", "N2", "N3"), rows


def _level_rows(table, R=None):
    lead = () if R is None else (R,)
    return [lead + (r.N, r.n, r.energy, r.multiplicity, r.residual, r.symmetry) for r in table.rows]


_LEVEL_COLUMNS = ("N", "n", "E", "multiplicity", "residual", "symmetry")


def _cmd_spectrum(cfg: RunConfig):
    res = solve(cfg.params, cfg.count, cfg.M, _scale(cfg), cfg.tol)
    table = label_levels(res, cfg.cluster_tol)
    meta = {**_params_meta(cfg.params), **_mesh_meta(res.mesh, cfg.tol), "states": cfg.count,
            "cluster_tol": cfg.cluster_tol, "ambiguous": int(table.ambiguous)}
    return meta, _LEVEL_COLUMNS, _level_rows(table)


def _cmd_scan(cfg: RunConfig):
    base = cfg.params
    tables = energy_scan(base, cfg.extra["R_values"], cfg.M, _scale(cfg), cfg.count, cfg.tol,
                         cfg.cluster_tol, cfg.workers)
    rows = []
    for R, t in zip(cfg.extra["R_values"], tables):
        rows += [(R, t.mesh.scale) + row for row in _level_rows(t)]
    meta = {"mass": base.mass, "omega": base.omega, "M": cfg.M, "h": "auto" if cfg.mesh == "auto" else cfg.mesh.scale,
            "tol": cfg.tol, "states": cfg.count, "cluster_tol": cfg.cluster_tol, "backend": _backend.BACKEND}
    return meta, ("R", "h") + _LEVEL_COLUMNS, rows


def _cmd_minimize(cfg: RunConfig):
    p = cfg.params
    R, E = find_minimum(p.omega, cfg.extra["bracket"], cfg.M, cfg.extra["tol_R"], p.mass, tol=cfg.tol)
    meta = {"mass": p.mass, "omega": p.omega, "M": cfg.M, "h": "auto", "tol": cfg.tol,
            "bracket_lo": cfg.extra["bracket"][0], "bracket_hi": cfg.extra["bracket"][1], "tol_R": cfg.extra["tol_R"],
            "pt_stationary_point": pt_stationary_point(p.omega, p.mass)}
    return meta, ("R_min", "E_min"), [(R, E)]


def _cmd_variational(cfg: RunConfig):
    p = cfg.params
    rows = []
    for R in cfg.extra["R_values"]:
        q = SystemParams(p.mass, p.omega, R)
        vr = optimize_variational(q, auto_mesh(q, cfg.extra["M_variational"], _scale(cfg)))
        E_mesh = ground_energy(q, DEFAULT_M, tol=cfg.tol)
        rows.append((R, vr.energy, vr.params.alpha, vr.params.beta, E_mesh, (vr.energy - E_mesh) / E_mesh))
    meta = {"mass": p.mass, "omega": p.omega, "M_variational": cfg.extra["M_variational"],
            "M_mesh": DEFAULT_M, "h": "auto" if cfg.mesh == "auto" else cfg.mesh.scale, "tol": cfg.tol}
    return meta, ("R", "E", "alpha", "beta", "E_mesh", "RE"), rows


def _cmd_pt(cfg: RunConfig):
    p = cfg.params
    meta = {"mass": p.mass, "omega": p.omega, "stationary_point": pt_stationary_point(p.omega, p.mass)}
    if not cfg.extra["compare"]:
        return meta, ("R", "E"), [(R, pt_ground_energy(p.omega, R, p.mass)) for R in cfg.extra["R_values"]]
    rows = []
    for R in cfg.extra["R_values"]:
        E = pt_ground_energy(p.omega, R, p.mass)
        E_mesh = ground_energy(SystemParams(p.mass, p.omega, R), cfg.M, tol=cfg.tol)
        rows.append((R, E, E_mesh, (E - E_mesh) / E_mesh))
    meta.update(M=cfg.M, h="auto", tol=cfg.tol)
    return meta, ("R", "E", "E_mesh", "RE"), rows


def _cmd_convergence(cfg: RunConfig):
    study = convergence_study(cfg.params, cfg.extra["M_list"], cfg.extra["h_list"], cfg.count, cfg.tol)
    rows = []
    for r in study:
        digits = math.nan if r.stable_digits is None else min(r.stable_digits, 99.0)
        rows += [(r.M, r.scale, k, e, digits) for k, e in enumerate(r.energies)]
    meta = {**_params_meta(cfg.params), "tol": cfg.tol, "states": cfg.count}
    return meta, ("M", "h", "state", "E", "stable_digits"), rows


def _cmd_quadrature(cfg: RunConfig):
    rule = gauss_laguerre_rule(cfg.M)
    rows = [(i, x, w, lam) for i, (x, w, lam) in enumerate(zip(rule.nodes, rule.weights, rule.mesh_weights))]
    return {"M": cfg.M}, ("i", "node", "weight", "mesh_weight"), rows


def _cmd_table3(cfg: RunConfig):
    base = SystemParams(1.0, TABLE3_OMEGA, 0.0)
    tables = energy_scan(base, TABLE3_R, cfg.M, None, TABLE3_STATES, cfg.tol, cfg.cluster_tol, cfg.workers)
    # one row per state, labeled by its (N, n) at every R
    rows = []
    labels = [[(r.N, r.n) for r in t.rows for _ in range(r.multiplicity)] for t in tables]
    energies = [[r.energy for r in t.rows for _ in range(r.multiplicity)] for t in tables]
    for k in range(TABLE3_STATES):
        rows.append((k,) + tuple(f"{lab[k][0]},{lab[k][1]}" for lab in labels) + tuple(e[k] for e in energies))
    columns = ("state",) + tuple(f"Nn_R{R:g}" for R in TABLE3_R) + tuple(f"E_R{R:g}" for R in TABLE3_R)
    meta = {"mass": 1.0, "omega": TABLE3_OMEGA, "M": cfg.M, "h": "auto", "tol": cfg.tol, "cluster_tol": cfg.cluster_tol}
    return meta, columns, rows


_DISPATCH = {
    "exact": _cmd_exact,
    "spectrum": _cmd_spectrum,
    "scan": _cmd_scan,
    "minimize": _cmd_minimize,
    "variational": _cmd_variational,
    "pt": _cmd_pt,
    "convergence": _cmd_convergence,
    "quadrature-dump": _cmd_quadrature,
    "table3": _cmd_table3,
}


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute ``cfg``; returns the process exit code."""
    stdout = sys.stdout if stdout is None else stdout
    if cfg.workers is not None:
        import os

        os.environ["HARMONIC_TRIMER_WORKERS"] = str(cfg.workers)
    try:
        meta, columns, rows = _DISPATCH[cfg.command](cfg)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ResourceEnvelopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENVELOPE
    except (NoMinimumError, UnresolvedTrialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    text = render(cfg.command, meta, columns, rows, cfg.fmt)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO if ("-v" in args or "--verbose" in args) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args)
    except UsageError as exc:
        if str(exc) != "invalid command line":
            print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceEnvelopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ENVELOPE
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
