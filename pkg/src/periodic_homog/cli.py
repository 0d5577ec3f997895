"""Command-line entry point.

Commands: ``density``, ``cell``, ``envelope``, ``sweep``, ``hyper``, ``report``.
Every output table starts with a provenance line carrying the config hash,
the seed and library versions; there are no timestamps, so reruns with
the same config and seed are byte-identical. Files are written to a
temporary name and renamed, so failures leave no partial output.

Exit codes: 1 configuration error, 2 infeasible input, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy
import yaml
from joblib import Parallel, delayed
from pydantic import ValidationError

from .cell_problem import cell_solves, duality_1d_oracle
from .config import RunConfig, load_config
from .envelopes import default_ladder, laminate_bound, radial_limit, zf_discrete
from .exceptions import (
    DimensionMismatch,
    InfeasibleMacroGradient,
    NotCompactlyContained,
    PreconditionError,
    ProjectionNotConverged,
    TilingMismatch,
    UndecidedLimit,
)
from .estimators import DensityTable
from .gamma_sweep import DomainMesh, sweep
from .hyperelastic import (
    blowup_probe,
    det_positivity_check,
    hyperelastic_integrand,
    polar_grid,
    shifted_integrand,
    whom_hyper,
)
from .integrand import SampleConfig, assumption_report

EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SOLVER = 1, 2, 3


class ConfigError(Exception):
    pass


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def fmt(v):
    """Extended-real aware formatting; infinities become ``+inf``/``-inf``."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "+inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)) and not math.isfinite(float(v)):
        return fmt(v)
    if isinstance(v, np.generic):
        return v.item()
    return v


class Output:
    """Collects tables and writes them atomically once every command step succeeded."""

    def __init__(self, out_dir: Path, fmt_name: str, header: dict):
        self.out_dir = out_dir
        self.format = fmt_name
        self.header = header
        self.tables = []

    def table(self, name, rows, columns=None):
        if rows and columns is None:
            columns = list(rows[0].keys())
        self.tables.append((name, rows, columns or []))

    def _render(self, rows, columns):
        if self.format == "csv":
            head = "# " + " ".join(f"{k}={v}" for k, v in self.header.items())
            lines = [head, ",".join(columns)]
            lines += [",".join(fmt(r.get(c)) for c in columns) for r in rows]
            return "\n".join(lines) + "\n"
        lines = [json.dumps({"provenance": self.header}, sort_keys=True)]
        lines += [json.dumps({c: _json_value(r.get(c)) for c in columns}) for r in rows]
        return "\n".join(lines) + "\n"

    def flush(self):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        ext = "csv" if self.format == "csv" else "jsonl"
        written = []
        for name, rows, columns in self.tables:
            path = self.out_dir / f"{name}.{ext}"
            _atomic_write(path, self._render(rows, columns))
            written.append(path)
        return written


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _xi_columns(xi, prefix="xi"):
    return {f"{prefix}_{k}": float(v) for k, v in enumerate(np.asarray(xi, dtype=float).ravel())}


def _matrix(v, shape):
    a = np.asarray(v, dtype=float)
    if a.size != shape[0] * shape[1]:
        raise ConfigError(f"expected {shape[0] * shape[1]} entries, got {a.size}")
    return a.reshape(shape)


def _need(cfg: RunConfig, section):
    if getattr(cfg, section) is None:
        raise ConfigError(f"config has no '{section}' section")
    return getattr(cfg, section)


def _integrand(cfg: RunConfig, base_dir):
    if cfg.integrand is None:
        raise ConfigError("config has no 'integrand' section")
    try:
        return cfg.integrand.build(base_dir)
    except (ValueError, DimensionMismatch, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def _map(fn, items, threads):
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    return Parallel(n_jobs=threads, prefer="threads")(delayed(fn)(x) for x in items)


def cmd_density(cfg: RunConfig, out: Output, threads, base_dir):
    W = _integrand(cfg, base_dir)
    sec = _need(cfg, "density")
    X = np.array([_matrix(v, W.shape).ravel() for v in sec.xi])
    report = assumption_report(W, SampleConfig(seed=cfg.seed))
    truncations = tuple(sec.truncations)
    if report.schedule is None:
        print("note: no truncation schedule passes the shell bound; W_n columns omitted", file=sys.stderr)
        truncations = ()
    elif truncations and max(truncations) > len(report.schedule):
        raise ConfigError(f"the certified schedule has only {len(report.schedule)} levels")
    est = DensityTable(W, sec.x, truncations, report.schedule).fit(X)
    vals = est.transform(X)
    names = est.get_feature_names_out()
    gauges = W.gauge(X.reshape(-1, *W.shape))
    rows = []
    for k, xi in enumerate(X):
        row = _xi_columns(xi)
        row["gauge"] = float(gauges[k])
        row.update({n: float(v) for n, v in zip(names, vals[k])})
        rows.append(row)
    out.table("density", rows)


def cmd_cell(cfg: RunConfig, out: Output, threads, base_dir):
    W = _integrand(cfg, base_dir)
    sec = _need(cfg, "cell")
    solver = cfg.solver.build(cfg.seed)
    xis = [_matrix(v, W.shape) for v in sec.xi]
    results = _map(lambda xi: cell_solves(W, xi, sec.n_max, solver, sec.resolution), xis, threads)
    rows = []
    for xi, res in zip(xis, results):
        for r in res:
            rows.append({**_xi_columns(xi), "kind": "cell", "n": r.n_used, "value": r.value,
                         "iterations": r.diagnostics["iterations"]})
        rows.append({**_xi_columns(xi), "kind": "hW", "n": max(r.n_used for r in res),
                     "value": min(r.value for r in res), "iterations": sum(r.diagnostics["iterations"] for r in res)})
        if sec.oracle:
            rows.append({**_xi_columns(xi), "kind": "oracle", "n": None, "value": duality_1d_oracle(W, xi),
                         "iterations": None})
    out.table("cell", rows)


def cmd_envelope(cfg: RunConfig, out: Output, threads, base_dir):
    W = _integrand(cfg, base_dir)
    f = W.kernel
    sec = _need(cfg, "envelope")
    solver = cfg.solver.build(cfg.seed)
    xis = [_matrix(v, f.shape) for v in sec.xi]

    def one(xi):
        zd = zf_discrete(f, xi, sec.resolution, solver)
        lb = laminate_bound(f, xi, sec.depth)
        return zd, lb

    results = _map(one, xis, threads)
    rows = []
    for xi, (zd, lb) in zip(xis, results):
        fx = float(f._value(xi[None])[0])
        rows.append({**_xi_columns(xi), "method": zd.method, "value": zd.value, "refinement": sec.resolution, "f": fx})
        rows.append({**_xi_columns(xi), "method": lb.method, "value": lb.value, "refinement": sec.depth, "f": fx})
    out.table("envelope", rows)
    if sec.radial is not None:
        ladder = default_ladder(sec.radial.ladder_depth)
        prow, srow = [], []
        for j, v in enumerate(sec.radial.directions):
            u = _matrix(v, f.shape)
            g = float(f.domain.gauge(u)) if f.domain is not None else 1.0
            probe = radial_limit(f, u / g, ladder, sec.radial.tol, sec.radial.threshold)
            for t, val in zip(probe.ladder, probe.values):
                prow.append({"direction": j, **_xi_columns(probe.direction, "u"), "t": float(t), "value": float(val)})
            srow.append({"direction": j, "verdict": probe.verdict, "limit": probe.limit, "oscillation": probe.oscillation})
            if probe.verdict == "undecided":
                raise UndecidedLimit(f"radial probe {j} is undecided (oscillation {probe.oscillation:.3g})")
        out.table("envelope_radial", prow)
        out.table("envelope_radial_summary", srow)


def cmd_sweep(cfg: RunConfig, out: Output, threads, base_dir):
    W = _integrand(cfg, base_dir)
    sec = _need(cfg, "sweep")
    solver = cfg.solver.build(cfg.seed)
    F = _matrix(sec.F, W.shape)
    dm = DomainMesh(W.d, sec.resolution, "affine")
    rep = sweep(W, dm, sec.ladder, F, solver, n_cell=sec.n_cell, cell_resolution=sec.cell_resolution,
                n_max=sec.n_max, with_free=sec.free_mode, n_jobs=threads)
    rows = rep.records()
    for r in rows:
        r["sandwich_ok"] = rep.sandwich_ok
    out.table("sweep", rows)


def cmd_hyper(cfg: RunConfig, out: Output, threads, base_dir):
    sec = _need(cfg, "hyper")
    solver = cfg.solver.build(cfg.seed)
    try:
        coef = sec.coefficient.build(sec.d, base_dir)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc
    W = hyperelastic_integrand(coef, cbar=sec.cbar, alpha=sec.alpha, d=sec.d)
    W0, report = shifted_integrand(W, check=False, sample_cfg=SampleConfig(seed=cfg.seed), return_report=True)
    pts = list(polar_grid(sec.d, sec.radii, sec.n_angles))
    pts += list(polar_grid(sec.d, sec.outside_radii, sec.n_angles)[1:])
    vals = _map(lambda xi: whom_hyper(W, xi, sec.n_max, solver, sec.resolution, W0=W0), pts, threads)
    rows = []
    I = np.eye(sec.d)
    for xi, v in zip(pts, vals):
        det, _ = det_positivity_check(xi)
        rows.append({**_xi_columns(xi), "rho": float(np.linalg.norm(xi - I)), "value": float(v), "det": det})
    out.table("hyper", rows)

    rng = np.random.default_rng(cfg.seed)
    ladder = default_ladder(sec.ladder_depth)
    brows = []
    for j in range(sec.n_directions):
        u = rng.standard_normal((sec.d, sec.d))
        u /= np.linalg.norm(u)
        probe = blowup_probe(W.kernel, u, ladder, coefficient=coef.c, threshold=sec.threshold)
        for t, val, det in zip(probe.ladder, probe.values, probe.dets):
            brows.append({"direction": j, "t": float(t), "value": float(val), "det": float(det), "verdict": probe.verdict})
    out.table("hyper_blowup", brows)

    crow = [{"check": "H1", "key": repr(float(k)), "value": float(v), "pass": report.h1_pass}
            for k, v in sorted(report.h1_table.items())]
    crow += [{"check": "H2", "key": str(k), "value": float(v), "pass": report.h2_pass}
             for k, v in sorted(report.h2_sups.items())]
    crow += [{"check": "H3", "key": str(k), "value": float(v), "pass": report.h3_pass}
             for k, v in sorted(report.h3_shell_infs.items())]
    out.table("hyper_certification", crow)


def _read_hash(path: Path):
    first = path.read_text().split("\n", 1)[0]
    if first.startswith("# "):
        fields = dict(tok.split("=", 1) for tok in first[2:].split() if "=" in tok)
        return fields.get("config_hash")
    try:
        return json.loads(first)["provenance"]["config_hash"]
    except (ValueError, KeyError, TypeError):
        return None


def cmd_report(paths, out_dir: Path, fmt_name):
    files = []
    for p in paths:
        p = Path(p)
        files += sorted(q for q in p.iterdir() if q.suffix in (".csv", ".jsonl") and not q.name.startswith("report")) \
            if p.is_dir() else [p]
    if not files:
        raise ConfigError("no result files to aggregate")
    hashes = {f: _read_hash(f) for f in files}
    distinct = set(hashes.values())
    if None in distinct or len(distinct) != 1:
        raise ConfigError("result files carry missing or mismatched config hashes: "
                          + ", ".join(f"{f.name}={h}" for f, h in hashes.items()))
    h = distinct.pop()
    rows = [{"file": f.name, "rows": max(0, len(f.read_text().splitlines()) - (2 if f.suffix == ".csv" else 1)),
             "config_hash": h} for f in files]
    out = Output(out_dir, fmt_name, {"config_hash": h, "version": _version()})
    out.table("report", rows)
    return out.flush()


COMMANDS = {"density": cmd_density, "cell": cmd_cell, "envelope": cmd_envelope, "sweep": cmd_sweep, "hyper": cmd_hyper}


HELP = {
    "density": "tabulate W and certified truncations W_n",
    "cell": "cell values and hW over n = 1..n_max",
    "envelope": "discrete and laminate envelope bounds, radial boundary probes",
    "sweep": "oscillating-energy minima along an eps ladder",
    "hyper": "hyperelastic barrier density on a polar grid, blow-up probes",
    "report": "check config hashes of result files and list them",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="periodic-homog", description="Homogenized densities of constrained periodic energies.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in list(COMMANDS) + ["report"]:
        p = sub.add_parser(name, help=HELP[name])
        if name == "report":
            p.add_argument("inputs", nargs="+", help="result files or directories")
            p.add_argument("--config", default=None, help="unused; accepted for symmetry")
        else:
            p.add_argument("--config", required=True, help="YAML or JSON run configuration")
        p.add_argument("--out", default=None, help="output directory (default: config 'output' or '.')")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads; results do not depend on it")
        p.add_argument("--format", choices=("csv", "json-lines"), default="csv", help="table format")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    fmt_name = "csv" if args.format == "csv" else "jsonl"
    try:
        if args.command == "report":
            cmd_report(args.inputs, Path(args.out or "."), fmt_name)
            return 0
        cfg = load_config(args.config, args.seed)
        base_dir = Path(args.config).resolve().parent
        out_dir = Path(args.out or cfg.output or ".")
        header = {"config_hash": cfg.config_hash(), "seed": cfg.seed, "command": args.command,
                  "version": _version(), "numpy": np.__version__, "scipy": scipy.__version__}
        out = Output(out_dir, fmt_name, header)
        COMMANDS[args.command](cfg, out, max(1, args.threads), base_dir)
        for path in out.flush():
            print(path)
        return 0
    except (ConfigError, ValidationError, yaml.YAMLError, OSError, DimensionMismatch, PreconditionError, TilingMismatch) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleMacroGradient, NotCompactlyContained) as exc:
        print(f"infeasible input: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ProjectionNotConverged, UndecidedLimit, RuntimeError, FloatingPointError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
