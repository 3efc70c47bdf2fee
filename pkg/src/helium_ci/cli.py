"""Command-line front end: ``solve``, ``convergence``, ``spectrum``, ``table`` and ``fit``.

Exit status is 0 on success, 2 for configuration errors and 3 for numerical
failures.  Output goes to ``--out`` or standard output, as CSV (header row,
LF line endings) or as one JSON object with ``meta`` and ``data``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .ci import VariationalBoundError
from .config import ConfigError, RunConfig
from .entanglement import AmbiguousReferenceError, ConsistencyError
from .model import BasisSpec, SectorSolution, solve_sector
from .optimize import exponent_problem, optimize
from .sto import DegenerateBasisError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DEFAULT_N_VALUES = {"singlet": tuple(range(1, 8)), "triplet": tuple(range(2, 8))}
SPIN_TAGS = {"singlet": "¹S", "triplet": "³S"}


class NumericalFailure(RuntimeError):
    pass


# ----------------------------------------------------------------- helpers

def bundled_config(name: str) -> Path | None:
    """Path of a configuration shipped with the package (``table1`` or ``table1.cfg``)."""
    stem = name[:-4] if name.endswith(".cfg") else name
    candidate = resources.files("helium_ci") / "configs" / f"{stem}.cfg"
    return Path(str(candidate)) if candidate.is_file() else None


def resolve_config(args) -> RunConfig:
    config = RunConfig()
    if args.config:
        path = Path(args.config)
        if not path.exists():
            path = bundled_config(args.config) or path
        config = cfgmod.load(path)
    overrides = {
        "sector": args.sector, "n_max": args.nmax, "l_max": args.lmax, "budget": args.budget,
        "format": args.format, "out": args.out,
    }
    for key, value in overrides.items():
        if value is not None:
            cfgmod.apply(config, key, value, "command line: ")
    if args.state:
        config.states = tuple(args.state)
    if args.optimize:
        config.optimize = True
    if args.serial:
        config.serial = True
    if args.no_interaction:
        config.interaction = False
    return cfgmod.validate(config)


def workers(config: RunConfig) -> int:
    return 1 if config.serial else max(1, min(4, os.cpu_count() or 1))


def tuned_spec(config: RunConfig, spec: BasisSpec, sector: str) -> tuple[BasisSpec, dict | None]:
    """Optionally optimize the exponents of ``spec`` for the configured objective."""
    if not config.optimize:
        return spec, None
    problem = exponent_problem(spec, sector, config.objective, config.Z, config.budget,
                               workers=workers(config), precision=config.precision)
    result = optimize(problem)
    if not math.isfinite(result.best_value):
        raise NumericalFailure("exponent optimization found no valid basis")
    info = {"sector": sector, "objective": list(config.objective), "evaluations": len(result.evaluations),
            "accepted_steps": len(result.trace), "objective_value": round(result.best_value, 10)}
    return spec.with_parameters(result.best_params), info


def solve(config: RunConfig, sector: str, spec: BasisSpec | None = None, count: int | None = None):
    spec = config.basis_spec(sector=sector) if spec is None else spec
    spec, info = tuned_spec(config, spec, sector)
    sol = solve_sector(spec, sector, config.Z, count or config.count, config.interaction, workers(config),
                       config.precision)
    return sol, info


def canonical_label(text: str, default_sector: str | None = None) -> tuple[str, str]:
    """Normalize a user-supplied state label to (body, sector)."""
    t = " ".join(text.replace("^2", "²").split())
    sector = None
    for name, tag in SPIN_TAGS.items():
        for suffix in (tag, tag.replace("¹", "1").replace("³", "3"), name):
            if t.endswith(suffix) and t != suffix:
                t = t[: -len(suffix)].strip()
                sector = name
                break
        if sector:
            break
    return t, sector or default_sector or "singlet"


def table_label(n: int, sector: str) -> str:
    body = "(1s)²" if n == 1 else f"1s{n}s"
    return f"{body} {SPIN_TAGS[sector]}"


def find_state(sol: SectorSolution, label: str):
    for st in sol.states:
        if st.label == label:
            return st
    available = ", ".join(st.label for st in sol.states)
    raise ConfigError(f"state {label!r} not found; available: {available}")


def fmt(value: float, digits: int = 6) -> str:
    return f"{value:.{digits}f}"


def fmt_small(value: float) -> str:
    return f"{value:.6e}"


# ---------------------------------------------------------------- commands

def cmd_solve(config: RunConfig):
    rows, meta = [], {"bases": {}}
    for sector in config.sectors:
        sol, info = solve(config, sector)
        meta["bases"][sector] = sol.spec.describe()
        if info:
            meta.setdefault("optimization", []).append(info)
        states = sol.states
        if config.states:
            wanted = {f"{b} {SPIN_TAGS[s]}" for b, s in (canonical_label(x, sector) for x in config.states)}
            states = [st for st in states if st.label in wanted]
        for st in states:
            rows.append({"sector": sector, "ordinal": st.ordinal, "state": st.label,
                         "energy": fmt(st.energy), "dominant": str(st.dominant),
                         "dominant_weight": fmt(st.dominant_weight)})
    return rows, meta


def cmd_convergence(config: RunConfig):
    grid_n = config.grid_n_max or config.n_max[:1]
    grid_l = config.grid_l_max or (config.l_max,)
    rows, meta = [], {"cells": {}}
    for l_max in grid_l:
        for n_max in grid_n:
            params = config.cells.get((n_max, l_max))
            spec = config.basis_spec(l_max, (n_max,), params)
            sol, info = solve(config, "singlet", spec, count=1)
            report = sol.report(sol.states[0], config.spectrum_convention)
            meta["cells"][f"{n_max}.{l_max}"] = sol.spec.describe()
            if info:
                meta.setdefault("optimization", []).append(info)
            rows.append({"n_max": n_max, "l_max": l_max, "energy": fmt(sol.states[0].energy),
                         "S": fmt(report.s_vn, 5)})
    return rows, meta


def cmd_spectrum(config: RunConfig):
    wanted = config.states or ("(1s)² ¹S",)
    rows, meta, cache = [], {"bases": {}}, {}
    for text in wanted:
        body, sector = canonical_label(text, config.sectors[0])
        if sector not in cache:
            cache[sector] = solve(config, sector)[0]
            meta["bases"][sector] = cache[sector].spec.describe()
        sol = cache[sector]
        st = find_state(sol, f"{body} {SPIN_TAGS[sector]}")
        lam = sol.report(st, config.spectrum_convention).spectrum
        for k, value in enumerate(lam, start=1):
            rows.append({"state": st.label, "k": k, "lambda": f"{value:.12e}"})
    return rows, meta


def table_rows(config: RunConfig):
    rows, meta = [], {"bases": {}}
    for sector in config.sectors:
        ns = config.n_values.get(sector, DEFAULT_N_VALUES[sector])
        needed = max(n - (1 if sector == "singlet" else 2) for n in ns) + 1
        sol, info = solve(config, sector, count=max(config.count, needed))
        meta["bases"][sector] = sol.spec.describe()
        if info:
            meta.setdefault("optimization", []).append(info)
        for n in ns:
            st = find_state(sol, table_label(n, sector))
            r = sol.report(st, config.spectrum_convention)
            rows.append({"sector": sector, "n": n, "state": st.label, "energy": fmt(st.energy),
                         "S": fmt(r.s_vn), "S_L": fmt(r.s_lin), "S0": r.s0, "E": fmt_small(r.entanglement),
                         "dehesa": fmt(r.comparison_dehesa), "ipr": fmt(r.comparison_ipr),
                         "dominant_weight": fmt(st.dominant_weight)})
    return rows, meta


def cmd_table(config: RunConfig):
    return table_rows(config)


def power_law_fit(n, values) -> dict:
    """Least squares of ln E = ln a + b ln n; returns a, b and the log residuals."""
    n = np.asarray(n, dtype=float)
    values = np.asarray(values, dtype=float)
    if n.size < 3:
        raise ConfigError(f"power-law fit needs at least 3 points, got {n.size}")
    design = np.column_stack([np.ones_like(n), np.log(n)])
    coef, *_ = np.linalg.lstsq(design, np.log(values), rcond=None)
    residuals = np.log(values) - design @ coef
    return {"prefactor": float(np.exp(coef[0])), "exponent": float(coef[1]), "residuals": residuals}


def fit_rows(table: list[dict], n_min: int = 2, warn=None):
    """Fit E(n) per sector from table rows (values may be strings, as read back from files)."""
    warn = warn or (lambda msg: print(msg, file=sys.stderr))
    rows, fits = [], {}
    for sector in SPIN_TAGS:
        pts = [r for r in table if r["sector"] == sector and int(r["n"]) >= n_min]
        kept = []
        for r in pts:
            if float(r["E"]) > 0:
                kept.append(r)
            else:
                warn(f"skipping {sector} n={r['n']}: non-positive E = {r['E']}")
        if not kept:
            continue
        ns = [int(r["n"]) for r in kept]
        fit = power_law_fit(ns, [float(r["E"]) for r in kept])
        fits[sector] = {"prefactor": fit["prefactor"], "exponent": fit["exponent"], "points": len(ns)}
        for r, res in zip(kept, fit["residuals"]):
            rows.append({"sector": sector, "n": int(r["n"]), "energy": r["energy"], "E": r["E"],
                         "E_fit": fmt_small(fit["prefactor"] * int(r["n"]) ** fit["exponent"]),
                         "log_residual": fmt(float(res)),
                         "prefactor": fmt(fit["prefactor"]), "exponent": fmt(fit["exponent"])})
    return rows, fits


def read_table(path) -> list[dict]:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)["data"]
    return list(csv.DictReader(io.StringIO(text)))


def cmd_fit(config: RunConfig, source: str | None = None):
    if source:
        try:
            table = read_table(source)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read table {source}: {exc}") from None
        meta = {"input": str(source)}
    else:
        table, meta = table_rows(config)
        # go through the printed values so a re-read table fits identically
        table = [{k: str(v) for k, v in r.items()} for r in table]
    rows, fits = fit_rows(table, config.fit_n_min)
    meta["fits"] = {s: {"prefactor": round(f["prefactor"], 6), "exponent": round(f["exponent"], 6),
                        "points": f["points"]} for s, f in fits.items()}
    return rows, meta


COMMANDS = {"solve": cmd_solve, "convergence": cmd_convergence, "spectrum": cmd_spectrum,
            "table": cmd_table, "fit": cmd_fit}


# ------------------------------------------------------------------ output

def render(rows: list[dict], meta: dict, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps({"meta": meta, "data": [_jsonable(r) for r in rows]}, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _jsonable(row: dict) -> dict:
    out = {}
    for key, value in row.items():
        if isinstance(value, str):
            try:
                num = float(value)
                value = int(num) if value.lstrip("-").isdigit() else num
            except ValueError:
                pass
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="helium-ci", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="config file, or the name of a bundled one (e.g. table1)")
        p.add_argument("--sector", help="singlet, triplet or both")
        p.add_argument("--nmax", help="radial functions per l: N or N0,N1,...")
        p.add_argument("--lmax", help="highest orbital angular momentum")
        p.add_argument("--state", action="append", help="state label, e.g. '1s2s ³S' (repeatable)")
        p.add_argument("--optimize", action="store_true", help="optimize Slater exponents first")
        p.add_argument("--budget", help="objective evaluations for --optimize")
        p.add_argument("--serial", action="store_true", help="single-threaded deterministic run")
        p.add_argument("--format", help="csv or json")
        p.add_argument("--out", help="output file (default: standard output)")
        p.add_argument("--no-interaction", action="store_true", help="drop 1/r12 (debugging)")
        if name == "fit":
            p.add_argument("--input", help="table produced by the table command (csv or json)")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        command = COMMANDS[args.command]
        if args.command == "fit":
            rows, meta = command(config, getattr(args, "input", None))
        else:
            rows, meta = command(config)
        meta = {"command": args.command, "config": config.to_dict(), **meta}
        text = render(rows, meta, config.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except DegenerateBasisError as exc:
        print(f"numerical failure: {exc}; raise drop_threshold or change the exponents", file=stderr)
        return EXIT_NUMERIC
    except (ConsistencyError, AmbiguousReferenceError, NumericalFailure, VariationalBoundError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    if config.out:
        with open(config.out, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
