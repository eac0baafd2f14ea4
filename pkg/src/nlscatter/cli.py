"""Command-line front end: ``nlscatter {linear,solve,sweep,flow,selfcheck}``.

Configuration is a JSON file carrying ``"schema": 1``; every key is optional
and falls back to :data:`DEFAULTS`.  Exit codes: 0 success, 2 non-convergence,
3 precondition or configuration error, 4 failed internal check.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .angular import BoundaryData, hk_norm, random_boundary_data
from .errors import NLScatterError, NonConvergenceError
from .expansion import extract_limit
from .hamflow import PhasePoint, flow, random_sigma_points
from .linfield import RadialGrid, RadialPotential, poisson_apply, split_in_out
from .nonlinear import Nonlinearity, SolverConfig, picard_solve
from .specfun import Order

log = logging.getLogger("nlscatter")

EXIT_OK, EXIT_NONCONV, EXIT_PRECOND, EXIT_ORACLE = 0, 2, 3, 4
SCHEMA = 1

DEFAULTS = {
    "schema": SCHEMA,
    "dim_n": 3,
    "lam": 1.0,
    "L": 16,
    "k": 2,
    "grid": {"r_min": 1e-4, "r_match": None, "r_max": None, "M": 4096},
    "nonlinearity": {"power": {"c": [1.0, 0.0], "p": 3}},
    "potential": None,
    "solver": {"tol": 1e-12, "delta": 0.05, "max_iter": 50, "dealias_factor": None,
               "max_data_norm": 1.0, "accept_residual": 1e-6},
    "data": {"random": {"seed": 0, "decay": 0.25, "hk_norm": 0.05}},
    "sweep": {"axis": None, "values": [], "jobs": 1},
    "flow": {"count": 100, "seed": 0, "T": None, "x": 0.0, "points": None},
}


class ConfigError(NLScatterError):
    """Malformed or inconsistent run configuration."""


# ---------------------------------------------------------------- JSON output

def _encode(obj, indent=0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(str(k))}: {_encode(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + "  " + _encode(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON with 17 significant digits for every float."""
    return _encode(obj) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(dumps(obj))


# ---------------------------------------------------------------- configuration

def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("data", "nonlinearity"):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def load_config(path: str | None, seed: int | None = None) -> dict:
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if raw.get("schema") != SCHEMA:
            raise ConfigError(f"config must declare \"schema\": {SCHEMA}")
    cfg = _merge(DEFAULTS, raw)
    if seed is not None:
        if "random" in cfg["data"]:
            cfg["data"]["random"]["seed"] = seed
        cfg["flow"]["seed"] = seed
    if cfg["dim_n"] not in (2, 3):
        raise ConfigError("dim_n must be 2 or 3")
    if not cfg["L"] >= 0:
        raise ConfigError("L must be nonnegative")
    return cfg


def build_grid(cfg: dict) -> RadialGrid:
    g = cfg["grid"]
    return RadialGrid(lam=float(cfg["lam"]), r_min=g.get("r_min", 1e-4), r_match=g.get("r_match"),
                      r_max=g.get("r_max"), M=int(g.get("M", 4096)))


def build_nonlinearity(cfg: dict) -> Nonlinearity:
    entry = cfg["nonlinearity"]
    if entry is None:
        return Nonlinearity.zero()
    if "power" in entry:
        c = entry["power"]["c"]
        c = complex(*c) if isinstance(c, list) else complex(c)
        return Nonlinearity.power(c, int(entry["power"]["p"]))
    if "monomials" in entry:
        return Nonlinearity.from_json(entry)
    raise ConfigError("nonlinearity needs 'power' or 'monomials'")


def build_potential(cfg: dict) -> RadialPotential | None:
    entry = cfg["potential"]
    if entry is None:
        return None
    kind = entry.get("kind")
    if kind == "exponential":
        return RadialPotential.exponential(entry["strength"], entry.get("rate", 1.0))
    if kind == "algebraic":
        return RadialPotential.algebraic(entry["strength"], entry["power"])
    if kind == "inverse_square":
        return RadialPotential.inverse_square(entry["strength"])
    raise ConfigError(f"unknown potential kind {kind!r}")


def build_data(cfg: dict) -> BoundaryData:
    n, L, entry = cfg["dim_n"], cfg["L"], cfg["data"]
    if "random" in entry:
        r = entry["random"]
        target = r.get("hk_norm")
        f = random_boundary_data(n, L, int(r.get("seed", 0)), r.get("decay", 0.25))
        return f * (target / hk_norm(f, cfg["k"])) if target is not None else f
    if "single_mode" in entry:
        m = entry["single_mode"]
        v = m.get("value", [1.0, 0.0])
        return BoundaryData.single_mode(n, L, int(m["ell"]), complex(*v))
    if "coeffs" in entry:
        return BoundaryData(n, L, np.array([complex(a, b) for a, b in entry["coeffs"]]))
    if "zero" in entry:
        return BoundaryData.zeros(n, L)
    raise ConfigError("data needs 'random', 'single_mode', 'coeffs' or 'zero'")


def build_solver(cfg: dict) -> SolverConfig:
    s = cfg["solver"]
    return SolverConfig(grid=build_grid(cfg), potential=build_potential(cfg), tol=s["tol"],
                        delta=s["delta"], max_iter=int(s["max_iter"]), k=int(cfg["k"]),
                        max_data_norm=s["max_data_norm"], accept_residual=s["accept_residual"],
                        dealias_factor=s["dealias_factor"])


# ---------------------------------------------------------------- commands

def _farfield_csv(path: Path, columns: dict, modes) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["ell"]
        for name in columns:
            header += [f"{name}_re", f"{name}_im"]
        w.writerow(header)
        for i, ell in enumerate(modes):
            row = [int(ell)]
            for arr in columns.values():
                row += [format(float(arr[i].real), ".17g"), format(float(arr[i].imag), ".17g")]
            w.writerow(row)


def cmd_linear(cfg: dict, out: Path) -> int:
    f = build_data(cfg)
    potential = build_potential(cfg)
    grid = build_grid(cfg)
    u0 = poisson_apply(f, grid, potential)
    minus, plus = split_in_out(u0, potential) if potential is None else (None, None)
    fit_in = extract_limit(u0, -1, k=cfg["k"])
    fit_out = extract_limit(u0, +1, k=cfg["k"])
    nf = hk_norm(f, cfg["k"])
    roundtrip = hk_norm(fit_in.leading - f, cfg["k"]) / nf if nf > 0 else hk_norm(fit_in.leading, cfg["k"])
    mult = np.where(f.coeffs != 0, fit_out.leading.coeffs / np.where(f.coeffs != 0, f.coeffs, 1), 0)
    free_mult = np.array([np.exp(-1j * (Order.from_mode(int(l), f.dim_n).nu * np.pi + np.pi / 2))
                          for l in f.modes])
    result = {
        "command": "linear",
        "version": __version__,
        "f": f.to_json(),
        "b0": fit_out.leading.to_json(),
        "multiplier": [[float(m.real), float(m.imag)] for m in mult],
        "roundtrip_error": roundtrip,
        "fit_incoming": fit_in.to_json(),
        "fit_outgoing": fit_out.to_json(),
    }
    failed = roundtrip > 1e-7
    if minus is not None:
        z_plus = hk_norm(extract_limit(plus, -1).leading, 0)
        z_minus = hk_norm(extract_limit(minus, +1).leading, 0)
        scale = max(hk_norm(f, 0), 1e-300)
        result["split"] = {"incoming_limit_of_u_plus": z_plus / scale,
                           "outgoing_limit_of_u_minus": z_minus / scale}
        active = f.coeffs != 0
        result["free_multiplier_error"] = float(np.max(np.abs(mult - free_mult)[active], initial=0.0))
        failed |= max(z_plus, z_minus) / scale > 1e-8 or result["free_multiplier_error"] > 1e-8
    result["passed"] = not failed
    write_json(out / "result.json", result)
    _farfield_csv(out / "farfield.csv", {"f": f.coeffs, "b0": fit_out.leading.coeffs,
                                         "multiplier": mult}, f.modes)
    fit_out.write_csv(out / "remainder.csv")
    return EXIT_ORACLE if failed else EXIT_OK


def _solve_summary(f, res, k) -> dict:
    return {
        "hk_norm_f": hk_norm(f, k),
        "hk_norm_b": hk_norm(res.b_total, k),
        "hk_norm_b_km2": hk_norm(res.b_total, max(k - 2, 0)),
        "flux_defect": res.flux_defect,
        "iterates": res.iterates,
        "max_contraction": max(res.contraction_factors, default=0.0),
        "first_contraction": res.contraction_factors[0] if res.contraction_factors else None,
        "remainder_exponent": res.eps_remainder,
        "pde_residual": res.pde_residual,
    }


def cmd_solve(cfg: dict, out: Path) -> int:
    f = build_data(cfg)
    N = build_nonlinearity(cfg)
    scfg = build_solver(cfg)
    try:
        res = picard_solve(f, N, scfg)
    except NonConvergenceError as exc:
        write_json(out / "result.json", {"command": "solve", "converged": False, "error": str(exc)})
        log.error("%s", exc)
        return EXIT_NONCONV
    result = {"command": "solve", "version": __version__, "converged": True,
              "f": f.to_json(), "nonlinearity": N.to_json(), "config": scfg.to_json(),
              "report": _solve_summary(f, res, scfg.k), "solve": res.to_json()}
    write_json(out / "result.json", result)
    res.write_iterations_csv(out / "iterations.csv")
    _farfield_csv(out / "farfield.csv", {"f": f.coeffs, "b0": res.b0.coeffs, "b1": res.b1.coeffs,
                                         "b": res.b_total.coeffs}, f.modes)
    if res.fit_b1 is not None:
        res.fit_b1.write_csv(out / "remainder.csv")
    return EXIT_OK


SWEEP_AXES = ("data_norm", "p", "lam", "k", "L", "M")


def _sweep_cfg(cfg: dict, axis: str | None, value) -> dict:
    c = copy.deepcopy(cfg)
    if axis is None:
        return c
    if axis == "data_norm":
        if "random" not in c["data"]:
            raise ConfigError("data_norm sweeps need random data")
        c["data"]["random"]["hk_norm"] = float(value)
    elif axis == "p":
        c["nonlinearity"] = {"power": {"c": c["nonlinearity"]["power"]["c"], "p": int(value)}}
    elif axis == "lam":
        c["lam"] = float(value)
    elif axis in ("k", "L"):
        c[axis] = int(value)
    elif axis == "M":
        c["grid"]["M"] = int(value)
    return c


def _sweep_run(args):
    cfg, axis, value = args
    c = _sweep_cfg(cfg, axis, value)
    f = build_data(c)
    row = {"axis": axis or "", "value": value}
    try:
        res = picard_solve(f, build_nonlinearity(c), build_solver(c))
        row.update(_solve_summary(f, res, c["k"]))
        row["status"] = "ok"
    except NonConvergenceError as exc:
        row["status"] = "nonconvergent"
        row["error"] = str(exc)
    return row


SWEEP_COLUMNS = ["axis", "value", "status", "hk_norm_f", "hk_norm_b", "hk_norm_b_km2", "flux_defect",
                 "iterates", "first_contraction", "max_contraction", "remainder_exponent",
                 "pde_residual"]


def cmd_sweep(cfg: dict, out: Path) -> int:
    sw = cfg["sweep"]
    axis = sw.get("axis")
    if axis is not None and axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}")
    values = list(sw.get("values") or []) if axis else [None]
    if not values:
        axis, values = None, [None]
    for v in values:
        _sweep_cfg(cfg, axis, v)  # validate before launching
    jobs = int(sw.get("jobs", 1))
    tasks = [(cfg, axis, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_run, tasks))
    else:
        rows = [_sweep_run(t) for t in tasks]
    for i, row in enumerate(rows):
        run_dir = out / f"run_{i:03d}"
        run_dir.mkdir(parents=True, exist_ok=True)
        write_json(run_dir / "result.json", row)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for row in rows:
            w.writerow(["" if row.get(c) is None else
                        (format(row[c], ".17g") if isinstance(row[c], float) else row[c])
                        for c in SWEEP_COLUMNS])
    write_json(out / "result.json", {"command": "sweep", "version": __version__, "axis": axis,
                                     "runs": rows})
    return EXIT_NONCONV if any(r["status"] != "ok" for r in rows) else EXIT_OK


def cmd_flow(cfg: dict, out: Path) -> int:
    fl = cfg["flow"]
    lam = float(cfg["lam"])
    if fl.get("points"):
        pts = [PhasePoint(*map(float, p)) for p in fl["points"]]
    else:
        pts = random_sigma_points(int(fl["count"]), lam, int(fl["seed"]), float(fl.get("x", 0.0)))
    runs = []
    with open(out / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["run", "t", "x", "y", "nu", "mu", "p"])
        for i, pt in enumerate(pts):
            res = flow(pt, lam, fl.get("T"))
            for t, s, p in zip(res.times, res.states, res.p_values):
                w.writerow([i] + [format(float(v), ".17g") for v in (t, *s, p)])
            runs.append({"start": [pt.x, pt.y, pt.nu, pt.mu], **res.to_json()})
    on_sigma = [abs(r["start"][2] ** 2 + r["start"][3] ** 2 - lam**2) < 1e-12 and r["start"][0] == 0
                and abs(r["start"][3]) > 0 for r in runs]
    misclassified = sum(1 for r, s in zip(runs, on_sigma)
                        if s and (r["forward_limit"] != "R+" or r["backward_limit"] != "R-"))
    max_drift = max((r["p_drift"] for r in runs), default=0.0)
    monotone = all(r["min_nu_increment"] >= -1e-10 for r in runs)
    failed = misclassified > 0 or max_drift > 1e-8 or not monotone
    write_json(out / "result.json", {"command": "flow", "version": __version__, "lam": lam,
                                     "misclassified": misclassified, "max_p_drift": max_drift,
                                     "nu_monotone": monotone, "passed": not failed, "runs": runs})
    return EXIT_ORACLE if failed else EXIT_OK


def cmd_selfcheck(cfg: dict, out: Path | None) -> int:
    from .acceptance import run_all

    results = run_all(echo=print)
    passed = all(r.passed for r in results)
    print(f"selfcheck: {sum(r.passed for r in results)}/{len(results)} criteria passed")
    if out is not None:
        write_json(out / "result.json", {"command": "selfcheck", "version": __version__,
                                         "passed": passed,
                                         "criteria": [r.to_json() for r in results]})
    return EXIT_OK if passed else EXIT_ORACLE


COMMANDS = {"linear": cmd_linear, "solve": cmd_solve, "sweep": cmd_sweep, "flow": cmd_flow}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlscatter", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=[*COMMANDS, "selfcheck"])
    ap.add_argument("--config", help="JSON run configuration (schema 1)")
    ap.add_argument("--out", help="output directory (default ./out; selfcheck writes only if given)")
    ap.add_argument("--seed", type=int, help="override the data and flow seeds")
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.seed)
        out = Path(args.out) if args.out else None
        if args.command == "selfcheck":
            if out is not None:
                out.mkdir(parents=True, exist_ok=True)
            return cmd_selfcheck(cfg, out)
        out = out or Path("out")
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out)
    except NonConvergenceError as exc:
        print(f"nlscatter: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    except (NLScatterError, ValueError, KeyError, TypeError) as exc:
        print(f"nlscatter: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECOND


if __name__ == "__main__":
    sys.exit(main())
