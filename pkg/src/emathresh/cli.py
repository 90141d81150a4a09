"""Command-line front end.

A run is described by a TOML config with a [params] section, exactly one
command section (classify | boundary | simulate | phase_portrait |
lyapunov | decay) and an optional [output] section.  Unknown keys are hard
errors.  Outputs are deterministic: numeric text uses 17 significant
digits, column and row order are fixed, and nothing time- or
machine-dependent is written.

Exit codes: 0 success, 2 config error, 3 numerical failure,
4 supercritical state detected while the config asserted subcritical data.

Built-in initial-data families for `simulate`:
  gaussian_bump(a, sigma):   u0(r) = a r exp(-(r/sigma)^2), rho0 = 1
  constant_density(c):       u0 = 0, rho0 = c
  power_potential(c):        u0 = 0, phi0 = c r^2 / 2 (mu0 = nu0 = c)
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import analyze, lyapunov, radial, thresholds
from .closedform import eval_trajectory
from .core import DampingRegime, Parameters, make_params, regime, spectral_constants
from .thresholds import Method, Verdict

__all__ = ["RunConfig", "parse_config", "run", "main", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SUPERCRITICAL = 4

_COMMANDS = ("classify", "boundary", "simulate", "phase_portrait", "lyapunov", "decay")


class ConfigError(ValueError):
    """Invalid run configuration (bad key, type, or value)."""


class SubcriticalAssertionError(RuntimeError):
    """A run asserted subcritical data but a supercritical state appeared."""


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.17g}"


def _check_keys(section: str, data: Dict[str, Any], allowed: Sequence[str]) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"[{section}] unknown key '{key}'")


def _need(section: str, data: Dict[str, Any], key: str) -> Any:
    if key not in data:
        raise ConfigError(f"[{section}] missing required key '{key}'")
    return data[key]


def _num(section: str, key: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}].{key} must be a number, got {value!r}")
    return float(value)


@dataclass
class RunConfig:
    params: Parameters
    command: str
    options: Dict[str, Any]
    out_dir: Path
    out_format: str


def parse_config(path_or_text) -> RunConfig:
    """Parse and validate a config from a file path or inline TOML text."""
    p = Path(path_or_text)
    if p.suffix == ".toml" or p.exists():
        try:
            raw = tomllib.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {p}")
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config is not valid TOML: {exc}")
        base = p.parent
    else:
        try:
            raw = tomllib.loads(str(path_or_text))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config is not valid TOML: {exc}")
        base = Path.cwd()

    _check_keys("config", raw, ["params", "output", *_COMMANDS])
    if "params" not in raw:
        raise ConfigError("missing [params] section")
    psec = raw["params"]
    _check_keys("params", psec, ["kappa", "beta", "dim", "regime_tol"])
    try:
        params = make_params(
            _num("params", "kappa", _need("params", psec, "kappa")),
            _num("params", "beta", _need("params", psec, "beta")),
            int(psec.get("dim", 1)),
            float(psec.get("regime_tol", 1e-9)),
        )
    except ValueError as exc:
        raise ConfigError(f"[params] invalid: {exc}")

    present = [c for c in _COMMANDS if c in raw]
    if len(present) != 1:
        raise ConfigError(
            f"exactly one command section required, found {present or 'none'}"
        )
    command = present[0]
    options = _validate_command(command, raw[command], base)

    out = raw.get("output", {})
    _check_keys("output", out, ["dir", "format"])
    out_format = out.get("format", "json")
    if out_format not in ("csv", "json"):
        raise ConfigError(f"[output].format must be 'csv' or 'json', got {out_format!r}")
    out_dir = Path(out.get("dir", "out"))

    return RunConfig(params=params, command=command, options=options,
                     out_dir=out_dir, out_format=out_format)


def _validate_command(command: str, sec: Dict[str, Any], base: Path) -> Dict[str, Any]:
    if command == "classify":
        _check_keys(command, sec, ["points", "vacuous_p0", "methods"])
        points = sec.get("points", [])
        if not isinstance(points, list) or any(
            not isinstance(pt, list) or len(pt) != 2 for pt in points
        ):
            raise ConfigError("[classify].points must be a list of [p0, mu0] pairs")
        vac = sec.get("vacuous_p0", [])
        if not isinstance(vac, list):
            raise ConfigError("[classify].vacuous_p0 must be a list of numbers")
        if not points and not vac:
            raise ConfigError("[classify] needs points and/or vacuous_p0")
        methods = sec.get("methods", ["explicit"])
        for m in methods:
            if m not in ("explicit", "lyapunov", "simulation"):
                raise ConfigError(f"[classify].methods: unknown method {m!r}")
        return {
            "points": [(_num(command, "points", a), _num(command, "points", b))
                       for a, b in points],
            "vacuous_p0": [_num(command, "vacuous_p0", v) for v in vac],
            "methods": list(methods),
        }
    if command == "boundary":
        _check_keys(command, sec, ["mu0", "mu0_min", "mu0_max", "count"])
        if "mu0" in sec:
            grid = [_num(command, "mu0", v) for v in sec["mu0"]]
        else:
            lo = _num(command, "mu0_min", _need(command, sec, "mu0_min"))
            hi = _num(command, "mu0_max", _need(command, sec, "mu0_max"))
            count = int(sec.get("count", 21))
            if not (lo < hi < 1.0) or count < 2:
                raise ConfigError("[boundary] needs mu0_min < mu0_max < 1 and count >= 2")
            grid = list(np.linspace(lo, hi, count))
        if any(v >= 1.0 for v in grid):
            raise ConfigError("[boundary] grid values must be < 1")
        return {"mu0_grid": grid}
    if command == "simulate":
        allowed = ["family", "a", "sigma", "c", "r_min", "r_max", "n_rays",
                   "table", "file", "t_max", "snapshots", "snapshot_count",
                   "tol", "assert_subcritical"]
        _check_keys(command, sec, allowed)
        sources = [k for k in ("family", "table", "file") if k in sec]
        if len(sources) != 1:
            raise ConfigError(
                "[simulate] needs exactly one of family / table / file"
            )
        if "file" in sec:
            fp = base / sec["file"]
            if not fp.exists():
                raise ConfigError(f"[simulate].file does not exist: {fp}")
            sec = dict(sec)
            sec["file"] = str(fp)
        if "family" in sec and sec["family"] not in (
            "gaussian_bump", "constant_density", "power_potential"
        ):
            raise ConfigError(f"[simulate].family unknown: {sec['family']!r}")
        t_max = _num(command, "t_max", _need(command, sec, "t_max"))
        out = dict(sec)
        out["t_max"] = t_max
        return out
    if command == "phase_portrait":
        _check_keys(command, sec, ["w_min", "w_max", "w_count",
                                   "s_min", "s_max", "s_count"])
        opts = {}
        for key in ("w_min", "w_max", "s_min", "s_max"):
            opts[key] = _num(command, key, _need(command, sec, key))
        for key in ("w_count", "s_count"):
            opts[key] = int(sec.get(key, 21))
            if opts[key] < 2:
                raise ConfigError(f"[phase_portrait].{key} must be >= 2")
        if not (opts["w_min"] < opts["w_max"] and opts["s_min"] < opts["s_max"]):
            raise ConfigError("[phase_portrait] rectangle bounds are inverted")
        return opts
    if command == "lyapunov":
        _check_keys(command, sec, ["s_max"])
        return {"s_max": _num(command, "s_max", sec["s_max"]) if "s_max" in sec else None}
    if command == "decay":
        _check_keys(command, sec, ["p0", "mu0", "eps", "t_lo", "t_hi"])
        opts = {
            "p0": _num(command, "p0", _need(command, sec, "p0")),
            "mu0": _num(command, "mu0", _need(command, sec, "mu0")),
            "eps": _num(command, "eps", sec.get("eps", 0.05)),
        }
        if ("t_lo" in sec) != ("t_hi" in sec):
            raise ConfigError("[decay] t_lo and t_hi must be given together")
        if "t_lo" in sec:
            opts["window"] = (_num(command, "t_lo", sec["t_lo"]),
                              _num(command, "t_hi", sec["t_hi"]))
        else:
            opts["window"] = None
        return opts
    raise ConfigError(f"unknown command {command!r}")


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


def _classification_record(p0, mu0, cls) -> Dict[str, Any]:
    return {
        "p0": p0,
        "mu0": mu0,
        "method": cls.method.value,
        "verdict": cls.verdict.value,
        "t_blowup": cls.t_blowup,
    }


def _run_classify(cfg: RunConfig, out: Path) -> Dict[str, Any]:
    params, opts = cfg.params, cfg.options
    results: List[Dict[str, Any]] = []
    table_p = table_n = None
    if "lyapunov" in opts["methods"] and opts["points"]:
        s_needed = max(1.0 / (1.0 - mu0) for _, mu0 in opts["points"])
        table_p, table_n = lyapunov.build_tables(params, s_needed=s_needed)
    for p0 in opts["vacuous_p0"]:
        cls = thresholds.classify_vacuous(params, p0)
        rec = _classification_record(p0, 1.0, cls)
        rec["vacuous"] = True
        rec["formal"] = True  # vacuous blow-up is a formal statement
        results.append(rec)
    for p0, mu0 in opts["points"]:
        for method in opts["methods"]:
            if method == "explicit":
                cls = thresholds.classify_explicit(params, p0, mu0)
            elif method == "lyapunov":
                cls = lyapunov.classify_lyapunov(params, p0, mu0, table_p, table_n)
            else:
                cls = analyze.classify_by_simulation(params, p0, mu0)
            results.append(_classification_record(p0, mu0, cls))
    if cfg.out_format == "csv":
        _write_csv(out / "classify.csv",
                   ["p0", "mu0", "method", "verdict", "t_blowup"],
                   [[r["p0"], r["mu0"], r["method"], r["verdict"],
                     r["t_blowup"]] for r in results])
    return {"classifications": results}


def _run_boundary(cfg: RunConfig, out: Path) -> Dict[str, Any]:
    points = thresholds.threshold_boundary(cfg.params, cfg.options["mu0_grid"])
    weak = regime(cfg.params) is DampingRegime.WEAK
    header = ["mu0", "p_lower", "p_upper"] if weak else ["mu0", "p_lower"]
    rows = [[b.mu0, b.p_lower, b.p_upper][: len(header)] for b in points]
    _write_csv(out / "boundary.csv", header, rows)
    return {
        "boundary": [
            {"mu0": b.mu0, "p_lower": b.p_lower, "p_upper": b.p_upper}
            for b in points
        ]
    }


def _build_profile(params: Parameters, opts: Dict[str, Any]) -> radial.InitialProfile:
    if "table" in opts:
        rows = np.asarray(opts["table"], dtype=float)
        if rows.ndim != 2 or rows.shape[1] != 4:
            raise ConfigError("[simulate].table rows must be [r, u0, mu0, nu0]")
        r, u0, mu0, nu0 = rows.T
        return radial.init_from_potential(params, r, u0, mu0, nu0 * r)
    if "file" in opts:
        rows = np.loadtxt(opts["file"], delimiter=",", skiprows=1, ndmin=2)
        if rows.shape[1] != 4:
            raise ConfigError("[simulate].file must have columns r,u0,mu0,nu0")
        r, u0, mu0, nu0 = rows.T
        return radial.init_from_potential(params, r, u0, mu0, nu0 * r)
    family = opts["family"]
    r_max = float(opts.get("r_max", 5.0))
    r_min = float(opts.get("r_min", 1e-3 * r_max))
    n_rays = int(opts.get("n_rays", 256))
    if r_max / r_min > 100.0:
        grid = np.geomspace(r_min, r_max, n_rays)
    else:
        grid = np.linspace(r_min, r_max, n_rays)
    if family == "gaussian_bump":
        a = float(opts.get("a", 0.1))
        sigma = float(opts.get("sigma", 1.0))
        u0 = a * grid * np.exp(-((grid / sigma) ** 2))
        zeros = np.zeros_like(grid)
        profile = radial.init_from_potential(params, grid, u0, zeros, zeros)
        # exact derivative of the family, rather than grid differences
        p0 = a * np.exp(-((grid / sigma) ** 2)) * (1.0 - 2.0 * grid ** 2 / sigma ** 2)
        return radial.InitialProfile(grid=grid, u0=u0, p0=p0,
                                     mu0=zeros, nu0=zeros,
                                     rho0=np.ones_like(grid), dim=params.dim)
    if family == "constant_density":
        c = float(opts.get("c", 1.0))
        return radial.init_from_density(params, grid, np.zeros_like(grid),
                                        np.full_like(grid, c))
    # power_potential: phi0 = c r^2 / 2
    c = float(opts.get("c", 0.0))
    zeros = np.zeros_like(grid)
    return radial.init_from_potential(params, grid, zeros,
                                      np.full_like(grid, c), c * grid)


def _run_simulate(cfg: RunConfig, out: Path, workers: int) -> Dict[str, Any]:
    params, opts = cfg.params, cfg.options
    profile = _build_profile(params, opts)
    t_max = opts["t_max"]
    if "snapshots" in opts:
        snaps = [float(v) for v in opts["snapshots"]]
    else:
        count = int(opts.get("snapshot_count", 11))
        snaps = list(np.linspace(0.0, t_max, count))
    sol = radial.evolve(params, profile, t_max, snaps,
                        tol=float(opts.get("tol", 1e-11)), workers=workers)

    rows = []
    for k in range(len(sol.snapshot_times)):
        for i in range(len(sol.r0)):
            traj = sol.rays[i]
            if k >= len(traj.times):
                continue
            st = radial.ray_state(sol, i, k)
            diag = radial.diagnostics(st, params)
            rho = radial.density_along_ray(st, params.dim)
            rows.append([st.t, st.r0, st.r, st.u, st.p, st.q, st.mu, st.nu,
                         rho, diag.d, diag.eta])
    _write_csv(out / "snapshots.csv",
               ["t", "r0", "r", "u", "p", "q", "mu", "nu", "rho", "d", "eta"],
               rows)

    shock = None
    if sol.shock is not None:
        shock = {
            "t_c": sol.shock.t_c,
            "r_c": sol.shock.r_c,
            "ray_index": sol.shock.ray_index,
            "formal_vacuous": sol.shock.formal_vacuous,
        }
    result = {
        "shock": shock,
        "regularity_integral": radial.regularity_integral(sol),
        "n_rays": int(len(sol.r0)),
        "snapshot_times": snaps,
    }
    if opts.get("assert_subcritical", False) and shock is not None:
        raise SubcriticalAssertionError(
            f"supercritical state detected at t_c = {shock['t_c']:.6g}, "
            f"r_c = {shock['r_c']:.6g} while the run asserted subcritical data"
        )
    return result


def _run_phase_portrait(cfg: RunConfig, out: Path) -> Dict[str, Any]:
    params, o = cfg.params, cfg.options
    kappa, beta = params.kappa, params.beta
    ws = np.linspace(o["w_min"], o["w_max"], o["w_count"])
    ss = np.linspace(o["s_min"], o["s_max"], o["s_count"])
    rows = []
    for w in ws:
        for s in ss:
            dw = -beta * w + kappa * (1.0 - s)
            ds = w
            rows.append([w, s, dw, ds])
    _write_csv(out / "phase_portrait.csv", ["w", "s", "dw", "ds"], rows)
    return {"n_points": len(rows)}


def _run_lyapunov(cfg: RunConfig, out: Path) -> Dict[str, Any]:
    params = cfg.params
    result: Dict[str, Any] = {}
    if regime(params) is DampingRegime.WEAK:
        ss = lyapunov.s_star(params)
        table_p = lyapunov.solve_P(params, ss)
        table_n = lyapunov.solve_N(params)
        table_n.save(out / "lyapunov_N.txt")
        result["s_star"] = ss
        result["w_exit"] = math.sqrt(2.0 * table_n(0.0))
    else:
        s_max = cfg.options.get("s_max") or 4.0
        table_p = lyapunov.solve_P(params, s_max)
    table_p.save(out / "lyapunov_P.txt")
    result["p_table_nodes"] = int(len(table_p.s_grid))
    result["p_domain"] = list(table_p.domain)
    return result


def _run_decay(cfg: RunConfig, out: Path) -> Dict[str, Any]:
    o = cfg.options
    rep = analyze.decay_report(cfg.params, o["p0"], o["mu0"], eps=o["eps"],
                               window=o["window"])
    return {
        "gamma_fit": rep.gamma_fit,
        "gamma_expected": rep.gamma_expected,
        "window": list(rep.window),
        "residual": rep.residual,
        "generic_branch": rep.generic_branch,
    }


def run(cfg: RunConfig, workers: int = 1) -> Dict[str, Any]:
    """Execute the configured command; write artifacts and the JSON report."""
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    con = spectral_constants(cfg.params)
    report: Dict[str, Any] = {
        "params": {
            "kappa": cfg.params.kappa,
            "beta": cfg.params.beta,
            "dim": cfg.params.dim,
            "regime_tol": cfg.params.regime_tol,
        },
        "command": cfg.command,
        "results": None,
        "diagnostics": {
            "regime": regime(cfg.params).value,
            "alpha": con.alpha,
            "lambda1": con.lambda1,
            "lambda2": con.lambda2,
            "omega": con.omega,
        },
    }
    runner = {
        "classify": lambda: _run_classify(cfg, out),
        "boundary": lambda: _run_boundary(cfg, out),
        "simulate": lambda: _run_simulate(cfg, out, workers),
        "phase_portrait": lambda: _run_phase_portrait(cfg, out),
        "lyapunov": lambda: _run_lyapunov(cfg, out),
        "decay": lambda: _run_decay(cfg, out),
    }[cfg.command]
    try:
        report["results"] = runner()
    except SubcriticalAssertionError as exc:
        report["results"] = {"error": str(exc), "kind": "supercritical_detected"}
        _write_report(out, report)
        raise
    except (ConfigError,):
        raise
    except Exception as exc:
        report["results"] = {"error": str(exc), "kind": "numerical_failure"}
        _write_report(out, report)
        raise
    _write_report(out, report)
    return report


def _write_report(out: Path, report: Dict[str, Any]) -> None:
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, allow_nan=True)
        fh.write("\n")


@click.command()
@click.argument("config", type=click.Path())
@click.option("--out", "out_dir", type=click.Path(), default=None,
              help="Output directory (overrides [output].dir).")
@click.option("--format", "out_format", type=click.Choice(["csv", "json"]),
              default=None, help="Tabular output format (overrides [output].format).")
@click.option("--threads", type=int, default=1, show_default=True,
              help="Worker threads for ray evolution.")
def main(config: str, out_dir: Optional[str], out_format: Optional[str],
         threads: int) -> None:
    """Run one configured command of the threshold/simulation toolkit."""
    try:
        cfg = parse_config(config)
    except ConfigError as exc:
        click.echo(json.dumps({"error": str(exc), "kind": "config"}), err=True)
        sys.exit(EXIT_CONFIG)
    if out_dir is not None:
        cfg.out_dir = Path(out_dir)
    if out_format is not None:
        cfg.out_format = out_format
    try:
        run(cfg, workers=max(1, threads))
    except SubcriticalAssertionError as exc:
        click.echo(json.dumps({"error": str(exc), "kind": "supercritical_detected"}),
                   err=True)
        sys.exit(EXIT_SUPERCRITICAL)
    except ConfigError as exc:
        click.echo(json.dumps({"error": str(exc), "kind": "config"}), err=True)
        sys.exit(EXIT_CONFIG)
    except Exception as exc:
        click.echo(json.dumps({"error": str(exc), "kind": "numerical_failure"}),
                   err=True)
        sys.exit(EXIT_NUMERICAL)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
