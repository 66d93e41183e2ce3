"""Command-line front end: TOML config parsing, the four subcommands
(simulate, spectrum, sweep, validate), and CSV/JSON serialization.

All frequencies enter as ordinary kHz/MHz values and are converted to
angular units at parse time; all output floats carry 12 significant digits.
"""

import argparse
import dataclasses
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import __version__
from . import analysis as ana
from .dynamics import TimeGrid, propagate
from .errors import (ArgumentError, ConfigError, DegeneracyError,
                     EigenSolverError, NoRelaxationError,
                     NumericalIntegrityError, ResolutionError,
                     SpinCascadeError, ToleranceInfeasibleError)
from .liouville import build_total
from .model import (GeometryParams, PhysicalParams,
                    dipolar_couplings_from_geometry)
from .spectral import (certified_spectrum, gap_scan, null_space,
                       _hermitian_null_basis)
from .validation import run_all

SCHEMA_VERSION = "1"
STAGES = ("sec", "sec+ns", "full")

_KNOWN_KEYS = {
    "params": ("omega1_khz", "omega0_mhz", "omega_d_khz", "tau_c_us",
               "p_plus", "p_minus", "include_shifts"),
    "geometry": ("gamma", "r_nm", "theta_deg", "phi_deg"),
    "initial": ("state",),
    "grid": ("t_min_s", "t_max_s", "points", "spacing"),
    "sweep": ("omega0tau",),
    "tolerances": ("zero_mode", "flatness", "min_decades"),
    "output": ("dir", "formats"),
}

_DEFAULTS = {
    "stage": "full",
    "params": {"omega1_khz": 5.0, "omega0_mhz": 10.0, "omega_d_khz": 5.0,
               "tau_c_us": 1.0, "p_plus": 0.0, "p_minus": 0.0,
               "include_shifts": False},
    "initial": {"state": "up-up"},
    "grid": {"t_min_s": 1e-5, "t_max_s": 1e6, "points": 2200,
             "spacing": "log"},
    "sweep": {"omega0tau": [float(v) for v in np.logspace(-1, 2, 25)]},
    "tolerances": {"zero_mode": 1e-8, "flatness": 0.02, "min_decades": 0.5},
    "output": {"dir": "out", "formats": ["csv", "json"]},
}

_SINGLE_SPIN = {
    "z+": np.array([1.0, 0.0], dtype=complex),
    "z-": np.array([0.0, 1.0], dtype=complex),
    "x+": np.array([1.0, 1.0], dtype=complex) / math.sqrt(2),
    "x-": np.array([1.0, -1.0], dtype=complex) / math.sqrt(2),
    "y+": np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2),
    "y-": np.array([1.0, -1.0j], dtype=complex) / math.sqrt(2),
}


@dataclasses.dataclass
class RunConfig:
    params: PhysicalParams
    stage: str
    rho0: np.ndarray
    grid: TimeGrid
    sweep: list
    zero_mode: float
    flatness: float
    min_decades: float
    out_dir: Path
    formats: tuple
    resolved: dict  # full config with defaults filled, echoed to the manifest


def _number(section, key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}: {key} must be a number, got {value!r}")
    return float(value)


def _named_state(name):
    if name == "up-up":
        return _product_state("z+,z+")
    if name == "down-down":
        return _product_state("z-,z-")
    if name == "singlet":
        v = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)
        return np.outer(v, v.conj())
    if name == "mixed":
        return np.eye(4, dtype=complex) / 4
    return None


def _product_state(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or any(p not in _SINGLE_SPIN for p in parts):
        return None
    v = np.kron(_SINGLE_SPIN[parts[0]], _SINGLE_SPIN[parts[1]])
    return np.outer(v, v.conj())


def _initial_state(value):
    if isinstance(value, str):
        rho = _named_state(value)
        if rho is None and "," in value:
            rho = _product_state(value)
        if rho is None:
            raise ConfigError(
                f"initial: state must be one of up-up, down-down, singlet, "
                f"mixed, a product form like 'x+,z-', or a 4x4 matrix; "
                f"got {value!r}"
            )
        return rho
    # explicit 4x4: nested rows of [re, im] pairs
    try:
        rho = np.array([[complex(e[0], e[1]) for e in row] for row in value])
    except (TypeError, IndexError):
        raise ConfigError("initial: explicit state must be 4 rows of 4 "
                          "[re, im] pairs") from None
    if rho.shape != (4, 4):
        raise ConfigError(f"initial: explicit state must be 4x4, "
                          f"got shape {rho.shape}")
    return rho


def parse_config(text):
    """Validated RunConfig from TOML text; unknown keys are rejected by name,
    defaults are filled and echoed into `resolved` for the manifest."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc

    for name, value in data.items():
        if name == "stage":
            continue
        if name not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config key '{name}'")
        for key in value:
            if key not in _KNOWN_KEYS[name]:
                raise ConfigError(f"unknown config key '{name}.{key}'")
    if "params" not in data:
        raise ConfigError("required section 'params' missing")

    stage = data.get("stage", _DEFAULTS["stage"])
    if stage not in STAGES:
        raise ConfigError(f"stage must be one of {STAGES}, got {stage!r}")

    pr = {**_DEFAULTS["params"], **data["params"]}
    include_shifts = pr["include_shifts"]
    if not isinstance(include_shifts, bool):
        raise ConfigError("params: include_shifts must be a boolean")
    omega1 = 2 * math.pi * 1e3 * _number("params", "omega1_khz", pr["omega1_khz"])
    omega0 = 2 * math.pi * 1e6 * _number("params", "omega0_mhz", pr["omega0_mhz"])
    tau_c = 1e-6 * _number("params", "tau_c_us", pr["tau_c_us"])
    p_plus = _number("params", "p_plus", pr["p_plus"])
    p_minus = _number("params", "p_minus", pr["p_minus"])

    resolved_params = dict(pr)
    geometry = None
    if "geometry" in data:
        if "omega_d_khz" in data["params"]:
            raise ConfigError("params.omega_d_khz conflicts with [geometry]; "
                              "give one or the other")
        geo = {"theta_deg": 0.0, "phi_deg": 0.0, **data["geometry"]}
        for key in ("gamma", "r_nm"):
            if key not in geo:
                raise ConfigError(f"geometry: {key} is required")
        g = GeometryParams(
            gamma=_number("geometry", "gamma", geo["gamma"]),
            r=1e-9 * _number("geometry", "r_nm", geo["r_nm"]),
            theta=math.radians(_number("geometry", "theta_deg", geo["theta_deg"])),
            phi=math.radians(_number("geometry", "phi_deg", geo["phi_deg"])),
        )
        omega_d = dipolar_couplings_from_geometry(g)
        geometry = geo
        resolved_params.pop("omega_d_khz")
        try:
            params = PhysicalParams(omega1=omega1, omega0=omega0,
                                    omega_d=omega_d, tau_c=tau_c,
                                    p_plus=p_plus, p_minus=p_minus,
                                    include_shifts=include_shifts)
        except (ArgumentError, ValueError) as exc:
            raise ConfigError(f"params: {exc}") from exc
    else:
        od = pr["omega_d_khz"]
        if isinstance(od, list):
            if len(od) != 5:
                raise ConfigError("params: omega_d_khz must be a number or a "
                                  f"list of 5, got {len(od)} entries")
            mag = [2 * math.pi * 1e3 * _number("params", "omega_d_khz", v)
                   for v in od]
        else:
            mag = 2 * math.pi * 1e3 * _number("params", "omega_d_khz", od)
        try:
            params = PhysicalParams.from_magnitudes(
                omega1, omega0, mag, tau_c, p_plus=p_plus, p_minus=p_minus,
                include_shifts=include_shifts)
        except (ArgumentError, ValueError) as exc:
            raise ConfigError(f"params: {exc}") from exc

    init = {**_DEFAULTS["initial"], **data.get("initial", {})}
    rho0 = _initial_state(init["state"])

    gr = {**_DEFAULTS["grid"], **data.get("grid", {})}
    t_min = _number("grid", "t_min_s", gr["t_min_s"])
    t_max = _number("grid", "t_max_s", gr["t_max_s"])
    if not t_min < t_max:
        raise ConfigError(f"grid: t_min_s must be < t_max_s, "
                          f"got {t_min:g} >= {t_max:g}")
    points = gr["points"]
    if isinstance(points, bool) or not isinstance(points, int) or points < 2:
        raise ConfigError(f"grid: points must be an integer >= 2, got {points!r}")
    spacing = gr["spacing"]
    if spacing not in ("linear", "log"):
        raise ConfigError(f"grid: spacing must be 'linear' or 'log', "
                          f"got {spacing!r}")
    try:
        if spacing == "log":
            grid = TimeGrid.logarithmic(t_min, t_max, points)
        else:
            grid = TimeGrid.linear(t_min, t_max, points)
    except ArgumentError as exc:
        raise ConfigError(f"grid: {exc}") from exc

    sw = {**_DEFAULTS["sweep"], **data.get("sweep", {})}
    omega0tau = sw["omega0tau"]
    if not isinstance(omega0tau, list):
        omega0tau = [omega0tau]
    omega0tau = [_number("sweep", "omega0tau", v) for v in omega0tau]
    if any(v <= 0 for v in omega0tau):
        raise ConfigError("sweep: omega0tau values must be > 0")

    tol = {**_DEFAULTS["tolerances"], **data.get("tolerances", {})}
    for key in ("zero_mode", "flatness", "min_decades"):
        tol[key] = _number("tolerances", key, tol[key])
        if tol[key] <= 0:
            raise ConfigError(f"tolerances: {key} must be > 0, got {tol[key]:g}")

    out = {**_DEFAULTS["output"], **data.get("output", {})}
    formats = out["formats"]
    if not isinstance(formats, list) or not formats or any(
            f not in ("csv", "json") for f in formats):
        raise ConfigError("output: formats must be a non-empty list drawn "
                          "from ['csv', 'json']")

    resolved = {
        "stage": stage,
        "params": resolved_params,
        "initial": init,
        "grid": {"t_min_s": t_min, "t_max_s": t_max, "points": points,
                 "spacing": spacing},
        "sweep": {"omega0tau": omega0tau},
        "tolerances": tol,
        "output": {"dir": str(out["dir"]), "formats": list(formats)},
    }
    if geometry is not None:
        resolved["geometry"] = geometry
    return RunConfig(
        params=params, stage=stage, rho0=rho0, grid=grid, sweep=omega0tau,
        zero_mode=tol["zero_mode"], flatness=tol["flatness"],
        min_decades=tol["min_decades"], out_dir=Path(out["dir"]),
        formats=tuple(formats), resolved=resolved,
    )


# ---------------------------------------------------------------- output

def _fmt(x):
    return f"{x:.11e}"


def _jsonable(obj):
    """Floats rounded to 12 significant digits; numpy types unwrapped."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(_fmt(float(obj)))
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            c if isinstance(c, str) else str(c) if isinstance(c, int)
            else _fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path, payload):
    body = json.dumps(_jsonable(payload), indent=2)
    path.write_text(body + "\n")


def _write_manifest(cfg, command):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "config": cfg.resolved,
    }
    _write_json(cfg.out_dir / "manifest.json", payload)


# ---------------------------------------------------------------- commands

_TRAJECTORY_COLUMNS = ("t_s", "M_x", "M_y", "M_z", "M_xx", "M_yy", "M_zz",
                       "M_xy", "M_yz", "M_xz", "trace", "prethermal_order",
                       "dipolar_order")


def cmd_simulate(cfg):
    s = build_total(cfg.params, cfg.stage)
    traj = propagate(s, cfg.rho0, cfg.grid)
    series = {name: ana.observable_series(traj, name, cfg.params)
              for name in _TRAJECTORY_COLUMNS[1:]}
    report = ana.quasi_conserved(
        traj, cfg.params, (cfg.grid.points[0], cfg.grid.points[-1]))

    if "csv" in cfg.formats:
        rows = [[t] + [series[name][i] for name in _TRAJECTORY_COLUMNS[1:]]
                for i, t in enumerate(cfg.grid.points)]
        _write_csv(cfg.out_dir / "trajectory.csv", _TRAJECTORY_COLUMNS, rows)
        qc_cols = ("t_s", "prethermal_order", "dipolar_order", "m_xx",
                   "transverse_pair")
        qc_rows = [[t, report.prethermal_order[i], report.dipolar_order[i],
                    report.m_xx[i], report.transverse_pair[i]]
                   for i, t in enumerate(cfg.grid.points)]
        _write_csv(cfg.out_dir / "quasiconserved.csv", qc_cols, qc_rows)

    if "json" in cfg.formats:
        payload = {
            "schema_version": SCHEMA_VERSION,
            "observable": "M_zz",
            "flatness_tol": cfg.flatness,
            "min_decades": cfg.min_decades,
            "quasi_conserved_drift": report.drift,
        }
        try:
            rep = ana.detect_plateaus(traj, "M_zz", cfg.flatness,
                                      cfg.min_decades)
            payload["plateaus"] = rep.plateaus
        except (ArgumentError, ResolutionError) as exc:
            payload["plateaus"] = []
            payload["note"] = f"plateau detection skipped: {exc}"
        _write_json(cfg.out_dir / "plateaus.json", payload)
    _write_manifest(cfg, "simulate")
    return 0


def cmd_spectrum(cfg):
    rows = []
    stages = {}
    for stage in STAGES:
        s = build_total(cfg.params, stage)
        w, residuals = certified_spectrum(s)
        for i, (lam, res) in enumerate(zip(w, residuals)):
            rows.append([stage, i, lam.real, lam.imag, res])
        ns = null_space(s, cfg.zero_mode)
        basis_observables = []
        for h in _hermitian_null_basis(ns["basis"]):
            entry = {name: float(np.trace(h @ op).real)
                     for name, op in ana._M_OPS.items()}
            entry["trace"] = float(np.trace(h).real)
            basis_observables.append(entry)
        stages[stage] = {"dimension": ns["dimension"],
                         "basis_observables": basis_observables}

    if "csv" in cfg.formats:
        _write_csv(cfg.out_dir / "eigenvalues.csv",
                   ("stage", "index", "re_per_s", "im_per_s", "residual"),
                   rows)
    if "json" in cfg.formats:
        _write_json(cfg.out_dir / "nullspace.json", {
            "schema_version": SCHEMA_VERSION,
            "zero_mode_tol": cfg.zero_mode,
            "stages": stages,
        })
    _write_manifest(cfg, "spectrum")
    return 0


def cmd_sweep(cfg):
    values = cfg.sweep
    matrix = ana.contour_sweep(cfg.params, values, cfg.grid, "M_zz")
    gaps = gap_scan(cfg.params, values, cfg.zero_mode)

    if "csv" in cfg.formats:
        rows = []
        for i, v in enumerate(values):
            for j, t in enumerate(cfg.grid.points):
                rows.append([v, t, matrix[i, j]])
        _write_csv(cfg.out_dir / "contour.csv",
                   ("omega0tau", "t_s", "value"), rows)
        _write_csv(cfg.out_dir / "gaps.csv", ("omega0tau", "slow_fast_gap"),
                   [[g["omega0tau"], g["slow_fast_gap"]] for g in gaps])
    _write_manifest(cfg, "sweep")
    return 0


def cmd_validate(cfg):
    try:
        results = run_all(cfg.zero_mode, cfg.flatness, cfg.min_decades)
    except ToleranceInfeasibleError as exc:
        if "json" in cfg.formats:
            _write_json(cfg.out_dir / "validation.json", {
                "schema_version": SCHEMA_VERSION,
                "tolerance_infeasible": str(exc),
            })
            _write_manifest(cfg, "validate")
        raise
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.name}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if "json" in cfg.formats:
        _write_json(cfg.out_dir / "validation.json", {
            "schema_version": SCHEMA_VERSION,
            "all_passed": not failed,
            "results": [dataclasses.asdict(r) for r in results],
        })
    _write_manifest(cfg, "validate")
    return 1 if failed else 0


# ---------------------------------------------------------------- entry

def _load_config_text(args):
    if args.preset and args.config:
        raise ConfigError("give either a config file or --preset, not both")
    if args.preset:
        ref = resources.files("spincascade") / "presets" / f"{args.preset}.toml"
        if not ref.is_file():
            raise ConfigError(f"unknown preset '{args.preset}'")
        return ref.read_text()
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        return path.read_text()
    return ""


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="spincascade",
        description="Cascaded relaxation of a driven dipolar spin pair: "
                    "simulate, spectrum, sweep, validate.")
    parser.add_argument("--version", action="version",
                        version=f"spincascade {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("simulate", cmd_simulate), ("spectrum", cmd_spectrum),
                     ("sweep", cmd_sweep), ("validate", cmd_validate)):
        p = sub.add_parser(name)
        p.add_argument("config", nargs="?", help="TOML config file")
        p.add_argument("--preset", help="shipped preset name, e.g. reference")
        p.add_argument("--stage", choices=STAGES,
                       help="override the configured generator stage")
        p.add_argument("--out", help="override the output directory")
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)

    try:
        text = _load_config_text(args)
        cfg = parse_config(text)
        if args.stage:
            cfg = dataclasses.replace(cfg, stage=args.stage)
            cfg.resolved["stage"] = args.stage
        if args.out:
            cfg = dataclasses.replace(cfg, out_dir=Path(args.out))
            cfg.resolved["output"]["dir"] = args.out
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        return args.fn(cfg)
    except (ConfigError, ToleranceInfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalIntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (EigenSolverError, DegeneracyError, NoRelaxationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except SpinCascadeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
