"""Command line front end: figure/table data as CSV, design reports as JSON.

Every command resolves its parameters as defaults < config file < --set
overrides, validates them against a per-command schema, and emits an
RFC-4180-style CSV whose leading `#` metadata lines include the fully
resolved configuration as canonical JSON. Re-running with that JSON as the
config file reproduces the output byte for byte. Dimensional parameters
carry the unit in the field name (omega_m_rad_per_s, temperature_K, ...);
bare names are dimensionless or in scaled time units.

Exit codes: 0 success, 1 configuration/usage error, 2 oracle-check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy

from . import __version__
from .core import SystemParams, energy_eigenvalue_scaled, thermal_occupation
from .design import (
    CavityGeometry,
    DesignSearchSpace,
    cavity_linewidth,
    design_report,
    optimize_design,
    proposed_atom_spec,
    proposed_geometry,
)
from .duan import (
    CVInitialState,
    duan_ab,
    duan_ab_lower,
    duan_ab_values,
    duan_ac,
    duan_ac_lower,
    duan_ac_values,
    duan_bc,
    duan_bc_lower,
    duan_bc_values,
    duan_from_moments,
    min_over_window,
    regime_report,
)
from .oracle import (
    FockConfig,
    TriModeState,
    _coherent_vector,
    apply_evolution,
    build_initial_state,
    displacement_matrix,
    hamiltonian_expectation,
    moments,
    partial_trace,
)
from .qubit import reduced_rho_ab, timeseries

__all__ = ["main", "RunConfig", "ResultTable"]

_TABLE1_OMEGA_M = 2.0 * math.pi * 95.0e3
_TABLE1_LENGTH = 783.0e-6
_TABLE1_MIRROR_RADIUS = 5.0e-2
_TABLE1_FINESSE = 3.0e6
_TABLE1_TEMPERATURE = 0.8e-6
_OPTICAL_OMEGA = 1.0e15

COMMANDS = ("fig2", "fig3", "fig4a", "fig4b", "design", "oracle-check", "sweep")

DEFAULTS: dict[str, dict] = {
    "fig2": {
        "k": 0.5,
        "t_min": 0.0,
        "t_max": 8.0 * math.pi,
        "n_points": 4000,
        "seed": 0,
    },
    "fig3": {
        "k": 0.74,
        "alpha": 0.5,
        "beta": 0.5,
        "temperature_K": _TABLE1_TEMPERATURE,
        "omega_m_rad_per_s": _TABLE1_OMEGA_M,
        "omega_a_rad_per_s": _OPTICAL_OMEGA,
        "omega_b_rad_per_s": _OPTICAL_OMEGA,
        "cavity_length_m": _TABLE1_LENGTH,
        "mirror_radius_m": _TABLE1_MIRROR_RADIUS,
        "finesse": _TABLE1_FINESSE,
        "t_min": 0.0,
        "t_max": None,
        "n_points": 2000,
        "seed": 0,
    },
    "fig4a": {
        "k_min": 0.025,
        "k_max": 1.5,
        "k_step": 0.025,
        "temperatures_K": [1.0e-7, 4.0e-7, 8.0e-7],
        "alpha": 0.5,
        "beta": 0.5,
        "omega_m_rad_per_s": _TABLE1_OMEGA_M,
        "omega_a_rad_per_s": _OPTICAL_OMEGA,
        "omega_b_rad_per_s": _OPTICAL_OMEGA,
        "cavity_length_m": _TABLE1_LENGTH,
        "mirror_radius_m": _TABLE1_MIRROR_RADIUS,
        "finesse": _TABLE1_FINESSE,
        "window_scaled": None,
        "seed": 0,
    },
    "fig4b": {
        "alpha_min": 0.0,
        "alpha_max": 2.0,
        "alpha_step": 0.02,
        "beta_min": 0.0,
        "beta_max": 2.0,
        "beta_step": 0.02,
        "k": 0.74,
        "temperature_K": _TABLE1_TEMPERATURE,
        "omega_m_rad_per_s": _TABLE1_OMEGA_M,
        "omega_a_rad_per_s": _OPTICAL_OMEGA,
        "omega_b_rad_per_s": _OPTICAL_OMEGA,
        "cavity_length_m": _TABLE1_LENGTH,
        "mirror_radius_m": _TABLE1_MIRROR_RADIUS,
        "finesse": _TABLE1_FINESSE,
        "window_scaled": None,
        "seed": 0,
    },
    "design": {
        "radii_m": [1.0e-2, 2.5e-2, 5.0e-2, 10.0e-2],
        "finesse_eval": 5.8e5,
        "report_finesse": 3.0e6,
        "L_min_m": 200.0e-6,
        "L_max_m": 1250.0e-6,
        "L_step_m": 2.0e-6,
        "N_min": 1.0e5,
        "N_max": 5.8e5,
        "N_step": 1.0e3,
        "trap_frequencies_Hz": [40.0e3 + 5.0e3 * i for i in range(12)],
        "exclusion_halfwidth": 0.02,
        "exclusion_n_max": 8,
        "plateau_rtol": 0.01,
        "seed": 0,
    },
    "oracle-check": {
        "seed": 1234,
        "tolerance": None,
        "fock_tolerance": 1.0e-8,
        "n_qubit_times": 6,
        "n_cv_points": 4,
    },
    "sweep": {
        "quantity": "concurrence",
        "variable": "t",
        "start": 0.0,
        "stop": 4.0 * math.pi,
        "n_points": 500,
        "k": 0.5,
        "alpha": 0.5,
        "beta": 0.5,
        "nbar": 0.0,
        "r_a": 1.0,
        "r_b": 1.0,
        "t_fixed": math.pi,
        "seed": 0,
    },
}


class _CliError(Exception):
    """Configuration or usage problem; maps to exit code 1."""


# ---------------------------------------------------------------------------
# schema validation
# ---------------------------------------------------------------------------

def _number(*, minimum=None, exclusive_min=None):
    def check(value, label):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _CliError(f"field {label}: expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise _CliError(f"field {label}: must be finite, got {value!r}")
        if minimum is not None and value < minimum:
            raise _CliError(f"field {label}: must be >= {minimum}, got {value!r}")
        if exclusive_min is not None and value <= exclusive_min:
            raise _CliError(f"field {label}: must be > {exclusive_min}, got {value!r}")
        return value

    return check


def _integer(minimum):
    def check(value, label):
        if isinstance(value, bool) or not isinstance(value, int):
            raise _CliError(f"field {label}: expected an integer, got {value!r}")
        if value < minimum:
            raise _CliError(f"field {label}: must be >= {minimum}, got {value!r}")
        return value

    return check


def _number_list(*, exclusive_min=None):
    item = _number(exclusive_min=exclusive_min)

    def check(value, label):
        if not isinstance(value, (list, tuple)) or len(value) == 0:
            raise _CliError(f"field {label}: expected a non-empty list, got {value!r}")
        return [item(v, f"{label}[{i}]") for i, v in enumerate(value)]

    return check


def _optional(inner):
    def check(value, label):
        return None if value is None else inner(value, label)

    return check


def _choice(*options):
    def check(value, label):
        if value not in options:
            raise _CliError(f"field {label}: must be one of {sorted(options)}, got {value!r}")
        return value

    return check


_ANY = _number()
_POS = _number(exclusive_min=0.0)
_NONNEG = _number(minimum=0.0)

_SCHEMAS: dict[str, dict] = {
    "fig2": {
        "k": _NONNEG,
        "t_min": _NONNEG,
        "t_max": _POS,
        "n_points": _integer(2),
        "seed": _integer(0),
    },
    "fig3": {
        "k": _NONNEG,
        "alpha": _ANY,
        "beta": _ANY,
        "temperature_K": _POS,
        "omega_m_rad_per_s": _POS,
        "omega_a_rad_per_s": _NONNEG,
        "omega_b_rad_per_s": _NONNEG,
        "cavity_length_m": _POS,
        "mirror_radius_m": _POS,
        "finesse": _number(exclusive_min=1.0),
        "t_min": _NONNEG,
        "t_max": _optional(_POS),
        "n_points": _integer(2),
        "seed": _integer(0),
    },
    "fig4a": {
        "k_min": _NONNEG,
        "k_max": _POS,
        "k_step": _POS,
        "temperatures_K": _number_list(exclusive_min=0.0),
        "alpha": _ANY,
        "beta": _ANY,
        "omega_m_rad_per_s": _POS,
        "omega_a_rad_per_s": _NONNEG,
        "omega_b_rad_per_s": _NONNEG,
        "cavity_length_m": _POS,
        "mirror_radius_m": _POS,
        "finesse": _number(exclusive_min=1.0),
        "window_scaled": _optional(_POS),
        "seed": _integer(0),
    },
    "fig4b": {
        "alpha_min": _NONNEG,
        "alpha_max": _POS,
        "alpha_step": _POS,
        "beta_min": _NONNEG,
        "beta_max": _POS,
        "beta_step": _POS,
        "k": _NONNEG,
        "temperature_K": _POS,
        "omega_m_rad_per_s": _POS,
        "omega_a_rad_per_s": _NONNEG,
        "omega_b_rad_per_s": _NONNEG,
        "cavity_length_m": _POS,
        "mirror_radius_m": _POS,
        "finesse": _number(exclusive_min=1.0),
        "window_scaled": _optional(_POS),
        "seed": _integer(0),
    },
    "design": {
        "radii_m": _number_list(exclusive_min=0.0),
        "finesse_eval": _number(exclusive_min=1.0),
        "report_finesse": _number(exclusive_min=1.0),
        "L_min_m": _POS,
        "L_max_m": _POS,
        "L_step_m": _POS,
        "N_min": _number(minimum=1.0),
        "N_max": _number(minimum=1.0),
        "N_step": _POS,
        "trap_frequencies_Hz": _number_list(exclusive_min=0.0),
        "exclusion_halfwidth": _NONNEG,
        "exclusion_n_max": _integer(0),
        "plateau_rtol": _NONNEG,
        "seed": _integer(0),
    },
    "oracle-check": {
        "seed": _integer(0),
        "tolerance": _optional(_POS),
        "fock_tolerance": _POS,
        "n_qubit_times": _integer(1),
        "n_cv_points": _integer(1),
    },
    "sweep": {
        "quantity": _choice("concurrence", "entropy", "duan_ab", "duan_ac", "duan_bc"),
        "variable": _choice("t", "k"),
        "start": _NONNEG,
        "stop": _POS,
        "n_points": _integer(2),
        "k": _NONNEG,
        "alpha": _ANY,
        "beta": _ANY,
        "nbar": _NONNEG,
        "r_a": _NONNEG,
        "r_b": _NONNEG,
        "t_fixed": _NONNEG,
        "seed": _integer(0),
    },
}


@dataclass(frozen=True)
class RunConfig:
    """A validated command plus its fully resolved parameter set."""

    command: str
    values: dict
    out: str | None = None
    workers: int = 1


@dataclass
class ResultTable:
    """Rectangular numeric table plus the metadata needed to reproduce it."""

    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} cells, expected {width}")


def _parse_set_item(item: str) -> tuple[str, object]:
    if "=" not in item:
        raise _CliError(f"--set {item!r}: expected KEY=VALUE")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise _CliError(f"--set {item!r}: empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _CliError(f"config file {path}: {exc}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _CliError(f"config file {path}, line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(data, dict):
        raise _CliError(f"config file {path}: top level must be a JSON object")
    return data


def resolve_config(command, config_path=None, overrides=(), seed=None, out=None, workers=1) -> RunConfig:
    """Merge defaults, config file and --set overrides, then validate."""
    if command not in DEFAULTS:
        raise _CliError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    schema = _SCHEMAS[command]
    values = dict(DEFAULTS[command])

    if config_path is not None:
        for key, value in _load_config_file(config_path).items():
            if key not in schema:
                raise _CliError(
                    f"config file {config_path}: unknown field {key!r} for command "
                    f"{command!r} (known: {', '.join(sorted(schema))})"
                )
            values[key] = value
    for item in overrides:
        key, value = _parse_set_item(item)
        if key not in schema:
            raise _CliError(
                f"--set {item!r}: unknown field {key!r} for command {command!r} "
                f"(known: {', '.join(sorted(schema))})"
            )
        values[key] = value
    if seed is not None:
        values["seed"] = seed

    validated = {key: schema[key](values[key], repr(key)) for key in sorted(schema)}
    if workers < 1:
        raise _CliError(f"--workers must be at least 1, got {workers}")
    return RunConfig(command=command, values=validated, out=out, workers=workers)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(stream, table: ResultTable) -> None:
    for key, value in table.metadata.items():
        stream.write(f"# {key}: {value}\r\n")
    writer = csv.writer(stream)
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_format_cell(cell) for cell in row])


def _emit(table: ResultTable, out: str | None) -> None:
    if out is None:
        _write_csv(sys.stdout, table)
        return
    try:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            _write_csv(fh, table)
    except OSError as exc:
        raise _CliError(f"cannot write {out}: {exc}")


def _metadata(cfg: RunConfig, extra: dict | None = None) -> dict:
    md = {
        "generator": f"optomech {__version__} (numpy {np.__version__}, scipy {scipy.__version__})",
        "command": cfg.command,
        "entropy_base": "2",
        "frequency_interpretation": (
            "keys suffixed _rad_per_s are angular frequencies; keys suffixed _Hz are "
            "ordinary frequencies; bare t/window values are in scaled time omega_m*t"
        ),
    }
    if extra:
        md.update(extra)
    md["config_json"] = json.dumps(cfg.values, sort_keys=True, separators=(",", ":"))
    return md


def _parallel_map(func, items, workers: int) -> list:
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    chunk = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunk))


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _scaled_window(values: dict) -> tuple[float, float]:
    """(window in scaled time, kappa in 1/s) from the cavity geometry fields."""
    geom = CavityGeometry(
        L=values["cavity_length_m"],
        R_mirror=values["mirror_radius_m"],
        finesse=values["finesse"],
    )
    kappa, tau_p = cavity_linewidth(geom)
    return values["omega_m_rad_per_s"] * tau_p, kappa


def run_fig2(cfg: RunConfig) -> ResultTable:
    v = cfg.values
    if not v["t_max"] > v["t_min"]:
        raise _CliError(f"field 't_max': must exceed t_min={v['t_min']}")
    grid = np.linspace(v["t_min"], v["t_max"], v["n_points"])
    conc = timeseries("concurrence", v["k"], grid)
    ent = timeseries("entropy", v["k"], grid)
    rows = [
        (float(t), float(c), float(s))
        for t, c, s in zip(grid, conc[:, 1], ent[:, 1])
    ]
    return ResultTable(["t", "concurrence", "entropy"], rows, _metadata(cfg))


def run_fig3(cfg: RunConfig) -> ResultTable:
    v = cfg.values
    window, kappa = _scaled_window(v)
    t_max = v["t_max"] if v["t_max"] is not None else window
    if not t_max > v["t_min"]:
        raise _CliError(f"field 't_max': must exceed t_min={v['t_min']}")
    omega_m = v["omega_m_rad_per_s"]
    p = SystemParams(
        omega_a=v["omega_a_rad_per_s"],
        omega_b=v["omega_b_rad_per_s"],
        omega_m=omega_m,
        g0=v["k"] * omega_m,
    )
    nbar = thermal_occupation(v["temperature_K"], omega_m)
    state = CVInitialState(alpha=v["alpha"], beta=v["beta"], nbar=nbar)
    grid = np.linspace(v["t_min"], t_max, v["n_points"])
    columns = {
        "duan_ab": duan_ab_values(grid, state, p),
        "duan_ac": duan_ac_values(grid, state, p),
        "duan_bc": duan_bc_values(grid, state, p),
        "duan_ab_lower": duan_ab_lower(grid, state, p),
        "duan_ac_lower": duan_ac_lower(grid, state, p),
        "duan_bc_lower": duan_bc_lower(grid, state, p),
    }
    rows = [
        (
            float(t),
            float(columns["duan_ab"][i]),
            float(columns["duan_ac"][i]),
            float(columns["duan_bc"][i]),
            1.0,
            float(columns["duan_ab_lower"][i]),
            float(columns["duan_ac_lower"][i]),
            float(columns["duan_bc_lower"][i]),
        )
        for i, t in enumerate(grid)
    ]
    extra = {"nbar": repr(nbar), "window_scaled": repr(window)}
    if v["k"] > 0:
        rep = regime_report(v["k"], p, kappa)
        extra.update(
            regime=rep.regime,
            feasibility_condition=rep.feasibility_condition,
            feasibility_ratio=repr(rep.feasibility_ratio),
            envelope_period_scaled=repr(rep.envelope_period),
        )
    names = [
        "t", "duan_ab", "duan_ac", "duan_bc", "threshold",
        "duan_ab_lower", "duan_ac_lower", "duan_bc_lower",
    ]
    return ResultTable(names, rows, _metadata(cfg, extra))


def _min_duan_cell(args) -> float:
    bipartition, alpha, beta, nbar, k, r_a, r_b, window = args
    state = CVInitialState(alpha=alpha, beta=beta, nbar=nbar)
    p = SystemParams.from_dimensionless(k=k, r_a=r_a, r_b=r_b)
    _, d_star = min_over_window(bipartition, state, p, window)
    return d_star


def run_fig4a(cfg: RunConfig) -> ResultTable:
    v = cfg.values
    if not v["k_max"] > v["k_min"]:
        raise _CliError("field 'k_max': must exceed k_min")
    window, _ = _scaled_window(v)
    if v["window_scaled"] is not None:
        window = v["window_scaled"]
    omega_m = v["omega_m_rad_per_s"]
    r_a = v["omega_a_rad_per_s"] / omega_m
    r_b = v["omega_b_rad_per_s"] / omega_m
    ks = np.arange(v["k_min"], v["k_max"] + 0.5 * v["k_step"], v["k_step"])
    cells = [
        ("AB", v["alpha"], v["beta"], thermal_occupation(T, omega_m), float(k), r_a, r_b, window)
        for k in ks
        for T in v["temperatures_K"]
    ]
    mins = _parallel_map(_min_duan_cell, cells, cfg.workers)
    rows = [
        (float(k), float(T), float(d))
        for (k, T), d in zip(((k, T) for k in ks for T in v["temperatures_K"]), mins)
    ]
    extra = {"window_scaled": repr(window)}
    return ResultTable(["k", "temperature_K", "min_duan_ab"], rows, _metadata(cfg, extra))


def run_fig4b(cfg: RunConfig) -> ResultTable:
    v = cfg.values
    for lo, hi in (("alpha_min", "alpha_max"), ("beta_min", "beta_max")):
        if not v[hi] > v[lo]:
            raise _CliError(f"field {hi!r}: must exceed {lo}")
    window, kappa = _scaled_window(v)
    if v["window_scaled"] is not None:
        window = v["window_scaled"]
    omega_m = v["omega_m_rad_per_s"]
    r_a = v["omega_a_rad_per_s"] / omega_m
    r_b = v["omega_b_rad_per_s"] / omega_m
    nbar = thermal_occupation(v["temperature_K"], omega_m)
    alphas = np.arange(v["alpha_min"], v["alpha_max"] + 0.5 * v["alpha_step"], v["alpha_step"])
    betas = np.arange(v["beta_min"], v["beta_max"] + 0.5 * v["beta_step"], v["beta_step"])
    cells = [
        ("AB", float(a), float(b), nbar, v["k"], r_a, r_b, window)
        for a in alphas
        for b in betas
    ]
    mins = _parallel_map(_min_duan_cell, cells, cfg.workers)
    rows = [
        (float(a), float(b), float(d))
        for (a, b), d in zip(((a, b) for a in alphas for b in betas), mins)
    ]
    extra = {"nbar": repr(nbar), "window_scaled": repr(window)}
    if v["k"] > 0:
        rep = regime_report(
            v["k"], SystemParams.from_dimensionless(v["k"], r_a, r_b), kappa
        )
        extra.update(regime=rep.regime, feasibility_condition=rep.feasibility_condition)
    return ResultTable(["alpha", "beta", "min_duan_ab"], rows, _metadata(cfg, extra))


def run_design(cfg: RunConfig) -> tuple[ResultTable, dict]:
    v = cfg.values
    if not v["L_max_m"] >= v["L_min_m"]:
        raise _CliError("field 'L_max_m': must be >= L_min_m")
    if not v["N_max"] >= v["N_min"]:
        raise _CliError("field 'N_max': must be >= N_min")
    rows = []
    optimized = []
    for radius in v["radii_m"]:
        space = DesignSearchSpace(
            R_mirror=radius,
            L_min=v["L_min_m"],
            L_max=v["L_max_m"],
            L_step=v["L_step_m"],
            N_min=v["N_min"],
            N_max=v["N_max"],
            N_step=v["N_step"],
            omega_m_values=tuple(2.0 * math.pi * f for f in v["trap_frequencies_Hz"]),
            finesse_eval=v["finesse_eval"],
            exclusion_halfwidth=v["exclusion_halfwidth"],
            exclusion_n_max=v["exclusion_n_max"],
            plateau_rtol=v["plateau_rtol"],
        )
        result = optimize_design(space)
        if not result.feasible:
            raise _CliError(f"design search at mirror radius {radius} m: {result.message}")
        report = result.report
        rows.append(
            (
                float(radius),
                float(result.L),
                float(result.N),
                float(result.omega_m / (2.0 * math.pi)),
                float(result.k),
                float(result.ratio),
                float(report.min_finesse_for_unity_ratio),
            )
        )
        optimized.append(
            {
                "mirror_radius_m": radius,
                "cavity_length_m": result.L,
                "atom_number": result.N,
                "trap_frequency_Hz": result.omega_m / (2.0 * math.pi),
                "k": result.k,
                "g0_rad_per_s": report.g0,
                "ratio_at_eval_finesse": result.ratio,
                "min_finesse_for_unity_ratio": report.min_finesse_for_unity_ratio,
                "n_evaluated": result.n_evaluated,
            }
        )

    prop = design_report(proposed_atom_spec(), proposed_geometry(v["report_finesse"]))
    heating = prop.heating
    report_json = {
        "proposed": {
            "finesse": v["report_finesse"],
            "g0_rad_per_s": prop.g0,
            "k": prop.k,
            "kappa_per_s": prop.kappa,
            "tau_p_s": prop.tau_p,
            "tau_e_s": prop.tau_e,
            "ratio": prop.ratio,
            "min_finesse_for_unity_ratio": prop.min_finesse_for_unity_ratio,
            "heating": {
                "r_fs": heating.r_fs,
                "r_c": heating.r_c,
                "energy_ratio": heating.energy_ratio,
                "r_fs_alt": heating.r_fs_alt,
                "r_c_alt": heating.r_c_alt,
                "energy_ratio_alt": heating.energy_ratio_alt,
                "backaction_dominates": heating.backaction_dominates,
            },
        },
        "optimized": optimized,
    }
    names = [
        "mirror_radius_m", "cavity_length_m", "atom_number", "trap_frequency_Hz",
        "k", "ratio_at_eval_finesse", "min_finesse_for_unity_ratio",
    ]
    table = ResultTable(names, rows, _metadata(cfg))
    return table, report_json


def _cmd_design(cfg: RunConfig) -> int:
    table, report_json = run_design(cfg)
    _emit(table, cfg.out)
    if cfg.out is not None:
        json_path = os.path.splitext(cfg.out)[0] + ".json"
        payload = {"metadata": dict(table.metadata), "report": report_json}
        try:
            with open(json_path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise _CliError(f"cannot write {json_path}: {exc}")
    return 0


# ---------------------------------------------------------------------------
# oracle certification
# ---------------------------------------------------------------------------

def _check_displacement(rng) -> list:
    eye_dev = float(np.abs(displacement_matrix(0.0, 12) - np.eye(13)).max())
    dev = 0.0
    for _ in range(4):
        b = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        g = complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        mat = displacement_matrix(b, 80)
        lhs = mat @ _coherent_vector(g, 80)
        rhs = np.exp(1j * (b * np.conj(g)).imag) * _coherent_vector(b + g, 80)
        dev = max(dev, float(np.abs(lhs - rhs).max()))
    return [
        ("displacement_identity_at_zero", eye_dev, 1e-15),
        ("displacement_coherent_action", dev, 1e-10),
    ]


def _check_qubit(rng, n_times: int) -> list:
    dev = 0.0
    for k in (0.1, 0.5, 1.0):
        state = build_initial_state("qubit", k=k, tolerance=1e-12)
        for t in rng.uniform(0.0, 4.0 * math.pi, n_times):
            evolved = apply_evolution(state, float(t), k, 0.0, 0.0)
            dev = max(
                dev,
                float(np.abs(partial_trace(evolved, "AB") - reduced_rho_ab(float(t), k)).max()),
            )
    return [("qubit_reduced_state_vs_oracle", dev, 1e-8)]


def _check_conservation(rng) -> list:
    state = build_initial_state(
        "coherent_thermal", alpha=0.7, beta=0.4, nbar=0.3, k=0.6, tolerance=1e-10
    )
    trace0 = state.trace()
    energy0 = hamiltonian_expectation(state, 0.6, 1.3, 0.8)
    drift = 0.0
    energy_dev = 0.0
    for t in rng.uniform(0.0, 4.0 * math.pi, 5):
        evolved = apply_evolution(state, float(t), 0.6, 1.3, 0.8)
        drift = max(drift, abs(evolved.trace() - trace0))
        energy = hamiltonian_expectation(evolved, 0.6, 1.3, 0.8)
        energy_dev = max(energy_dev, abs(energy - energy0) / max(abs(energy0), 1.0))
    return [
        ("oracle_norm_drift", drift, 1e-10),
        ("oracle_energy_conservation_rel", energy_dev, 1e-8),
    ]


def _check_stationarity(rng) -> list:
    k, r_a, r_b = 0.5, 1.3, 0.8
    config = FockConfig(n_max_a=2, n_max_b=2, n_max_c=40, tolerance=1e-12)
    dev = 0.0
    for n0, m0, l0 in ((1, 0, 2), (0, 2, 0), (2, 1, 3)):
        psi = np.zeros((3, 3, 41), dtype=complex)
        psi[n0, m0, :] = displacement_matrix(k * (n0 - m0), 40)[:, l0] if n0 != m0 else 0.0
        if n0 == m0:
            psi[n0, m0, l0] = 1.0
        state = TriModeState(np.array([1.0]), [psi], config)
        energy = energy_eigenvalue_scaled(n0, m0, l0, k, r_a, r_b)
        for t in rng.uniform(0.0, 4.0 * math.pi, 3):
            evolved = apply_evolution(state, float(t), k, r_a, r_b)
            expected = np.exp(-1j * energy * float(t)) * psi
            dev = max(dev, float(np.abs(evolved.vectors[0] - expected).max()))
    return [("oracle_eigenstate_stationarity", dev, 1e-8)]


def _check_cv(rng, n_points: int, fock_tolerance: float) -> list:
    closed = {"AB": duan_ab, "AC": duan_ac, "BC": duan_bc}
    dev = 0.0
    for _ in range(n_points):
        alpha = float(rng.uniform(0.1, 1.0))
        beta = float(rng.uniform(0.1, 1.0))
        nbar = float(rng.uniform(0.0, 0.5))
        k = float(rng.uniform(0.2, 1.0))
        r_a = float(rng.uniform(0.0, 3.0))
        r_b = float(rng.uniform(0.0, 3.0))
        t = float(rng.uniform(0.3, 4.0 * math.pi))
        state = build_initial_state(
            "coherent_thermal", alpha=alpha, beta=beta, nbar=nbar, k=k,
            tolerance=fock_tolerance,
        )
        evolved = apply_evolution(state, t, k, r_a, r_b)
        params = SystemParams.from_dimensionless(k=k, r_a=r_a, r_b=r_b)
        cv = CVInitialState(alpha=alpha, beta=beta, nbar=nbar)
        for pair, func in closed.items():
            d_oracle = duan_from_moments(moments(evolved, pair))
            d_closed = func(t, cv, params).D
            dev = max(dev, abs(d_closed - d_oracle) / abs(d_oracle))
    return [("cv_duan_vs_oracle_rel", dev, 1e-6)]


def _check_k_zero(rng) -> list:
    dev = 0.0
    for _ in range(2):
        alpha = float(rng.uniform(0.2, 0.8))
        beta = float(rng.uniform(0.2, 0.8))
        nbar = float(rng.uniform(0.0, 0.3))
        r_a = float(rng.uniform(0.0, 2.0))
        r_b = float(rng.uniform(0.0, 2.0))
        t = float(rng.uniform(0.5, 4.0 * math.pi))
        state = build_initial_state(
            "coherent_thermal", alpha=alpha, beta=beta, nbar=nbar, k=0.0,
            tolerance=1e-15,
        )
        evolved = apply_evolution(state, t, 0.0, r_a, r_b)
        dev = max(dev, abs(duan_from_moments(moments(evolved, "AB")) - 1.0))
        for pair in ("AC", "BC"):
            dev = max(dev, abs(duan_from_moments(moments(evolved, pair)) - (1.0 + nbar)))
    return [("k_zero_separability_floors", dev, 1e-12)]


def _check_truncation_doubling(rng) -> list:
    alpha, beta, nbar, k = 0.5, 0.5, 0.2, 0.5
    t = float(rng.uniform(1.0, 8.0))
    # tail budgets bound dropped probability mass, not moments, so a run
    # sized at 1e-9 is what backs a 1e-8 stability claim
    base = FockConfig.for_coherent_thermal(alpha, beta, nbar, k, 1e-9)
    dev = 0.0
    results = []
    for config in (base, base.doubled()):
        state = build_initial_state(
            "coherent_thermal", alpha=alpha, beta=beta, nbar=nbar, k=k, config=config
        )
        evolved = apply_evolution(state, t, k, 1.5, 0.7)
        results.append([duan_from_moments(moments(evolved, pair)) for pair in ("AB", "AC", "BC")])
    for a, b in zip(*results):
        dev = max(dev, abs(a - b))
    return [("truncation_doubling_stability", dev, 1e-8)]


def run_oracle_check(cfg: RunConfig) -> tuple[ResultTable, int]:
    v = cfg.values
    rng = np.random.default_rng(v["seed"])
    checks = []
    checks += _check_displacement(rng)
    checks += _check_qubit(rng, v["n_qubit_times"])
    checks += _check_conservation(rng)
    checks += _check_stationarity(rng)
    checks += _check_cv(rng, v["n_cv_points"], v["fock_tolerance"])
    checks += _check_k_zero(rng)
    checks += _check_truncation_doubling(rng)

    rows = []
    failures = 0
    for name, deviation, default_tol in checks:
        tol = v["tolerance"] if v["tolerance"] is not None else default_tol
        ok = deviation < tol
        failures += 0 if ok else 1
        rows.append((name, float(deviation), float(tol), "PASS" if ok else "FAIL"))
    extra = {"checks_failed": str(failures), "checks_total": str(len(rows))}
    table = ResultTable(
        ["check", "max_deviation", "tolerance", "status"], rows, _metadata(cfg, extra)
    )
    return table, (0 if failures == 0 else 2)


def _cmd_oracle_check(cfg: RunConfig) -> int:
    table, code = run_oracle_check(cfg)
    for name, deviation, tol, status in table.rows:
        print(f"[{status}] {name}: max deviation {deviation:.3e} (tolerance {tol:.1e})")
    failed = sum(1 for row in table.rows if row[3] == "FAIL")
    print(f"oracle-check: {len(table.rows) - failed}/{len(table.rows)} checks passed")
    if cfg.out is not None:
        _emit(table, cfg.out)
    return code


# ---------------------------------------------------------------------------
# generic sweep
# ---------------------------------------------------------------------------

def _sweep_cell(args) -> float:
    quantity, variable, x, fixed = args
    if quantity in ("concurrence", "entropy"):
        k = x if variable == "k" else fixed["k"]
        t = x if variable == "t" else fixed["t_fixed"]
        return float(timeseries(quantity, k, np.array([t]))[0, 1])
    func = {"duan_ab": duan_ab, "duan_ac": duan_ac, "duan_bc": duan_bc}[quantity]
    k = x if variable == "k" else fixed["k"]
    t = x if variable == "t" else fixed["t_fixed"]
    state = CVInitialState(alpha=fixed["alpha"], beta=fixed["beta"], nbar=fixed["nbar"])
    params = SystemParams.from_dimensionless(k=k, r_a=fixed["r_a"], r_b=fixed["r_b"])
    return float(func(t, state, params).D)


def run_sweep(cfg: RunConfig) -> ResultTable:
    v = cfg.values
    if not v["stop"] > v["start"]:
        raise _CliError("field 'stop': must exceed start")
    if v["quantity"].startswith("duan") and not (v["r_a"] > 0 and v["r_b"] > 0):
        raise _CliError("fields 'r_a' and 'r_b': must be positive for Duan sweeps")
    xs = np.linspace(v["start"], v["stop"], v["n_points"])
    fixed = {key: v[key] for key in ("k", "alpha", "beta", "nbar", "r_a", "r_b", "t_fixed")}
    cells = [(v["quantity"], v["variable"], float(x), fixed) for x in xs]
    values = _parallel_map(_sweep_cell, cells, cfg.workers)
    rows = [(float(x), float(y)) for x, y in zip(xs, values)]
    return ResultTable([v["variable"], v["quantity"]], rows, _metadata(cfg))


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="optomech",
        description="Tripartite optomechanical entanglement: figure data, design reports, oracle certification.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="FILE", help="JSON file with parameter overrides")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a single config field (repeatable; wins over --config)",
    )
    parser.add_argument("--out", metavar="PATH", help="output CSV path (default: stdout)")
    parser.add_argument(
        "--workers", type=int, default=os.cpu_count() or 1,
        help="worker processes for sweep grids (default: all cores)",
    )
    parser.add_argument("--seed", type=int, help="seed for randomized test-point sampling")
    return parser


_TABLE_COMMANDS = {
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4a": run_fig4a,
    "fig4b": run_fig4b,
    "sweep": run_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(
            args.command,
            config_path=args.config,
            overrides=args.overrides,
            seed=args.seed,
            out=args.out,
            workers=args.workers,
        )
        if cfg.command == "design":
            return _cmd_design(cfg)
        if cfg.command == "oracle-check":
            return _cmd_oracle_check(cfg)
        table = _TABLE_COMMANDS[cfg.command](cfg)
        _emit(table, cfg.out)
        return 0
    except (_CliError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
