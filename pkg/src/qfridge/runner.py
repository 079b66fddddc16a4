"""Commands behind the CLI: steady, evolve, switch, sweep and window.

Each command returns a :class:`Result` holding a JSON-ready document and,
where it makes sense, a flat table for CSV output.
"""

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, QFridgeError, ScenarioError
from .lindblad import propagate
from .machine import build_machine
from .protocol import default_t_max, run_switch_protocol
from .scenario import SCHEMA_VERSION, resolve_truncation, scenario_document
from .thermo import VirtualTemperature, carnot_cop, cooling_window, effective_temperature

COMMANDS = ("steady", "evolve", "switch", "sweep", "window")
WORKERS_ENV = "QFRIDGE_WORKERS"


@dataclass(frozen=True, eq=False)
class Result:
    """Command output. ``failures`` counts sweep points that did not solve."""

    document: dict
    columns: tuple = ()
    rows: tuple = ()
    failures: int = 0

    def to_json(self):
        return json.dumps(_jsonable(self.document), indent=2, allow_nan=False) + "\n"

    def to_csv(self):
        if not self.columns:
            raise ParameterError(f"command {self.document.get('command')!r} has no tabular output")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_cell(row.get(c)) for c in self.columns])
        return buf.getvalue()

    def render(self, fmt):
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ParameterError(f"unknown format {fmt!r}")


def format_cell(value):
    """CSV cell text; floats use 17 significant digits for an exact round trip."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.16e" % value
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def resolve_workers(flag=None):
    """Worker count: explicit flag, else $QFRIDGE_WORKERS, else 1."""
    if flag is not None:
        n = flag
    else:
        env = os.environ.get(WORKERS_ENV)
        if env is None:
            return 1
        try:
            n = int(env)
        except ValueError:
            raise ParameterError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    if n < 1:
        raise ParameterError(f"worker count must be >= 1, got {n}")
    return n


def _header(command, cfg, truncation=None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "scenario": scenario_document(cfg),
        "derived": cfg.derived(),
    }
    if truncation is not None:
        doc["truncation"] = {
            "mode": truncation.mode,
            "dims": dict(truncation.dims),
            "ladder": [s.as_dict() for s in truncation.ladder],
        }
    return doc


def steady_row(report):
    """Flat row of a steady-state report (sweep/steady CSV)."""
    row = {}
    for m, n in zip(report.occupations, report.dims):
        row[f"dim_{m}"] = n
    for m, n in report.occupations.items():
        row[f"n_{m}"] = n
    for m, t in report.effective_temperatures.items():
        row[f"T_eff_{m}_K"] = t
    row["J_c_W"] = report.currents.J_c
    row["J_r_W"] = report.currents.J_r
    row["J_h_W"] = report.currents.J_h
    row["power_W"] = report.currents.power if report.currents.J_h is None else None
    perf = report.performance
    row["cop"] = perf.cop
    row["cop_carnot"] = perf.cop_carnot
    row["T_v_K"] = None if perf.virtual_temperature is None else perf.virtual_temperature.kelvin
    row["sigma_W_per_K"] = perf.entropy_production
    row["residual"] = report.residual
    row["block_size"] = report.block_size
    return row


def _steady_columns(modes):
    cols = [f"dim_{m}" for m in modes] + [f"n_{m}" for m in modes] + [f"T_eff_{m}_K" for m in modes]
    return tuple(cols + ["J_c_W", "J_r_W", "J_h_W", "power_W", "cop", "cop_carnot", "T_v_K",
                         "sigma_W_per_K", "residual", "block_size"])


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_steady(cfg, truncation="auto", workers=1):
    tr = resolve_truncation(cfg, truncation)
    doc = _header("steady", cfg, tr)
    doc["report"] = tr.report.as_dict()
    row = steady_row(tr.report)
    return Result(doc, _steady_columns(cfg.modes), (row,))


def _sweep_point(args):
    cfg, values, truncation = args
    row = dict(zip(cfg.sweep.columns, values))
    try:
        point = cfg.sweep.apply(cfg, values)
        tr = resolve_truncation(point, truncation)
    except QFridgeError as exc:
        # e.g. no bounded steady state at this point; keep the rest of the grid
        row["status"] = exc.code
        return row, [], {"point": list(values), "code": exc.code, "message": str(exc)}
    row.update(steady_row(tr.report))
    row["status"] = "ok"
    return row, [s.as_dict() for s in tr.ladder], None


def cmd_sweep(cfg, truncation="auto", workers=1):
    if cfg.sweep is None:
        raise ScenarioError("sweep command needs a [sweep] table", "sweep")
    params = cfg.sweep.columns
    grid = cfg.sweep.grid()
    jobs = [(cfg, values, truncation) for values in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(j) for j in jobs]
    # canonical order: grid order, whatever order the workers finished in
    order = sorted(range(len(grid)), key=lambda k: grid[k])
    rows = tuple(results[k][0] for k in order)
    failures = [results[k][2] for k in order if results[k][2] is not None]
    doc = _header("sweep", cfg)
    doc["sweep"] = {"parameters": list(params), "points": len(grid), "failed_points": len(failures)}
    doc["rows"] = list(rows)
    doc["ladders"] = [results[k][1] for k in order]
    doc["failures"] = failures
    return Result(doc, tuple(params) + _steady_columns(cfg.modes) + ("status",), rows, failures=len(failures))


def window_row(cfg):
    baths = cfg.bath_specs()
    E_c, E_r, E_h = cfg.params.energies
    T_c = baths["c"].temperature_for(E_c)
    T_r = baths["r"].temperature_for(E_r)
    T_h = baths["h"].temperature_for(E_h)
    lo, hi = cooling_window(T_c, T_r, T_h, E_h)
    eps = carnot_cop(T_h, T_r, T_c) if T_r < T_h else None
    vt = VirtualTemperature.evaluate(E_r, E_h, T_r, T_h)
    return {
        "E_c_GHz": E_c, "E_r_GHz": E_r, "E_h_GHz": E_h,
        "T_c_K": T_c, "T_r_K": T_r, "T_h_K": T_h,
        "E_c_min_GHz": lo, "E_c_max_GHz": hi,
        "cop_carnot": eps, "T_v_K": vt.kelvin,
        "inside_window": bool(lo < E_c < hi),
    }


WINDOW_COLUMNS = ("E_c_GHz", "E_r_GHz", "E_h_GHz", "T_c_K", "T_r_K", "T_h_K", "E_c_min_GHz",
                  "E_c_max_GHz", "cop_carnot", "T_v_K", "inside_window")


def cmd_window(cfg, truncation="auto", workers=1):
    if "h" not in cfg.modes:
        raise ScenarioError(f"model {cfg.model!r} has no hot bath, the cooling window is undefined", "model.kind")
    if cfg.sweep is None:
        rows, columns = (window_row(cfg),), WINDOW_COLUMNS
    else:
        params = cfg.sweep.columns
        rows = []
        for values in cfg.sweep.grid():
            point = cfg.sweep.apply(cfg, values)
            rows.append(dict(zip(params, values)) | window_row(point))
        rows, columns = tuple(rows), tuple(params) + WINDOW_COLUMNS
    doc = _header("window", cfg)
    doc["rows"] = list(rows)
    return Result(doc, columns, rows)


def _machine(cfg, truncation):
    tr = resolve_truncation(cfg, truncation)
    return build_machine(cfg.model, cfg.params, cfg.bath_specs(), tr.dims), tr


def cmd_evolve(cfg, truncation="auto", workers=1):
    machine, tr = _machine(cfg, truncation)
    t_max = cfg.solver["t_max"] or default_t_max(machine)
    times = np.linspace(0.0, t_max, cfg.solver["samples"])
    rho0 = machine.steady_state("off", residual_tol=cfg.solver["steady_residual_tol"])
    lab = cfg.model == "circuit_sideband" and cfg.parameters.get("frame") == "lab"
    L = machine.lab_liouvillian() if lab else machine.liouvillian("on")
    traj = propagate(rho0, L, times, machine.number_operators(), rtol=cfg.solver["rtol"])
    labels = machine.labels
    rows = []
    for k, t in enumerate(times):
        row = {"t_s": float(t)}
        for j, m in enumerate(labels):
            n = float(np.real(traj[j][k]))
            row[f"n_{m}"] = n
            row[f"theta_{m}_K"] = effective_temperature(n, machine.frequencies[j]) if n > 0 else None
        rows.append(row)
    columns = ("t_s",) + tuple(f"n_{m}" for m in labels) + tuple(f"theta_{m}_K" for m in labels)
    doc = _header("evolve", cfg, tr)
    doc["frame"] = "lab" if lab else "model"
    doc["initial_state"] = "off-configuration steady state"
    doc["trace_renormalizations"] = traj.renormalizations
    doc["rows"] = rows
    return Result(doc, columns, tuple(rows))


def cmd_switch(cfg, truncation="auto", workers=1):
    machine, tr = _machine(cfg, truncation)
    rep = run_switch_protocol(machine, t_max=cfg.solver["t_max"], samples=cfg.solver["samples"],
                              rtol=cfg.solver["rtol"], residual_tol=cfg.solver["steady_residual_tol"])
    doc = _header("switch", cfg, tr)
    doc["report"] = rep.as_dict()
    rows = [{"phase": "on", "t_s": float(t), "theta_c_K": float(y)} for t, y in zip(rep.on_times, rep.on_theta)]
    rows += [{"phase": "off", "t_s": float(t), "theta_c_K": float(y)} for t, y in zip(rep.off_times, rep.off_theta)]
    return Result(doc, ("phase", "t_s", "theta_c_K"), tuple(rows))


_DISPATCH = {
    "steady": cmd_steady,
    "evolve": cmd_evolve,
    "switch": cmd_switch,
    "sweep": cmd_sweep,
    "window": cmd_window,
}


def run_command(command, cfg, truncation="auto", workers=1):
    """Run one command on a parsed scenario and return its :class:`Result`."""
    if command not in _DISPATCH:
        raise ParameterError(f"unknown command {command!r} (known: {', '.join(COMMANDS)})")
    return _DISPATCH[command](cfg, truncation=truncation, workers=workers)
