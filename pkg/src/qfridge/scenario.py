"""Scenario documents: parsing, validation, echo and truncation control.

A scenario is a TOML document. Dimensional values are strings with an
explicit unit suffix (``"0.2 GHz"``, ``"48 mK"``, ``"10 s^-1"``) and are
stored internally in canonical units: GHz, K, s^-1, V, s and rad. All
frequencies are ordinary frequencies, never angular ones.

Example::

    schema_version = 1
    name = "circuit absorption"

    [model]
    kind = "circuit_absorption"
    lambda_c = 0.3
    lambda_r = 0.3
    lambda_h = 0.3
    E_J = "0.2 GHz"
    E_c = "1 GHz"
    E_h = "4.5 GHz"

    [baths.c]
    kappa = "0.01 GHz"
    temperature = "48 mK"
    ...

    [dims]
    c = 8
    r = 5
    h = 30
"""

import copy
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import QFridgeError, ScenarioError, TruncationCapError
from .lindblad import BathSpec
from .machine import MODEL_MODES, build_machine

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
import tomli_w

SCHEMA_VERSION = 1

UNITS = {
    "frequency": ("GHz", {"Hz": 1e-9, "kHz": 1e-6, "MHz": 1e-3, "GHz": 1.0, "THz": 1e3}),
    "temperature": ("K", {"K": 1.0, "mK": 1e-3, "uK": 1e-6, "µK": 1e-6, "μK": 1e-6, "nK": 1e-9}),
    "rate": ("s^-1", {"s^-1": 1.0, "s-1": 1.0, "s⁻¹": 1.0, "1/s": 1.0, "/s": 1.0}),
    "voltage": ("V", {"V": 1.0, "mV": 1e-3, "uV": 1e-6, "µV": 1e-6, "μV": 1e-6, "nV": 1e-9}),
    "time": ("s", {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9, "ps": 1e-12}),
    "angle": ("rad", {"rad": 1.0, "deg": math.pi / 180.0}),
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")

# key -> (kind, default); ``REQUIRED`` marks keys without a default
REQUIRED = object()
DERIVED = object()

MODEL_SCHEMAS = {
    "generic": {
        "E_c": ("frequency", REQUIRED),
        "E_r": ("frequency", DERIVED),
        "E_h": ("frequency", REQUIRED),
        "g": ("frequency", REQUIRED),
    },
    "cavity_effective": {
        "g_h": ("frequency", REQUIRED),
        "g_r": ("frequency", REQUIRED),
        "eta": ("number", REQUIRED),
        "Delta": ("frequency", REQUIRED),
        "E_c": ("frequency", REQUIRED),
        "E_r": ("frequency", DERIVED),
        "E_h": ("frequency", REQUIRED),
        "n_atoms": ("integer", 1),
    },
    "circuit_absorption": {
        "lambda_c": ("number", REQUIRED),
        "lambda_r": ("number", REQUIRED),
        "lambda_h": ("number", REQUIRED),
        "E_J": ("frequency", REQUIRED),
        "E_c": ("frequency", REQUIRED),
        "E_r": ("frequency", DERIVED),
        "E_h": ("frequency", REQUIRED),
        "phi": ("angle", math.pi / 2),
    },
    "circuit_sideband": {
        "lambda_c": ("number", REQUIRED),
        "lambda_r": ("number", REQUIRED),
        "E_J": ("frequency", REQUIRED),
        "E_c": ("frequency", REQUIRED),
        "E_r": ("frequency", REQUIRED),
        "drive": ("frequency", None),
        "voltage": ("voltage", None),
        "frame": ("string", "rotating"),
    },
    "atom_sideband": {
        "sideband": ("string", REQUIRED),
        "g0": ("frequency", REQUIRED),
        "eta": ("number", REQUIRED),
        "E_c": ("frequency", REQUIRED),
        "E_sigma": ("frequency", REQUIRED),
        "E_h": ("frequency", DERIVED),
    },
}

PARAM_CLASSES = {
    "generic": models.GenericThreeBodyParams,
    "cavity_effective": models.CavityEffectiveParams,
    "circuit_absorption": models.CircuitAbsorptionParams,
    "circuit_sideband": models.CircuitSidebandParams,
    "atom_sideband": models.AtomSidebandParams,
}

BATH_SCHEMA = {
    "kappa": "frequency",
    "temperature": "temperature",
    "occupation": "number",
    "rate_down": "rate",
    "rate_up": "rate",
}

SOLVER_SCHEMA = {
    "steady_residual_tol": ("number", 1e-8),
    "rtol": ("number", 1e-8),
    "t_max": ("time", None),
    "samples": ("integer", 2000),
    "truncation_rtol": ("number", 1e-4),
    "truncation_atol": ("number", 1e-10),
    "truncation_cap": ("integer", 40),
    "max_total_dim": ("integer", 8000),
}

EMIT_SCHEMA = {
    "path": ("string", None),
    "format": ("string", "json"),
}

SWEEP_AXIS_SCHEMA = {"parameter", "from", "to", "points", "scale"}


# --------------------------------------------------------------------------
# quantities
# --------------------------------------------------------------------------

def parse_quantity(value, kind, path):
    """Convert a document value of the given kind to canonical units."""
    if kind in UNITS:
        canonical, table = UNITS[kind]
        if isinstance(value, bool) or not isinstance(value, str):
            raise ScenarioError(f"expected a {kind} with a unit suffix (e.g. '1 {canonical}'), got {value!r}", path)
        m = _QUANTITY.match(value)
        if not m:
            raise ScenarioError(f"cannot parse quantity {value!r}", path)
        number, unit = m.groups()
        if unit not in table:
            raise ScenarioError(f"unit {unit!r} is not a {kind} unit (allowed: {', '.join(table)})", path)
        return float(number) * table[unit]
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"expected a plain number, got {value!r}", path)
        return float(value)
    if kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"expected an integer, got {value!r}", path)
        return int(value)
    if kind == "string":
        if not isinstance(value, str):
            raise ScenarioError(f"expected a string, got {value!r}", path)
        return value
    raise AssertionError(kind)


def format_quantity(value, kind):
    """Inverse of :func:`parse_quantity` in canonical units (exact round trip)."""
    if kind in UNITS:
        return f"{float(value)!r} {UNITS[kind][0]}"
    if kind == "number":
        return float(value)
    return value


def _check_keys(table, allowed, path):
    if not isinstance(table, dict):
        raise ScenarioError(f"expected a table, got {type(table).__name__}", path)
    extra = sorted(set(table) - set(allowed))
    if extra:
        raise ScenarioError(f"unknown key {extra[0]!r} (allowed: {', '.join(sorted(allowed))})",
                            f"{path}.{extra[0]}" if path else extra[0])


def _join(path, key):
    return f"{path}.{key}" if path else key


# --------------------------------------------------------------------------
# config types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepAxis:
    """One sweep axis. ``paths`` are set together (tied parameters)."""

    paths: tuple
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.points < 2:
            raise ScenarioError(f"points must be >= 2, got {self.points}", "sweep.points")
        if not self.start < self.stop:
            raise ScenarioError(f"need from < to, got {self.start} >= {self.stop}", "sweep.from")
        if self.scale not in ("linear", "log"):
            raise ScenarioError(f"scale must be 'linear' or 'log', got {self.scale!r}", "sweep.scale")
        if self.scale == "log" and not self.start > 0:
            raise ScenarioError("log sweeps need a positive start", "sweep.from")

    @property
    def name(self):
        return "+".join(self.paths)

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    """One or two sweep axes; the grid is their outer product."""

    first: SweepAxis
    second: SweepAxis | None = None

    @property
    def axes(self):
        return (self.first,) if self.second is None else (self.first, self.second)

    @property
    def columns(self):
        return tuple(a.name for a in self.axes)

    def grid(self):
        """Grid points in canonical order (first axis slowest)."""
        if self.second is None:
            return [(float(v),) for v in self.first.values()]
        return [(float(a), float(b)) for a in self.first.values() for b in self.second.values()]

    def apply(self, cfg, point):
        for axis, value in zip(self.axes, point, strict=True):
            for path in axis.paths:
                cfg = cfg.with_value(path, value)
        return cfg


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario with every default materialized.

    ``parameters`` and ``baths`` hold canonical-unit values. ``given`` lists
    the model keys the document actually set; defaults are recomputed from
    those when a sweep changes a value.
    """

    model: str
    parameters: dict
    baths: dict
    dims: dict
    solver: dict
    emit: dict
    sweep: SweepSpec | None = None
    name: str = ""
    given: frozenset = field(default=frozenset(), compare=False)

    @property
    def modes(self):
        return MODEL_MODES[self.model]

    @property
    def params(self):
        """The model-builder parameter object."""
        kwargs = {k: v for k, v in self.parameters.items() if v is not None}
        if self.model == "circuit_sideband" and kwargs.get("voltage") is not None:
            kwargs.pop("drive", None)
        return make_params(self.model, kwargs)

    def bath_specs(self):
        return {m: bath_from_table(self.baths[m], f"baths.{m}") for m in self.modes}

    @property
    def auto_modes(self):
        return tuple(m for m in self.modes if self.dims[m] == "auto")

    def derived(self):
        p = self.params
        out = {"g_GHz": p.g, "energies_GHz": dict(zip(self.modes, p.energies))}
        if self.model == "circuit_sideband":
            out["drive_GHz"] = p.drive
        return out

    def with_value(self, path, value):
        """Copy with one dotted-path value replaced (canonical units)."""
        section, _, rest = path.partition(".")
        if section == "model":
            if rest not in MODEL_SCHEMAS[self.model]:
                raise ScenarioError(f"unknown model parameter {rest!r}", path)
            user = {k: v for k, v in self.parameters.items() if k in self.given}
            user[rest] = value
            params = _materialize(self.model, user)
            return _replace(self, parameters=params, given=self.given | {rest})
        if section == "baths":
            mode, _, key = rest.partition(".")
            if mode not in self.baths or key not in BATH_SCHEMA:
                raise ScenarioError("unknown bath path", path)
            baths = copy.deepcopy(self.baths)
            table = baths[mode]
            if key in ("temperature", "occupation"):
                for k in ("temperature", "occupation", "rate_down", "rate_up"):
                    table.pop(k, None)
            table[key] = value
            bath_from_table(table, f"baths.{mode}")
            return _replace(self, baths=baths)
        raise ScenarioError("sweepable paths start with 'model.' or 'baths.'", path)

    def with_dims(self, dims):
        return _replace(self, dims={m: int(dims[m]) for m in self.modes})


def _replace(cfg, **changes):
    kw = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
    kw.update(changes)
    return ScenarioConfig(**kw)


def bath_from_table(table, path):
    keys = set(table)
    rates = {"rate_down", "rate_up"} & keys
    if rates and rates != {"rate_down", "rate_up"}:
        missing = ({"rate_down", "rate_up"} - rates).pop()
        raise ScenarioError("explicit rates need both rate_down and rate_up", _join(path, missing))
    choices = [k for k in ("temperature", "occupation") if k in keys] + (["rates"] if rates else [])
    if not choices:
        raise ScenarioError("missing key (one of temperature, occupation, or rate_down/rate_up is required)",
                            _join(path, "temperature"))
    if len(choices) > 1:
        raise ScenarioError(f"over-specified bath: {', '.join(choices)} are mutually exclusive", path)
    if "rates" not in choices and "kappa" not in keys:
        raise ScenarioError("missing key", _join(path, "kappa"))
    try:
        return BathSpec(
            kappa=table.get("kappa"),
            temperature=table.get("temperature"),
            occupation=table.get("occupation"),
            rates=(table["rate_down"], table["rate_up"]) if rates else None,
        )
    except QFridgeError as exc:
        raise ScenarioError(str(exc), path) from exc


def make_params(model, kwargs):
    """Model-builder parameter object from document keys."""
    kwargs = dict(kwargs)
    if model == "atom_sideband":
        kwargs["kind"] = kwargs.pop("sideband")
    return PARAM_CLASSES[model](**kwargs)


def _materialize(model, user):
    """Fill defaults and derived keys, then validate through the model class."""
    schema = MODEL_SCHEMAS[model]
    out = {}
    for key, (kind, default) in schema.items():
        if key in user:
            out[key] = user[key]
        elif default is REQUIRED:
            raise ScenarioError("missing key", f"model.{key}")
        elif default is not DERIVED:
            out[key] = default
    if model in ("generic", "cavity_effective", "circuit_absorption") and "E_r" not in out:
        out["E_r"] = out["E_c"] + out["E_h"]
    if model == "atom_sideband" and "E_h" not in out:
        shift = {"red": -out["E_c"], "blue": out["E_c"], "carrier": 0.0}.get(out["sideband"])
        if shift is None:
            raise ScenarioError(f"sideband must be red, blue or carrier, got {out['sideband']!r}",
                                "model.sideband")
        out["E_h"] = out["E_sigma"] + shift
    if model == "circuit_sideband":
        if out.get("drive") is not None and out.get("voltage") is not None:
            raise ScenarioError("give either drive or voltage, not both", "model.voltage")
        if out.get("drive") is None and out.get("voltage") is None:
            out["drive"] = out["E_r"] - out["E_c"]
    kwargs = {k: v for k, v in out.items() if v is not None}
    try:
        make_params(model, kwargs)
    except QFridgeError as exc:
        err = ScenarioError(str(exc), "model")
        err.code = exc.code  # keep e.g. resonance_violation in error records
        raise err from exc
    return {k: out[k] for k in schema if k in out}


# --------------------------------------------------------------------------
# parsing and emission
# --------------------------------------------------------------------------

def parse_scenario(document):
    """Parse and validate a scenario document (TOML text or an already-loaded dict)."""
    if isinstance(document, (str, bytes)):
        text = document.decode() if isinstance(document, bytes) else document
        try:
            doc = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError(f"malformed document: {exc}") from exc
    else:
        doc = document
    _check_keys(doc, {"schema_version", "name", "model", "baths", "dims", "solver", "emit", "sweep"}, "")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}", "schema_version")
    name = parse_quantity(doc.get("name", ""), "string", "name")

    if "model" not in doc:
        raise ScenarioError("missing key", "model")
    mtable = doc["model"]
    if not isinstance(mtable, dict) or "kind" not in mtable:
        raise ScenarioError("missing key", "model.kind")
    model = mtable["kind"]
    if model not in MODEL_SCHEMAS:
        raise ScenarioError(f"unknown model {model!r} (known: {', '.join(MODEL_SCHEMAS)})", "model.kind")
    schema = MODEL_SCHEMAS[model]
    _check_keys(mtable, set(schema) | {"kind"}, "model")
    user = {k: parse_quantity(v, schema[k][0], f"model.{k}") for k, v in mtable.items() if k != "kind"}
    parameters = _materialize(model, user)

    modes = MODEL_MODES[model]
    btable = doc.get("baths")
    if btable is None:
        raise ScenarioError("missing key", "baths")
    _check_keys(btable, modes, "baths")
    baths = {}
    for m in modes:
        path = f"baths.{m}"
        if m not in btable:
            raise ScenarioError("missing key", path)
        _check_keys(btable[m], BATH_SCHEMA, path)
        table = {k: parse_quantity(v, BATH_SCHEMA[k], f"{path}.{k}") for k, v in btable[m].items()}
        bath_from_table(table, path)
        baths[m] = table

    dims = _parse_dims(doc.get("dims", "auto"), model, modes)
    solver = _parse_section(doc.get("solver", {}), SOLVER_SCHEMA, "solver")
    emit = _parse_section(doc.get("emit", {}), EMIT_SCHEMA, "emit")
    if emit["format"] not in ("json", "csv"):
        raise ScenarioError(f"format must be json or csv, got {emit['format']!r}", "emit.format")
    sweep = _parse_sweep(doc["sweep"], model) if "sweep" in doc else None

    cfg = ScenarioConfig(model=model, parameters=parameters, baths=baths, dims=dims, solver=solver,
                         emit=emit, sweep=sweep, name=name, given=frozenset(user))
    if sweep is not None:
        sweep.apply(cfg, tuple(a.start for a in sweep.axes))
    return cfg


def _parse_dims(value, model, modes):
    if value == "auto":
        dims = {m: "auto" for m in modes}
    else:
        _check_keys(value, modes, "dims")
        dims = {}
        for m in modes:
            v = value.get(m, "auto")
            if v != "auto" and (isinstance(v, bool) or not isinstance(v, int) or v < 2):
                raise ScenarioError(f"dim must be an integer >= 2 or 'auto', got {v!r}", f"dims.{m}")
            dims[m] = v
    if model == "atom_sideband":
        if dims["r"] not in ("auto", 2):
            raise ScenarioError("the atom is a two-level system, dim must be 2", "dims.r")
        dims["r"] = 2
    return dims


def _parse_section(table, schema, path):
    _check_keys(table, schema, path)
    out = {}
    for key, (kind, default) in schema.items():
        out[key] = parse_quantity(table[key], kind, f"{path}.{key}") if key in table else default
    return out


def _parameter_kind(path, model):
    section, _, rest = path.partition(".")
    if section == "model" and rest in MODEL_SCHEMAS[model]:
        return MODEL_SCHEMAS[model][rest][0]
    if section == "baths":
        mode, _, key = rest.partition(".")
        if mode in MODEL_MODES[model] and key in BATH_SCHEMA:
            return BATH_SCHEMA[key]
    raise ScenarioError(f"unknown sweep parameter {path!r}", "sweep.parameter")


def _parse_axis(table, model, path):
    _check_keys(table, SWEEP_AXIS_SCHEMA | ({"second"} if path == "sweep" else set()), path)
    for key in ("parameter", "from", "to", "points"):
        if key not in table:
            raise ScenarioError("missing key", f"{path}.{key}")
    raw = table["parameter"]
    paths = tuple(raw) if isinstance(raw, list) else (raw,)
    if not paths:
        raise ScenarioError("empty parameter list", f"{path}.parameter")
    kinds = set()
    for p in paths:
        parse_quantity(p, "string", f"{path}.parameter")
        kinds.add(_parameter_kind(p, model))
    if len(kinds) != 1:
        raise ScenarioError("tied parameters must share a unit kind", f"{path}.parameter")
    kind = kinds.pop()
    if kind not in UNITS and kind != "number":
        raise ScenarioError(f"parameter {raw!r} is not numeric", f"{path}.parameter")
    return SweepAxis(
        paths=paths,
        start=parse_quantity(table["from"], kind, f"{path}.from"),
        stop=parse_quantity(table["to"], kind, f"{path}.to"),
        points=parse_quantity(table["points"], "integer", f"{path}.points"),
        scale=parse_quantity(table.get("scale", "linear"), "string", f"{path}.scale"),
    )


def _parse_sweep(table, model):
    first = _parse_axis(table, model, "sweep")
    second = _parse_axis(table["second"], model, "sweep.second") if "second" in table else None
    return SweepSpec(first, second)


def scenario_document(cfg):
    """Materialized scenario as a TOML-ready dict (canonical units)."""
    schema = MODEL_SCHEMAS[cfg.model]
    model = {"kind": cfg.model}
    for key, value in cfg.parameters.items():
        if value is not None:
            model[key] = format_quantity(value, schema[key][0])
    if cfg.model == "circuit_sideband" and cfg.parameters.get("voltage") is not None:
        model.pop("drive", None)
    baths = {m: {k: format_quantity(v, BATH_SCHEMA[k]) for k, v in cfg.baths[m].items()} for m in cfg.modes}
    dims = "auto" if all(v == "auto" for v in cfg.dims.values()) else dict(cfg.dims)
    solver = {k: format_quantity(v, SOLVER_SCHEMA[k][0]) for k, v in cfg.solver.items() if v is not None}
    emit = {k: v for k, v in cfg.emit.items() if v is not None}
    doc = {"schema_version": SCHEMA_VERSION}
    if cfg.name:
        doc["name"] = cfg.name
    doc.update(model=model, baths=baths, dims=dims, solver=solver, emit=emit)
    if cfg.sweep is not None:
        doc["sweep"] = _axis_document(cfg.sweep.first, cfg.model)
        if cfg.sweep.second is not None:
            doc["sweep"]["second"] = _axis_document(cfg.sweep.second, cfg.model)
    return doc


def _axis_document(axis, model):
    kind = _parameter_kind(axis.paths[0], model)
    return {
        "parameter": axis.paths[0] if len(axis.paths) == 1 else list(axis.paths),
        "from": format_quantity(axis.start, kind),
        "to": format_quantity(axis.stop, kind),
        "points": axis.points,
        "scale": axis.scale,
    }


def emit_scenario(cfg):
    """TOML text that parses back to an identical :class:`ScenarioConfig`."""
    return tomli_w.dumps(scenario_document(cfg))


def load_scenario(path):
    with open(path, "rb") as fh:
        try:
            doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ScenarioError(f"malformed document: {exc}", str(path)) from exc
    return parse_scenario(doc)


# --------------------------------------------------------------------------
# truncation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LadderStep:
    dims: dict
    occupations: dict
    residual: float
    block_size: int

    def as_dict(self):
        return {"dims": dict(self.dims), "occupations": dict(self.occupations),
                "residual": self.residual, "block_size": self.block_size}


@dataclass(frozen=True, eq=False)
class TruncationResult:
    dims: dict
    ladder: tuple
    report: object  # SteadyStateReport at ``dims``
    mode: str


def initial_dim(bath, frequency, cap):
    """max(4, ceil(8 n_B + 4)); explicit-rates baths start at 4 and grow."""
    if bath.kind == "rates":
        return 4
    n = bath.occupation_for(frequency)
    start = max(4, math.ceil(8.0 * n + 4.0))
    if start > cap:
        raise TruncationCapError(
            f"starting dim {start} for n_B = {n:.4g} exceeds the cap {cap}; "
            "use explicit rate_down/rate_up for highly occupied baths"
        )
    return start


def solve_steady(cfg, dims):
    """Steady-state report for fixed dims."""
    machine = build_machine(cfg.model, cfg.params, cfg.bath_specs(), dims)
    rho = machine.steady_state("on", residual_tol=cfg.solver["steady_residual_tol"])
    return machine.analyse(rho)


def _step(dims, report):
    return LadderStep(dims=dict(dims), occupations=dict(report.occupations),
                      residual=report.residual, block_size=report.block_size)


def fixed_dims(cfg):
    if cfg.auto_modes:
        raise ScenarioError(f"dims for {', '.join(cfg.auto_modes)} are 'auto'; fixed truncation needs integers",
                            "dims")
    return {m: int(cfg.dims[m]) for m in cfg.modes}


def auto_truncate(cfg):
    """Grow the truncation until steady-state occupations stop changing.

    Modes whose dim is ``"auto"`` start at max(4, ceil(8 n_B + 4)). The
    largest-occupancy auto mode not yet certified is doubled (clipped to the
    cap). If every <n_j> then changes by less than ``rtol |n_j| + atol`` the
    mode is certified and its smaller dim kept; otherwise the doubled dim
    becomes the new baseline. Stops once every auto mode is certified.
    """
    cap = cfg.solver["truncation_cap"]
    rtol = cfg.solver["truncation_rtol"]
    atol = cfg.solver["truncation_atol"]
    max_total = cfg.solver["max_total_dim"]
    baths = cfg.bath_specs()
    energies = dict(zip(cfg.modes, cfg.params.energies))
    dims = {}
    for m in cfg.modes:
        dims[m] = cfg.dims[m] if cfg.dims[m] != "auto" else initial_dim(baths[m], energies[m], cap)

    ladder = []

    def solve(trial):
        total = math.prod(trial.values())
        if total > max_total:
            raise TruncationCapError(f"total dimension {total} exceeds max_total_dim {max_total} "
                                     f"(ladder: {[s.dims for s in ladder]})")
        rep = solve_steady(cfg, trial)
        ladder.append(_step(trial, rep))
        return rep

    report = solve(dims)
    pending = list(cfg.auto_modes)
    while pending:
        target = max(pending, key=lambda m: report.occupations[m])
        if dims[target] >= cap:
            raise TruncationCapError(
                f"occupations not converged to {rtol:g}: mode {target} is at the cap {cap} "
                f"(ladder: {[s.dims for s in ladder]})"
            )
        trial = dict(dims)
        trial[target] = min(2 * dims[target], cap)
        grown = solve(trial)
        if all(abs(grown.occupations[m] - report.occupations[m]) <= rtol * abs(grown.occupations[m]) + atol
               for m in cfg.modes):
            pending.remove(target)
        else:
            dims, report = trial, grown
    return TruncationResult(dims=dict(dims), ladder=tuple(ladder), report=report, mode="auto")


def resolve_truncation(cfg, mode="auto"):
    """Solve the steady state with ``mode`` 'auto' or 'fixed' truncation.

    'auto' only grows modes declared ``"auto"``; a scenario with all dims
    fixed is solved once either way.
    """
    if mode not in ("auto", "fixed"):
        raise ScenarioError(f"truncation must be 'auto' or 'fixed', got {mode!r}")
    if mode == "fixed" or not cfg.auto_modes:
        dims = fixed_dims(cfg)
        report = solve_steady(cfg, dims)
        return TruncationResult(dims=dims, ladder=(_step(dims, report),), report=report, mode="fixed")
    return auto_truncate(cfg)
