"""Assemble a refrigerator (Hamiltonians + baths) and analyse its steady state."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import models
from .errors import ParameterError, QFridgeError
from .fock import number_op
from .lindblad import (
    build_liouvillian,
    build_time_dependent_liouvillian,
    steady_state,
    thermal_dissipator,
)
from .thermo import (
    HeatCurrentSet,
    PerformanceReport,
    VirtualTemperature,
    carnot_cop,
    cooling_window,
    effective_temperature,
    entropy_production,
    heat_current,
    mean_occupations,
)

MODEL_MODES = {
    "generic": ("c", "r", "h"),
    "cavity_effective": ("c", "r", "h"),
    "circuit_absorption": ("c", "r", "h"),
    "circuit_sideband": ("c", "r"),
    "atom_sideband": ("c", "r", "h"),
}

OFF_STATE_NOTE = (
    "off-state three-body interaction set to zero: only its (lambda_c lambda_r lambda_h)^2 "
    "scaling is known, so the off configuration is the free Hamiltonian"
)


@dataclass(frozen=True, eq=False)
class Machine:
    """A refrigerator ready for simulation.

    ``frequencies`` are the lab-frame mode energies (GHz) used for heat
    currents and temperatures, whatever frame the Hamiltonians are in.
    """

    model: str
    hamiltonian: object  # Operator, on configuration
    off_hamiltonian: object | None
    frequencies: tuple
    baths: tuple
    coupling: float
    lab: object | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def space(self):
        return self.hamiltonian.space

    @property
    def labels(self):
        return self.space.labels

    @property
    def has_hot_bath(self):
        return "h" in self.labels

    def dissipators(self):
        return [
            thermal_dissipator(self.space, k, bath, nu)
            for k, (bath, nu) in enumerate(zip(self.baths, self.frequencies))
        ]

    def liouvillian(self, configuration="on"):
        if configuration == "on":
            h = self.hamiltonian
        elif configuration == "off":
            if self.off_hamiltonian is None:
                raise ParameterError(f"model {self.model!r} has no off configuration")
            h = self.off_hamiltonian
        else:
            raise ValueError(f"unknown configuration {configuration!r}")
        return build_liouvillian(h, self.dissipators())

    def lab_liouvillian(self):
        if self.lab is None:
            raise ParameterError(f"model {self.model!r} has no lab-frame generator")
        return build_time_dependent_liouvillian(self.lab, self.dissipators())

    def number_operators(self):
        return [number_op(m, self.space, k) for k, m in enumerate(self.space.factors)]

    def bath_temperatures(self):
        return tuple(b.temperature_for(nu) for b, nu in zip(self.baths, self.frequencies))

    def bath_occupations(self):
        return tuple(b.occupation_for(nu) for b, nu in zip(self.baths, self.frequencies))

    def steady_state(self, configuration="on", residual_tol=1e-8):
        return steady_state(self.liouvillian(configuration), residual_tol=residual_tol)

    def analyse(self, rho):
        return analyse_steady_state(self, rho)


def build_machine(model, params, baths, dims):
    """Build a :class:`Machine` from model parameters, per-mode baths and dims.

    ``baths`` and ``dims`` map mode labels to :class:`BathSpec` and ints.
    """
    if model not in MODEL_MODES:
        raise ParameterError(f"unknown model {model!r}")
    modes = MODEL_MODES[model]
    dims = tuple(int(dims[m]) for m in modes)
    bath_list = tuple(baths[m] for m in modes)
    notes = []
    lab = None
    if model == "generic":
        h = models.build_generic_three_body(params, dims)
        off = models.free_hamiltonian(h.space, params.energies)
    elif model == "cavity_effective":
        h = models.build_cavity_effective(params, dims)
        off = models.free_hamiltonian(h.space, params.energies)
    elif model == "circuit_absorption":
        hs = models.build_circuit_absorption(params, dims)
        h, off = hs.operator, hs.at(0.0)
        notes.append(OFF_STATE_NOTE)
    elif model == "circuit_sideband":
        hs = models.build_circuit_sideband(params, dims)
        h, off, lab = hs.on, hs.off, hs.lab
        notes.append("steady states use the frame rotating at the drive frequency on mode r")
    else:
        h = models.build_atom_sideband(params, dims)
        off = models.free_hamiltonian(h.space, params.energies)
        notes.append("mode r is the two-level atom (dim 2)")
    return Machine(
        model=model,
        hamiltonian=h,
        off_hamiltonian=off,
        frequencies=tuple(float(e) for e in params.energies),
        baths=bath_list,
        coupling=float(params.g),
        lab=lab,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class SteadyStateReport:
    model: str
    dims: tuple
    occupations: dict
    effective_temperatures: dict
    bath_temperatures: dict
    bath_occupations: dict
    currents: HeatCurrentSet
    performance: PerformanceReport
    residual: float
    generator_norm: float
    block_size: int
    notes: tuple = ()

    @property
    def T_c(self):
        return self.effective_temperatures["c"]

    def as_dict(self):
        out = {
            "model": self.model,
            "dims": list(self.dims),
            "occupations": dict(self.occupations),
            "effective_temperatures_K": dict(self.effective_temperatures),
            "bath_temperatures_K": dict(self.bath_temperatures),
            "bath_occupations": dict(self.bath_occupations),
            "heat_currents_W": {
                "J_c": self.currents.J_c,
                "J_r": self.currents.J_r,
                "J_h": self.currents.J_h,
                "first_law_residual": self.currents.first_law_residual,
            },
            "residual": self.residual,
            "generator_norm": self.generator_norm,
            "block_size": self.block_size,
            "notes": list(self.notes),
        }
        if self.currents.J_h is None:
            out["heat_currents_W"]["power_W"] = self.currents.power
        out.update(self.performance.as_dict())
        return out


def _effective_or_none(n, nu):
    try:
        return effective_temperature(n, nu)
    except QFridgeError:
        return None


def analyse_steady_state(machine, rho):
    labels = machine.labels
    nus = machine.frequencies
    occ = mean_occupations(rho)
    inflow = [heat_current(rho, k, b, nu) for k, (b, nu) in enumerate(zip(machine.baths, nus))]
    temps = dict(zip(labels, machine.bath_temperatures()))
    T_c, T_r = temps["c"], temps["r"]

    if machine.has_hot_bath:
        currents = HeatCurrentSet(J_c=inflow[0], J_r=-inflow[1], J_h=inflow[2])
        T_h = temps["h"]
        cop_value = currents.J_c / currents.J_h if currents.J_h > 0 else None
        E_c, E_r, E_h = nus
        vt = VirtualTemperature.evaluate(E_r, E_h, T_r, T_h) if T_r > 0 and T_h > 0 else None
        eps_c = carnot_cop(T_h, T_r, T_c) if 0 <= T_c <= T_r < T_h else None
        window = cooling_window(T_c, T_r, T_h, E_h) if 0 < T_c <= T_r <= T_h else None
    else:
        currents = HeatCurrentSet(J_c=inflow[0], J_r=-inflow[1])
        T_h = None
        power = currents.power
        cop_value = currents.J_c / power if power > 0 else None
        vt = None
        eps_c = carnot_cop(math.inf, T_r, T_c) if 0 <= T_c <= T_r else None
        window = None

    sigma = entropy_production(currents, T_c, T_r, T_h) if T_c > 0 and T_r > 0 else float("nan")
    perf = PerformanceReport(cop=cop_value, cop_carnot=eps_c, virtual_temperature=vt,
                             cooling_window=window, entropy_production=sigma)
    return SteadyStateReport(
        model=machine.model,
        dims=machine.space.dims,
        occupations={lab: float(n) for lab, n in zip(labels, occ)},
        effective_temperatures={lab: _effective_or_none(n, nu) for lab, n, nu in zip(labels, occ, nus)},
        bath_temperatures=temps,
        bath_occupations=dict(zip(labels, machine.bath_occupations())),
        currents=currents,
        performance=perf,
        residual=float(rho.info.get("residual", np.nan)),
        generator_norm=float(rho.info.get("generator_norm", np.nan)),
        block_size=int(rho.info.get("block_size", 0)),
        notes=machine.notes,
    )
