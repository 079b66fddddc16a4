"""Simulation of three-terminal quantum refrigerators in truncated Fock spaces.

Modules
-------
fock
    Truncated Fock spaces and sparse operators.
models
    Hamiltonians for the generic, cavity, circuit and atom refrigerators.
lindblad
    Local thermal dissipators, steady states and time evolution.
thermo
    Heat currents, COP, Carnot bound, virtual temperature, cooling window.
protocol
    Switch-on/switch-off transient cooling.
scenario, runner, cli
    Scenario files, truncation control, sweeps and the command line.
"""

from .errors import QFridgeError
from .fock import CompositeSpace, ModeSpace, Operator, annihilation_op, creation_op, number_op
from .lindblad import BathSpec, DensityMatrix, build_liouvillian, propagate, steady_state, thermal_dissipator
from .machine import Machine, SteadyStateReport, build_machine
from .protocol import SwitchReport, find_first_minimum, run_switch_protocol
from .scenario import ScenarioConfig, SweepSpec, auto_truncate, emit_scenario, load_scenario, parse_scenario
from .runner import run_command
from .thermo import (
    HeatCurrentSet,
    PerformanceReport,
    bose_einstein,
    carnot_cop,
    cooling_window,
    cop,
    cop_ideal,
    effective_temperature,
    entropy_production,
    heat_current,
    virtual_temperature,
)

__version__ = "0.1.0"

__all__ = [
    "BathSpec", "CompositeSpace", "DensityMatrix", "HeatCurrentSet", "Machine", "ModeSpace", "Operator",
    "PerformanceReport", "QFridgeError", "ScenarioConfig", "SteadyStateReport", "SweepSpec", "SwitchReport",
    "annihilation_op", "auto_truncate", "bose_einstein", "build_liouvillian", "build_machine", "carnot_cop",
    "cooling_window", "cop", "cop_ideal", "creation_op", "effective_temperature", "emit_scenario",
    "entropy_production", "find_first_minimum", "heat_current", "load_scenario", "number_op", "parse_scenario",
    "propagate", "run_command", "run_switch_protocol", "steady_state", "thermal_dissipator", "virtual_temperature",
]
