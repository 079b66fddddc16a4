"""
Steady state of the circuit refrigerator
========================================

Three microwave resonators share one Josephson junction. Photon-assisted
tunnelling trades a hot photon plus a cold photon for a room-temperature
one, which pumps heat out of the cold resonator.
"""

from pathlib import Path

from qfridge import build_machine, load_scenario
from qfridge.models import GenericThreeBodyParams
from qfridge.scenario import resolve_truncation

HERE = Path(__file__).resolve().parent.parent / "scenarios"

# the scenario file holds every parameter with explicit units
cfg = load_scenario(HERE / "table1_circuit.toml")
print("coupling g =", cfg.derived()["g_GHz"], "GHz")

# fixed dims from the file; `qfridge steady` would do the same
tr = resolve_truncation(cfg, "fixed")
rep = tr.report
print("dims", tr.dims, "block", rep.block_size, "residual", f"{rep.residual:.1e}")

for mode in "crh":
    print(f"  {mode}: <n> = {rep.occupations[mode]:.4f}  T_eff = {rep.effective_temperatures[mode] * 1e3:7.2f} mK"
          f"  (bath {rep.bath_temperatures[mode] * 1e3:.0f} mK)")

J = rep.currents
print(f"J_c = {J.J_c * 1e15:.4f} fW, J_h = {J.J_h * 1e15:.4f} fW, J_r = {J.J_r * 1e15:.4f} fW")
print(f"first-law residual {J.first_law_residual:.1e} W")
print(f"COP = {rep.performance.cop:.6f}  (E_c/E_h = {1 / 4.5:.6f})")
print(f"T_v = {rep.performance.virtual_temperature.kelvin * 1e3:.3f} mK: the cold mode settles above it")

# the same junction driven by a dc voltage instead of a hot bath
side = resolve_truncation(load_scenario(HERE / "table1_sideband.toml"), "fixed").report
print(f"voltage-driven: T_c = {side.T_c * 1e3:.2f} mK, J_c = {side.currents.J_c * 1e15:.4f} fW, "
      f"power {side.currents.power * 1e15:.4f} fW")

# a bare three-body coupling with the same g gives the same COP
machine = build_machine("generic", GenericThreeBodyParams.resonant(1.0, 4.5, 0.0432), cfg.bath_specs(), tr.dims)
bare = machine.analyse(machine.steady_state())
print(f"bare model: T_c = {bare.T_c * 1e3:.2f} mK, COP = {bare.performance.cop:.6f}")
