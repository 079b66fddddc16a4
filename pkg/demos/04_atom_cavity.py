"""
Trapped atom cooled through two cavities
========================================

An atom's motion is the cold mode; an optical cavity driven by thermal
light is the resource. The motional heating rate is given directly in
s^-1, because a bath occupation near 1e6 would need an absurd truncation.
"""

import warnings
from pathlib import Path

from qfridge import load_scenario
from qfridge.runner import run_command
from qfridge.scenario import resolve_truncation

HERE = Path(__file__).resolve().parent.parent / "scenarios"

cfg = load_scenario(HERE / "atom_cavity.toml")
print("effective coupling g =", cfg.derived()["g_GHz"] * 1e6, "kHz")

tr = resolve_truncation(cfg)
print("auto-truncation ladder:")
for step in tr.ladder:
    print("   ", step.dims, {k: round(v, 6) for k, v in step.occupations.items()})

rep = tr.report
print(f"n_c = {rep.occupations['c']:.4f}, T_c = {rep.T_c * 1e6:.2f} uK, "
      f"T_v = {rep.performance.virtual_temperature.kelvin * 1e6:.3f} uK")

# sweep the tied cavity couplings against the tied cavity linewidths
with warnings.catch_warnings():
    # the strongest couplings approach the cold splitting; the warning is expected there
    warnings.simplefilter("ignore", UserWarning)
    sweep = run_command("sweep", load_scenario(HERE / "atom_cavity_sweep.toml"))
# where the cooling rate cannot beat the 10 s^-1 heating there is no bounded
# steady state: those points hit the truncation cap and are flagged
print("\n g_h = g_r [MHz]   kappa [MHz]   n_c")
for row in sweep.rows[::5]:
    n_c = f"{row['n_c']:.4f}" if row["status"] == "ok" else row["status"]
    print(f"{row['model.g_h+model.g_r'] * 1e3:14.2f}   {row['baths.r.kappa+baths.h.kappa'] * 1e3:11.3f}   {n_c}")
print(f"{sweep.failures} of {len(sweep.rows)} points without a bounded steady state")
