"""
Cooling below the steady state by switching
===========================================

Start from the idle machine, switch the interaction on, and switch it off
again at the first minimum of the cold temperature. With weak damping the
cold mode then stays below its steady-state temperature for a while.
"""

from pathlib import Path

import numpy as np

from qfridge import build_machine, load_scenario
from qfridge.protocol import run_switch_protocol
from qfridge.scenario import resolve_truncation

HERE = Path(__file__).resolve().parent.parent / "scenarios"

for name in ("fig7b_switch.toml", "fig7b_switch_sideband.toml"):
    cfg = load_scenario(HERE / name)
    tr = resolve_truncation(cfg, "fixed")
    m = build_machine(cfg.model, cfg.params, cfg.bath_specs(), tr.dims)
    rep = run_switch_protocol(m, samples=800)
    print(f"{cfg.name}: T_c^S = {rep.T_c_steady * 1e3:.2f} mK, theta_min = {rep.theta_min * 1e3:.2f} mK "
          f"at {rep.t_min * 1e9:.1f} ns, dwell {rep.dwell * 1e9:.1f} ns")

    # coarse trace of theta_c(t) through both phases
    t = np.concatenate([rep.on_times[rep.on_times < rep.t_min], rep.off_times])
    theta = np.concatenate([rep.on_theta[rep.on_times < rep.t_min], rep.off_theta])
    for k in np.linspace(0, len(t) - 1, 12).astype(int):
        phase = "on " if t[k] < rep.t_min else "off"
        print(f"   {phase} t = {t[k] * 1e9:7.1f} ns   theta_c = {theta[k] * 1e3:6.2f} mK")
