"""
Virtual temperature and the cooling window
==========================================

The room and hot modes act together as a virtual two-level system at
splitting E_r - E_h = E_c. Its temperature T_v decides whether heat flows
out of the cold mode: cooling needs T_v < T_c.
"""

import numpy as np

from qfridge import BathSpec, build_machine
from qfridge.models import GenericThreeBodyParams
from qfridge.thermo import carnot_cop, cooling_window, virtual_temperature

E_c, E_h = 1.0, 4.5
E_r = E_c + E_h
T_c = T_r = 0.048

print(" T_h [K]   T_v [mK]   E_c,max [GHz]")
for T_h in (0.048, 0.1, 0.2, 0.4, 0.768, 2.0):
    tv = virtual_temperature(E_r, E_h, T_r, T_h)
    print(f"{T_h:7.3f}  {tv * 1e3:9.3f}   {cooling_window(T_c, T_r, T_h, E_h)[1]:>10}")

# with a colder cold bath the window is finite and equals eps_C * E_h
T_c, T_r, T_h = 0.048, 0.096, 0.768
lo, hi = cooling_window(T_c, T_r, T_h, E_h)
print(f"\nT_c < T_r: window up to {hi:.4f} GHz = eps_C * E_h = {carnot_cop(T_h, T_r, T_c) * E_h:.4f} GHz")

# the sign of the cold current follows T_c - T_v
print("\n T_c [mK]   T_v [mK]   J_c [fW]")
T_r, T_h = 0.048, 0.2
tv = virtual_temperature(E_r, E_h, T_r, T_h)
for T_c in np.linspace(0.01, 0.045, 6):
    baths = {"c": BathSpec(kappa=0.01, temperature=T_c), "r": BathSpec(kappa=0.025, temperature=T_r),
             "h": BathSpec(kappa=0.01, temperature=T_h)}
    m = build_machine("generic", GenericThreeBodyParams.resonant(E_c, E_h, 0.01), baths, {"c": 5, "r": 4, "h": 6})
    J = m.analyse(m.steady_state()).currents
    print(f"{T_c * 1e3:8.2f}   {tv * 1e3:8.3f}   {J.J_c * 1e15:+.5f}")
