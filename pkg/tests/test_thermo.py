import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfridge import models
from qfridge.errors import (
    InfiniteVirtualTemperatureError,
    NotCoolingError,
    ParameterError,
    SecondLawViolationError,
    UndefinedTemperatureError,
)
from qfridge.fock import CompositeSpace
from qfridge.lindblad import BathSpec, fock_state, thermal_state
from qfridge.machine import build_machine
from qfridge.thermo import (
    HeatCurrentSet,
    VirtualTemperature,
    bose_einstein,
    carnot_cop,
    cooling_window,
    cop,
    cop_ideal,
    effective_temperature,
    entropy_production,
    heat_current,
    virtual_qubit_ratio,
    virtual_temperature,
)

mpmath.mp.dps = 40
KB_H = mpmath.mpf("20.836619")
H_PLANCK = 6.62607015e-34


def tv_oracle(E_r, E_h, T_r, T_h):
    E_r, E_h, T_r, T_h = (mpmath.mpf(x) for x in (E_r, E_h, T_r, T_h))
    return float((E_r - E_h) / (E_r / T_r - E_h / T_h))


# occupations and temperatures -------------------------------------------------

def test_bose_einstein_examples():
    assert bose_einstein(1.0, 0.0) == 0.0
    exact = float(1 / mpmath.expm1(1 / (KB_H * mpmath.mpf("0.048"))))
    assert bose_einstein(1.0, 0.048) == pytest.approx(exact, rel=1e-13)
    # the quoted 0.58198 is 1/(e - 1), i.e. the exponent rounded to one
    assert exact == pytest.approx(0.582122, abs=1e-6)
    assert bose_einstein(810000.0, 5800.0) == pytest.approx(1.2295e-3, rel=1e-4)
    with pytest.raises(ParameterError):
        bose_einstein(0.0, 1.0)


@given(st.floats(1e-3, 1e6), st.floats(1e-4, 1e4))
def test_effective_temperature_round_trip(nu, T):
    n = bose_einstein(nu, T)
    if n < 1e-300:
        return
    assert effective_temperature(n, nu) == pytest.approx(T, rel=1e-12)


def test_effective_temperature_examples():
    assert effective_temperature(0.358, 1.0) == pytest.approx(0.036, abs=5e-4)
    temps = [effective_temperature(n, 1.0) for n in (1e-1, 1e-3, 1e-6, 1e-12)]
    assert all(a > b > 0 for a, b in zip(temps, temps[1:]))
    with pytest.raises(UndefinedTemperatureError):
        effective_temperature(0.0, 1.0)


# analytic bounds --------------------------------------------------------------

def test_cop_ideal_and_cop():
    assert cop_ideal(1.0, 4.5) == pytest.approx(0.2222, abs=5e-5)
    assert cop_ideal(0.0, 4.5) == 0.0
    assert cop(2.0, 9.0) == pytest.approx(2 / 9, rel=1e-15)
    with pytest.raises(NotCoolingError):
        cop(1.0, 0.0)


def test_carnot_cop_examples():
    assert carnot_cop(0.768, 0.096, 0.048) == pytest.approx(0.875, rel=1e-12)
    assert carnot_cop(0.768, 0.048, 0.048) == math.inf
    assert carnot_cop(0.096 + 1e-12, 0.096, 0.048) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(ParameterError):
        carnot_cop(0.05, 0.096, 0.048)


def test_virtual_temperature_examples():
    tv = virtual_temperature(5.5, 4.5, 0.048, 0.768)
    assert tv == pytest.approx(tv_oracle(5.5, 4.5, 0.048, 0.768), rel=1e-13)
    assert tv == pytest.approx(9.20e-3, abs=5e-6)
    assert virtual_temperature(5.5, 4.5, 0.048, 0.048) == pytest.approx(0.048, rel=1e-14)
    limit = virtual_temperature(810000.005, 810000.0, 300.0, 1e300)
    assert limit == pytest.approx(0.005 / 810000.005 * 300.0, rel=1e-9)
    assert limit == pytest.approx(1.85e-6, abs=5e-9)


def test_virtual_temperature_divergence_and_inversion():
    # E_r/T_r == E_h/T_h
    with pytest.raises(InfiniteVirtualTemperatureError):
        virtual_temperature(6.0, 3.0, 0.2, 0.1)
    assert VirtualTemperature.evaluate(6.0, 3.0, 0.2, 0.1).infinite
    inv = VirtualTemperature.evaluate(5.5, 4.5, 0.048, 0.03)
    assert inv.inverted and inv.kelvin < 0


def test_cooling_window_examples():
    assert cooling_window(0.048, 0.1, 0.1, 4.5) == (0.0, 0.0)
    assert cooling_window(0.048, 0.048, 0.768, 4.5) == (0.0, math.inf)
    lo, hi = cooling_window(0.048, 0.096, 0.768, 4.5)
    assert lo == 0.0
    assert hi == pytest.approx(3.9375, rel=1e-12)
    assert hi == pytest.approx(carnot_cop(0.768, 0.096, 0.048) * 4.5, rel=1e-12)


@given(st.floats(0.01, 1.0), st.floats(1.01, 5.0), st.floats(1.01, 20.0), st.floats(0.5, 10.0))
def test_window_edge_is_where_virtual_temperature_meets_cold(T_c, r_ratio, h_ratio, E_h):
    T_r = T_c * r_ratio
    T_h = T_r * h_ratio
    _, E_c = cooling_window(T_c, T_r, T_h, E_h)
    assert E_c == pytest.approx(carnot_cop(T_h, T_r, T_c) * E_h, rel=1e-9)
    assert virtual_temperature(E_c + E_h, E_h, T_r, T_h) == pytest.approx(T_c, rel=1e-9)


# currents ---------------------------------------------------------------------

def test_current_vanishes_at_equilibrium():
    cs = CompositeSpace.from_dims("c", (40,))
    b = BathSpec(kappa=0.01, temperature=0.1)
    rho = thermal_state(cs, [b.occupation_for(2.0)])
    assert abs(heat_current(rho, 0, b, 2.0)) < 1e-12 * 2 * math.pi * 0.01e9 * H_PLANCK * 2e9


def test_vacuum_current_closed_form():
    cs = CompositeSpace.from_dims("c", (5,))
    b = BathSpec(kappa=0.01, temperature=0.2)
    n_b = b.occupation_for(1.5)
    expected = 2 * math.pi * 0.01e9 * H_PLANCK * 1.5e9 * n_b
    assert heat_current(fock_state(cs, 0), 0, b, 1.5) == pytest.approx(expected, rel=1e-13)


def test_entropy_production_examples():
    assert entropy_production(HeatCurrentSet(0.0, 0.0, 0.0), 0.05, 0.1, 0.5) == 0.0
    # constructed reversible point: currents proportional to E_j, T_v == T_c
    E_c, E_h, T_r, T_h = 1.0, 4.5, 0.1, 0.8
    E_r = E_c + E_h
    T_c = virtual_temperature(E_r, E_h, T_r, T_h)
    x = 3e-18
    J = HeatCurrentSet(J_c=E_c * x, J_r=E_r * x, J_h=E_h * x)
    sigma = entropy_production(J, T_c, T_r, T_h)
    assert abs(sigma) <= 1e-12 * (J.J_r / T_r)
    with pytest.raises(SecondLawViolationError):
        entropy_production(HeatCurrentSet(J_c=2 * x, J_r=x, J_h=0.0), 0.05, 0.1, 0.5)


def test_virtual_qubit_ratio_product_state():
    E = (1.0, 5.5, 4.5)
    T = (0.048, 0.048, 0.768)
    cs = CompositeSpace.from_dims("crh", (3, 4, 6))
    rho = thermal_state(cs, [bose_einstein(e, t) for e, t in zip(E, T)])
    tv = virtual_temperature(5.5, 4.5, 0.048, 0.768)
    expected = math.exp(-1.0 / (20.836619 * tv))
    for m, n in [(0, 0), (1, 2), (2, 4)]:
        assert virtual_qubit_ratio(rho, m, n) == pytest.approx(expected, rel=1e-10)
    assert expected == pytest.approx(5.4e-3, abs=5e-5)
    equal = thermal_state(cs, [bose_einstein(e, 0.1) for e in E])
    assert virtual_qubit_ratio(equal, 0, 0) == pytest.approx(math.exp(-1.0 / (20.836619 * 0.1)), rel=1e-10)


# steady-state properties -------------------------------------------------------

def _generic_report(T_c, T_r, T_h, g=0.01, dims=(5, 4, 6)):
    p = models.GenericThreeBodyParams.resonant(1.0, 4.5, g)
    baths = {"c": BathSpec(kappa=0.01, temperature=T_c), "r": BathSpec(kappa=0.025, temperature=T_r),
             "h": BathSpec(kappa=0.01, temperature=T_h)}
    m = build_machine("generic", p, baths, dict(zip("crh", dims)))
    return m.analyse(m.steady_state())


@pytest.mark.parametrize("T_h", [0.06, 0.1, 0.2, 0.4, 0.8])
@pytest.mark.parametrize("T_c", [0.005, 0.01, 0.02, 0.03, 0.045])
def test_current_sign_follows_virtual_temperature(T_c, T_h):
    T_r = 0.048
    rep = _generic_report(T_c, T_r, T_h)
    tv = virtual_temperature(5.5, 4.5, T_r, T_h)
    J = rep.currents
    assert abs(J.first_law_residual) <= 1e-6 * J.scale()
    assert rep.performance.entropy_production >= -1e-12 * J.scale() / T_c
    if abs(T_c - tv) < 1e-3 * T_c:
        return
    assert np.sign(J.J_c) == np.sign(T_c - tv)
    if J.J_c > 0:
        assert rep.performance.cop == pytest.approx(1.0 / 4.5, rel=1e-9)
        assert rep.performance.cop <= rep.performance.cop_carnot + 1e-9
