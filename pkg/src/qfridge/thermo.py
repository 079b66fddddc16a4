"""Thermodynamic figures of merit for three-terminal refrigerators.

Sign convention for heat currents: J_c and J_h are heat flowing *into* the
machine from the cold and hot baths, J_r is heat flowing *out* of the machine
into the room-temperature bath. Currents are in watts, temperatures in
kelvin, frequencies in GHz.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InfiniteVirtualTemperatureError,
    InvalidStateError,
    NotCoolingError,
    ParameterError,
    SecondLawViolationError,
    UndefinedTemperatureError,
)
from .fock import Operator, annihilation_op
from .lindblad import expectation
from .units import KB_OVER_H_GHZ, quantum_energy


def bose_einstein(frequency, temperature):
    """Mean thermal occupation 1/(exp(h nu / k_B T) - 1)."""
    if frequency <= 0:
        raise ParameterError(f"frequency must be positive, got {frequency!r}")
    if temperature < 0:
        raise ParameterError(f"temperature must be non-negative, got {temperature!r}")
    if temperature == 0:
        return 0.0
    x = frequency / (KB_OVER_H_GHZ * temperature)
    if x > 40.0:
        e = math.exp(-x)
        return e / (1.0 - e)
    return 1.0 / math.expm1(x)


def effective_temperature(occupation, frequency):
    """Temperature of the thermal state with mean occupation ``occupation``.

    Used for any state, thermal or not: it only encodes the mean energy.
    """
    if not occupation > 0:
        raise UndefinedTemperatureError(f"effective temperature undefined for occupation {occupation!r}")
    return frequency / KB_OVER_H_GHZ / math.log1p(1.0 / occupation)


def energy_flux_operator(composite, position, bath, frequency):
    """Adjoint dissipator applied to n: Q with Tr(n D rho) = Tr(Q rho).

    Exact on the truncated ladder, so the currents obey the first law to
    machine precision at any truncation.
    """
    mode = composite.factors[position]
    a = annihilation_op(mode, composite, position).matrix
    ad = a.conj().T
    n = (ad @ a).tocsr()
    down, up = bath.rates_for(frequency)
    nn = n @ n
    q = down * (ad @ n @ a - nn)
    aad = (a @ ad).tocsr()
    q = q + up * (a @ n @ ad - 0.5 * (aad @ n + n @ aad))
    return Operator(composite, q, hermitian=True)


def heat_current(rho, position, bath, frequency):
    """Heat (W) entering the machine from the bath on mode ``position``.

    Equals kappa h nu (n_B - <n>) on an untruncated ladder.
    """
    q = energy_flux_operator(rho.space, position, bath, frequency)
    return quantum_energy(frequency) * expectation(q, rho)


@dataclass(frozen=True)
class HeatCurrentSet:
    """Steady-state currents in watts. ``J_h`` is None for work-driven machines."""

    J_c: float
    J_r: float
    J_h: float | None = None

    @property
    def first_law_residual(self):
        """J_c + J_h - J_r (absorption) or J_c + P - J_r with P its definition (zero)."""
        return self.J_c + (self.J_h or 0.0) - self.J_r

    @property
    def power(self):
        """Work input P = J_r - J_c of a work-driven machine."""
        return self.J_r - self.J_c

    def scale(self):
        return max(abs(self.J_c), abs(self.J_r), abs(self.J_h or 0.0))


def cop(J_c, J_h):
    """Coefficient of performance J_c / J_h."""
    if not J_h > 0:
        raise NotCoolingError(f"no heat drawn from the resource (J_h = {J_h!r})")
    return J_c / J_h


def cop_ideal(E_c, E_h):
    return E_c / E_h


def carnot_cop(T_h, T_r, T_c):
    """Carnot bound (1 - T_r/T_h) / (T_r/T_c - 1); +inf for T_r == T_c."""
    if not (0 <= T_c <= T_r < T_h):
        raise ParameterError(f"need 0 <= T_c <= T_r < T_h, got T_c={T_c}, T_r={T_r}, T_h={T_h}")
    if T_c == 0:
        return 0.0
    if T_r == T_c:
        return math.inf
    return (1.0 - T_r / T_h) / (T_r / T_c - 1.0)


def virtual_temperature(E_r, E_h, T_r, T_h):
    """T_v = (E_r - E_h) / (E_r/T_r - E_h/T_h), signed (negative = inversion)."""
    if not (E_r > E_h > 0):
        raise ParameterError(f"need E_r > E_h > 0, got E_r={E_r}, E_h={E_h}")
    if not (T_r > 0 and T_h > 0):
        raise ParameterError("temperatures must be positive")
    denom = E_r / T_r - E_h / T_h
    if denom == 0:
        raise InfiniteVirtualTemperatureError("E_r/T_r == E_h/T_h: virtual temperature diverges")
    return (E_r - E_h) / denom


@dataclass(frozen=True)
class VirtualTemperature:
    kelvin: float
    inverted: bool = False
    infinite: bool = False

    @classmethod
    def evaluate(cls, E_r, E_h, T_r, T_h):
        try:
            tv = virtual_temperature(E_r, E_h, T_r, T_h)
        except InfiniteVirtualTemperatureError:
            return cls(math.inf, inverted=False, infinite=True)
        return cls(tv, inverted=tv < 0)


def cooling_window(T_c, T_r, T_h, E_h):
    """Range (0, E_c_max) of cold splittings that can be refrigerated."""
    if not (0 < T_c <= T_r <= T_h):
        raise ParameterError(f"need 0 < T_c <= T_r <= T_h, got T_c={T_c}, T_r={T_r}, T_h={T_h}")
    if T_h == T_r:
        return (0.0, 0.0)
    if T_r == T_c:
        return (0.0, math.inf)
    return (0.0, E_h * (T_h - T_r) * T_c / ((T_r - T_c) * T_h))


def entropy_production(J, T_c, T_r, T_h=None, rtol=1e-12):
    """sigma = J_r/T_r - J_h/T_h - J_c/T_c in W/K.

    Raises :class:`SecondLawViolationError` below -rtol * scale.
    """
    if not (T_c > 0 and T_r > 0):
        raise ParameterError("temperatures must be positive")
    terms = [J.J_r / T_r, -J.J_c / T_c]
    if J.J_h is not None:
        if T_h is None or not T_h > 0:
            raise ParameterError("hot temperature required when J_h is present")
        terms.append(-J.J_h / T_h)
    sigma = math.fsum(terms)
    scale = sum(abs(t) for t in terms)
    if sigma < -rtol * scale:
        raise SecondLawViolationError(f"entropy production {sigma:.3e} W/K is negative (scale {scale:.3e})")
    return sigma


def virtual_qubit_ratio(rho, m, n, r_position=1, h_position=2):
    """p_{m+1}^(r) p_n^(h) / (p_m^(r) p_{n+1}^(h}) from the marginal populations."""
    pr = rho.marginal(r_position)
    ph = rho.marginal(h_position)
    if m + 1 >= len(pr) or n + 1 >= len(ph):
        raise InvalidStateError("level index outside the truncated ladder")
    denom = pr[m] * ph[n + 1]
    if denom <= 0:
        raise InvalidStateError("virtual-qubit ratio has a vanishing denominator")
    return float(pr[m + 1] * ph[n] / denom)


@dataclass(frozen=True)
class PerformanceReport:
    cop: float | None
    cop_carnot: float | None
    virtual_temperature: VirtualTemperature | None
    cooling_window: tuple | None
    entropy_production: float

    def as_dict(self):
        vt = self.virtual_temperature
        return {
            "cop": self.cop,
            "cop_carnot": self.cop_carnot,
            "virtual_temperature_K": None if vt is None else vt.kelvin,
            "virtual_temperature_inverted": None if vt is None else vt.inverted,
            "virtual_temperature_infinite": None if vt is None else vt.infinite,
            "cooling_window_GHz": None if self.cooling_window is None else list(self.cooling_window),
            "entropy_production_W_per_K": self.entropy_production,
        }


def mean_occupations(rho):
    """<n_j> for every factor, from the marginal populations."""
    return np.array([np.dot(np.arange(f.dim), rho.marginal(k)) for k, f in enumerate(rho.space.factors)])
