"""Switch-on / switch-off protocol for transient cooling below steady state.

The machine starts in the steady state of its off configuration, the
interaction is switched on, and the cold-mode temperature theta_c(t) is
followed until its first minimum. At that instant the interaction is
switched off again and the dwell time below the on-state steady temperature
is measured.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .fock import number_op
from .lindblad import propagate, steady_state
from .thermo import effective_temperature


@dataclass(frozen=True)
class Minimum:
    index: int
    time: float
    value: float


def find_first_minimum(times, series, tol=0.0):
    """First interior local minimum of a sampled series.

    The first index ``i`` with ``s[i-1] - s[i] > tol`` and
    ``s[i+1] - s[i] >= -tol`` is taken, so on a flat-bottomed minimum the
    earliest sample wins. The location is refined by the parabola through
    the three neighbouring samples when it is strictly convex, otherwise the
    sample itself is returned. Returns None when the series has no such point.

    Parameters
    ----------
    times, series : array_like
        Sample times (increasing) and values.
    tol : float
        Differences below this are treated as ties (integration noise).
    """
    t = np.asarray(times, dtype=float)
    s = np.asarray(series, dtype=float)
    if t.shape != s.shape or t.ndim != 1:
        raise ValueError("times and series must be 1-d arrays of equal length")
    for i in range(1, len(s) - 1):
        if s[i - 1] - s[i] > tol and s[i + 1] - s[i] >= -tol:
            t0, t1, t2 = t[i - 1 : i + 2]
            y0, y1, y2 = s[i - 1 : i + 2]
            # Newton form of the interpolating parabola
            d1 = (y1 - y0) / (t1 - t0)
            d2 = (y2 - y1) / (t2 - t1)
            curv = (d2 - d1) / (t2 - t0)
            if curv > 0:
                tv = 0.5 * (t0 + t1) - d1 / (2.0 * curv)
                tv = min(max(tv, t0), t2)
                yv = y0 + d1 * (tv - t0) + curv * (tv - t0) * (tv - t1)
                if yv <= y1:
                    return Minimum(i, float(tv), float(yv))
            return Minimum(i, float(t1), float(y1))
    return None


@dataclass(frozen=True, eq=False)
class SwitchReport:
    """Outcome of one switch protocol run. Times in s, temperatures in K.

    ``t_min`` and ``theta_min`` are None when theta_c(t) has no minimum
    before ``t_max``; ``dwell_censored`` flags a dwell that lasted to the end
    of the window.
    """

    T_c_steady: float
    theta_initial: float
    t_min: float | None
    theta_min: float | None
    dwell: float
    dwell_censored: bool
    on_times: np.ndarray
    on_theta: np.ndarray
    off_times: np.ndarray
    off_theta: np.ndarray
    dims: tuple
    notes: tuple = ()

    @property
    def found_minimum(self):
        return self.t_min is not None

    def as_dict(self, include_trajectories=True):
        out = {
            "T_c_steady_K": self.T_c_steady,
            "theta_initial_K": self.theta_initial,
            "t_min_s": self.t_min,
            "theta_min_K": self.theta_min,
            "dwell_s": self.dwell,
            "dwell_censored": self.dwell_censored,
            "found_minimum": self.found_minimum,
            "dims": list(self.dims),
            "notes": list(self.notes),
        }
        if include_trajectories:
            out["on_trajectory"] = {"t_s": self.on_times.tolist(), "theta_c_K": self.on_theta.tolist()}
            out["off_trajectory"] = {"t_s": self.off_times.tolist(), "theta_c_K": self.off_theta.tolist()}
        return out


def dwell_below(times, theta, threshold):
    """Time from ``times[0]`` until ``theta`` first rises to ``threshold``.

    The crossing is located by linear interpolation between samples.
    Returns ``(dwell, censored)``; ``censored`` is True when theta stays
    below the threshold for the whole record.
    """
    times = np.asarray(times, dtype=float)
    theta = np.asarray(theta, dtype=float)
    above = np.flatnonzero(theta >= threshold)
    if len(above) == 0:
        return float(times[-1] - times[0]), True
    k = above[0]
    if k == 0:
        return 0.0, False
    t0, t1 = times[k - 1], times[k]
    y0, y1 = theta[k - 1], theta[k]
    return float(t0 + (threshold - y0) * (t1 - t0) / (y1 - y0) - times[0]), False


def default_t_max(machine):
    """20 / |g| with g taken as an ordinary frequency (s)."""
    g = abs(machine.coupling)
    if g == 0:
        raise ParameterError("t_max must be given when the coupling vanishes")
    return 20.0 / (g * 1e9)


def _theta(values, frequency):
    return np.array([effective_temperature(n, frequency) for n in np.real(values)])


def run_switch_protocol(machine, t_max=None, samples=2000, rtol=1e-8, residual_tol=1e-8):
    """Run the on/off switch protocol on ``machine``.

    Parameters
    ----------
    machine : Machine
        Needs both an on and an off Hamiltonian.
    t_max : float, optional
        Length of each phase in seconds; default 20/|g|.
    samples : int
        Grid points per phase.

    Returns
    -------
    SwitchReport
    """
    if machine.off_hamiltonian is None:
        raise ParameterError(f"model {machine.model!r} has no off configuration to switch")
    if samples < 3:
        raise ParameterError("need at least 3 samples")
    if t_max is None:
        t_max = default_t_max(machine)
    nu_c = machine.frequencies[0]
    n_c = number_op(machine.space.factors[0], machine.space, 0)
    L_on = machine.liouvillian("on")
    L_off = machine.liouvillian("off")

    rho_off = steady_state(L_off, residual_tol=residual_tol)
    rho_on = steady_state(L_on, residual_tol=residual_tol)
    n_ss = float(np.dot(np.arange(machine.space.dims[0]), rho_on.marginal(0)))
    T_ss = effective_temperature(n_ss, nu_c)

    grid = np.linspace(0.0, t_max, samples)
    on = propagate(rho_off, L_on, grid, [n_c], rtol=rtol)
    theta_on = _theta(on[0], nu_c)
    # wiggles at the integration tolerance are not minima
    found = find_first_minimum(grid, theta_on, tol=rtol * float(np.max(theta_on)))
    notes = list(machine.notes)

    if found is None:
        return SwitchReport(T_ss, float(theta_on[0]), None, None, 0.0, False, grid, theta_on,
                            np.empty(0), np.empty(0), machine.space.dims,
                            tuple(notes + ["no minimum of theta_c before t_max"]))

    t_min = found.time
    if t_min > 0:
        to_min = propagate(rho_off, L_on, [0.0, t_min], [n_c], rtol=rtol)
        rho_min = to_min.final_state
        theta_min = float(_theta(to_min[0][-1:], nu_c)[0])
    else:
        rho_min, theta_min = rho_off, float(theta_on[0])

    off_grid = t_min + np.linspace(0.0, t_max - t_min, samples) if t_max > t_min else np.array([t_min])
    off = propagate(rho_min, L_off, off_grid - t_min, [n_c], rtol=rtol)
    theta_off = _theta(off[0], nu_c)

    dwell, censored = dwell_below(off_grid, theta_off, T_ss)
    return SwitchReport(
        T_c_steady=T_ss,
        theta_initial=float(theta_on[0]),
        t_min=t_min,
        theta_min=theta_min,
        dwell=dwell,
        dwell_censored=censored,
        on_times=grid,
        on_theta=theta_on,
        off_times=off_grid,
        off_theta=theta_off,
        dims=machine.space.dims,
        notes=tuple(notes),
    )
