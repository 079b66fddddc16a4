"""Hamiltonians of the absorption-refrigerator models.

All energies are ordinary frequencies in GHz. Mode order is always
c (cold), r (room / work sink), h (hot); two-mode sideband models use (c, r),
and the single-atom sideband model uses (c, r, h) with the two-level atom in
the r slot (dim 2, sigma = truncated a).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, ParameterError, ResonanceError
from .fock import (
    CompositeSpace,
    Operator,
    annihilation_op,
    diagonal_op,
    identity,
    local_annihilation,
    tensor_embed,
)
from .units import ELEMENTARY_CHARGE, GHZ, PLANCK

RESONANCE_RTOL = 1e-9
THREE_MODES = ("c", "r", "h")
TWO_MODES = ("c", "r")


def check_resonance(lhs, rhs, what):
    """Raise unless ``lhs == rhs`` to relative 1e-9."""
    scale = max(abs(lhs), abs(rhs), 1e-300)
    if abs(lhs - rhs) > RESONANCE_RTOL * scale:
        raise ResonanceError(f"{what}: {lhs!r} != {rhs!r}")


def _positive(name, value):
    if not value > 0:
        raise ParameterError(f"{name} must be positive, got {value!r}")


# --------------------------------------------------------------------------
# parameter sets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GenericThreeBodyParams:
    """Bare three-body refrigerator with a_c a_r^dag a_h coupling."""

    E_c: float
    E_r: float
    E_h: float
    g: float

    def __post_init__(self):
        for name in ("E_c", "E_r", "E_h"):
            _positive(name, getattr(self, name))
        check_resonance(self.E_c + self.E_h, self.E_r, "resonance E_c + E_h = E_r")
        _warn_weak_coupling(self.g, (self.E_c, self.E_r, self.E_h))

    @classmethod
    def resonant(cls, E_c, E_h, g):
        return cls(E_c=E_c, E_r=E_c + E_h, E_h=E_h, g=g)

    @property
    def energies(self):
        return (self.E_c, self.E_r, self.E_h)


def _warn_weak_coupling(g, energies):
    if abs(g) > 0.1 * min(energies):
        warnings.warn(f"|g| = {abs(g):.3g} GHz is not small compared with the mode energies", stacklevel=3)


@dataclass(frozen=True)
class CavityEffectiveParams:
    """Crossed-cavity refrigerator after eliminating the excited atomic level."""

    g_h: float
    g_r: float
    eta: float
    Delta: float
    E_c: float
    E_r: float
    E_h: float
    n_atoms: int = 1

    def __post_init__(self):
        if self.Delta == 0:
            raise ParameterError("detuning Delta must be non-zero")
        _positive("eta", self.eta)
        if self.eta >= 0.3:
            warnings.warn(f"eta = {self.eta} is outside the Lamb-Dicke regime", stacklevel=2)
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ParameterError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        for name in ("E_c", "E_r", "E_h"):
            _positive(name, getattr(self, name))
        check_resonance(self.E_c + self.E_h, self.E_r, "resonance E_c + E_h = E_r")

    @property
    def g(self):
        return -self.g_h * self.g_r * self.eta / self.Delta * self.n_atoms

    @property
    def energies(self):
        return (self.E_c, self.E_r, self.E_h)


def _check_lambda(name, lam):
    if not 0 < lam < 1:
        raise ParameterError(f"{name} must lie in (0, 1), got {lam!r}")
    if lam > 0.5:
        warnings.warn(f"{name} = {lam} is outside the weak-coupling range (0, 0.5]", stacklevel=3)


@dataclass(frozen=True)
class CircuitAbsorptionParams:
    """Three LC resonators in series with a Josephson junction (zero bias)."""

    lambda_c: float
    lambda_r: float
    lambda_h: float
    E_J: float
    E_c: float
    E_r: float
    E_h: float
    phi: float = math.pi / 2

    def __post_init__(self):
        for name in ("lambda_c", "lambda_r", "lambda_h"):
            _check_lambda(name, getattr(self, name))
        for name in ("E_J", "E_c", "E_r", "E_h"):
            _positive(name, getattr(self, name))
        check_resonance(self.E_c + self.E_h, self.E_r, "resonance E_c + E_h = E_r")

    @property
    def g(self):
        return -8.0 * self.lambda_c * self.lambda_r * self.lambda_h * self.E_J

    @property
    def energies(self):
        return (self.E_c, self.E_r, self.E_h)


@dataclass(frozen=True)
class CircuitSidebandParams:
    """Two resonators and a voltage-biased junction.

    ``drive`` is the Cooper-pair frequency 2eV/h in GHz. Give it directly, or
    give ``voltage`` in volts, or leave both unset to bias at resonance.
    """

    lambda_c: float
    lambda_r: float
    E_J: float
    E_c: float
    E_r: float
    drive: float | None = None
    voltage: float | None = None
    frame: str = "rotating"

    def __post_init__(self):
        for name in ("lambda_c", "lambda_r"):
            _check_lambda(name, getattr(self, name))
        for name in ("E_J", "E_c", "E_r"):
            _positive(name, getattr(self, name))
        if self.frame not in ("rotating", "lab"):
            raise ParameterError(f"frame must be 'rotating' or 'lab', got {self.frame!r}")
        if self.drive is not None and self.voltage is not None:
            raise ParameterError("give either drive or voltage, not both")
        if self.voltage is not None:
            object.__setattr__(self, "drive", drive_frequency(self.voltage))
        elif self.drive is None:
            object.__setattr__(self, "drive", self.E_r - self.E_c)
        if self.frame == "rotating":
            check_resonance(self.drive, self.E_r - self.E_c, "sideband resonance 2eV/h = E_r - E_c")

    @property
    def g(self):
        """Pair-tunnelling coupling 2 lambda_c lambda_r E_J."""
        return 2.0 * self.lambda_c * self.lambda_r * self.E_J

    @property
    def energies(self):
        return (self.E_c, self.E_r)


@dataclass(frozen=True)
class AtomSidebandParams:
    """Trapped two-level atom in one cavity, Lamb-Dicke expanded."""

    kind: str
    g0: float
    eta: float
    E_c: float
    E_sigma: float
    E_h: float

    def __post_init__(self):
        if self.kind not in ("red", "blue", "carrier"):
            raise ParameterError(f"kind must be red, blue or carrier, got {self.kind!r}")
        for name in ("E_c", "E_sigma", "E_h"):
            _positive(name, getattr(self, name))
        _positive("eta", self.eta)
        if self.kind == "red":
            check_resonance(self.E_h, self.E_sigma - self.E_c, "red sideband E_h = E_sigma - E_c")
        elif self.kind == "blue":
            check_resonance(self.E_h, self.E_sigma + self.E_c, "blue sideband E_h = E_sigma + E_c")

    @property
    def g(self):
        return self.g0 if self.kind == "carrier" else self.g0 * self.eta

    @property
    def energies(self):
        return (self.E_c, self.E_sigma, self.E_h)


# --------------------------------------------------------------------------
# special functions and dressed operators
# --------------------------------------------------------------------------

def laguerre_gen(n, alpha, x):
    """Generalized Laguerre polynomial L_n^(alpha)(x) by forward recurrence."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    prev, cur = 1.0, 1.0 + alpha - x
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def laguerre_table(nmax, alpha, x):
    """Values L_0^(alpha)(x), ..., L_{nmax-1}^(alpha)(x) as an array."""
    out = np.empty(nmax)
    prev, cur = 1.0, 1.0 + alpha - x
    out[0] = prev
    if nmax > 1:
        out[1] = cur
    for k in range(1, nmax - 1):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
        out[k + 1] = cur
    return out


def dressing_diagonal(dim, lam):
    """Diagonal of A = exp(-2 lam^2) sum_n L_n^(1)(4 lam^2)/(n+1) |n><n|."""
    if lam < 0:
        raise ParameterError("lambda must be non-negative")
    n = np.arange(dim)
    return math.exp(-2.0 * lam**2) * laguerre_table(dim, 1, 4.0 * lam**2) / (n + 1)


def dressing_operator(space, composite, position, lam):
    return diagonal_op(space, composite, position, dressing_diagonal(space.dim, lam))


def dressed_lowering(space, composite, position, lam):
    """L = A a with the Laguerre dressing (lam = 0 gives the bare a)."""
    composite.check_position(position, space)
    local = sp.diags(dressing_diagonal(space.dim, lam)) @ local_annihilation(space.dim)
    return tensor_embed(local, composite, position)


# --------------------------------------------------------------------------
# Hamiltonians
# --------------------------------------------------------------------------

def _space(dims, labels):
    if len(dims) != len(labels):
        raise DimensionError(f"expected {len(labels)} dims for modes {labels}, got {dims}")
    return CompositeSpace.from_dims(labels, dims)


def free_hamiltonian(composite, energies):
    """sum_j E_j n_j."""
    h = identity(composite) * 0.0
    for pos, (mode, energy) in enumerate(zip(composite.factors, energies, strict=True)):
        h = h + diagonal_op(mode, composite, pos, lambda n, e=energy: e * n)
    return Operator(composite, h.matrix, hermitian=True)


def three_body_interaction(g, lowering):
    """g (L_c L_r^dag L_h + h.c.) for lowering operators (L_c, L_r, L_h)."""
    lc, lr, lh = lowering
    term = lc @ lr.dag() @ lh
    return Operator(lc.space, (g * (term + term.dag())).matrix, hermitian=True)


def build_generic_three_body(p, dims):
    composite = _space(dims, THREE_MODES)
    lowering = [annihilation_op(m, composite, k) for k, m in enumerate(composite.factors)]
    h = free_hamiltonian(composite, p.energies) + three_body_interaction(p.g, lowering)
    return Operator(composite, h.matrix, hermitian=True)


def build_cavity_effective(p, dims):
    """Effective crossed-cavity Hamiltonian; same form as the generic model."""
    return build_generic_three_body(GenericThreeBodyParams(p.E_c, p.E_r, p.E_h, p.g), dims)


@dataclass(frozen=True)
class CircuitAbsorptionHamiltonians:
    """Flux-switched refrigerator: H(phi) = H_free + sin(phi) V_on + cos(phi) V_off.

    ``off_interaction`` is identically zero: only its (lambda_c lambda_r
    lambda_h)^2 scaling is known, so the off state is idealized to the free
    Hamiltonian.
    """

    free: Operator
    on_interaction: Operator
    off_interaction: Operator
    phi: float

    @property
    def on(self):
        return self.free + self.on_interaction

    @property
    def off(self):
        return self.free + self.off_interaction

    def at(self, phi):
        h = self.free + self.on_interaction * math.sin(phi) + self.off_interaction * math.cos(phi)
        return Operator(self.free.space, h.matrix, hermitian=True)

    @property
    def operator(self):
        return self.at(self.phi)


def build_circuit_absorption(p, dims):
    composite = _space(dims, THREE_MODES)
    lams = (p.lambda_c, p.lambda_r, p.lambda_h)
    lowering = [dressed_lowering(m, composite, k, lam) for (k, m), lam in zip(enumerate(composite.factors), lams)]
    free = free_hamiltonian(composite, p.energies)
    on_int = three_body_interaction(p.g, lowering)
    off_int = Operator(composite, sp.csr_matrix((composite.dim, composite.dim)), hermitian=True)
    return CircuitAbsorptionHamiltonians(free, on_int, off_int, p.phi)


@dataclass(frozen=True)
class LabFrameGenerator:
    """H(t) = static + exp(+i w t) plus + exp(-i w t) minus, w = 2 pi frequency."""

    static: Operator
    plus: Operator
    minus: Operator
    frequency: float  # GHz

    def at(self, t_ns):
        """Hamiltonian at time ``t_ns`` nanoseconds."""
        phase = np.exp(2j * np.pi * self.frequency * t_ns)
        h = self.static + self.plus * phase + self.minus * np.conj(phase)
        return Operator(self.static.space, h.matrix, hermitian=True)


@dataclass(frozen=True)
class CircuitSidebandHamiltonians:
    """Voltage-biased sideband cooler.

    ``on`` is the rotating-frame Hamiltonian (frame rotating at the drive
    frequency on mode r); ``off`` is the zero-bias Hamiltonian expressed in the
    same frame. ``lab`` is the explicitly time-dependent lab-frame generator.
    """

    on: Operator
    off: Operator
    lab: LabFrameGenerator
    frame_shift: float  # GHz subtracted from E_r in the rotating frame


def off_bias_diagonal(p, dims):
    """E_J exp(-2(lc^2 + lr^2)) L_n(4 lc^2) L_m(4 lr^2) on |n, m>."""
    lc = laguerre_table(dims[0], 0, 4.0 * p.lambda_c**2)
    lr = laguerre_table(dims[1], 0, 4.0 * p.lambda_r**2)
    pref = p.E_J * math.exp(-2.0 * (p.lambda_c**2 + p.lambda_r**2))
    return pref * np.kron(lc, lr)


def build_circuit_sideband(p, dims):
    composite = _space(dims, TWO_MODES)
    mc, mr = composite.factors
    lc = dressed_lowering(mc, composite, 0, p.lambda_c)
    lr = dressed_lowering(mr, composite, 1, p.lambda_r)
    hop = lc.dag() @ lr  # L_c^dag L_r
    interaction = Operator(composite, (p.g * (hop + hop.dag())).matrix, hermitian=True)

    shift = p.drive
    rotating_free = free_hamiltonian(composite, (p.E_c, p.E_r - shift))
    off_diag = Operator(composite, sp.diags(off_bias_diagonal(p, dims), format="csr"), hermitian=True)
    on = Operator(composite, (rotating_free + interaction).matrix, hermitian=True)
    off = Operator(composite, (rotating_free + off_diag).matrix, hermitian=True)
    lab = LabFrameGenerator(
        static=free_hamiltonian(composite, (p.E_c, p.E_r)),
        plus=hop * p.g,
        minus=hop.dag() * p.g,
        frequency=p.drive,
    )
    return CircuitSidebandHamiltonians(on=on, off=off, lab=lab, frame_shift=shift)


def build_atom_sideband(p, dims):
    """Single trapped atom: free part plus red, blue or carrier coupling.

    ``dims`` is (N_c, N_h) or (N_c, 2, N_h).
    """
    dims = tuple(dims)
    if len(dims) == 2:
        dims = (dims[0], 2, dims[1])
    if len(dims) != 3 or dims[1] != 2:
        raise DimensionError(f"atom sideband dims must be (N_c, N_h) or (N_c, 2, N_h), got {dims}")
    composite = _space(dims, THREE_MODES)
    a_c, sigma, a_h = (annihilation_op(m, composite, k) for k, m in enumerate(composite.factors))
    if p.kind == "red":
        term = a_c @ sigma.dag() @ a_h
    elif p.kind == "blue":
        term = a_c.dag() @ sigma.dag() @ a_h
    else:
        term = sigma.dag() @ a_h
    h = free_hamiltonian(composite, p.energies) + Operator(composite, (p.g * (term + term.dag())).matrix, hermitian=True)
    return Operator(composite, h.matrix, hermitian=True)


def drive_frequency(voltage):
    """Cooper-pair frequency 2eV/h in GHz for a bias in volts."""
    return 2.0 * ELEMENTARY_CHARGE * voltage / PLANCK / GHZ


def voltage_for_resonance(E_r, E_c):
    """Bias voltage (volts) with 2eV = h (E_r - E_c)."""
    if not E_r > E_c:
        raise ParameterError(f"resonance voltage needs E_r > E_c (got E_r={E_r}, E_c={E_c}); zero bias is the off state")
    return PLANCK * (E_r - E_c) * GHZ / (2.0 * ELEMENTARY_CHARGE)
