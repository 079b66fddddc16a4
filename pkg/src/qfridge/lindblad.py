"""Lindblad generators, steady states and time evolution.

Vectorization convention: column stacking, ``vec(rho)[i + j*d] = rho[i, j]``,
so that ``vec(A rho B) = (B^T kron A) vec(rho)``. Generators are stored in
angular units of s^-1; Hamiltonians (GHz) are scaled by 2 pi 1e9.

A generator is kept as a list of terms ``coef * A rho B``. The full d^2 x d^2
matrix is available, but solves work on the invariant block reachable from
the initial support (the diagonal for steady states). For resonant models
that block drops every fast free-evolution phase and is orders of magnitude
smaller than d^2.
"""

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .errors import (
    BathSpecError,
    ConvergenceError,
    DegenerateSteadyStateError,
    DimensionError,
    IntegrationError,
    InvalidStateError,
)
from .fock import CompositeSpace, Operator, annihilation_op
from .units import ANGULAR_PER_GHZ, KB_OVER_H_GHZ

log = logging.getLogger(__name__)

DENSE_SOLVE_LIMIT = 400
EIGEN_CHECK_LIMIT = 2500
REFINEMENT_STEPS = 2


# --------------------------------------------------------------------------
# baths
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BathSpec:
    """Thermal bath attached to one mode.

    Exactly one of ``temperature`` (K), ``occupation`` (n_B) or ``rates``
    (``(rate_down, rate_up)`` in s^-1) fixes the dissipator. ``kappa`` is an
    ordinary frequency in GHz and is required unless rates are given.
    """

    kappa: float | None = None
    temperature: float | None = None
    occupation: float | None = None
    rates: tuple | None = None

    def __post_init__(self):
        given = [k for k in ("temperature", "occupation", "rates") if getattr(self, k) is not None]
        if len(given) != 1:
            raise BathSpecError(f"exactly one of temperature, occupation, rates must be set (got {given or 'none'})")
        if self.rates is not None:
            down, up = (float(x) for x in self.rates)
            if up < 0 or down <= up:
                raise BathSpecError(f"explicit rates need rate_down > rate_up >= 0, got {self.rates}")
            object.__setattr__(self, "rates", (down, up))
        else:
            if self.kappa is None or not self.kappa > 0:
                raise BathSpecError(f"kappa must be positive, got {self.kappa!r}")
        if self.temperature is not None and self.temperature < 0:
            raise BathSpecError("temperature must be non-negative")
        if self.occupation is not None and self.occupation < 0:
            raise BathSpecError("occupation must be non-negative")

    @property
    def kind(self):
        if self.rates is not None:
            return "rates"
        return "temperature" if self.temperature is not None else "occupation"

    def occupation_for(self, frequency):
        """Mean bath occupation n_B at ``frequency`` (GHz)."""
        if self.occupation is not None:
            return float(self.occupation)
        if self.temperature is not None:
            from .thermo import bose_einstein
            return bose_einstein(frequency, self.temperature)
        down, up = self.rates
        return up / (down - up)

    def rates_for(self, frequency):
        """(rate_down, rate_up) in s^-1, i.e. kappa (1 + n_B) and kappa n_B."""
        if self.rates is not None:
            return self.rates
        kappa = self.kappa * ANGULAR_PER_GHZ
        n = self.occupation_for(frequency)
        return kappa * (1.0 + n), kappa * n

    def temperature_for(self, frequency):
        """Bath temperature in K (inverted from n_B when not given directly)."""
        if self.temperature is not None:
            return float(self.temperature)
        if self.rates is not None:
            down, up = self.rates
            if up == 0:
                return 0.0
            return frequency / KB_OVER_H_GHZ / math.log1p((down - up) / up)
        n = float(self.occupation)
        if n == 0:
            return 0.0
        return frequency / KB_OVER_H_GHZ / math.log1p(1.0 / n)


# --------------------------------------------------------------------------
# generators
# --------------------------------------------------------------------------

def _csr(m):
    return None if m is None else sp.csr_matrix(m, dtype=complex)


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Sum of superoperator terms ``coef * A rho B`` (``None`` = identity)."""

    space: CompositeSpace
    terms: tuple = ()

    def __post_init__(self):
        d = self.space.dim
        clean = []
        for coef, a, b in self.terms:
            a, b = _csr(a), _csr(b)
            for m in (a, b):
                if m is not None and m.shape != (d, d):
                    raise DimensionError(f"term of shape {m.shape} on space of dim {d}")
            clean.append((complex(coef), a, b))
        object.__setattr__(self, "terms", tuple(clean))

    def __add__(self, other):
        if not isinstance(other, Liouvillian):
            return NotImplemented
        if other.space != self.space:
            raise DimensionError("Liouvillians act on different spaces")
        return Liouvillian(self.space, self.terms + other.terms)

    def __mul__(self, scalar):
        return Liouvillian(self.space, tuple((c * scalar, a, b) for c, a, b in self.terms))

    __rmul__ = __mul__

    @property
    def dim(self):
        return self.space.dim

    @cached_property
    def matrix(self):
        """Full d^2 x d^2 sparse generator (column stacking)."""
        d = self.dim
        eye = sp.identity(d, dtype=complex, format="csr")
        out = sp.csr_matrix((d * d, d * d), dtype=complex)
        for coef, a, b in self.terms:
            a = eye if a is None else a
            b = eye if b is None else b
            out = out + coef * sp.kron(b.T, a, format="csr")
        out.eliminate_zeros()
        return out

    def apply(self, rho):
        """Action on a dense density matrix."""
        rho = np.asarray(rho)
        out = np.zeros_like(rho, dtype=complex)
        for coef, a, b in self.terms:
            x = rho if a is None else a @ rho
            x = x if b is None else (b.T @ x.T).T
            out += coef * x
        return out

    # invariant blocks ---------------------------------------------------
    def closure(self, pairs):
        return support_closure([self], pairs, self.dim)

    def restrict(self, support):
        return ReducedGenerator.build(self, support)


def support_closure(generators, pairs, d):
    """Smallest set of (i, j) pairs containing ``pairs`` that every term maps into itself."""
    rows, cols = pairs
    s = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(d, d))
    left = sp.csr_matrix((d, d))
    right = sp.csr_matrix((d, d))
    both = []
    for gen in generators:
        for _, a, b in gen.terms:
            if a is not None and b is not None:
                both.append((abs(a), abs(b)))
            elif a is not None:
                left = left + abs(a)
            elif b is not None:
                right = right + abs(b)
    while True:
        nxt = s + left @ s + s @ right
        for a, b in both:
            nxt = nxt + a @ s @ b
        nxt = sp.csr_matrix(nxt)
        nxt.data[:] = 1.0
        nxt.eliminate_zeros()
        if nxt.nnz == s.nnz:
            break
        s = nxt
    s = s.tocoo()
    keys = np.sort(s.row.astype(np.int64) + s.col.astype(np.int64) * d)
    return keys


def _ragged(starts, counts):
    total = int(counts.sum())
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return np.repeat(starts, counts) + offsets


@dataclass(frozen=True, eq=False)
class ReducedGenerator:
    """Generator restricted to an invariant set of vec indices."""

    d: int
    keys: np.ndarray  # sorted vec indices i + j*d
    matrix: sp.csr_matrix

    @property
    def rows(self):
        return self.keys % self.d

    @property
    def cols(self):
        return self.keys // self.d

    @property
    def size(self):
        return len(self.keys)

    @classmethod
    def build(cls, gen, keys):
        d = gen.dim
        keys = np.asarray(keys, dtype=np.int64)
        ri, cj = keys % d, keys // d
        n = len(keys)
        q = np.arange(n)
        data, out_rows, out_cols = [], [], []
        for coef, a, b in gen.terms:
            if a is None:
                k, src, aval = ri, q, np.ones(n)
            else:
                ac = a.tocsc()
                starts = ac.indptr[ri]
                counts = ac.indptr[ri + 1] - starts
                src = np.repeat(q, counts)
                ptr = _ragged(starts, counts)
                k, aval = ac.indices[ptr], ac.data[ptr]
            if b is None:
                l_, bval = cj[src], 1.0
            else:
                jj = cj[src]
                starts = b.indptr[jj]
                counts = b.indptr[jj + 1] - starts
                rep = np.repeat(np.arange(len(src)), counts)
                ptr = _ragged(starts, counts)
                l_, bval = b.indices[ptr], b.data[ptr]
                k, aval, src = k[rep], aval[rep], src[rep]
            target = k.astype(np.int64) + l_.astype(np.int64) * d
            pos = np.searchsorted(keys, target)
            pos_c = np.minimum(pos, n - 1)
            if np.any(keys[pos_c] != target):
                raise ValueError("support is not invariant under the generator")
            data.append(coef * aval * bval)
            out_rows.append(pos_c)
            out_cols.append(src)
        if data:
            mat = sp.coo_matrix(
                (np.concatenate(data), (np.concatenate(out_rows), np.concatenate(out_cols))), shape=(n, n)
            ).tocsr()
        else:
            mat = sp.csr_matrix((n, n), dtype=complex)
        mat.sum_duplicates()
        return cls(d, keys, mat)

    def weights(self, op):
        """Vector w with Tr(O rho) = w . x for reduced vec x."""
        m = op.matrix if isinstance(op, Operator) else sp.csr_matrix(op)
        return np.asarray(m[self.cols, self.rows]).ravel()

    @cached_property
    def trace_weights(self):
        return (self.rows == self.cols).astype(complex)

    def to_dense(self, x):
        rho = np.zeros((self.d, self.d), dtype=complex)
        rho[self.rows, self.cols] = x
        return rho

    def from_dense(self, rho):
        return np.asarray(rho)[self.rows, self.cols].astype(complex)


@dataclass(frozen=True, eq=False)
class TimeDependentLiouvillian:
    """L(t) = static + exp(+i w t) plus + exp(-i w t) minus, w in rad/s."""

    static: Liouvillian
    plus: Liouvillian
    minus: Liouvillian
    omega: float

    @property
    def space(self):
        return self.static.space

    @property
    def dim(self):
        return self.static.dim

    def closure(self, pairs):
        return support_closure([self.static, self.plus, self.minus], pairs, self.dim)


def hamiltonian_term(H):
    """-i [H, .] in s^-1 for H in GHz."""
    w = ANGULAR_PER_GHZ
    return Liouvillian(H.space, ((-1j * w, H.matrix, None), (1j * w, None, H.matrix)))


def dissipator(L, rate):
    """rate * D[L] with D[L] rho = L rho L^dag - {L^dag L, rho}/2; rate in s^-1."""
    m = L.matrix
    ldl = (m.conj().T @ m).tocsr()
    return Liouvillian(L.space, ((rate, m, m.conj().T), (-0.5 * rate, ldl, None), (-0.5 * rate, None, ldl)))


def thermal_dissipator(composite, position, bath, frequency):
    """kappa (1 + n_B) D[a] + kappa n_B D[a^dag] on one mode."""
    mode = composite.factors[position]
    a = annihilation_op(mode, composite, position)
    down, up = bath.rates_for(frequency)
    out = dissipator(a, down)
    if up > 0:
        out = out + dissipator(a.dag(), up)
    return out


def build_liouvillian(H, dissipators=()):
    gen = hamiltonian_term(H)
    for dis in dissipators:
        if dis.space != H.space:
            raise DimensionError("dissipator and Hamiltonian live on different spaces")
        gen = gen + dis
    return gen


def build_time_dependent_liouvillian(lab, dissipators=()):
    """Lab-frame generator from a :class:`~qfridge.models.LabFrameGenerator`."""
    static = build_liouvillian(lab.static, dissipators)
    return TimeDependentLiouvillian(
        static=static,
        plus=_commutator_term(lab.plus),
        minus=_commutator_term(lab.minus),
        omega=lab.frequency * ANGULAR_PER_GHZ,
    )


def _commutator_term(op):
    w = ANGULAR_PER_GHZ
    return Liouvillian(op.space, ((-1j * w, op.matrix, None), (1j * w, None, op.matrix)))


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix; extra solver diagnostics go in ``info``."""

    space: CompositeSpace
    matrix: np.ndarray
    info: dict = field(default_factory=dict)
    trace_tol: float = 1e-10

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if rho.shape != (d, d):
            raise DimensionError(f"density matrix shape {rho.shape} does not match dim {d}")
        tr = np.trace(rho)
        if abs(tr - 1) > self.trace_tol:
            raise InvalidStateError(f"trace {tr} differs from 1")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > 1e-10:
            raise InvalidStateError(f"not Hermitian (max deviation {herm:.2e})")
        if d <= EIGEN_CHECK_LIMIT:
            low = float(la.eigvalsh(rho, subset_by_index=[0, 0])[0])
        else:
            low = float(np.min(np.real(np.diag(rho))))
        if low < -1e-6:
            raise InvalidStateError(f"negative eigenvalue {low:.3e}")
        if low < -1e-8:
            warnings.warn(f"density matrix has slightly negative eigenvalue {low:.3e}", stacklevel=2)
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    def populations(self):
        return np.real(np.diag(self.matrix))

    def marginal(self, position):
        """Populations of one factor, summed over all others."""
        p = self.populations().reshape(self.space.dims)
        axes = tuple(k for k in range(len(self.space.dims)) if k != position)
        return p.sum(axis=axes)


def expectation(op, rho):
    """Tr(O rho); real-valued (checked) when O is flagged Hermitian."""
    if op.space != rho.space:
        raise DimensionError("operator and state live on different spaces")
    val = complex(op.matrix.multiply(rho.matrix.T).sum())
    if op.hermitian:
        if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
            raise InvalidStateError(f"expectation of Hermitian operator has imaginary part {val.imag:.3e}")
        return val.real
    return val


def truncated_thermal_populations(dim, occupation):
    if occupation == 0:
        p = np.zeros(dim)
        p[0] = 1.0
        return p
    ratio = occupation / (1.0 + occupation)
    p = ratio ** np.arange(dim)
    return p / p.sum()


def thermal_state(composite, occupations):
    """Product of truncated Boltzmann states with the given bath occupations."""
    p = np.ones(1)
    for mode, n in zip(composite.factors, occupations, strict=True):
        p = np.kron(p, truncated_thermal_populations(mode.dim, n))
    return DensityMatrix(composite, np.diag(p / p.sum()).astype(complex))


def fock_state(composite, *occupations):
    rho = np.zeros((composite.dim, composite.dim), dtype=complex)
    k = composite.index(*occupations)
    rho[k, k] = 1.0
    return DensityMatrix(composite, rho)


# --------------------------------------------------------------------------
# steady state
# --------------------------------------------------------------------------

def steady_state(L, residual_tol=1e-8):
    """Trace-one null vector of ``L`` reached from diagonal initial states.

    Solves ``L vec(rho) = 0`` together with ``Tr rho = 1`` on the invariant
    block containing the populations. Small blocks are solved densely with
    a singular-value check for a second stationary direction. Either way one
    redundant population equation is replaced by the trace constraint and
    the square system is solved by LU with iterative refinement.
    """
    if not isinstance(L, Liouvillian):
        raise TypeError("steady_state needs a time-independent Liouvillian")
    d = L.dim
    diag = np.arange(d)
    red = L.restrict(L.closure((diag, diag)))
    m = red.matrix
    n = red.size
    tw = red.trace_weights
    lnorm = float(spla.norm(m)) if m.nnz else 0.0

    # one population equation is redundant (trace preservation); swap it
    # for the trace constraint to get a square, nonsingular system
    pivot = int(np.flatnonzero(red.rows == red.cols)[0])
    bordered = m.tolil()
    bordered[pivot, :] = tw
    bordered = bordered.tocsr()
    rhs = np.zeros(n, dtype=complex)
    rhs[pivot] = 1.0

    if n <= DENSE_SOLVE_LIMIT:
        dense = m.toarray()
        sv = la.svd(dense, compute_uv=False)
        if n > 1 and sv[-2] <= 1e-10 * max(sv[0], 1e-300):
            raise DegenerateSteadyStateError(
                f"second near-null direction: singular values {sv[-2]:.3e}, {sv[-1]:.3e}"
            )
        factors = la.lu_factor(bordered.toarray(), check_finite=False)
        solve = lambda b: la.lu_solve(factors, b, check_finite=False)  # noqa: E731
        method = "dense-lu"
    else:
        try:
            lu = spla.splu(bordered.tocsc(), permc_spec="MMD_AT_PLUS_A")
        except RuntimeError as exc:
            raise DegenerateSteadyStateError(f"bordered system is singular: {exc}") from exc
        solve = lu.solve
        method = "sparse-lu"

    x = solve(rhs)
    if not np.all(np.isfinite(x)):
        raise DegenerateSteadyStateError("bordered system is singular (non-finite solution)")
    # iterative refinement recovers relative accuracy of tiny populations
    for _ in range(REFINEMENT_STEPS):
        x = x + solve(rhs - bordered @ x)

    x = x / (tw @ x)
    residual = float(np.linalg.norm(m @ x))
    if residual > residual_tol * max(lnorm, 1e-300):
        raise ConvergenceError(f"steady-state residual {residual:.3e} exceeds {residual_tol:g} * |L| = {lnorm:.3e}")
    rho = red.to_dense(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    info = {"residual": residual, "generator_norm": lnorm, "block_size": n, "method": method}
    return DensityMatrix(L.space, rho, info=info)


# --------------------------------------------------------------------------
# time evolution
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Trajectory:
    """Observables sampled on a time grid (seconds)."""

    times: np.ndarray
    expectations: np.ndarray  # shape (n_observables, n_times)
    traces: np.ndarray
    final_state: DensityMatrix
    renormalizations: int = 0

    def __getitem__(self, k):
        return self.expectations[k]


def propagate(rho0, L, t_grid, observables=(), rtol=1e-8, atol=None, method="DOP853"):
    """Integrate d vec(rho)/dt = L vec(rho) and record observables on ``t_grid``.

    ``L`` is a :class:`Liouvillian` or :class:`TimeDependentLiouvillian`.
    Integration is adaptive explicit Runge-Kutta, restarted at each grid
    point, where the trace is checked (renormalized if off by more than 1e-9)
    and populations are checked for negativity beyond 1e-6.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t_grid) <= 0) or t_grid[0] < 0:
        raise ValueError("t_grid must be non-negative and strictly increasing")
    if rho0.space != L.space:
        raise DimensionError("initial state and generator live on different spaces")
    for op in observables:
        if op.space != L.space:
            raise DimensionError("observable lives on a different space")

    rho_init = np.asarray(rho0.matrix)
    nz = np.nonzero(np.abs(rho_init) > 0)
    keys = L.closure(nz)
    if isinstance(L, TimeDependentLiouvillian):
        m0 = ReducedGenerator.build(L.static, keys).matrix
        mp = ReducedGenerator.build(L.plus, keys).matrix
        mm = ReducedGenerator.build(L.minus, keys).matrix
        red = ReducedGenerator(L.dim, keys, m0)
        omega = L.omega

        def rhs(t, x):
            ph = np.exp(1j * omega * t)
            return m0 @ x + ph * (mp @ x) + np.conj(ph) * (mm @ x)
    else:
        red = ReducedGenerator.build(L, keys)
        mat = red.matrix

        def rhs(t, x):
            return mat @ x

    weights = np.array([red.weights(op) for op in observables]).reshape(len(observables), red.size)
    tw = red.trace_weights
    pop = np.flatnonzero(red.rows == red.cols)
    if atol is None:
        atol = rtol * 1e-3

    x = red.from_dense(rho_init)
    n_t = len(t_grid)
    values = np.empty((len(observables), n_t), dtype=complex)
    traces = np.empty(n_t)
    renorm = 0
    first_step = None
    t_prev = t_grid[0]
    for k, t in enumerate(t_grid):
        if t > t_prev:
            step = None if first_step is None else min(first_step, t - t_prev)
            sol = solve_ivp(rhs, (t_prev, t), x, method=method, rtol=rtol, atol=atol, first_step=step)
            if sol.status != 0:
                raise IntegrationError(f"integration failed at t={sol.t[-1]:.6e} s: {sol.message}")
            x = sol.y[:, -1]
            if len(sol.t) > 2:
                # last step is clipped to the grid point; the one before is representative
                first_step = float(sol.t[-2] - sol.t[-3])
        tr = (tw @ x).real
        if abs(tr - 1.0) > 1e-9:
            x = x / tr
            renorm += 1
            log.debug("renormalized trace %.12f at t=%.6e", tr, t)
        traces[k] = tr
        low = float(np.min(x[pop].real))
        if low < -1e-6:
            raise IntegrationError(f"population {low:.3e} < -1e-6 at t={t:.6e} s (positivity lost)")
        values[:, k] = weights @ x
        t_prev = t
    if renorm:
        log.info("trace renormalized %d times", renorm)

    for j, op in enumerate(observables):
        if op.hermitian:
            if np.max(np.abs(values[j].imag)) > 1e-8 * max(1.0, np.max(np.abs(values[j].real))):
                raise IntegrationError("Hermitian observable acquired an imaginary expectation value")
    if all(op.hermitian for op in observables):
        values = values.real

    rho = red.to_dense(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    final = DensityMatrix(L.space, rho, info={"block_size": red.size}, trace_tol=1e-8)
    return Trajectory(t_grid.copy(), values, traces, final, renorm)
