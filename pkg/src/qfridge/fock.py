"""Truncated Fock spaces and sparse operators on their tensor products.

Basis convention: the composite state |l>_c |m>_r |n>_h has index
``l * (N_r * N_h) + m * N_h + n`` (row-major over the declared factor order),
which is exactly the ordering produced by ``scipy.sparse.kron``.
"""

from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

#: entries with magnitude below this are dropped from stored operators
DROP_TOL = 1e-15
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class ModeSpace:
    """One bosonic ladder truncated to Fock states |0>, ..., |dim-1>."""

    label: str
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise DimensionError(f"mode {self.label!r}: dim must be an integer >= 2, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tensor product of mode spaces."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise DimensionError("composite space needs at least one factor")
        labels = [f.label for f in factors]
        if len(set(labels)) != len(labels):
            raise DimensionError(f"duplicate mode labels {labels}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def from_dims(cls, labels, dims):
        return cls(tuple(ModeSpace(lab, n) for lab, n in zip(labels, dims, strict=True)))

    @property
    def dims(self):
        return tuple(f.dim for f in self.factors)

    @property
    def labels(self):
        return tuple(f.label for f in self.factors)

    @property
    def dim(self):
        return int(np.prod(self.dims))

    def position(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionError(f"no mode labelled {label!r} in {self.labels}") from None

    def check_position(self, position, space=None):
        if not 0 <= position < len(self.factors):
            raise DimensionError(f"position {position} out of range for {len(self.factors)} factors")
        if space is not None and space.dim != self.factors[position].dim:
            raise DimensionError(
                f"mode dim {space.dim} does not match factor {position} (dim {self.factors[position].dim})"
            )

    def index(self, *occupations):
        """Basis index of the product state with the given Fock numbers."""
        if len(occupations) != len(self.factors):
            raise DimensionError("need one occupation per factor")
        return int(np.ravel_multi_index(occupations, self.dims))

    def basis_labels(self):
        """Array of shape (dim, n_factors) with the Fock numbers of each basis state."""
        return np.array(np.unravel_index(np.arange(self.dim), self.dims)).T


@dataclass(frozen=True, eq=False)
class Operator:
    """Complex sparse matrix acting on a :class:`CompositeSpace`.

    The matrix is stored in CSR format with tiny entries removed. Passing
    ``hermitian=True`` verifies the claim on construction.
    """

    space: CompositeSpace
    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        m = sp.csr_matrix(self.matrix, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise DimensionError(f"matrix shape {m.shape} does not match space dim {d}")
        m.data[np.abs(m.data) < DROP_TOL] = 0.0
        m.eliminate_zeros()
        m.sort_indices()
        object.__setattr__(self, "matrix", m)
        if self.hermitian:
            err = hermiticity_error(m)
            if err > HERMITIAN_TOL * max(1.0, _max_abs(m)):
                raise ValueError(f"operator flagged Hermitian but max|M - M^dag| = {err:.3e}")

    # arithmetic -----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Operator):
            if other.space != self.space:
                raise DimensionError("operators live on different spaces")
            return other.matrix
        raise TypeError(f"cannot combine Operator with {type(other).__name__}")

    def __add__(self, other):
        return Operator(self.space, self.matrix + self._coerce(other),
                        self.hermitian and getattr(other, "hermitian", False))

    def __sub__(self, other):
        return Operator(self.space, self.matrix - self._coerce(other),
                        self.hermitian and getattr(other, "hermitian", False))

    def __neg__(self):
        return Operator(self.space, -self.matrix, self.hermitian)

    def __matmul__(self, other):
        return Operator(self.space, self.matrix @ self._coerce(other))

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            raise TypeError("use @ for operator products")
        herm = self.hermitian and np.isreal(scalar)
        return Operator(self.space, self.matrix * scalar, bool(herm))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def dag(self):
        return Operator(self.space, self.matrix.conj().T.tocsr(), self.hermitian)

    def commutator(self, other):
        return self @ other - other @ self

    def toarray(self):
        return self.matrix.toarray()

    def norm(self):
        """Frobenius norm."""
        return float(sp.linalg.norm(self.matrix)) if self.matrix.nnz else 0.0

    def is_hermitian(self, tol=HERMITIAN_TOL):
        return hermiticity_error(self.matrix) <= tol * max(1.0, _max_abs(self.matrix))

    @property
    def dim(self):
        return self.space.dim

    def __repr__(self):
        return f"Operator(dims={self.space.dims}, nnz={self.matrix.nnz}, hermitian={self.hermitian})"


def _max_abs(m):
    return float(np.max(np.abs(m.data))) if m.nnz else 0.0


def hermiticity_error(m):
    diff = (m - m.conj().T).tocsr()
    return _max_abs(diff)


def identity(composite):
    return Operator(composite, sp.identity(composite.dim, dtype=complex, format="csr"), hermitian=True)


def local_annihilation(dim):
    """Truncated lowering operator on a single ladder: <k-1|a|k> = sqrt(k)."""
    return sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, shape=(dim, dim), format="csr", dtype=complex)


def tensor_embed(local, composite, position, hermitian=False):
    """Place ``local`` on factor ``position`` with identities elsewhere."""
    composite.check_position(position)
    local = sp.csr_matrix(local, dtype=complex)
    n = composite.dims[position]
    if local.shape != (n, n):
        raise DimensionError(f"local matrix shape {local.shape} does not match factor dim {n}")
    left = int(np.prod(composite.dims[:position], dtype=int))
    right = int(np.prod(composite.dims[position + 1:], dtype=int))
    mat = local
    if left > 1:
        mat = sp.kron(sp.identity(left, format="csr"), mat, format="csr")
    if right > 1:
        mat = sp.kron(mat, sp.identity(right, format="csr"), format="csr")
    return Operator(composite, mat, hermitian=hermitian)


def annihilation_op(space, composite, position):
    composite.check_position(position, space)
    return tensor_embed(local_annihilation(space.dim), composite, position)


def creation_op(space, composite, position):
    return annihilation_op(space, composite, position).dag()


def diagonal_op(space, composite, position, f):
    """Embed ``sum_n f(n) |n><n|`` on the given factor.

    ``f`` is either a callable on Fock numbers or a sequence of length
    ``space.dim``.
    """
    composite.check_position(position, space)
    if callable(f):
        values = np.array([f(n) for n in range(space.dim)], dtype=float)
    else:
        values = np.asarray(f, dtype=float)
        if values.shape != (space.dim,):
            raise DimensionError(f"expected {space.dim} diagonal values, got shape {values.shape}")
    return tensor_embed(sp.diags(values, format="csr"), composite, position, hermitian=True)


def number_op(space, composite, position):
    return diagonal_op(space, composite, position, lambda n: n)


def dense_kron_embed(local, dims, position):
    """Dense reference construction of :func:`tensor_embed` (used by tests)."""
    mats = [np.eye(n) for n in dims]
    mats[position] = np.asarray(local)
    return reduce(np.kron, mats)
