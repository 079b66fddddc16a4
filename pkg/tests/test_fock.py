import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from qfridge.errors import DimensionError
from qfridge.fock import (
    CompositeSpace,
    ModeSpace,
    Operator,
    annihilation_op,
    creation_op,
    dense_kron_embed,
    diagonal_op,
    identity,
    local_annihilation,
    number_op,
    tensor_embed,
)

from conftest import mask_top

dims_strategy = st.lists(st.integers(2, 4), min_size=1, max_size=3)


def test_ladder_elements_n3():
    a = local_annihilation(3).toarray()
    expected = np.zeros((3, 3))
    expected[0, 1] = 1.0
    expected[1, 2] = np.sqrt(2.0)
    np.testing.assert_array_equal(a, expected)


def test_annihilation_kills_vacuum():
    cs = CompositeSpace.from_dims("cr", (3, 4))
    a = annihilation_op(cs.factors[0], cs, 0)
    vac = np.zeros(cs.dim)
    vac[0] = 1.0
    assert np.all(a.matrix @ vac == 0)


def test_number_operator_diagonal():
    cs = CompositeSpace.from_dims(["c"], [5])
    a = annihilation_op(cs.factors[0], cs, 0)
    n = (a.dag() @ a).toarray()
    # sqrt(k)^2 is k up to one ulp
    np.testing.assert_allclose(n, np.diag(np.arange(5.0)), rtol=0, atol=1e-14)


def test_basis_index_row_major():
    cs = CompositeSpace.from_dims("crh", (3, 4, 5))
    assert cs.index(2, 1, 3) == 2 * 20 + 1 * 5 + 3
    assert cs.dim == 60
    np.testing.assert_array_equal(cs.basis_labels()[cs.index(1, 2, 4)], [1, 2, 4])


def test_diagonal_op_examples():
    cs = CompositeSpace.from_dims("crh", (2, 3, 2))
    one = diagonal_op(cs.factors[1], cs, 1, lambda n: 1.0)
    np.testing.assert_array_equal(one.toarray(), identity(cs).toarray())
    a = annihilation_op(cs.factors[1], cs, 1)
    np.testing.assert_allclose(number_op(cs.factors[1], cs, 1).toarray(), (a.dag() @ a).toarray(), atol=1e-14)
    single = CompositeSpace.from_dims(["q"], [2])
    parity = diagonal_op(single.factors[0], single, 0, lambda n: (-1) ** n)
    np.testing.assert_array_equal(parity.toarray(), np.diag([1.0, -1.0]))
    assert parity.hermitian


def test_embed_identity_and_total_dim():
    cs = CompositeSpace.from_dims("crh", (2, 3, 4))
    e = tensor_embed(np.eye(3), cs, 1)
    assert e.matrix.shape == (24, 24)
    np.testing.assert_array_equal(e.toarray(), np.eye(24))


@given(dims_strategy, st.data())
def test_sparse_embedding_matches_dense_oracle(dims, data):
    cs = CompositeSpace.from_dims([f"m{k}" for k in range(len(dims))], dims)
    pos = data.draw(st.integers(0, len(dims) - 1))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    n = dims[pos]
    local = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    sparse = tensor_embed(local, cs, pos).toarray()
    np.testing.assert_allclose(sparse, dense_kron_embed(local, dims, pos), rtol=0, atol=1e-14)


@given(dims_strategy, st.data())
def test_distinct_positions_commute_exactly(dims, data):
    if len(dims) < 2:
        dims = dims + [3]
    cs = CompositeSpace.from_dims([f"m{k}" for k in range(len(dims))], dims)
    i, j = data.draw(st.lists(st.integers(0, len(dims) - 1), min_size=2, max_size=2, unique=True))
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    A = tensor_embed(rng.normal(size=(dims[i], dims[i])), cs, i)
    B = tensor_embed(rng.normal(size=(dims[j], dims[j])), cs, j)
    assert A.commutator(B).matrix.nnz == 0


@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_kron_factorization(n1, n2, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n1, n1))
    B = rng.normal(size=(n2, n2))
    cs = CompositeSpace.from_dims("ab", (n1, n2))
    prod = (tensor_embed(A, cs, 0) @ tensor_embed(B, cs, 1)).toarray()
    np.testing.assert_allclose(prod, np.kron(A, B), atol=1e-14)


@given(dims_strategy, st.data())
def test_number_ladder_commutator_masked(dims, data):
    cs = CompositeSpace.from_dims([f"m{k}" for k in range(len(dims))], dims)
    pos = data.draw(st.integers(0, len(dims) - 1))
    a = annihilation_op(cs.factors[pos], cs, pos)
    n = number_op(cs.factors[pos], cs, pos)
    comm = n.commutator(a).toarray() + a.toarray()
    np.testing.assert_allclose(mask_top(comm, dims), 0, atol=1e-14)


def test_canonical_commutator_truncation_contract():
    cs = CompositeSpace.from_dims(["c"], [6])
    a = annihilation_op(cs.factors[0], cs, 0)
    comm = a.commutator(creation_op(cs.factors[0], cs, 0)).toarray()
    expected = np.eye(6)
    expected[-1, -1] = -5.0  # [a, a^dag] = 1 - N |N-1><N-1|
    np.testing.assert_allclose(comm, expected, atol=1e-14)


def test_dim_must_be_at_least_two():
    with pytest.raises(DimensionError):
        ModeSpace("c", 1)


def test_position_and_dimension_checks():
    cs = CompositeSpace.from_dims("cr", (3, 4))
    with pytest.raises(DimensionError):
        annihilation_op(ModeSpace("c", 3), cs, 2)
    with pytest.raises(DimensionError):
        annihilation_op(ModeSpace("c", 5), cs, 0)
    with pytest.raises(DimensionError):
        tensor_embed(np.eye(3), cs, 1)


def test_hermitian_flag_is_verified():
    cs = CompositeSpace.from_dims(["c"], [3])
    a = annihilation_op(cs.factors[0], cs, 0)
    with pytest.raises(ValueError):
        Operator(cs, a.matrix, hermitian=True)
    assert (a + a.dag()).is_hermitian()


def test_tiny_entries_dropped():
    cs = CompositeSpace.from_dims(["c"], [2])
    op = Operator(cs, sp.csr_matrix(np.array([[1.0, 1e-16], [0.0, 2.0]])))
    assert op.matrix.nnz == 2


def test_operators_on_different_spaces_do_not_mix():
    a = identity(CompositeSpace.from_dims(["c"], [2]))
    b = identity(CompositeSpace.from_dims(["c"], [3]))
    with pytest.raises(DimensionError):
        a + b
