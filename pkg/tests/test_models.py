import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfridge import models
from qfridge.errors import DimensionError, ParameterError, ResonanceError
from qfridge.fock import CompositeSpace, annihilation_op, number_op

from conftest import mask_top

mpmath.mp.dps = 50


def laguerre_series(n, alpha, x):
    """Explicit series sum_k (-1)^k C(n+alpha, n-k) x^k / k! in extended precision."""
    x = mpmath.mpf(x)
    terms = [(-1) ** k * mpmath.binomial(n + alpha, n - k) * x**k / mpmath.factorial(k) for k in range(n + 1)]
    return mpmath.fsum(terms), mpmath.fsum(abs(t) for t in terms)


def energy_operator(H, energies):
    cs = H.space
    out = None
    for k, (m, e) in enumerate(zip(cs.factors, energies)):
        term = number_op(m, cs, k) * e
        out = term if out is None else out + term
    return out


# special functions -----------------------------------------------------------

def test_laguerre_examples():
    assert models.laguerre_gen(0, 1, 0.77) == 1.0
    assert models.laguerre_gen(1, 1, 0.36) == pytest.approx(1.64, rel=1e-15)
    ref, _ = laguerre_series(2, 1, 0.36)
    assert float(ref) == pytest.approx(1.9848, rel=1e-14)
    assert models.laguerre_gen(2, 1, 0.36) == pytest.approx(1.9848, rel=1e-14)


@given(st.integers(0, 30), st.integers(0, 2), st.floats(0.0, 4.0))
def test_laguerre_recurrence_matches_series(n, alpha, x):
    ref, scale = laguerre_series(n, alpha, x)
    got = models.laguerre_gen(n, alpha, x)
    # relative to the value, with a floor at the series' own cancellation scale
    tol = 1e-10 * max(abs(float(ref)), 1e-6 * float(scale))
    assert abs(got - float(ref)) <= tol


def test_laguerre_table_matches_scalar():
    table = models.laguerre_table(12, 1, 0.36)
    assert len(table) == 12
    for n, v in enumerate(table):
        assert v == pytest.approx(models.laguerre_gen(n, 1, 0.36), rel=1e-15)


def test_dressing_values():
    diag = models.dressing_diagonal(4, 0.3)
    assert diag[0] == pytest.approx(float(mpmath.exp(-0.18)), rel=1e-13)
    assert diag[0] == pytest.approx(0.835270, abs=5e-7)
    assert diag[1] == pytest.approx(float(mpmath.exp(-0.18) * (1 - mpmath.mpf("0.18"))), rel=1e-13)
    # the quoted six-digit value is truncated, not rounded
    assert diag[1] == pytest.approx(0.684921, abs=1e-6)
    np.testing.assert_array_equal(models.dressing_diagonal(6, 0.0), np.ones(6))


def test_dressing_operator_is_hermitian_diagonal():
    cs = CompositeSpace.from_dims("crh", (3, 4, 3))
    A = models.dressing_operator(cs.factors[1], cs, 1, 0.3)
    assert A.hermitian
    m = A.toarray()
    np.testing.assert_array_equal(m, np.diag(np.diag(m)))


# parameter validation --------------------------------------------------------

def test_generic_resonance_enforced():
    with pytest.raises(ResonanceError):
        models.GenericThreeBodyParams(E_c=1.0, E_r=5.0, E_h=4.5, g=0.01)
    p = models.GenericThreeBodyParams.resonant(1.0, 4.5, 0.01)
    assert p.E_r == 5.5


def test_generic_weak_coupling_warning():
    with pytest.warns(UserWarning):
        models.GenericThreeBodyParams.resonant(1.0, 4.5, 0.2)


def test_cavity_effective_coupling():
    p = models.CavityEffectiveParams(g_h=0.01, g_r=0.01, eta=0.041, Delta=-0.1, E_c=0.005, E_r=810000.005,
                                     E_h=810000.0)
    assert p.g == pytest.approx(4.1e-5, rel=1e-12)
    p3 = models.CavityEffectiveParams(0.01, 0.01, 0.041, -0.1, 0.005, 810000.005, 810000.0, n_atoms=3)
    assert p3.g == pytest.approx(3 * p.g, rel=1e-14)
    with pytest.raises(ParameterError):
        models.CavityEffectiveParams(0.01, 0.01, 0.041, 0.0, 1.0, 5.5, 4.5)
    with pytest.warns(UserWarning):
        models.CavityEffectiveParams(0.01, 0.01, 0.35, -0.1, 1.0, 5.5, 4.5)


def test_circuit_coupling_table_value():
    p = models.CircuitAbsorptionParams(0.3, 0.3, 0.3, 0.2, 1.0, 5.5, 4.5)
    assert p.g == pytest.approx(-0.0432, rel=1e-13)
    with pytest.raises(ParameterError):
        models.CircuitAbsorptionParams(0.0, 0.3, 0.3, 0.2, 1.0, 5.5, 4.5)
    with pytest.warns(UserWarning):
        models.CircuitAbsorptionParams(0.6, 0.3, 0.3, 0.2, 1.0, 5.5, 4.5)


def test_sideband_resonance_and_voltage():
    p = models.CircuitSidebandParams(0.3, 0.3, 0.2, 1.0, 5.5)
    assert p.drive == 4.5
    assert p.g == pytest.approx(0.036, rel=1e-14)
    v = models.voltage_for_resonance(5.5, 1.0)
    q = models.CircuitSidebandParams(0.3, 0.3, 0.2, 1.0, 5.5, voltage=v)
    assert q.drive == pytest.approx(4.5, rel=1e-12)
    with pytest.raises(ResonanceError):
        models.CircuitSidebandParams(0.3, 0.3, 0.2, 1.0, 5.5, drive=4.4)
    detuned = models.CircuitSidebandParams(0.3, 0.3, 0.2, 1.0, 5.5, drive=4.4, frame="lab")
    assert detuned.drive == 4.4


def test_voltage_for_resonance():
    v = models.voltage_for_resonance(5.5, 1.0)
    exact = 6.62607015e-34 * 4.5e9 / (2 * 1.602176634e-19)
    assert v == pytest.approx(exact, rel=1e-14)
    assert v == pytest.approx(9.30e-6, rel=1e-3)
    assert models.voltage_for_resonance(10.0, 1.0) == pytest.approx(2 * v, rel=1e-14)
    with pytest.raises(ParameterError):
        models.voltage_for_resonance(1.0, 1.0)
    assert models.drive_frequency(v) == pytest.approx(4.5, rel=1e-14)


def test_atom_sideband_relations():
    with pytest.raises(ResonanceError):
        models.AtomSidebandParams("red", 0.01, 0.04, 0.005, 100.0, 100.0)
    models.AtomSidebandParams("blue", 0.01, 0.04, 0.005, 100.0, 100.005)
    with pytest.raises(ParameterError):
        models.AtomSidebandParams("purple", 0.01, 0.04, 0.005, 100.0, 100.0)


# Hamiltonians -----------------------------------------------------------------

def test_generic_matrix_element():
    p = models.GenericThreeBodyParams.resonant(1.0, 4.5, 0.01)
    dims = (4, 3, 4)
    H = models.build_generic_three_body(p, dims)
    cs = H.space
    Hd = H.toarray()
    for l, m, n in [(0, 0, 0), (1, 1, 2), (2, 0, 1)]:
        bra = cs.index(l, m + 1, n)
        ket = cs.index(l + 1, m, n + 1)
        assert Hd[bra, ket] == pytest.approx(0.01 * math.sqrt((l + 1) * (m + 1) * (n + 1)), rel=1e-14)


def test_generic_g_zero_spectrum():
    p = models.GenericThreeBodyParams.resonant(1.0, 4.5, 0.0)
    H = models.build_generic_three_body(p, (3, 2, 3))
    labels = H.space.basis_labels()
    expected = labels @ np.array([1.0, 5.5, 4.5])
    np.testing.assert_allclose(np.diag(H.toarray()), expected, atol=1e-14)
    assert H.matrix.nnz == np.count_nonzero(expected)


def _resonant_builds():
    yield models.build_generic_three_body(models.GenericThreeBodyParams.resonant(1.0, 4.5, 0.01), (4, 3, 4)), \
        (1.0, 5.5, 4.5)
    p = models.CircuitAbsorptionParams(0.3, 0.3, 0.3, 0.2, 1.0, 5.5, 4.5)
    yield models.build_circuit_absorption(p, (4, 3, 4)).on, p.energies
    pa = models.AtomSidebandParams("red", 0.01, 0.04, 0.005, 100.0, 99.995)
    yield models.build_atom_sideband(pa, (4, 2, 4)), pa.energies
    pb = models.AtomSidebandParams("blue", 0.01, 0.04, 0.005, 100.0, 100.005)
    yield models.build_atom_sideband(pb, (4, 2, 4)), pb.energies


@pytest.mark.parametrize("H,energies", list(_resonant_builds()))
def test_on_interaction_conserves_energy(H, energies):
    assert H.is_hermitian()
    E = energy_operator(H, energies)
    V = H - E
    comm = V.commutator(E).toarray()
    scale = max(1.0, np.abs(V.toarray()).max() * max(energies))
    np.testing.assert_allclose(mask_top(comm, H.space.dims) / scale, 0, atol=1e-10)


def test_dressed_lowering_contract():
    cs = CompositeSpace.from_dims("crh", (5, 4, 5))
    for k, m in enumerate(cs.factors):
        L = models.dressed_lowering(m, cs, k, 0.3)
        En = number_op(m, cs, k) * 2.7
        comm = En.commutator(L).toarray() + 2.7 * L.toarray()
        np.testing.assert_allclose(mask_top(comm, cs.dims), 0, atol=1e-13)


def test_circuit_small_lambda_limit():
    lam = 1e-6
    p = models.CircuitAbsorptionParams(lam, lam, lam, 0.2, 1.0, 5.5, 4.5)
    hs = models.build_circuit_absorption(p, (4, 3, 4))
    bare = models.build_generic_three_body(models.GenericThreeBodyParams(1.0, 5.5, 4.5, p.g), (4, 3, 4))
    V = (hs.on - hs.free).toarray()
    Vb = (bare - models.free_hamiltonian(bare.space, (1.0, 5.5, 4.5))).toarray()
    mask = np.abs(Vb) > 0
    np.testing.assert_array_equal(np.abs(V) > 0, mask)
    np.testing.assert_allclose(V[mask], Vb[mask], rtol=1e-4)


def test_circuit_phase_switch():
    p = models.CircuitAbsorptionParams(0.3, 0.3, 0.3, 0.2, 1.0, 5.5, 4.5)
    hs = models.build_circuit_absorption(p, (3, 3, 3))
    np.testing.assert_array_equal(hs.at(0.0).toarray(), hs.free.toarray())
    np.testing.assert_allclose(hs.at(math.pi / 2).toarray(), hs.on.toarray(), atol=1e-15)
    assert hs.off_interaction.matrix.nnz == 0


def test_sideband_rotating_frame():
    p = models.CircuitSidebandParams(0.3, 0.3, 0.2, 1.0, 5.5)
    hs = models.build_circuit_sideband(p, (4, 4))
    cs = hs.on.space
    diag = np.diag(hs.on.toarray()).real
    # coefficient of n_r is E_r - drive = E_c
    assert diag[cs.index(0, 1)] - diag[cs.index(0, 0)] == pytest.approx(1.0, rel=1e-12)
    assert hs.on.is_hermitian() and hs.off.is_hermitian()


def test_sideband_small_lambda_is_beam_splitter():
    lam = 1e-7
    p = models.CircuitSidebandParams(lam, lam, 0.2, 1.0, 5.5)
    hs = models.build_circuit_sideband(p, (3, 3))
    cs = hs.on.space
    a_c = annihilation_op(cs.factors[0], cs, 0)
    a_r = annihilation_op(cs.factors[1], cs, 1)
    bs = (a_c.dag() @ a_r + a_r.dag() @ a_c).toarray() * p.g
    V = hs.on.toarray() - np.diag(np.diag(hs.on.toarray()))
    np.testing.assert_allclose(V, bs, atol=1e-12 * p.g, rtol=1e-6)


def test_off_bias_value():
    p = models.CircuitSidebandParams(0.3, 0.3, 0.2, 1.0, 5.5)
    diag = models.off_bias_diagonal(p, (4, 4))
    assert diag[0] == pytest.approx(0.2 * math.exp(-0.36), rel=1e-14)
    assert diag[0] / 0.2 == pytest.approx(0.6977, abs=5e-5)
    # L_1(x) = 1 - x on the (1, 0) entry
    assert diag[4] == pytest.approx(0.2 * math.exp(-0.36) * (1 - 0.36), rel=1e-13)


def test_lab_frame_generator_is_hermitian_at_any_time():
    p = models.CircuitSidebandParams(0.3, 0.3, 0.2, 1.0, 5.5)
    lab = models.build_circuit_sideband(p, (3, 3)).lab
    for t in (0.0, 0.1, 1.37):
        assert lab.at(t).is_hermitian()


def test_atom_red_element_and_carrier():
    pa = models.AtomSidebandParams("red", 0.01, 0.04, 0.005, 100.0, 99.995)
    H = models.build_atom_sideband(pa, (4, 4))
    cs = H.space
    Hd = H.toarray()
    for l, n in [(0, 0), (1, 2), (2, 1)]:
        assert Hd[cs.index(l, 1, n), cs.index(l + 1, 0, n + 1)] == pytest.approx(
            0.01 * 0.04 * math.sqrt((l + 1) * (n + 1)), rel=1e-14)
    pc = models.AtomSidebandParams("carrier", 0.01, 0.04, 0.005, 100.0, 100.0)
    Hc = models.build_atom_sideband(pc, (3, 2, 3))
    V = Hc - models.free_hamiltonian(Hc.space, pc.energies)
    n_c = number_op(Hc.space.factors[0], Hc.space, 0)
    assert V.commutator(n_c).matrix.nnz == 0
    with pytest.raises(DimensionError):
        models.build_atom_sideband(pa, (4, 3, 4))


def test_every_builder_returns_hermitian():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        builds = [
            models.build_generic_three_body(models.GenericThreeBodyParams.resonant(1.0, 4.5, 0.3), (3, 3, 3)),
            models.build_cavity_effective(
                models.CavityEffectiveParams(0.01, 0.01, 0.041, -0.1, 1.0, 5.5, 4.5), (3, 3, 3)),
            models.build_circuit_absorption(
                models.CircuitAbsorptionParams(0.3, 0.3, 0.3, 0.2, 1.0, 5.5, 4.5), (3, 3, 3)).operator,
        ]
    for H in builds:
        assert H.is_hermitian(tol=1e-12)
