import numpy as np
import pytest

from telegate.errors import InvalidDimensionError, LayoutError, TruncationRiskError
from telegate.fock import (
    HilbertSpaceLayout,
    QuantumState,
    annihilation,
    basis_vector,
    creation,
    displacement,
    embed,
    embed_many,
    identity,
    number,
    parity,
    partial_trace,
    product_state,
)


def test_annihilation_matrix_elements():
    a = annihilation(5).matrix
    for n in range(1, 5):
        assert a[n - 1, n] == pytest.approx(np.sqrt(n))
    assert np.count_nonzero(a) == 4


def test_creation_is_adjoint():
    assert np.allclose(creation(6).matrix, annihilation(6).matrix.conj().T)


def test_commutator_truncation():
    a = annihilation(8).matrix
    comm = a @ a.conj().T - a.conj().T @ a
    # canonical except at the truncation corner
    expect = np.eye(8)
    expect[-1, -1] = -(8 - 1)
    assert np.allclose(comm, expect)


def test_number_and_parity():
    n = number(6).matrix
    assert np.allclose(n, np.diag(np.arange(6)))
    p = parity(6).matrix
    assert np.allclose(p, np.diag([1, -1, 1, -1, 1, -1]))


def test_displacement_unitary_and_coherent_mean():
    d = displacement(0.7 + 0.2j, 30).matrix
    assert np.allclose(d @ d.conj().T, np.eye(30), atol=1e-10)
    vac = basis_vector(30, 0)
    psi = d @ vac
    nbar = psi.conj() @ number(30).matrix @ psi
    assert nbar.real == pytest.approx(abs(0.7 + 0.2j) ** 2, abs=1e-8)


def test_displacement_truncation_guard():
    with pytest.raises(TruncationRiskError) as e:
        displacement(3.0, 10)
    assert e.value.recommended_dim > 10


def test_layout_kron_order():
    layout = HilbertSpaceLayout((("a", 2), ("b", 3)))
    # first listed mode is the slowest index
    op = embed(number(3), layout, "b").matrix
    assert np.allclose(op, np.kron(np.eye(2), np.diag([0, 1, 2])))
    op = embed(number(2), layout, "a").matrix
    assert np.allclose(op, np.kron(np.diag([0, 1]), np.eye(3)))


def test_embed_many_matches_sequential():
    layout = HilbertSpaceLayout((("a", 3), ("b", 2), ("c", 4)))
    m1 = embed_many({"a": annihilation(3), "c": number(4)}, layout).matrix
    m2 = embed(annihilation(3), layout, "a").matrix @ embed(
        number(4), layout, "c"
    ).matrix
    assert np.allclose(m1, m2)


def test_embed_rejects_unknown_label():
    layout = HilbertSpaceLayout((("a", 2),))
    with pytest.raises(LayoutError):
        embed(number(3), layout, "b")


def test_invalid_dimension():
    with pytest.raises(InvalidDimensionError):
        annihilation(0)


def test_product_state_and_partial_trace_pure():
    layout = HilbertSpaceLayout((("a", 2), ("b", 3)))
    psi_a = np.array([1.0, 1.0]) / np.sqrt(2)
    psi_b = basis_vector(3, 1)
    st = product_state(layout, {"a": psi_a, "b": psi_b})
    red = partial_trace(st, ("a",))
    assert np.allclose(red.data, np.outer(psi_a, psi_a.conj()), atol=1e-12)


def test_partial_trace_entangled_is_mixed():
    layout = HilbertSpaceLayout((("a", 2), ("b", 2)))
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    st = QuantumState.pure(layout, bell)
    red = partial_trace(st, ("a",))
    assert np.allclose(red.data, np.eye(2) / 2, atol=1e-12)


def test_partial_trace_three_modes():
    layout = HilbertSpaceLayout((("a", 2), ("b", 3), ("c", 2)))
    rng = np.random.default_rng(0)
    v = rng.normal(size=12) + 1j * rng.normal(size=12)
    st = QuantumState.pure(layout, v, normalize=True)
    # tracing in two steps equals tracing at once
    r1 = partial_trace(st, ("a", "c"))
    full = st.density_matrix().reshape(2, 3, 2, 2, 3, 2)
    expect = np.einsum("abcxbz->acxz", full).reshape(4, 4)
    assert np.allclose(r1.data, expect, atol=1e-12)


def test_mixed_state_trace_normalization():
    layout = HilbertSpaceLayout((("a", 3),))
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    st = QuantumState.mixed(layout, rho)
    assert st.density_matrix().trace() == pytest.approx(1.0)


def test_identity():
    assert np.allclose(identity(4).matrix, np.eye(4))
