import numpy as np
import pytest

from telegate.codes import (
    CARDINAL_ANGLES,
    apply_single_photon_loss,
    binomial_code,
    cardinal_state,
    decode_transfer_pairs,
    decode_unitary,
    encode_transfer_pairs,
    encode_unitary,
    fock_code,
    get_code,
    knill_laflamme_moments,
    logical_state,
)
from telegate.errors import InvalidDimensionError, ZeroStateError


def test_binomial_codewords():
    c0, c1 = binomial_code().codewords(6)
    assert c0[2] == pytest.approx(1.0)
    assert c1[0] == pytest.approx(1 / np.sqrt(2))
    assert c1[4] == pytest.approx(1 / np.sqrt(2))
    assert np.vdot(c0, c1) == pytest.approx(0.0)


def test_fock_codewords():
    c0, c1 = fock_code().codewords(3)
    assert c0[0] == 1.0 and c1[1] == 1.0


def test_min_dim_enforced():
    with pytest.raises(InvalidDimensionError):
        binomial_code().codewords(4)


def test_logical_operators_algebra():
    for code, dim in ((binomial_code(), 6), (fock_code(), 3)):
        z = code.logical_z(dim)
        x = code.logical_x(dim)
        p = code.projector(dim)
        assert np.allclose(z @ z, p, atol=1e-12)
        assert np.allclose(x @ x, p, atol=1e-12)
        assert np.allclose(z @ x + x @ z, np.zeros_like(p), atol=1e-12)
        u = code.logical_x_unitary(dim)
        assert np.allclose(u @ u.conj().T, np.eye(dim), atol=1e-12)


def test_single_photon_loss_maps_alpha_beta_to_errorwords():
    # loss preserves the logical amplitudes into the error words to 1e-12
    code = binomial_code()
    dim = 6
    rng = np.random.default_rng(0)
    for _ in range(5):
        theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        alpha = np.cos(theta / 2)
        beta = np.exp(1j * phi) * np.sin(theta / 2)
        psi = logical_state(code, theta, phi, dim)
        lost, parity, amp = apply_single_photon_loss(code, psi)
        e0, e1 = code.errorwords(dim)
        expect = alpha * e0 + beta * e1
        phase = np.vdot(expect, lost)
        phase /= abs(phase)
        assert np.allclose(lost, phase * expect, atol=1e-12)
        assert parity == pytest.approx(-1.0)  # codespace has even parity


def test_loss_on_vacuum_only_state_rejected():
    with pytest.raises(ZeroStateError):
        apply_single_photon_loss(fock_code(), np.array([1.0, 0.0]))


def test_knill_laflamme_moments():
    m01, m00, m11 = knill_laflamme_moments(binomial_code())
    assert abs(m01) < 1e-12
    assert m00.real == pytest.approx(2.0, abs=1e-12)
    assert m11.real == pytest.approx(2.0, abs=1e-12)


def test_encode_unitary_properties():
    for code, dim in ((binomial_code(), 6), (fock_code(), 3)):
        u = encode_unitary(code, dim)
        assert np.allclose(u @ u.conj().T, np.eye(2 * dim), atol=1e-12)
        assert np.allclose(
            decode_unitary(code, dim) @ u, np.eye(2 * dim), atol=1e-12
        )
        for psi, phi in encode_transfer_pairs(code, dim):
            assert np.allclose(u @ psi, phi, atol=1e-12)


def test_decode_pairs_are_reversed():
    pairs = encode_transfer_pairs(fock_code(), 3)
    rev = decode_transfer_pairs(fock_code(), 3)
    for (s, t), (t2, s2) in zip(pairs, rev):
        assert np.allclose(s, s2) and np.allclose(t, t2)


def test_cardinal_states():
    code = binomial_code()
    z = code.logical_z(6)
    x = code.logical_x(6)
    for label, op, sign in (("+Z", z, 1), ("-Z", z, -1), ("+X", x, 1), ("-X", x, -1)):
        v = cardinal_state(code, label, 6)
        assert (v.conj() @ op @ v).real == pytest.approx(sign, abs=1e-12)
    assert set(CARDINAL_ANGLES) == {"+Z", "-Z", "+X", "-X", "+Y", "-Y"}


def test_get_code():
    assert get_code("binomial").name == "binomial"
    with pytest.raises(ValueError):
        get_code("gkp")
