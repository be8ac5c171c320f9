import numpy as np
import pytest

from telegate.errors import AdiabaticityError, StepSizeError
from telegate.evolve import (
    NS,
    PiecewiseDrive,
    RipConfig,
    apply_unitary,
    calibrate_rip_amplitude,
    default_chi_map,
    propagate_lindblad,
    propagate_unitary,
    qubit_phase_unitary,
    reference_phase_op,
    refocused_rip_gate,
    rip_effective_phases,
    rip_envelope,
    step_propagator,
)
from telegate.fock import HilbertSpaceLayout, QuantumState, basis_vector, product_state
from telegate.hamiltonians import TWO_PI, paper_defaults

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)


def test_step_propagator_matches_expm():
    from scipy.linalg import expm

    rng = np.random.default_rng(0)
    h = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = h + h.conj().T
    assert np.allclose(step_propagator(h, 0.37), expm(-1j * h * 0.37), atol=1e-10)


def test_propagate_unitary_rabi():
    # H = (Omega/2) sigma_x gives P_e = sin^2(Omega t / 2)
    omega = TWO_PI * 1.0
    h = 0.5 * omega * _SX
    layout = HilbertSpaceLayout((("q", 2),))
    st = QuantumState.pure(layout, basis_vector(2, 0))
    out = propagate_unitary(h, st, 0.25)  # quarter period
    pe = abs(out.data[1]) ** 2
    assert pe == pytest.approx(np.sin(omega * 0.25 / 2) ** 2, abs=1e-10)


def test_propagate_unitary_time_dependent():
    # callable H with constant value equals the static propagator
    h = 0.3 * _SZ + 0.7 * _SX
    layout = HilbertSpaceLayout((("q", 2),))
    st = QuantumState.pure(layout, np.array([1.0, 1.0]) / np.sqrt(2))
    a = propagate_unitary(h, st, 1.0)
    b = propagate_unitary(lambda t: h, st, 1.0, dt=0.01)
    assert np.allclose(a.data, b.data, atol=1e-10)


def test_lindblad_t1_decay():
    layout = HilbertSpaceLayout((("q", 2),))
    st = QuantumState.pure(layout, basis_vector(2, 1))
    t1 = 50.0
    a = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    out = propagate_lindblad(np.zeros((2, 2)), [(a, 1.0 / t1)], st, 10.0, dt=0.01)
    pe = out.data[1, 1].real
    assert pe == pytest.approx(np.exp(-10.0 / t1), abs=1e-6)


def test_lindblad_dephasing_rate():
    # sqrt(2) n at rate gamma decays <0|rho|1> as exp(-gamma t)
    layout = HilbertSpaceLayout((("q", 2),))
    st = QuantumState.pure(layout, np.array([1.0, 1.0]) / np.sqrt(2))
    gamma = 0.05
    c = np.sqrt(2.0) * np.diag([0.0, 1.0]).astype(complex)
    out = propagate_lindblad(np.zeros((2, 2)), [(c, gamma)], st, 8.0, dt=0.01)
    coh = abs(out.data[0, 1])
    assert coh == pytest.approx(0.5 * np.exp(-gamma * 8.0), abs=1e-6)


def test_lindblad_step_guard():
    layout = HilbertSpaceLayout((("q", 2),))
    st = QuantumState.pure(layout, basis_vector(2, 0))
    with pytest.raises(StepSizeError):
        propagate_lindblad(1e4 * _SZ, [], st, 1.0, dt=0.01)


def test_piecewise_drive_duration():
    d = PiecewiseDrive(sample_period=4.0, samples=np.zeros(250), target="q")
    assert d.duration == pytest.approx(1.0)


def test_rip_envelope_shape():
    cfg = RipConfig(amplitude=2.0)
    t = np.array([0.0, cfg.pulse_length / 2, cfg.pulse_length])
    env = rip_envelope(cfg, t)
    # cos(pi cos(...)) + 1 vanishes at the edges, peaks at 2A mid-pulse
    assert env[0] == pytest.approx(0.0, abs=1e-12)
    assert env[2] == pytest.approx(0.0, abs=1e-12)
    assert env[1] == pytest.approx(4.0)


def test_rip_phases_scale_quadratically():
    chi_map = default_chi_map(paper_defaults())
    p1 = rip_effective_phases(RipConfig(amplitude=50.0), chi_map)
    p2 = rip_effective_phases(RipConfig(amplitude=100.0), chi_map)
    assert p2["ent"] == pytest.approx(4.0 * p1["ent"], rel=1e-9)


def test_rip_adiabaticity_guard():
    chi_map = {"gg": 0.0, "ge": -20.0, "eg": 1.0, "ee": 1.0}
    with pytest.raises(AdiabaticityError):
        rip_effective_phases(RipConfig(detuning=20.0), chi_map)


def test_calibrate_rip_amplitude_hits_target():
    chi_map = default_chi_map(paper_defaults())
    cfg = calibrate_rip_amplitude(RipConfig(), chi_map, target=np.pi)
    ent = rip_effective_phases(cfg, chi_map, n_pulses=2)["ent"]
    assert abs(ent) == pytest.approx(np.pi, abs=1e-8)


def test_qubit_phase_unitary_diagonal():
    layout = HilbertSpaceLayout((("q1", 2), ("q2", 2)))
    phases = {"gg": 0.1, "ge": 0.2, "eg": 0.3, "ee": 0.4}
    u = qubit_phase_unitary(phases, layout)
    assert np.allclose(
        np.diag(u), np.exp(-1j * np.array([0.1, 0.2, 0.3, 0.4]))
    )


def test_refocused_rip_frame_shifts():
    system = paper_defaults()
    layout = HilbertSpaceLayout((("c1", 3), ("q1", 2), ("c2", 3), ("q2", 2)))
    st = product_state(layout, {})
    cfg = RipConfig(amplitude=100.0)
    _, shifts = refocused_rip_gate(cfg, system, st)
    t_half = 0.5 * cfg.total_duration * NS
    assert shifts["c1"] == pytest.approx(TWO_PI * 0.573 * t_half)
    assert shifts["c2"] == pytest.approx(TWO_PI * 0.843 * t_half)


def test_reference_phase_op():
    layout = HilbertSpaceLayout((("c", 4),))
    op = reference_phase_op(0.5, "c", layout).matrix
    assert np.allclose(np.diag(op), np.exp(-1j * 0.5 * np.arange(4)))


def test_apply_unitary_density():
    u = _SX
    rho = np.diag([1.0, 0.0]).astype(complex)
    assert np.allclose(apply_unitary(u, rho), np.diag([0.0, 1.0]))
