import numpy as np
import pytest

from telegate.evolve import PiecewiseDrive
from telegate.grape import (
    PenaltyConfig,
    TransferSpec,
    gradient,
    lindblad_validate,
    load_pulses,
    objective_and_gradient,
    optimize,
    propagator,
    random_initial_pulses,
    save_pulses,
    transfer_fidelity,
)

_G = np.array([1.0, 0.0], dtype=complex)
_E = np.array([0.0, 1.0], dtype=complex)
_SM = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


def _random_problem(rng, dim=4, n_ctrl=2, n_pairs=3):
    h0 = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h0 = h0 + h0.conj().T
    ctrl = [
        rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        for _ in range(n_ctrl)
    ]
    pairs = []
    for _ in range(n_pairs):
        a = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        b = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        pairs.append((a, b))
    return h0, ctrl, pairs


def test_transfer_spec_normalizes():
    spec = TransferSpec(pairs=((2.0 * _G, 3.0 * _E),))
    psi, phi = spec.pairs[0]
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    assert np.linalg.norm(phi) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        TransferSpec(pairs=(), gauge="fixed")
    with pytest.raises(ValueError):
        TransferSpec(pairs=((_G, _E),), gauge="banana")


def test_propagator_free_evolution():
    z = np.zeros((1, 10), dtype=complex)
    h0 = np.diag([0.0, 1.0]).astype(complex)
    u = propagator(z, h0, [_SM], dt=0.1)
    assert np.allclose(u, np.diag([1.0, np.exp(-1j)]), atol=1e-12)


def test_perfect_transfer_fidelity_is_one():
    # resonant pi pulse: z real, 2*z*t = pi
    n = 50
    dt = 0.01
    amp = np.pi / (2 * n * dt)
    z = np.full((1, n), amp, dtype=complex)
    spec = TransferSpec(pairs=((_G, _E),), gauge="z_phase_free")
    f = transfer_fidelity(z, spec, np.zeros((2, 2)), [_SM], dt=dt)
    assert f == pytest.approx(1.0, abs=1e-10)


def test_gradient_matches_finite_differences():
    # acceptance: max relative deviation < 1e-5 on a random 3-pair problem
    rng = np.random.default_rng(3)
    h0, ctrl, pairs = _random_problem(rng)
    dt = 0.01
    pen = PenaltyConfig(
        amplitude_limit=0.2,
        amplitude_weight=0.7,
        derivative_weight=0.3,
        edge_weight=0.2,
    )
    for gauge in ("fixed", "z_phase_free"):
        spec = TransferSpec(pairs=tuple(pairs), gauge=gauge)
        z = 0.3 * (rng.normal(size=(2, 8)) + 1j * rng.normal(size=(2, 8)))
        _, grad = objective_and_gradient(z, dt, spec, h0, ctrl, pen)
        eps = 1e-7
        for j in range(2):
            for m in range(8):
                for comp, part in ((1.0, grad[j, m].real), (1j, grad[j, m].imag)):
                    zp = z.copy()
                    zm = z.copy()
                    zp[j, m] += eps * comp
                    zm[j, m] -= eps * comp
                    op, _ = objective_and_gradient(zp, dt, spec, h0, ctrl, pen)
                    om, _ = objective_and_gradient(zm, dt, spec, h0, ctrl, pen)
                    fd = (op - om) / (2 * eps)
                    assert abs(fd - part) / max(abs(fd), 1e-10) < 1e-5


def test_gradient_wrapper_uses_drive_period():
    rng = np.random.default_rng(1)
    h0, ctrl, pairs = _random_problem(rng, n_ctrl=1)
    spec = TransferSpec(pairs=tuple(pairs))
    drive = PiecewiseDrive(4.0, 0.1 * rng.normal(size=6), "drive0")
    g1 = gradient([drive], spec, h0, ctrl[:1])
    g2 = gradient(np.atleast_2d(drive.samples), spec, h0, ctrl[:1], dt=4.0e-3)
    assert np.allclose(g1, g2)


def test_optimize_x_gate():
    spec = TransferSpec(pairs=((_G, _E), (_E, _G)), gauge="z_phase_free")
    init = random_initial_pulses(1, 20, 2.0, 2 * np.pi * 5.0, np.random.default_rng(0))
    res = optimize(
        spec,
        np.zeros((2, 2)),
        [_SM],
        PenaltyConfig(derivative_weight=1e-6, edge_weight=1e-4),
        init,
        iterations=200,
    )
    assert res.fidelity > 0.999
    assert res.converged


def test_optimize_ascent_improves():
    spec = TransferSpec(pairs=((_G, _E),), gauge="z_phase_free")
    init = random_initial_pulses(1, 20, 2.0, 2 * np.pi * 2.0, np.random.default_rng(2))
    res = optimize(spec, np.zeros((2, 2)), [_SM], None, init,
                   iterations=50, method="ascent")
    assert res.trace[-1] > res.trace[0]


def test_penalties_reduce_objective():
    rng = np.random.default_rng(4)
    h0, ctrl, pairs = _random_problem(rng, n_ctrl=1)
    spec = TransferSpec(pairs=tuple(pairs))
    z = 0.5 * (rng.normal(size=(1, 8)) + 1j * rng.normal(size=(1, 8)))
    bare, _ = objective_and_gradient(z, 0.01, spec, h0, ctrl[:1], None)
    pen = PenaltyConfig(amplitude_limit=0.01, amplitude_weight=1.0)
    with_pen, _ = objective_and_gradient(z, 0.01, spec, h0, ctrl[:1], pen)
    assert with_pen < bare


def test_lindblad_validate_noiseless_matches_unitary():
    n = 50
    dt = 0.01
    amp = np.pi / (2 * n * dt)
    drive = PiecewiseDrive(dt * 1e3, np.full(n, amp, dtype=complex), "q")
    spec = TransferSpec(pairs=((_G, _E),), gauge="z_phase_free")
    infid = lindblad_validate([drive], spec, np.zeros((2, 2)), [_SM], [])
    assert infid == pytest.approx(0.0, abs=1e-8)


def test_lindblad_validate_decay_increases_infidelity():
    n = 50
    dt = 0.01
    amp = np.pi / (2 * n * dt)
    drive = PiecewiseDrive(dt * 1e3, np.full(n, amp, dtype=complex), "q")
    spec = TransferSpec(pairs=((_G, _E),), gauge="z_phase_free")
    infid = lindblad_validate(
        [drive], spec, np.zeros((2, 2)), [_SM], [(_SM, 1.0)]
    )
    assert 0.01 < infid < 1.0


def test_pulse_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    drives = random_initial_pulses(2, 30, 4.0, 1.0, rng)
    path = tmp_path / "pulses.csv"
    save_pulses(drives, path)
    loaded = load_pulses(path)
    assert len(loaded) == 2
    for a, b in zip(drives, loaded):
        assert b.sample_period == pytest.approx(a.sample_period)
        assert np.allclose(a.samples, b.samples, atol=1e-12)
