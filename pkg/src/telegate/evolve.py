"""Time evolution: unitary and Lindblad propagation, the refocused RIP
entangling gate, and reference-frame phase operators.

Hamiltonians are in rad/us, times in us, drive samples in rad/us.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .errors import AdiabaticityError, LayoutError, StepSizeError
from .fock import HilbertSpaceLayout, Operator, QuantumState, embed, embed_many
from .hamiltonians import TWO_PI, dispersive, CouplingParams

NS = 1e-3  # ns in us


@dataclass(frozen=True)
class PiecewiseDrive:
    """Sampled complex drive envelope for one mode."""

    sample_period: float  # ns
    samples: np.ndarray  # complex, rad/us
    target: str

    def __post_init__(self):
        if self.sample_period <= 0:
            raise ValueError("sample_period must be positive")
        object.__setattr__(
            self, "samples", np.asarray(self.samples, dtype=complex)
        )

    @property
    def duration(self):
        """Total length in us."""
        return len(self.samples) * self.sample_period * NS


@dataclass(frozen=True)
class RipConfig:
    """Off-resonant bus drive for the resonator-induced phase gate."""

    detuning: float = 20.0  # MHz below/above bus resonance
    pulse_length: float = 300.0  # ns
    amplitude: float = 10.0  # 2*pi*MHz (rad/us)
    kappa: float = 1.0 / 230.0  # bus linewidth, 1/us
    echo_gap: float = 72.0  # ns between the two pulses for the echo pi

    def __post_init__(self):
        if self.detuning <= 0:
            raise ValueError("detuning must be positive")
        if self.pulse_length <= 0:
            raise ValueError("pulse_length must be positive")

    @property
    def total_duration(self):
        """Refocused sequence length in ns (two pulses plus the echo)."""
        return 2 * self.pulse_length + self.echo_gap


def _as_matrix(h):
    return h.matrix if isinstance(h, Operator) else np.asarray(h, dtype=complex)


def _check_hermitian(m, tol=1e-9):
    if np.max(np.abs(m - m.conj().T)) > tol * max(1.0, np.max(np.abs(m))):
        raise ValueError("Hamiltonian is not Hermitian")


def step_propagator(h, dt):
    """exp(-i H dt) through the eigendecomposition of Hermitian H."""
    m = _as_matrix(h)
    if np.count_nonzero(m - np.diag(np.diagonal(m))) == 0:
        return np.diag(np.exp(-1j * np.diagonal(m).real * dt))
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * w * dt)) @ v.conj().T


def propagate_unitary(h, state, duration, dt=None):
    """Evolve a pure state or density operator under H for `duration` us.

    ``h`` is an Operator/matrix (time-independent) or a callable t -> matrix
    sampled every ``dt``; the propagator is the time-ordered product of
    per-step exponentials.
    """
    if callable(h):
        if dt is None:
            raise ValueError("dt required for time-dependent Hamiltonians")
        nsteps = max(1, int(round(duration / dt)))
        u = np.eye(_as_matrix(h(0.0)).shape[0], dtype=complex)
        for i in range(nsteps):
            hm = _as_matrix(h((i + 0.5) * dt))
            _check_hermitian(hm)
            u = step_propagator(hm, duration / nsteps) @ u
    else:
        hm = _as_matrix(h)
        _check_hermitian(hm)
        u = step_propagator(hm, duration)
    return apply_unitary(u, state)


def apply_unitary(u, state):
    if isinstance(state, QuantumState):
        if state.kind == "pure":
            return QuantumState.pure(state.layout, u @ state.data, normalize=True)
        return QuantumState.mixed(state.layout, u @ state.data @ u.conj().T)
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return u @ state
    return u @ state @ u.conj().T


def _lindblad_rhs(hm, rho, jumps, h_diag=None):
    if h_diag is not None:
        drho = -1j * (h_diag[:, None] * rho - rho * h_diag[None, :])
    else:
        drho = -1j * (hm @ rho - rho @ hm)
    for rate, c, cd, cdc in jumps:
        drho += rate * (c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc))
    return drho


def propagate_lindblad(h, collapse, state, duration, dt=1e-3):
    """Fixed-step RK4 integration of the Lindblad master equation.

    ``collapse`` is a list of (Operator-or-matrix, rate 1/us).  The step
    guard dt * max|H| < 0.1 rejects under-resolved Hamiltonians.
    """
    hm = _as_matrix(h)
    _check_hermitian(hm)
    hmax = np.max(np.abs(hm))
    if dt * hmax >= 0.1:
        raise StepSizeError(
            f"dt*max|H| = {dt * hmax:.3f} >= 0.1; reduce dt below "
            f"{0.1 / max(hmax, 1e-30):.2e} us"
        )
    if isinstance(state, QuantumState):
        layout = state.layout
        rho = state.density_matrix()
        wrap = True
    else:
        rho = np.array(state, dtype=complex)
        wrap = False
    diag = None
    if np.count_nonzero(hm - np.diag(np.diagonal(hm))) == 0:
        diag = np.diagonal(hm).real
    jumps = []
    for c, rate in collapse:
        cm = _as_matrix(c)
        cd = cm.conj().T
        jumps.append((rate, cm, cd, cd @ cm))
    nsteps = max(1, int(np.ceil(duration / dt)))
    h_step = duration / nsteps
    for _ in range(nsteps):
        k1 = _lindblad_rhs(hm, rho, jumps, diag)
        k2 = _lindblad_rhs(hm, rho + 0.5 * h_step * k1, jumps, diag)
        k3 = _lindblad_rhs(hm, rho + 0.5 * h_step * k2, jumps, diag)
        k4 = _lindblad_rhs(hm, rho + h_step * k3, jumps, diag)
        rho = rho + (h_step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = 0.5 * (rho + rho.conj().T)
    if wrap:
        return QuantumState.mixed(layout, rho)
    return rho


def rip_envelope(config, t):
    """Drive envelope eps(t) = A [cos(pi cos(pi t/T)) + 1], t in ns."""
    t = np.asarray(t, dtype=float)
    big = config.pulse_length
    if np.any(t < -1e-9) or np.any(t > big + 1e-9):
        raise ValueError("t outside [0, T]")
    return config.amplitude * (np.cos(np.pi * np.cos(np.pi * t / big)) + 1.0)


def rip_effective_phases(config, chi_map, n_time=2001, n_pulses=1):
    """Integrated transmon-state-dependent phases of the driven bus.

    ``chi_map`` maps joint transmon states {"gg","ge","eg","ee"} to total
    dispersive shifts in MHz.  Returns a dict of phases (rad) with the
    entangling combination under key "ent".

    The entangling phase uses the alternating four-term combination
    phi_ee - phi_eg - phi_ge + phi_gg.  (The source derivation prints the
    last term with a minus sign; both agree whenever chi_gg = 0.)
    """
    t = np.linspace(0.0, config.pulse_length, n_time)  # ns
    eps = rip_envelope(config, t)  # rad/us
    phases = {}
    for key in ("gg", "ge", "eg", "ee"):
        chi = chi_map[key]  # MHz
        delta_ang = TWO_PI * (config.detuning + chi)  # rad/us
        if abs(delta_ang) <= config.kappa:
            raise AdiabaticityError(
                f"drive resonant with bus for state {key!r}: "
                f"|Delta| = {abs(delta_ang):.3g} <= kappa = {config.kappa:.3g}"
            )
        xi = -1j * eps / (2.0 * (1j * delta_ang + config.kappa / 2.0))
        delta_ij = TWO_PI * chi * np.abs(xi) ** 2  # rad/us
        phases[key] = float(np.trapezoid(delta_ij, t) * NS) * n_pulses
    phases["ent"] = (
        phases["ee"] - phases["eg"] - phases["ge"] + phases["gg"]
    )
    return phases


def calibrate_rip_amplitude(config, chi_map, target=np.pi, n_pulses=2):
    """Amplitude giving an entangling phase of magnitude ``target`` over
    the sequence; the achievable sign is detected automatically."""

    def ent(a):
        cfg = RipConfig(
            detuning=config.detuning,
            pulse_length=config.pulse_length,
            amplitude=a,
            kappa=config.kappa,
            echo_gap=config.echo_gap,
        )
        return rip_effective_phases(cfg, chi_map, n_pulses=n_pulses)["ent"]

    sign = 1.0 if ent(1.0) >= 0 else -1.0

    def f(a):
        return sign * ent(a) - abs(target)

    hi = 1.0
    while f(hi) < 0 and hi < 1e5:
        hi *= 2.0
    a = brentq(f, 1e-6, hi, xtol=1e-10)
    return RipConfig(
        detuning=config.detuning,
        pulse_length=config.pulse_length,
        amplitude=a,
        kappa=config.kappa,
        echo_gap=config.echo_gap,
    )


def default_chi_map(system_params):
    """Total bus dispersive shift per joint transmon state, in MHz."""
    x1 = system_params.bus_comm1.chi
    x2 = system_params.bus_comm2.chi
    return {"gg": 0.0, "ge": x2, "eg": x1, "ee": x1 + x2}


def qubit_phase_unitary(phases, layout):
    """diag phase on the joint (q1, q2) manifold, identity elsewhere."""
    diag = {
        "gg": (0, 0), "ge": (0, 1), "eg": (1, 0), "ee": (1, 1),
    }
    p1 = np.zeros((2, 2), dtype=complex)
    # build as sum over projectors to stay layout-agnostic
    total = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
    for key, (i, j) in diag.items():
        pi = np.zeros((2, 2), dtype=complex)
        pj = np.zeros((2, 2), dtype=complex)
        pi[i, i] = 1.0
        pj[j, j] = 1.0
        proj = embed_many({"q1": pi, "q2": pj}, layout).matrix
        total += np.exp(-1j * phases[key]) * proj
    return total


def _sigma_x():
    return np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def dispersive_frame_hamiltonian(system_params, layout):
    """Data-cavity / communication-qubit dispersive terms present while the
    RIP sequence runs (bus adiabatically eliminated)."""
    h = None
    for i in (1, 2):
        c, q = f"c{i}", f"q{i}"
        if c in layout.labels and q in layout.labels:
            term = dispersive(system_params.module(i).data_comm, c, q, layout)
            h = term if h is None else h + term
    if (
        "c1" in layout.labels
        and "c2" in layout.labels
        and abs(system_params.chi_c1c2) > 0
    ):
        term = dispersive(
            CouplingParams(chi=system_params.chi_c1c2), "c1", "c2", layout
        )
        h = term if h is None else h + term
    if h is None:
        n = layout.total_dim
        h = Operator(layout, np.zeros((n, n), dtype=complex))
    return h


def refocused_rip_gate(config, system_params, state, chi_map=None):
    """RIP(T) . pi-on-both . RIP(T) as effective phase unitaries, plus the
    dispersive data-cavity evolution over the full sequence.

    Returns (state, frame_shifts) where frame_shifts maps cavity labels to
    the deterministic reference-frame angle chi * T_total/2 (rad).
    """
    layout = state.layout if isinstance(state, QuantumState) else None
    if layout is None:
        raise LayoutError("refocused_rip_gate needs a QuantumState")
    if chi_map is None:
        chi_map = default_chi_map(system_params)
    phases = rip_effective_phases(config, chi_map)
    u_rip = qubit_phase_unitary(phases, layout)
    u_pi = embed_many({"q1": _sigma_x(), "q2": _sigma_x()}, layout).matrix
    h_disp = dispersive_frame_hamiltonian(system_params, layout)
    t_half = 0.5 * config.total_duration * NS  # us
    u_half = step_propagator(h_disp, t_half)
    u = u_rip @ u_half @ u_pi @ u_half @ u_rip
    out = apply_unitary(u, state)
    shifts = {}
    for i in (1, 2):
        c = f"c{i}"
        if c in layout.labels:
            chi = system_params.module(i).data_comm.chi  # MHz
            shifts[c] = TWO_PI * chi * t_half
    return out, shifts


def reference_phase_op(theta, mode, layout):
    """exp(-i theta n_mode), embedded in the layout."""
    d = layout.dim(mode)
    phase = np.diag(np.exp(-1j * theta * np.arange(d))).astype(complex)
    return embed(Operator(HilbertSpaceLayout(((mode, d),)), phase), layout, mode)
