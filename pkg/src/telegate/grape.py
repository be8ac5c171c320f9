"""Gradient-ascent pulse engineering for the local cavity-transmon
operations: encode/decode, logical gates, and the local CNOTs.

A problem is a drift Hamiltonian H0 (rad/us), a list of control operators
A_j (each drive sample z contributes z A^dag + z* A to H), and a set of
state-transfer pairs.  The transfer fidelity is

    F = (1/K^2) |sum_k <phi_k| U |psi_k>|^2

with U the product of per-sample step propagators.  Gradients are exact:
each step's derivative goes through the eigenbasis (Loewner) form of the
matrix-exponential directional derivative, not the small-dt approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError
from .evolve import PiecewiseDrive, NS
from .fock import Operator

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TransferSpec:
    """State-transfer pairs defining the target operation."""

    pairs: tuple  # of (initial, target) vectors
    gauge: str = "fixed"  # or "z_phase_free"

    def __post_init__(self):
        if self.gauge not in ("fixed", "z_phase_free"):
            raise ValueError(f"unknown gauge {self.gauge!r}")
        norm_pairs = []
        for psi, phi in self.pairs:
            psi = np.asarray(psi, dtype=complex)
            phi = np.asarray(phi, dtype=complex)
            psi = psi / np.linalg.norm(psi)
            phi = phi / np.linalg.norm(phi)
            norm_pairs.append((psi, phi))
        if not norm_pairs:
            raise ValueError("need at least one transfer pair")
        object.__setattr__(self, "pairs", tuple(norm_pairs))


@dataclass(frozen=True)
class PenaltyConfig:
    """Soft constraints subtracted from the transfer fidelity."""

    amplitude_limit: float = TWO_PI * 10.0  # rad/us
    amplitude_weight: float = 0.0
    derivative_weight: float = 0.0
    edge_weight: float = 0.0

    def __post_init__(self):
        for name in ("amplitude_weight", "derivative_weight", "edge_weight"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def _as_mat(x):
    return x.matrix if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def _samples(pulses):
    """(n_controls, n_steps) complex array plus the step length in us."""
    if isinstance(pulses, PiecewiseDrive):
        pulses = [pulses]
    if isinstance(pulses, np.ndarray):
        arr = np.atleast_2d(np.asarray(pulses, dtype=complex))
        return arr, None
    arr = np.array([p.samples for p in pulses], dtype=complex)
    periods = {p.sample_period for p in pulses}
    if len(periods) != 1 or len({len(p.samples) for p in pulses}) != 1:
        raise ValueError("all drives must share sample period and length")
    return arr, periods.pop() * NS


def _step_hamiltonians(z, h0, controls):
    n_ctrl, n_steps = z.shape
    h0 = _as_mat(h0)
    mats = [_as_mat(c) for c in controls]
    dags = [m.conj().T for m in mats]
    out = []
    for m in range(n_steps):
        h = h0.copy()
        for j in range(n_ctrl):
            h += z[j, m] * dags[j] + np.conj(z[j, m]) * mats[j]
        out.append(h)
    return out


def propagator(pulses, h0, controls, dt=None):
    """Piecewise-constant time-ordered propagator of the pulse sequence."""
    z, dt_pulse = _samples(pulses)
    dt = dt if dt is not None else dt_pulse
    if dt is None:
        raise ValueError("dt required for raw sample arrays")
    hs = _step_hamiltonians(z, h0, controls)
    u = np.eye(hs[0].shape[0], dtype=complex)
    for h in hs:
        w, v = np.linalg.eigh(h)
        u = (v * np.exp(-1j * w * dt)) @ v.conj().T @ u
    return u


def _overlaps(u, spec):
    return np.array([phi.conj() @ u @ psi for psi, phi in spec.pairs])


def _fidelity_from_overlaps(o, gauge):
    k = len(o)
    if gauge == "z_phase_free":
        return float(np.sum(np.abs(o))) ** 2 / k**2
    return float(np.abs(np.sum(o))) ** 2 / k**2


def transfer_fidelity(pulses, spec, h0, controls, dt=None):
    """F = (1/K^2)|sum_k <phi_k|U|psi_k>|^2, gauge-aligned if requested."""
    u = propagator(pulses, h0, controls, dt)
    return _fidelity_from_overlaps(_overlaps(u, spec), spec.gauge)


def _penalty_and_grad(z, dt, penalties):
    """Penalty value and its gradient d/d(conj z) packed as complex."""
    p = penalties
    val = 0.0
    grad = np.zeros_like(z)
    if p.amplitude_weight > 0:
        excess = np.maximum(0.0, np.abs(z) ** 2 - p.amplitude_limit**2)
        val += p.amplitude_weight * float(np.sum(excess**2))
        grad += p.amplitude_weight * 2.0 * excess * 2.0 * z
    if p.derivative_weight > 0 and z.shape[1] > 1:
        d = np.diff(z, axis=1)
        val += p.derivative_weight * float(np.sum(np.abs(d) ** 2))
        g = np.zeros_like(z)
        g[:, :-1] -= 2.0 * d
        g[:, 1:] += 2.0 * d
        grad += p.derivative_weight * g
    if p.edge_weight > 0:
        val += p.edge_weight * float(
            np.sum(np.abs(z[:, 0]) ** 2 + np.abs(z[:, -1]) ** 2)
        )
        grad[:, 0] += p.edge_weight * 2.0 * z[:, 0]
        grad[:, -1] += p.edge_weight * 2.0 * z[:, -1]
    return val, grad


def _loewner(w, dt):
    """L_ab = (e^{-i w_a dt} - e^{-i w_b dt}) / (w_a - w_b), diagonal limit."""
    e = np.exp(-1j * w * dt)
    dw = w[:, None] - w[None, :]
    de = e[:, None] - e[None, :]
    small = np.abs(dw) < 1e-12
    dw_safe = np.where(small, 1.0, dw)
    l = de / dw_safe
    diag = -1j * dt * np.exp(-1j * 0.5 * (w[:, None] + w[None, :]) * dt)
    return np.where(small, diag, l)


def objective_and_gradient(z, dt, spec, h0, controls, penalties=None):
    """(F - penalties, gradient array d/d(Re z) + i d/d(Im z)).

    The gradient is packed so that grad.real is the derivative with
    respect to the real part of each sample and grad.imag with respect
    to the imaginary part.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    n_ctrl, n_steps = z.shape
    kpairs = len(spec.pairs)
    hs = _step_hamiltonians(z, h0, controls)
    eigs = []
    for h in hs:
        w, v = np.linalg.eigh(h)
        eigs.append((w, v))
    dim = hs[0].shape[0]

    # forward states per pair, after each step
    fwd = np.array([psi for psi, _ in spec.pairs]).T  # dim x K
    fwd_states = [fwd.copy()]
    for w, v in eigs:
        fwd = (v * np.exp(-1j * w * dt)) @ (v.conj().T @ fwd)
        fwd_states.append(fwd)
    # backward costates per pair, before each step (adjoint propagation)
    bwd = np.array([phi for _, phi in spec.pairs]).T
    bwd_states = [None] * (n_steps + 1)
    bwd_states[n_steps] = bwd.copy()
    for m in range(n_steps - 1, -1, -1):
        w, v = eigs[m]
        bwd = (v * np.exp(1j * w * dt)) @ (v.conj().T @ bwd)
        bwd_states[m] = bwd

    o = np.einsum("ik,ik->k", bwd_states[n_steps].conj(), fwd_states[n_steps])
    fid = _fidelity_from_overlaps(o, spec.gauge)
    if spec.gauge == "z_phase_free":
        s_eff = np.sum(np.abs(o))
        phases = np.where(np.abs(o) > 1e-30, o / np.maximum(np.abs(o), 1e-30), 1.0)
        weights = s_eff * phases.conj()  # dF = (2/K^2) Re[weights . do]
    else:
        weights = np.conj(np.sum(o)) * np.ones(kpairs)

    ctrl_mats = [_as_mat(c) for c in controls]
    ctrl_dags = [m.conj().T for m in ctrl_mats]
    grad = np.zeros((n_ctrl, n_steps), dtype=complex)
    for m in range(n_steps):
        w, v = eigs[m]
        l = _loewner(w, dt)
        x = v.conj().T @ fwd_states[m]  # states entering step m, eigenbasis
        lam = v.conj().T @ bwd_states[m + 1]  # costates after step m
        # sum_k weights_k <lam_k| dU |x_k> = Tr[dH . Kmat]
        g = l * ((lam.conj() * weights[None, :]) @ x.T)
        kmat = v @ g.T @ v.conj().T
        for j in range(n_ctrl):
            d_re = np.trace((ctrl_dags[j] + ctrl_mats[j]) @ kmat)
            d_im = np.trace(1j * (ctrl_dags[j] - ctrl_mats[j]) @ kmat)
            grad[j, m] = (2.0 / kpairs**2) * (d_re.real + 1j * d_im.real)

    obj = fid
    if penalties is not None:
        pval, pgrad = _penalty_and_grad(z, dt, penalties)
        obj -= pval
        grad -= pgrad
    return obj, grad


def gradient(pulses, spec, h0, controls, penalties=None, dt=None):
    """Gradient of (F - penalties); see objective_and_gradient for packing."""
    z, dt_pulse = _samples(pulses)
    dt = dt if dt is not None else dt_pulse
    _, g = objective_and_gradient(z, dt, spec, h0, controls, penalties)
    return g


@dataclass
class OptimizeResult:
    pulses: list
    fidelity: float
    objective: float
    trace: np.ndarray  # per-iteration objective
    converged: bool


def optimize(
    spec,
    h0,
    controls,
    penalties=None,
    init_pulses=None,
    iterations=200,
    step=1.0,
    tol=1e-10,
    method="lbfgs",
):
    """Maximize (F - penalties) from the given seed pulses.

    method "lbfgs" runs scipy L-BFGS-B on the real-packed samples with
    the exact gradient; "ascent" is plain gradient ascent with a
    backtracking line search (monotone in the accepted objective).
    """
    z, dt = _samples(init_pulses)
    if dt is None:
        raise ValueError("init_pulses must be PiecewiseDrive instances")
    period_ns = dt / NS
    obj, grad = objective_and_gradient(z, dt, spec, h0, controls, penalties)
    trace = [obj]
    if method == "lbfgs":
        from scipy.optimize import minimize

        shape = z.shape

        def unpack(x):
            half = x.size // 2
            return (x[:half] + 1j * x[half:]).reshape(shape)

        def fun(x):
            o, g = objective_and_gradient(unpack(x), dt, spec, h0, controls,
                                          penalties)
            if not np.isfinite(o):
                raise DivergenceError("objective is not finite",
                                      iteration=len(trace))
            trace.append(o)
            return -o, -np.concatenate([g.real.ravel(), g.imag.ravel()])

        x0 = np.concatenate([z.real.ravel(), z.imag.ravel()])
        res = minimize(fun, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": iterations, "gtol": tol,
                                "ftol": 1e-14})
        z, obj = unpack(res.x), -float(res.fun)
    elif method == "ascent":
        alpha = step
        for it in range(iterations):
            if not np.isfinite(obj):
                raise DivergenceError("objective is not finite", iteration=it)
            gnorm2 = float(np.sum(np.abs(grad) ** 2))
            if gnorm2 < tol:
                break
            accepted = False
            for _ in range(40):
                z_new = z + alpha * grad
                obj_new, grad_new = objective_and_gradient(
                    z_new, dt, spec, h0, controls, penalties
                )
                if np.isfinite(obj_new) and obj_new > obj:
                    z, obj, grad = z_new, obj_new, grad_new
                    alpha *= 1.5
                    accepted = True
                    break
                alpha *= 0.5
            trace.append(obj)
            if not accepted:
                break
    else:
        raise ValueError(f"unknown method {method!r}")
    pulses = [
        PiecewiseDrive(sample_period=period_ns, samples=z[j], target=f"drive{j}")
        for j in range(z.shape[0])
    ]
    fid = transfer_fidelity(z, spec, h0, controls, dt=dt)
    return OptimizeResult(
        pulses=pulses,
        fidelity=fid,
        objective=obj,
        trace=np.array(trace),
        converged=bool(len(trace) > 1 and trace[-1] >= trace[0]),
    )


def random_initial_pulses(n_controls, n_steps, sample_period, scale, rng):
    """Smooth random seed pulses with zero-amplitude edges."""
    t = np.linspace(0.0, np.pi, n_steps)
    env = np.sin(t)
    out = []
    for j in range(n_controls):
        base = rng.normal(size=4) + 1j * rng.normal(size=4)
        wave = sum(
            base[k] * np.sin((k + 1) * t) for k in range(4)
        )
        out.append(
            PiecewiseDrive(
                sample_period=sample_period,
                samples=scale * env * wave,
                target=f"drive{j}",
            )
        )
    return out


def lindblad_validate(pulses, spec, h0, controls, collapse, substeps=2):
    """Average transfer infidelity of the pulse under Lindblad decoherence.

    Each sample interval is integrated with RK4 at sample_period/substeps.
    With an empty collapse list this reproduces 1 - |<phi|U|psi>|^2 per
    pair (phase-aligned average, matching transfer_fidelity at the
    optimizer's aligned fixed points).
    """
    from .evolve import _lindblad_rhs, _as_matrix

    z, dt = _samples(pulses)
    if dt is None:
        raise ValueError("pulses must be PiecewiseDrive instances")
    hs = _step_hamiltonians(z, h0, controls)
    jumps = []
    for c, rate in collapse:
        cm = _as_matrix(c)
        cd = cm.conj().T
        jumps.append((rate, cm, cd, cd @ cm))
    h_step = dt / substeps
    fids = []
    for psi, phi in spec.pairs:
        rho = np.outer(psi, psi.conj())
        for h in hs:
            for _ in range(substeps):
                k1 = _lindblad_rhs(h, rho, jumps)
                k2 = _lindblad_rhs(h, rho + 0.5 * h_step * k1, jumps)
                k3 = _lindblad_rhs(h, rho + 0.5 * h_step * k2, jumps)
                k4 = _lindblad_rhs(h, rho + h_step * k3, jumps)
                rho = rho + (h_step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)
        fids.append(float((phi.conj() @ rho @ phi).real))
    return 1.0 - float(np.mean(fids))


def save_pulses(pulses, path):
    """Columnar text file: time_ns then re/im per drive."""
    z, _ = _samples(pulses)
    period = pulses[0].sample_period
    t = np.arange(z.shape[1]) * period
    cols = [t]
    header = ["time_ns"]
    for j in range(z.shape[0]):
        cols += [z[j].real, z[j].imag]
        header += [f"re{j}", f"im{j}"]
    np.savetxt(path, np.column_stack(cols), header=",".join(header),
               delimiter=",", comments="")


def load_pulses(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t = data[:, 0]
    period = float(t[1] - t[0]) if len(t) > 1 else 1.0
    n_drives = (data.shape[1] - 1) // 2
    return [
        PiecewiseDrive(
            sample_period=period,
            samples=data[:, 1 + 2 * j] + 1j * data[:, 2 + 2 * j],
            target=f"drive{j}",
        )
        for j in range(n_drives)
    ]
