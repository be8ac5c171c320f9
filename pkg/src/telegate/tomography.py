"""State and process reconstruction: displaced-parity Wigner tomography,
POVM-calibrated qubit QST with constrained MLE, Pauli-transfer-matrix
process tomography, randomized-benchmarking fits, and figures of merit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import lgamma

import numpy as np
from scipy.optimize import curve_fit
from scipy.special import eval_genlaguerre

from .errors import ConfigError, DivergenceError, TruncationRiskError
from .fock import QuantumState

SQ2 = np.sqrt(2.0)

PAULI_1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}
PAULI_LABELS_2 = [a + b for a in "IXYZ" for b in "IXYZ"]
PAULI_2 = {lbl: np.kron(PAULI_1[lbl[0]], PAULI_1[lbl[1]]) for lbl in PAULI_LABELS_2}


def _rot(axis, angle):
    g = PAULI_1[axis]
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * g


#: overcomplete single-qubit rotation set used for QST
QST_ROTATIONS = (
    ("I", np.eye(2, dtype=complex)),
    ("Rx(pi)", _rot("X", np.pi)),
    ("Rx(pi/2)", _rot("X", np.pi / 2)),
    ("Rx(-pi/2)", _rot("X", -np.pi / 2)),
    ("Ry(pi/2)", _rot("Y", np.pi / 2)),
    ("Ry(-pi/2)", _rot("Y", -np.pi / 2)),
)


# ---------------------------------------------------------------------------
# Wigner tomography


def wigner_element(m, n, beta):
    """<n| D(beta) Pi D(beta)^dag |m> in closed form.

    Uses the identity D(beta) Pi D(beta)^dag = D(2 beta) Pi, so the
    element is (-1)^m <n|D(2 beta)|m> with the displacement matrix
    element expressed through an associated Laguerre polynomial.
    """
    if m < 0 or n < 0:
        raise ConfigError("m and n must be non-negative")
    alpha = 2.0 * complex(beta)
    x = abs(alpha) ** 2
    if n >= m:
        k = n - m
        logpref = 0.5 * (lgamma(m + 1) - lgamma(n + 1))
        amp = np.exp(logpref - x / 2.0) * alpha**k * eval_genlaguerre(m, k, x)
    else:
        k = m - n
        logpref = 0.5 * (lgamma(n + 1) - lgamma(m + 1))
        amp = (
            np.exp(logpref - x / 2.0)
            * (-np.conj(alpha)) ** k
            * eval_genlaguerre(n, k, x)
        )
    return complex((-1.0) ** m * amp)


def wigner_element_oracle(m, n, beta, dim=None):
    """Matrix-product oracle for wigner_element in a large truncated space."""
    if dim is None:
        dim = m + n + 8 * int(np.ceil(abs(beta) ** 2)) + 10
    return complex(wigner_oracle_matrix(beta, dim)[n, m])


def wigner_oracle_matrix(beta, dim, big_dim=None):
    """D(beta) Pi D(beta)^dag by matrix exponential; element (n, m) is
    the oracle value for wigner_element(m, n, beta).

    The product is evaluated in an enlarged space and truncated back so
    the displacement is accurate on the requested block.
    """
    from .fock import displacement, parity

    if big_dim is None:
        big_dim = 2 * dim + 8 * int(np.ceil(abs(beta) ** 2)) + 16
    d = displacement(beta, big_dim).matrix
    p = parity(big_dim).matrix
    return (d @ p @ d.conj().T)[:dim, :dim]


def wigner_function(state, betas):
    """W(beta) = (2/pi) Tr[rho D Pi D^dag] over a grid of phase-space
    points; returns a real array shaped like ``betas``."""
    if isinstance(state, QuantumState):
        rho = state.density_matrix()
    else:
        arr = np.asarray(state, dtype=complex)
        rho = np.outer(arr, arr.conj()) if arr.ndim == 1 else arr
    dim = rho.shape[0]
    betas = np.asarray(betas, dtype=complex)
    bmax = np.max(np.abs(betas)) if betas.size else 0.0
    # population above the cutoff makes the displaced parity unreliable
    tail = np.abs(np.diagonal(rho)[-1])
    if tail > 1e-6 and bmax > 0.5 * np.sqrt(dim):
        raise TruncationRiskError(
            f"state has population {tail:.2e} at the truncation edge",
            recommended_dim=2 * dim,
        )
    flat = betas.ravel()
    out = np.empty(flat.shape, dtype=float)
    for i, b in enumerate(flat):
        elem = np.array(
            [[wigner_element(m, n, b) for m in range(dim)] for n in range(dim)]
        )
        # Tr[rho A] with A_{nm} = elem[n, m]
        out[i] = (2.0 / np.pi) * np.sum(rho * elem.T).real
    return out.reshape(betas.shape)


def save_wigner_csv(path, betas, w):
    """Grid CSV with columns re_beta, im_beta, W."""
    betas = np.asarray(betas, dtype=complex).ravel()
    w = np.asarray(w, dtype=float).ravel()
    data = np.column_stack([betas.real, betas.imag, w])
    np.savetxt(path, data, delimiter=",", header="re_beta,im_beta,W", comments="")


# ---------------------------------------------------------------------------
# POVM and tomography matrix


@dataclass(frozen=True)
class PovmCalibration:
    """Diagonal POVM elements of the joint two-transmon measurement."""

    elements: tuple  # four diagonal 4-vectors, outcome order (00,01,10,11)

    def __post_init__(self):
        e = np.asarray(self.elements, dtype=float)
        if e.shape != (4, 4) or np.any(e < -1e-12) or np.any(e > 1 + 1e-12):
            raise ConfigError("POVM needs four diagonal 4-vectors in [0,1]")
        if np.max(np.abs(e.sum(axis=0) - 1.0)) > 1e-9:
            raise ConfigError("POVM elements must sum to the identity")
        object.__setattr__(self, "elements", tuple(map(tuple, e)))

    @classmethod
    def ideal(cls):
        return cls(tuple(tuple(np.eye(4)[k]) for k in range(4)))

    @classmethod
    def from_assignment(cls, a1, a2):
        """Joint POVM from per-qubit confusion matrices (rows: true g,e)."""
        a1 = np.asarray(a1, dtype=float)
        a2 = np.asarray(a2, dtype=float)
        elems = []
        for r1 in (0, 1):
            for r2 in (0, 1):
                diag = [
                    a1[t1, r1] * a2[t2, r2] for t1 in (0, 1) for t2 in (0, 1)
                ]
                elems.append(tuple(diag))
        return cls(tuple(elems))

    def matrices(self):
        return [np.diag(np.asarray(e, dtype=complex)) for e in self.elements]


@dataclass(frozen=True)
class TomographyMatrix:
    """Linear map from the Pauli coefficient vector to outcome
    probabilities: Pi = T . P with P_j = Tr[P_j rho]."""

    matrix: np.ndarray
    rotations: tuple  # per-row rotation labels
    n_outcomes: int
    basis_labels: tuple
    condition_number: float

    @property
    def n_settings(self):
        return self.matrix.shape[0] // self.n_outcomes

    def predict(self, rho):
        p = pauli_vector(rho)
        return self.matrix @ p


def pauli_vector(rho, labels=None):
    rho = np.asarray(rho, dtype=complex)
    if labels is None:
        labels = PAULI_LABELS_2 if rho.shape[0] == 4 else ("I", "X", "Y", "Z")
    paulis = PAULI_2 if rho.shape[0] == 4 else PAULI_1
    return np.array([np.trace(paulis[l] @ rho).real for l in labels])


def rho_from_pauli_vector(p, labels=None):
    d = 4 if len(p) == 16 else 2
    labels = labels or (PAULI_LABELS_2 if d == 4 else ("I", "X", "Y", "Z"))
    paulis = PAULI_2 if d == 4 else PAULI_1
    return sum(c * paulis[l] for c, l in zip(p, labels)) / d


def build_tomography_matrix(n_qubits=2, povm=None, rotations=QST_ROTATIONS):
    """Rows are (rotation setting, outcome) pairs; for the default
    two-qubit design, 36 settings x 4 outcomes = 144 rows."""
    if n_qubits == 2:
        povm = povm or PovmCalibration.ideal()
        ms = povm.matrices()
        paulis = [PAULI_2[l] for l in PAULI_LABELS_2]
        labels = tuple(PAULI_LABELS_2)
        settings = [
            (f"{l1}*{l2}", np.kron(u1, u2))
            for (l1, u1), (l2, u2) in itertools.product(rotations, rotations)
        ]
        d = 4
    elif n_qubits == 1:
        ms = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
        paulis = [PAULI_1[l] for l in ("I", "X", "Y", "Z")]
        labels = ("I", "X", "Y", "Z")
        settings = [(l, u) for l, u in rotations]
        d = 2
    else:
        raise ConfigError("n_qubits must be 1 or 2")
    rows = []
    row_labels = []
    for lbl, u in settings:
        for k, m in enumerate(ms):
            rows.append(
                [np.trace(m @ u @ p @ u.conj().T).real / d for p in paulis]
            )
            row_labels.append((lbl, k))
    t = np.array(rows)
    tt = t.T @ t
    if np.linalg.matrix_rank(tt) < t.shape[1]:
        raise ConfigError("tomography design is rank deficient")
    cond = float(np.linalg.cond(tt))
    return TomographyMatrix(
        matrix=t,
        rotations=tuple(row_labels),
        n_outcomes=len(ms),
        basis_labels=labels,
        condition_number=cond,
    )


def sample_frequencies(rho, tomo, shots, rng):
    """Multinomial shot sampling per rotation setting."""
    probs = tomo.predict(rho)
    k = tomo.n_outcomes
    out = np.empty_like(probs)
    for s in range(tomo.n_settings):
        p = np.clip(probs[s * k : (s + 1) * k], 0.0, None)
        p = p / p.sum()
        counts = rng.multinomial(shots, p)
        out[s * k : (s + 1) * k] = counts / shots
    return out


# ---------------------------------------------------------------------------
# MLE reconstruction


def _project_psd_trace(rho):
    """Nearest density operator: eigenvalue projection onto the simplex."""
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    # Euclidean projection of the spectrum onto {w >= 0, sum w = 1}
    u = np.sort(w)[::-1]
    css = np.cumsum(u)
    ks = np.arange(1, len(u) + 1)
    cond = u - (css - 1.0) / ks > 0
    k = ks[cond][-1]
    tau = (css[k - 1] - 1.0) / k
    w_proj = np.maximum(w - tau, 0.0)
    return (v * w_proj) @ v.conj().T


def mle_reconstruct(frequencies, tomo, max_iter=5000, kkt_tol=1e-7):
    """Least-squares MLE over the physical set {rho >= 0, Tr rho = 1}.

    Projected gradient descent with backtracking; the KKT/stationarity
    residual is the norm of the projected-gradient step at the solution.
    """
    f = np.asarray(frequencies, dtype=float)
    t = tomo.matrix
    if f.shape != (t.shape[0],):
        raise ConfigError(f"frequency vector length {f.shape} != {t.shape[0]}")
    d = 4 if t.shape[1] == 16 else 2
    paulis = PAULI_2 if d == 4 else PAULI_1
    labels = tomo.basis_labels
    basis = np.array([paulis[l] for l in labels])
    # row operators A_m with pi_m = Tr[A_m rho]
    a_ops = np.einsum("mj,jab->mab", t, basis)

    def objective(rho):
        pi = np.einsum("mab,ba->m", a_ops, rho).real
        return float(np.sum((pi - f) ** 2)), pi

    rho = np.eye(d, dtype=complex) / d
    obj, pi = objective(rho)
    step = 1.0
    probe = 1e-3  # small step isolates the projected-gradient direction
    kkt = np.inf
    for _ in range(max_iter):
        g = 2.0 * np.einsum("m,mab->ab", pi - f, a_ops)
        g = 0.5 * (g + g.conj().T)
        kkt = np.linalg.norm(_project_psd_trace(rho - probe * g) - rho) / probe
        if kkt < kkt_tol:
            break
        accepted = False
        for _ in range(60):
            cand = _project_psd_trace(rho - step * g)
            obj_new, pi_new = objective(cand)
            if obj_new <= obj + 1e-15:
                rho, obj, pi = cand, obj_new, pi_new
                step *= 1.3
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    if kkt >= kkt_tol and not np.isfinite(obj):
        raise DivergenceError(f"MLE failed, final residual {obj:.3e}", iteration=max_iter)
    return rho


def linear_inversion(frequencies, tomo):
    p = np.linalg.pinv(tomo.matrix) @ np.asarray(frequencies, dtype=float)
    return rho_from_pauli_vector(p, tomo.basis_labels)


# ---------------------------------------------------------------------------
# decode pipeline and process tomography


def decode_tomography(state, sim, shots=None, rng=None, povm=None):
    """Decode both data qubits onto their communication qubits, then run
    two-qubit QST.  Codespace leakage stays in the cavities and appears
    as excess ground-state weight on the transmons (no postselection).

    ``sim`` is a protocol.TeleportedCnot providing the layout and code.
    """
    from .codes import decode_unitary
    from .fock import partial_trace

    layout = sim.layout
    dim = sim.options.cavity_dim
    dec = decode_unitary(sim.code, dim)
    u1 = _lift_pair(dec, layout, "q1", "c1")
    u2 = _lift_pair(dec, layout, "q2", "c2")
    if isinstance(state, QuantumState):
        rho = state.density_matrix()
    else:
        rho = np.asarray(state, dtype=complex)
    rho = u2 @ u1 @ rho @ u1.conj().T @ u2.conj().T
    st = QuantumState.mixed(layout, rho / np.trace(rho).real)
    rho_q = partial_trace(st, ("q1", "q2")).data
    tomo = build_tomography_matrix(2, povm=povm)
    if shots is None:
        freqs = tomo.predict(rho_q)
    else:
        freqs = sample_frequencies(rho_q, tomo, shots, rng)
    return mle_reconstruct(freqs, tomo)


def _lift_pair(op, layout, slow, fast):
    """Lift a two-mode operator (slow x fast ordering) onto the layout."""
    from .fock import embed_many

    d1 = layout.dim(slow)
    d2 = layout.dim(fast)
    op = np.asarray(op, dtype=complex).reshape(d1, d2, d1, d2)
    total = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
    for a in range(d1):
        for c in range(d1):
            block = op[a, :, c, :]
            if not np.any(block):
                continue
            e1 = np.zeros((d1, d1), dtype=complex)
            e1[a, c] = 1.0
            total += embed_many({slow: e1, fast: block}, layout).matrix
    return total


def cardinal_labels_2q():
    one = ("+Z", "-Z", "+X", "-X", "+Y", "-Y")
    return [(a, b) for a in one for b in one]


def _qubit_cardinal_rho(label):
    vecs = {
        "+Z": np.array([1.0, 0.0]),
        "-Z": np.array([0.0, 1.0]),
        "+X": np.array([1.0, 1.0]) / SQ2,
        "-X": np.array([1.0, -1.0]) / SQ2,
        "+Y": np.array([1.0, 1j]) / SQ2,
        "-Y": np.array([1.0, -1j]) / SQ2,
    }
    v = vecs[label].astype(complex)
    return np.outer(v, v.conj())


def process_tomography(channel, inputs=None):
    """Least-squares PTM from ideal input states and reconstructed
    outputs.

    ``channel`` maps an ideal two-qubit input label pair to an output
    4x4 density operator.  Returns the 16x16 Pauli transfer matrix.
    """
    inputs = inputs or cardinal_labels_2q()
    p_in = []
    p_out = []
    for pair in inputs:
        rho_in = np.kron(_qubit_cardinal_rho(pair[0]), _qubit_cardinal_rho(pair[1]))
        rho_out = channel(pair)
        p_in.append(pauli_vector(rho_in))
        p_out.append(pauli_vector(rho_out))
    a = np.array(p_in)  # n x 16
    b = np.array(p_out)
    if np.linalg.matrix_rank(a) < a.shape[1]:
        raise ConfigError("input design is rank deficient")
    r, *_ = np.linalg.lstsq(a, b, rcond=None)
    return r.T


def ptm_of_unitary(u):
    """R_AB = Tr[P_A U P_B U^dag] / d for a qubit-space unitary."""
    u = np.asarray(u, dtype=complex)
    d = u.shape[0]
    paulis = (
        [PAULI_2[l] for l in PAULI_LABELS_2] if d == 4 else
        [PAULI_1[l] for l in ("I", "X", "Y", "Z")]
    )
    n = len(paulis)
    r = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            r[a, b] = np.trace(paulis[a] @ u @ paulis[b] @ u.conj().T).real / d
    return r


def cnot_ptm():
    cnot = np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    )
    return ptm_of_unitary(cnot)


# ---------------------------------------------------------------------------
# figures of merit


def state_fidelity(rho, sigma):
    """(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if rho.shape != sigma.shape:
        raise ConfigError("state dimensions differ")
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    sq = (v * np.sqrt(w)) @ v.conj().T
    inner = sq @ sigma @ sq
    ev = np.clip(np.linalg.eigvalsh(0.5 * (inner + inner.conj().T)), 0.0, None)
    return float(np.sum(np.sqrt(ev)) ** 2)


def process_fidelity(r1, r2, d=4):
    """F = (Tr[R1^T R2]/d + 1)/(d + 1) for trace-preserving maps."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if r1.shape != r2.shape:
        raise ConfigError("PTM dimensions differ")
    return float((np.trace(r1.T @ r2) / d**2 * d + 1.0) / (d + 1.0))


def concurrence(rho):
    """Wootters concurrence of a two-qubit density operator."""
    rho = np.asarray(rho, dtype=complex)
    yy = PAULI_2["YY"]
    rt = rho @ yy @ rho.conj() @ yy
    ev = np.linalg.eigvals(rt).real
    ev = np.sqrt(np.clip(np.sort(ev)[::-1], 0.0, None))
    return float(max(0.0, ev[0] - ev[1] - ev[2] - ev[3]))


# ---------------------------------------------------------------------------
# randomized benchmarking


def rb_fit(lengths, p_correct):
    """Fit p = 0.5 + A exp(-N / tau); returns (tau, A, error per gate).

    The per-gate error is r = (1 - exp(-1/tau)) / 2.
    """
    lengths = np.asarray(lengths, dtype=float)
    p = np.asarray(p_correct, dtype=float)
    if len(lengths) < 3:
        raise ConfigError("need at least 3 sequence lengths")

    def model(n, a, tau):
        return 0.5 + a * np.exp(-n / tau)

    a0 = max(p[0] - 0.5, 1e-3)
    tau0 = max(lengths[-1] / max(-np.log(max((p[-1] - 0.5) / a0, 1e-9)), 1e-9), 1.0)
    try:
        popt, _ = curve_fit(
            model, lengths, p, p0=[a0, tau0],
            bounds=([0.0, 1e-6], [1.0, 1e12]), maxfev=20000,
        )
    except RuntimeError as exc:
        raise DivergenceError(f"RB fit failed: {exc}", iteration=0)
    a, tau = popt
    r = (1.0 - np.exp(-1.0 / tau)) / 2.0
    return float(tau), float(a), float(r)


def irb_gate_error(tau_reference, tau_interleaved):
    """Interleaved-RB per-gate error from the two decay constants."""
    decay_ratio = np.exp(-1.0 / tau_interleaved) / np.exp(-1.0 / tau_reference)
    return float((1.0 - decay_ratio) / 2.0)


def synthetic_rb_data(lengths, error_per_gate, shots, rng, a=0.5):
    """Depolarizing-model RB survival data for fit validation."""
    decay = (1.0 - 2.0 * error_per_gate) ** np.asarray(lengths, dtype=float)
    p = 0.5 + a * decay
    if shots is None:
        return p
    return rng.binomial(shots, np.clip(p, 0, 1)) / shots


# ---------------------------------------------------------------------------
# leakage bias probe


def leakage_bias_probe(code, dim, leak_prob, n_leak_ops=1):
    """Signed bias of the decode-pipeline fidelity relative to the direct
    logical-subspace fidelity on an identical leaky channel.

    The channel injects single-photon loss (codespace leakage for the
    binomial code) on the first cavity of a logical Bell state.
    """
    from .codes import decode_unitary
    from .fock import annihilation

    if not (0.0 <= leak_prob < 1.0):
        raise ConfigError("leak probability must be in [0, 1)")
    c0, c1 = code.codewords(dim)
    bell = (np.kron(c0, c0) + np.kron(c1, c1)) / SQ2
    rho = np.outer(bell, bell.conj())
    a = annihilation(dim).matrix
    leak = np.kron(a, np.eye(dim))
    leaked = leak @ rho @ leak.conj().T
    tr = np.trace(leaked).real
    if tr > 0:
        rho_out = (1.0 - leak_prob) * rho + leak_prob * leaked / tr
    else:
        rho_out = rho
    # direct logical-subspace fidelity (leakage counts as error)
    basis = [np.kron(x, y) for x in (c0, c1) for y in (c0, c1)]
    iso = np.array(basis).conj()
    rho_l = iso @ rho_out @ iso.conj().T
    bell_l = np.array([1, 0, 0, 1]) / SQ2
    f_direct = float((bell_l.conj() @ rho_l @ bell_l).real)
    # decode pipeline: qubit (slow) x cavity (fast) per side, leakage
    # carried into the transmon result without postselection
    g = np.array([1.0, 0.0], dtype=complex)
    dec = decode_unitary(code, dim)
    full = np.kron(np.kron(np.outer(g, g), np.eye(dim)), np.kron(np.outer(g, g), np.eye(dim)))
    # build |g> x cavity1 x |g> x cavity2 state: reorder rho (c1 x c2)
    # into (q1 c1 q2 c2)
    d2 = dim * dim
    rho_big = np.zeros((4 * d2, 4 * d2), dtype=complex)
    # embed with both qubits in |g>: indices q1=0, q2=0
    idx = np.arange(d2)
    i1, i2 = np.divmod(idx, dim)
    big_idx = ((0 * dim + i1) * 2 + 0) * dim + i2
    rho_big[np.ix_(big_idx, big_idx)] = rho_out
    u = np.kron(dec, dec)  # (q1 c1) x (q2 c2) ordering matches big_idx
    rho_dec = u @ rho_big @ u.conj().T
    # trace out the cavities
    rho_dec = rho_dec.reshape(2, dim, 2, dim, 2, dim, 2, dim)
    rho_q = np.einsum("abcdebgd->aceg", rho_dec).reshape(4, 4)
    bell_q = np.array([1, 0, 0, 1]) / SQ2
    f_decode = float((bell_q.conj() @ rho_q @ bell_q).real)
    return f_decode - f_direct
