"""Logical encodings of the data qubits: binomial and Fock codes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidDimensionError, ZeroStateError
from .fock import annihilation, basis_vector

# layout convention for the two-mode encode/decode fragment:
# transmon qubit (dim 2) slow index, cavity fast index


@dataclass(frozen=True)
class LogicalCode:
    name: str
    codeword0: np.ndarray
    codeword1: np.ndarray
    errorword0: Optional[np.ndarray]
    errorword1: Optional[np.ndarray]
    min_dim: int

    def codewords(self, dim):
        if dim < self.min_dim:
            raise InvalidDimensionError(
                f"code {self.name!r} needs dim >= {self.min_dim}, got {dim}"
            )
        c0 = np.zeros(dim, dtype=complex)
        c1 = np.zeros(dim, dtype=complex)
        c0[: len(self.codeword0)] = self.codeword0
        c1[: len(self.codeword1)] = self.codeword1
        return c0, c1

    def errorwords(self, dim):
        if self.errorword0 is None:
            return None
        e0 = np.zeros(dim, dtype=complex)
        e1 = np.zeros(dim, dtype=complex)
        e0[: len(self.errorword0)] = self.errorword0
        e1[: len(self.errorword1)] = self.errorword1
        return e0, e1

    def projector(self, dim):
        c0, c1 = self.codewords(dim)
        return np.outer(c0, c0.conj()) + np.outer(c1, c1.conj())

    def logical_z(self, dim):
        """Z_L: +1 on codeword0, -1 on codeword1, zero outside."""
        c0, c1 = self.codewords(dim)
        return np.outer(c0, c0.conj()) - np.outer(c1, c1.conj())

    def logical_x(self, dim):
        """X_L: codeword swap, zero outside the codespace."""
        c0, c1 = self.codewords(dim)
        return np.outer(c0, c1.conj()) + np.outer(c1, c0.conj())

    def logical_x_unitary(self, dim):
        """Codeword swap completed with identity outside the codespace."""
        return np.eye(dim, dtype=complex) - self.projector(dim) + self.logical_x(dim)

    def logical_z_unitary(self, dim):
        return np.eye(dim, dtype=complex) - self.projector(dim) + self.logical_z(dim)


def binomial_code():
    """|0_L> = |2>, |1_L> = (|0> + |4>)/sqrt(2); error words |1>, |3>."""
    c0 = basis_vector(5, 2)
    c1 = (basis_vector(5, 0) + basis_vector(5, 4)) / np.sqrt(2)
    e0 = basis_vector(5, 1)
    e1 = basis_vector(5, 3)
    return LogicalCode("binomial", c0, c1, e0, e1, min_dim=5)


def fock_code():
    """|0_L> = |0>, |1_L> = |1>; no error words."""
    return LogicalCode("fock", basis_vector(2, 0), basis_vector(2, 1), None, None, 2)


def get_code(name):
    if name == "binomial":
        return binomial_code()
    if name == "fock":
        return fock_code()
    raise ValueError(f"unknown code {name!r}")


def logical_state(code, theta, phi, dim):
    """cos(theta/2)|0_L> + e^{i phi} sin(theta/2)|1_L>."""
    c0, c1 = code.codewords(dim)
    v = np.cos(theta / 2) * c0 + np.exp(1j * phi) * np.sin(theta / 2) * c1
    return v / np.linalg.norm(v)


CARDINAL_ANGLES = {
    "+Z": (0.0, 0.0),
    "-Z": (np.pi, 0.0),
    "+X": (np.pi / 2, 0.0),
    "-X": (np.pi / 2, np.pi),
    "+Y": (np.pi / 2, np.pi / 2),
    "-Y": (np.pi / 2, -np.pi / 2),
}


def cardinal_state(code, label, dim):
    theta, phi = CARDINAL_ANGLES[label]
    return logical_state(code, theta, phi, dim)


def apply_single_photon_loss(code, state):
    """Apply the annihilation operator, renormalize, report the new parity.

    Returns (state, parity_flag, pre_norm_amplitude); the amplitude before
    renormalization is kept for error-propagation studies.
    """
    state = np.asarray(state, dtype=complex)
    dim = state.shape[0]
    a = annihilation(dim).matrix
    lost = a @ state
    amp = np.linalg.norm(lost)
    if amp < 1e-14:
        raise ZeroStateError("state has vacuum support only; loss annihilates it")
    lost = lost / amp
    parity = float(np.sum(((-1.0) ** np.arange(dim)) * np.abs(lost) ** 2))
    return lost, parity, amp


def encode_unitary(code, dim):
    """Ideal encode: (alpha|g> + beta|e>) |0>_c -> |g> (alpha|0_L> + beta|1_L>).

    Acts on the qubit (slow index, dim 2) tensor cavity (fast index, dim)
    space; identity on the orthogonal complement of the mapped subspace.
    """
    c0, c1 = code.codewords(dim)
    vac = basis_vector(dim, 0)
    g, e = basis_vector(2, 0), basis_vector(2, 1)
    ins = [np.kron(g, vac), np.kron(e, vac)]
    outs = [np.kron(g, c0), np.kron(g, c1)]
    return _subspace_unitary(ins, outs, 2 * dim)


def decode_unitary(code, dim):
    return encode_unitary(code, dim).conj().T


def _subspace_unitary(ins, outs, total_dim):
    """Unitary mapping ins -> outs, acting as close to identity as a
    unitary allows on the orthogonal complement.

    Complement bases are aligned through the polar factor of their
    overlap, which reduces to exact identity on any subspace untouched
    by both the input and output spans.
    """
    v_in = np.array(ins, dtype=complex).T
    v_out = np.array(outs, dtype=complex).T
    k = v_in.shape[1]
    eye = np.eye(total_dim, dtype=complex)

    def complement(v):
        q, _ = np.linalg.qr(np.hstack([v, eye]))
        return q[:, k:total_dim]

    c_in = complement(v_in)
    c_out = complement(v_out)
    w, _, vh = np.linalg.svd(c_out.conj().T @ c_in)
    return v_out @ v_in.conj().T + c_out @ (w @ vh) @ c_in.conj().T


def encode_transfer_pairs(code, dim):
    """State-transfer pairs for pulse synthesis of the encode operation."""
    c0, c1 = code.codewords(dim)
    vac = basis_vector(dim, 0)
    g, e = basis_vector(2, 0), basis_vector(2, 1)
    return [
        (np.kron(g, vac), np.kron(g, c0)),
        (np.kron(e, vac), np.kron(g, c1)),
    ]


def decode_transfer_pairs(code, dim):
    return [(t, s) for s, t in encode_transfer_pairs(code, dim)]


def knill_laflamme_moments(code, dim=None):
    """(  <0|a^dag a|1>, <0|a^dag a|0>, <1|a^dag a|1> ) for the loss channel."""
    dim = dim or code.min_dim
    c0, c1 = code.codewords(dim)
    n_op = np.diag(np.arange(dim, dtype=float))
    return (
        complex(c0.conj() @ n_op @ c1),
        complex(c0.conj() @ n_op @ c0),
        complex(c1.conj() @ n_op @ c1),
    )
