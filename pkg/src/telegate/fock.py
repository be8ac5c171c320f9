"""Multi-mode truncated Fock-space linear algebra.

Dense complex matrices throughout.  The tensor ordering convention is fixed
by the layout: the first listed mode is the slowest-varying index of the
Kronecker product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import InvalidDimensionError, LayoutError, TruncationRiskError

NORM_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class HilbertSpaceLayout:
    """Ordered set of labelled modes defining a tensor-product space."""

    modes: tuple

    def __post_init__(self):
        modes = tuple((str(lbl), int(d)) for lbl, d in self.modes)
        object.__setattr__(self, "modes", modes)
        labels = [lbl for lbl, _ in modes]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate mode labels in {labels}")
        for lbl, d in modes:
            if d < 1:
                raise InvalidDimensionError(f"mode {lbl!r} has dim {d} < 1")

    @property
    def labels(self):
        return tuple(lbl for lbl, _ in self.modes)

    @property
    def dims(self):
        return tuple(d for _, d in self.modes)

    @property
    def total_dim(self):
        return int(np.prod(self.dims))

    def dim(self, label):
        for lbl, d in self.modes:
            if lbl == label:
                return d
        raise LayoutError(f"unknown mode label {label!r}")

    def index(self, label):
        for i, (lbl, _) in enumerate(self.modes):
            if lbl == label:
                return i
        raise LayoutError(f"unknown mode label {label!r}")


def single_mode_layout(label, dim):
    return HilbertSpaceLayout(((label, dim),))


@dataclass(frozen=True)
class Operator:
    """Dense operator tied to a layout."""

    layout: HilbertSpaceLayout
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        n = self.layout.total_dim
        if m.shape != (n, n):
            raise LayoutError(f"matrix shape {m.shape} != ({n}, {n})")
        object.__setattr__(self, "matrix", m)
        m.setflags(write=False)

    @property
    def dag(self):
        return Operator(self.layout, self.matrix.conj().T)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.layout, self.matrix @ other.matrix)
        return self.matrix @ np.asarray(other)

    def __add__(self, other):
        return Operator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other):
        return Operator(self.layout, self.matrix - other.matrix)

    def __mul__(self, scalar):
        return Operator(self.layout, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(self.layout, -self.matrix)

    def expect(self, state):
        rho = state.density_matrix()
        return complex(np.trace(self.matrix @ rho))


@dataclass(frozen=True)
class QuantumState:
    """Pure state vector or density operator on a layout."""

    layout: HilbertSpaceLayout
    kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex)
        n = self.layout.total_dim
        if self.kind == "pure":
            if arr.shape != (n,):
                raise LayoutError(f"vector shape {arr.shape} != ({n},)")
            nrm = np.linalg.norm(arr)
            if abs(nrm - 1.0) > 1e-9:
                raise ValueError(f"pure state norm {nrm} not 1")
        elif self.kind == "mixed":
            if arr.shape != (n, n):
                raise LayoutError(f"matrix shape {arr.shape} != ({n}, {n})")
            if np.max(np.abs(arr - arr.conj().T)) > 1e-9:
                raise ValueError("density matrix not Hermitian")
            tr = np.trace(arr).real
            if abs(tr - 1.0) > 1e-8:
                raise ValueError(f"density matrix trace {tr} not 1")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        object.__setattr__(self, "data", arr)
        arr.setflags(write=False)

    @classmethod
    def pure(cls, layout, vector, normalize=False):
        v = np.asarray(vector, dtype=complex)
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(layout, "pure", v)

    @classmethod
    def mixed(cls, layout, rho):
        return cls(layout, "mixed", rho)

    def density_matrix(self):
        if self.kind == "pure":
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def to_mixed(self):
        if self.kind == "mixed":
            return self
        return QuantumState.mixed(self.layout, self.density_matrix())

    def purity(self):
        rho = self.density_matrix()
        return float(np.trace(rho @ rho).real)


def basis_vector(dim, n):
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def annihilation(dim):
    """Ladder operator with <n-1|a|n> = sqrt(n)."""
    if dim < 2:
        raise InvalidDimensionError(f"annihilation needs dim >= 2, got {dim}")
    m = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    return Operator(single_mode_layout("a", dim), m)


def creation(dim):
    return annihilation(dim).dag


def number(dim):
    if dim < 1:
        raise InvalidDimensionError(f"number needs dim >= 1, got {dim}")
    lay = single_mode_layout("a", dim)
    return Operator(lay, np.diag(np.arange(dim, dtype=float)).astype(complex))


def identity(dim):
    if dim < 1:
        raise InvalidDimensionError(f"identity needs dim >= 1, got {dim}")
    return Operator(single_mode_layout("a", dim), np.eye(dim, dtype=complex))


def parity(dim):
    """Photon-number parity, diag((-1)^n)."""
    if dim < 1:
        raise InvalidDimensionError(f"parity needs dim >= 1, got {dim}")
    lay = single_mode_layout("a", dim)
    return Operator(lay, np.diag((-1.0) ** np.arange(dim)).astype(complex))


def displacement(beta, dim):
    """D(beta) = exp(beta a^dag - beta* a) by matrix exponential.

    Guards against truncation: requires |beta|^2 <= dim / 4 so that a
    displaced vacuum keeps essentially all of its support below the cutoff.
    """
    beta = complex(beta)
    if dim < 2:
        raise InvalidDimensionError(f"displacement needs dim >= 2, got {dim}")
    if abs(beta) ** 2 > dim / 4:
        rec = int(np.ceil(4 * abs(beta) ** 2)) + 1
        raise TruncationRiskError(
            f"|beta|^2 = {abs(beta)**2:.3f} exceeds dim/4 = {dim / 4:.3f}",
            recommended_dim=rec,
        )
    a = annihilation(dim).matrix
    gen = beta * a.conj().T - np.conj(beta) * a
    return Operator(single_mode_layout("a", dim), expm(gen))


def embed(op, layout, label):
    """op on one mode, tensored with identity on every other mode."""
    d = layout.dim(label)
    if op.layout.total_dim != d:
        raise LayoutError(
            f"operator dim {op.layout.total_dim} != mode {label!r} dim {d}"
        )
    out = np.array([[1.0 + 0j]])
    for lbl, dm in layout.modes:
        factor = op.matrix if lbl == label else np.eye(dm, dtype=complex)
        out = np.kron(out, factor)
    return Operator(layout, out)


def embed_many(ops_by_label, layout):
    """Tensor product of per-mode operators, identity where omitted."""
    out = np.array([[1.0 + 0j]])
    for lbl, dm in layout.modes:
        if lbl in ops_by_label:
            factor = ops_by_label[lbl]
            if isinstance(factor, Operator):
                factor = factor.matrix
            factor = np.asarray(factor, dtype=complex)
        else:
            factor = np.eye(dm, dtype=complex)
        out = np.kron(out, factor)
    return Operator(layout, out)


def product_state(layout, vectors_by_label):
    """Kronecker product of per-mode state vectors (default vacuum)."""
    out = np.array([1.0 + 0j])
    for lbl, dm in layout.modes:
        v = vectors_by_label.get(lbl)
        if v is None:
            v = basis_vector(dm, 0)
        v = np.asarray(v, dtype=complex)
        if v.shape != (dm,):
            raise LayoutError(f"vector for {lbl!r} has shape {v.shape}, dim {dm}")
        out = np.kron(out, v)
    return QuantumState.pure(layout, out, normalize=True)


def partial_trace(state, keep):
    """Reduced density operator on the kept modes (layout order preserved)."""
    keep = list(keep)
    if not keep:
        raise LayoutError("keep set must be nonempty")
    labels = state.layout.labels
    for lbl in keep:
        if lbl not in labels:
            raise LayoutError(f"unknown mode label {lbl!r}")
    dims = state.layout.dims
    nmodes = len(dims)
    keep_idx = sorted(labels.index(lbl) for lbl in keep)
    rho = state.density_matrix().reshape(dims + dims)
    trace_idx = [i for i in range(nmodes) if i not in keep_idx]
    remaining = list(range(nmodes))
    for i in sorted(trace_idx, reverse=True):
        pos = remaining.index(i)
        m = len(remaining)
        rho = np.trace(rho, axis1=pos, axis2=pos + m)
        remaining.remove(i)
    dkeep = int(np.prod([dims[i] for i in keep_idx]))
    rho = rho.reshape(dkeep, dkeep)
    rho = 0.5 * (rho + rho.conj().T)
    new_layout = HilbertSpaceLayout(
        tuple((labels[i], dims[i]) for i in keep_idx)
    )
    return QuantumState.mixed(new_layout, rho)
