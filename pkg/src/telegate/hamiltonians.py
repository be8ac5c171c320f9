"""Dispersive Hamiltonians and collapse operators from measured parameters.

All frequencies are supplied in MHz; constructed operators carry angular
units of rad/us (i.e. 2*pi*MHz).  Times are in us.  Hamiltonians default
to the rotating frame where bare mode frequencies are removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .errors import InconsistentCoherenceError, LayoutError
from .fock import (
    HilbertSpaceLayout,
    Operator,
    annihilation,
    embed,
    number,
    single_mode_layout,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ModeParams:
    """Frequency, anharmonicity and coherences of one bosonic mode."""

    freq: float  # MHz
    self_kerr: float = 0.0  # MHz
    t1: Optional[float] = None  # us
    t2_ramsey: Optional[float] = None  # us
    t2_echo: Optional[float] = None  # us

    def __post_init__(self):
        if self.freq <= 0:
            raise ValueError(f"freq must be positive, got {self.freq}")
        if self.t1 is not None and self.t2_ramsey is not None:
            if self.t2_ramsey > 2 * self.t1 + 1e-9:
                raise InconsistentCoherenceError(
                    f"T2 Ramsey {self.t2_ramsey} > 2*T1 = {2 * self.t1}"
                )

    def dephasing_time(self, kind="echo"):
        """Preferred T2 for Lindblad modelling; falls back across kinds."""
        if kind == "echo":
            return self.t2_echo if self.t2_echo is not None else self.t2_ramsey
        if kind == "ramsey":
            return self.t2_ramsey if self.t2_ramsey is not None else self.t2_echo
        raise ValueError(f"unknown T2 kind {kind!r}")


@dataclass(frozen=True)
class CouplingParams:
    """Dispersive shift chi and its photon-number correction chi'."""

    chi: float  # MHz
    chi_prime: float = 0.0  # MHz

    def __post_init__(self):
        if not (np.isfinite(self.chi) and np.isfinite(self.chi_prime)):
            raise ValueError("chi and chi_prime must be finite")


@dataclass(frozen=True)
class ModuleParams:
    data: ModeParams
    comm: ModeParams
    readout: Optional[ModeParams]
    data_comm: CouplingParams
    comm_readout: CouplingParams = CouplingParams(0.0)
    data_readout_chi: float = 0.0


@dataclass(frozen=True)
class SystemParams:
    """All measured Hamiltonian and coherence parameters of the device."""

    module1: ModuleParams
    module2: ModuleParams
    bus: ModeParams
    bus_comm1: CouplingParams
    bus_comm2: CouplingParams
    chi_q1q2: float = 0.0  # MHz
    chi_cb: float = 0.0  # optional residual, MHz
    chi_c1c2: float = 0.0  # optional residual, MHz

    def module(self, index):
        if index == 1:
            return self.module1
        if index == 2:
            return self.module2
        raise ValueError(f"module index must be 1 or 2, got {index}")

    def mode_params(self, label):
        table = {
            "c1": self.module1.data,
            "q1": self.module1.comm,
            "r1": self.module1.readout,
            "c2": self.module2.data,
            "q2": self.module2.comm,
            "r2": self.module2.readout,
            "bus": self.bus,
        }
        if label not in table or table[label] is None:
            raise LayoutError(f"no mode parameters for label {label!r}")
        return table[label]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        def mode(md):
            return None if md is None else ModeParams(**md)

        def coup(cd):
            return CouplingParams(**cd)

        def module(md):
            return ModuleParams(
                data=mode(md["data"]),
                comm=mode(md["comm"]),
                readout=mode(md.get("readout")),
                data_comm=coup(md["data_comm"]),
                comm_readout=coup(md.get("comm_readout", {"chi": 0.0})),
                data_readout_chi=md.get("data_readout_chi", 0.0),
            )

        return cls(
            module1=module(d["module1"]),
            module2=module(d["module2"]),
            bus=mode(d["bus"]),
            bus_comm1=coup(d["bus_comm1"]),
            bus_comm2=coup(d["bus_comm2"]),
            chi_q1q2=d.get("chi_q1q2", 0.0),
            chi_cb=d.get("chi_cb", 0.0),
            chi_c1c2=d.get("chi_c1c2", 0.0),
        )


def _range_pick(lo, hi, which):
    return {"low": lo, "mid": 0.5 * (lo + hi), "high": hi}[which]


def paper_defaults(coherences="mid"):
    """Device parameters of the measured system.

    Coherence ranges are collapsed to their midpoint by default;
    ``coherences`` may be "low", "mid" or "high" to probe the band.
    """
    w = coherences
    module1 = ModuleParams(
        data=ModeParams(freq=5123.6, self_kerr=1.1e-3, t1=1150.0, t2_ramsey=390.0),
        comm=ModeParams(
            freq=4387.7,
            self_kerr=131.2,
            t1=_range_pick(65.0, 69.0, w),
            t2_ramsey=_range_pick(11.0, 14.0, w),
            t2_echo=_range_pick(18.0, 20.0, w),
        ),
        readout=ModeParams(freq=7720.0, t1=0.1),
        data_comm=CouplingParams(chi=0.573, chi_prime=0.00061),
        comm_readout=CouplingParams(chi=2.7),
        data_readout_chi=1.0e-3,
    )
    module2 = ModuleParams(
        data=ModeParams(freq=5275.0, self_kerr=1.8e-3, t1=1100.0, t2_ramsey=390.0),
        comm=ModeParams(
            freq=4559.2,
            self_kerr=123.2,
            t1=_range_pick(67.0, 77.0, w),
            t2_ramsey=_range_pick(18.0, 22.0, w),
            t2_echo=_range_pick(22.0, 24.0, w),
        ),
        readout=ModeParams(freq=7735.4, t1=0.1),
        data_comm=CouplingParams(chi=0.843, chi_prime=0.0014),
        comm_readout=CouplingParams(chi=2.8),
        data_readout_chi=1.0e-3,
    )
    return SystemParams(
        module1=module1,
        module2=module2,
        bus=ModeParams(freq=5692.8, self_kerr=0.3e-3, t1=230.0),
        bus_comm1=CouplingParams(chi=0.319, chi_prime=0.001),
        bus_comm2=CouplingParams(chi=0.455, chi_prime=0.001),
        chi_q1q2=0.019,
    )


def kerr_oscillator(mode_params, dim, rotating_frame=False):
    """w a^dag a - (K/2) a^dag a^dag a a, in rad/us."""
    n = np.arange(dim, dtype=float)
    w = 0.0 if rotating_frame else mode_params.freq
    diag = TWO_PI * (w * n - 0.5 * mode_params.self_kerr * n * (n - 1))
    return Operator(single_mode_layout("a", dim), np.diag(diag).astype(complex))


def dispersive(coupling, a_label, b_label, layout):
    """-chi n_a n_b + chi' (a^dag)^2 a^2 n_b, embedded in the layout."""
    if a_label == b_label:
        raise LayoutError("dispersive coupling needs two distinct modes")
    da = layout.dim(a_label)
    db = layout.dim(b_label)
    na = np.arange(da, dtype=float)
    nb = np.arange(db, dtype=float)
    diag_a = -coupling.chi * na + coupling.chi_prime * na * (na - 1)
    op_a = np.diag(TWO_PI * diag_a).astype(complex)
    op_b = np.diag(nb).astype(complex)
    from .fock import embed_many

    return embed_many({a_label: op_a, b_label: op_b}, layout)


def module_hamiltonian(system_params, module_index, layout, rotating_frame=True):
    """Single-module Hamiltonian: Kerr terms plus dispersive couplings.

    The readout self-Kerr and the nonlinear cavity-readout term are
    dropped (both negligible for nearly-linear modes).
    """
    mod = system_params.module(module_index)
    c, q, r = f"c{module_index}", f"q{module_index}", f"r{module_index}"
    labels = layout.labels
    if c not in labels or q not in labels:
        raise LayoutError(f"layout must contain {c!r} and {q!r}")
    h = embed(
        kerr_oscillator(mod.data, layout.dim(c), rotating_frame), layout, c
    )
    h = h + embed(
        kerr_oscillator(mod.comm, layout.dim(q), rotating_frame), layout, q
    )
    h = h + dispersive(mod.data_comm, c, q, layout)
    if r in labels:
        if mod.readout is None:
            raise LayoutError(f"layout has {r!r} but no readout params")
        ro = ModeParams(freq=mod.readout.freq, self_kerr=0.0)
        h = h + embed(
            kerr_oscillator(ro, layout.dim(r), rotating_frame), layout, r
        )
        h = h + dispersive(mod.comm_readout, r, q, layout)
        h = h + dispersive(
            CouplingParams(chi=mod.data_readout_chi), c, r, layout
        )
    return h


def coupling_hamiltonian(system_params, layout, rotating_frame=True):
    """Bus-mediated coupling Hamiltonian for q1, q2 and the bus mode."""
    for lbl in ("q1", "q2", "bus"):
        if lbl not in layout.labels:
            raise LayoutError(f"layout must contain {lbl!r}")
    h = embed(
        kerr_oscillator(system_params.bus, layout.dim("bus"), rotating_frame),
        layout,
        "bus",
    )
    for q, mod in (("q1", system_params.module1), ("q2", system_params.module2)):
        h = h + embed(
            kerr_oscillator(mod.comm, layout.dim(q), rotating_frame), layout, q
        )
    h = h + dispersive(system_params.bus_comm1, "bus", "q1", layout)
    h = h + dispersive(system_params.bus_comm2, "bus", "q2", layout)
    h = h + dispersive(CouplingParams(chi=system_params.chi_q1q2), "q1", "q2", layout)
    return h


def collapse_operators(system_params, layout, t2_kind="echo"):
    """Per-mode amplitude damping and pure dephasing, with rates in 1/us.

    Dephasing uses 1/T_phi = 1/T2 - 1/(2 T1); modes without a T2 get
    damping only.
    """
    out = []
    for lbl, dim in layout.modes:
        mp = system_params.mode_params(lbl)
        if mp.t1 is not None and mp.t1 > 0:
            op = embed(annihilation(dim), layout, lbl)
            out.append((op, 1.0 / mp.t1))
        t2 = mp.dephasing_time(t2_kind)
        if t2 is not None:
            if mp.t1 is not None and t2 > 2 * mp.t1 + 1e-9:
                raise InconsistentCoherenceError(
                    f"mode {lbl!r}: T2 {t2} > 2*T1 {2 * mp.t1}"
                )
            gamma_phi = 1.0 / t2 - (0.0 if mp.t1 is None else 1.0 / (2 * mp.t1))
            if gamma_phi > 1e-12:
                # sqrt(2)*n with rate gamma_phi gives coherence decay
                # exp(-gamma_phi*t) between adjacent Fock states
                op = np.sqrt(2.0) * embed(number(dim), layout, lbl)
                out.append((op, gamma_phi))
    return out
