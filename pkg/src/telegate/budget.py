"""Additive per-outcome error accounting for the teleported CNOT.

The gate error decomposes as p_CNOT = p_Bell + p_LO + p_Msmt + p_FF with
the last three resolved per measurement outcome (00, 01, 10, 11).  A
multiplicative composition 1 - prod(1 - p_i) is reported alongside as a
cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError

OUTCOMES = ("00", "01", "10", "11")


@dataclass(frozen=True)
class ComponentErrors:
    """Error probabilities per protocol element; per-outcome vectors are
    ordered (00, 01, 10, 11)."""

    p_bell: float
    p_lo: tuple
    p_msmt: tuple
    p_ff: tuple
    encoding: str = "binomial"

    def __post_init__(self):
        for name in ("p_lo", "p_msmt", "p_ff"):
            v = tuple(float(x) for x in getattr(self, name))
            if len(v) != 4:
                raise ConfigError(f"{name} needs 4 entries, got {len(v)}")
            if any(not (0.0 <= x <= 1.0) for x in v):
                raise ConfigError(f"{name} entries must be probabilities")
            object.__setattr__(self, name, v)
        if not (0.0 <= self.p_bell <= 1.0):
            raise ConfigError("p_bell must be a probability")
        if self.encoding not in ("binomial", "fock"):
            raise ConfigError(f"unknown encoding {self.encoding!r}")


def binomial_defaults():
    return ComponentErrors(
        p_bell=0.03,
        p_lo=(0.10, 0.10, 0.07, 0.07),
        p_msmt=(0.01, 0.04, 0.02, 0.06),
        p_ff=(0.03, 0.03, 0.00, 0.00),
        encoding="binomial",
    )


def fock_defaults():
    return ComponentErrors(
        p_bell=0.03,
        p_lo=(0.06, 0.06, 0.06, 0.06),
        p_msmt=(0.01, 0.04, 0.02, 0.06),
        p_ff=(0.02, 0.02, 0.00, 0.00),
        encoding="fock",
    )


def defaults(encoding):
    if encoding == "binomial":
        return binomial_defaults()
    if encoding == "fock":
        return fock_defaults()
    raise ConfigError(f"unknown encoding {encoding!r}")


def total_error(components, weights=(0.25, 0.25, 0.25, 0.25)):
    """Per-outcome additive totals and their outcome-weighted mean.

    Returns (totals tuple, weighted mean, multiplicative cross-check
    totals).  Totals exceeding 1 are clipped for reporting with a
    saturation warning.
    """
    c = components
    totals = []
    mult = []
    for k in range(4):
        parts = (c.p_bell, c.p_lo[k], c.p_msmt[k], c.p_ff[k])
        s = sum(parts)
        if s > 1.0:
            warnings.warn(f"outcome {OUTCOMES[k]} error sum {s:.3f} > 1, clipped")
            s = 1.0
        totals.append(s)
        mult.append(1.0 - np.prod([1.0 - p for p in parts]))
    mean = float(np.dot(weights, totals))
    return tuple(totals), mean, tuple(mult)


def budget_from_simulation(
    bell_infidelity,
    cnot1_infidelity,
    cnot2_infidelity,
    idle_t1_penalty,
    msmt_infidelity,
    ff_x_infidelity,
    encoding="binomial",
):
    """Assemble ComponentErrors from simulated element infidelities.

    ``msmt_infidelity`` is a 4-vector per outcome; the module-1 idle T1
    penalty and both local-CNOT infidelities enter p_LO uniformly; the
    feedforward X_L cost applies to the outcomes (00, 01) that trigger it.
    """
    p_lo_base = cnot1_infidelity + cnot2_infidelity + idle_t1_penalty
    p_lo = tuple(p_lo_base for _ in range(4))
    p_ff = (ff_x_infidelity, ff_x_infidelity, 0.0, 0.0)
    return ComponentErrors(
        p_bell=bell_infidelity,
        p_lo=p_lo,
        p_msmt=tuple(msmt_infidelity),
        p_ff=p_ff,
        encoding=encoding,
    )


def compare(budget_mean, budget_sigma, measured_infidelity, measured_sigma):
    """Interval-overlap consistency of budget vs measured gate infidelity."""
    lo1, hi1 = budget_mean - budget_sigma, budget_mean + budget_sigma
    lo2, hi2 = measured_infidelity - measured_sigma, measured_infidelity + measured_sigma
    overlap = min(hi1, hi2) - max(lo1, lo2)
    return {
        "budget": (budget_mean, budget_sigma),
        "measured": (measured_infidelity, measured_sigma),
        "consistent": bool(overlap >= 0),
        "marginal": bool(-min(budget_sigma, measured_sigma) <= overlap < 0),
        "overlap": float(overlap),
    }


def loss_attribution(t2_share=0.70, t1_share=0.25, cavity_share=0.04):
    """Decoherence-source shares of the total infidelity; the residual
    closes the sum to 1."""
    other = 1.0 - (t2_share + t1_share + cavity_share)
    if other < -1e-9:
        raise ConfigError("attribution shares exceed 100%")
    return {
        "transmon_t2": t2_share,
        "transmon_t1": t1_share,
        "cavity": cavity_share,
        "other": max(other, 0.0),
    }


def to_table(components):
    """JSON-friendly budget table mirroring the per-outcome layout."""
    totals, mean, mult = total_error(components)
    return {
        "encoding": components.encoding,
        "p_bell": components.p_bell,
        "outcomes": {
            o: {
                "p_lo": components.p_lo[k],
                "p_msmt": components.p_msmt[k],
                "p_ff": components.p_ff[k],
                "total": totals[k],
                "total_multiplicative": mult[k],
            }
            for k, o in enumerate(OUTCOMES)
        },
        "mean_total": mean,
    }
