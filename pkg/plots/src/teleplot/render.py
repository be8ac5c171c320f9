"""Figure builders for the documented telegate artifact formats."""

import json

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PAULI_LABELS = [a + b for a in "IXYZ" for b in "IXYZ"]


def _load_wigner_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 3:
        raise ValueError(f"{path}: expected columns re_beta,im_beta,W")
    betas = data[:, 0] + 1j * data[:, 1]
    return betas, data[:, 2]


def plot_wigner(in_path, out_path):
    """Phase-space map from a re_beta,im_beta,W CSV.

    Scattered points are binned onto the unique re/im values; a regular
    grid (as written by the truth-table preset) reproduces exactly.
    """
    betas, w = _load_wigner_csv(in_path)
    xs = np.unique(np.round(betas.real, 12))
    ys = np.unique(np.round(betas.imag, 12))
    grid = np.full((ys.size, xs.size), np.nan)
    ix = np.searchsorted(xs, np.round(betas.real, 12))
    iy = np.searchsorted(ys, np.round(betas.imag, 12))
    grid[iy, ix] = w
    fig, ax = plt.subplots(figsize=(5, 4.2))
    vmax = np.nanmax(np.abs(grid)) or 1.0
    im = ax.pcolormesh(
        xs, ys, grid, cmap="RdBu_r", vmin=-vmax, vmax=vmax, shading="nearest"
    )
    fig.colorbar(im, ax=ax, label=r"$W(\beta)$")
    ax.set_xlabel(r"Re $\beta$")
    ax.set_ylabel(r"Im $\beta$")
    ax.set_aspect("equal")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_pauli_bars(in_path, out_path):
    """Bar chart of the pauli_vector field in a tomography JSON."""
    with open(in_path) as fh:
        payload = json.load(fh)
    vec = payload["pauli_vector"]
    values = [float(vec[label]) for label in PAULI_LABELS]
    fig, ax = plt.subplots(figsize=(7, 3.2))
    ax.bar(range(16), values, color="steelblue")
    ax.set_xticks(range(16), PAULI_LABELS, rotation=60, fontsize=8)
    ax.set_ylim(-1.05, 1.05)
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_ylabel(r"$\langle P \rangle$")
    if "f_bell" in payload:
        ax.set_title(f"F = {payload['f_bell']:.3f}", fontsize=10)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_ptm(in_path, out_path):
    """Heatmap of a 16x16 Pauli transfer matrix from a PTM JSON."""
    with open(in_path) as fh:
        payload = json.load(fh)
    ptm = np.asarray(payload["ptm"], dtype=float)
    if ptm.shape != (16, 16):
        raise ValueError(f"{in_path}: ptm must be 16x16")
    labels = payload.get("labels", PAULI_LABELS)
    fig, ax = plt.subplots(figsize=(5.4, 4.8))
    im = ax.imshow(ptm, cmap="RdBu_r", vmin=-1, vmax=1)
    fig.colorbar(im, ax=ax)
    ax.set_xticks(range(16), labels, rotation=90, fontsize=7)
    ax.set_yticks(range(16), labels, fontsize=7)
    ax.set_xlabel("input Pauli")
    ax.set_ylabel("output Pauli")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_decay(in_path, out_path):
    """Survival vs sequence length from a length,survival CSV, with an
    exponential fit overlaid."""
    data = np.loadtxt(in_path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{in_path}: expected columns length,survival")
    lengths, surv = data[:, 0], data[:, 1]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(lengths, surv, "o", ms=4, color="steelblue", label="data")
    # log-linear fit of (survival - 0.5), skipping points at or below floor
    mask = surv > 0.502
    if mask.sum() >= 3:
        slope, intercept = np.polyfit(lengths[mask], np.log(surv[mask] - 0.5), 1)
        xs = np.linspace(lengths.min(), lengths.max(), 200)
        ax.plot(
            xs,
            np.exp(intercept) * np.exp(slope * xs) + 0.5,
            "-",
            color="firebrick",
            label=f"tau = {-1.0 / slope:.0f}",
        )
    ax.set_xlabel("sequence length")
    ax.set_ylabel("survival")
    ax.set_ylim(0.4, 1.02)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


RENDERERS = {
    "wigner": plot_wigner,
    "pauli-bars": plot_pauli_bars,
    "ptm": plot_ptm,
    "decay": plot_decay,
}
