"""Render telegate output files (Wigner CSV, tomography/PTM JSON,
RB decay CSV) to figures.  Consumes only the documented file formats;
no dependency on the simulation package."""

from .render import plot_decay, plot_pauli_bars, plot_ptm, plot_wigner

__all__ = ["plot_wigner", "plot_pauli_bars", "plot_ptm", "plot_decay"]
