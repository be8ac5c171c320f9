"""Truncated-Fock-space simulator for a deterministic teleported CNOT
between two logically encoded bosonic qubits."""

__version__ = "0.1.0"
