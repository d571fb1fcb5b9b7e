"""Simulation of nonadiabatic holonomic gates on dressed-state circuit-QED qubits."""

__version__ = "0.1.0"
