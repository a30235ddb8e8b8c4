"""Swap Test simulation and single-qubit decoherence characterisation."""

__version__ = "0.1.0"
