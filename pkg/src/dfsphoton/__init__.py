"""Deterministic photonic cluster-state generation from a decoherence-free emitter array."""

__version__ = "0.1.0"
