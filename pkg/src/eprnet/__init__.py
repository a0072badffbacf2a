"""Entanglement distribution from a single source: spectrum, routing and fair channel allocation."""

__version__ = "0.1.0"
