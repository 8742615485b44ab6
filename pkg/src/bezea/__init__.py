"""Bézier-curve parameterized multi-modal multi-objective optimization."""

__version__ = "0.1.0"
