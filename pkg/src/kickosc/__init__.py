"""Kicked nonlinear oscillator: classical and quantum dynamics, decoherence metrics, transport formulas."""

__version__ = "0.1.0"
