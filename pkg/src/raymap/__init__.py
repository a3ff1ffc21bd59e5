"""Deterministic urban radio-map simulation with an agentic control loop."""

__version__ = "0.1.0"
