"""Downlink simulation of satellite QKD: pass geometry, loss budget, BB84 and E91."""

__version__ = "0.1.0"
