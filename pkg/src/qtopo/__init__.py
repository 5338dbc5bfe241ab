"""Topology and numerics for boundary-weighted barycenter spaces and reduced functionals."""

from .graded import EMPTY, POINT, BettiTable, euler_characteristic, join, suspend

__version__ = "0.1.0"

__all__ = ["BettiTable", "EMPTY", "POINT", "euler_characteristic", "join", "suspend"]
