"""Spin-Hall domain-wall receiver: micromagnetics, link co-simulation, energy."""

__version__ = "0.1.0"

from ._backend import BACKEND
