"""Exact simulation and spectral analysis of epidemics spreading in clusters
that are isolated as a unit upon detection."""

__version__ = "0.1.0"

from .malthus import SpectralSolution, solve, solve_alpha  # noqa: E402
from .model import Parameters, Regime, extinction_probability, regime, validate  # noqa: E402
from .sim import StopCondition, Trace, replicate_batch, simulate, snapshot  # noqa: E402

__all__ = [
    "Parameters",
    "Regime",
    "SpectralSolution",
    "StopCondition",
    "Trace",
    "extinction_probability",
    "regime",
    "replicate_batch",
    "simulate",
    "snapshot",
    "solve",
    "solve_alpha",
    "validate",
]
