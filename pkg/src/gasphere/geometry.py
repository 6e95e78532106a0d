"""Dimensional constants for radial symmetry in N spatial dimensions.

The Poisson coupling alpha(N) is the constant in Delta(Phi) = alpha(N) * g * rho,
chosen so that the fundamental kernel is |x| in 1D, log|x| in 2D and
-|x|^(2-N) for N >= 3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class DimensionConstants:
    """Unit-ball volume and Poisson coupling for dimension N."""

    N: int
    volume: float
    alpha: float


def unit_ball_volume(N: int) -> float:
    """Volume of the unit ball in N dimensions, pi^(N/2) / Gamma(N/2 + 1)."""
    if N < 1:
        raise ValueError(f"dimension must be >= 1, got {N}")
    return math.pi ** (N / 2.0) / math.gamma(N / 2.0 + 1.0)


def dimension_constants(N: int) -> DimensionConstants:
    """Return (N, V(N), alpha(N)) with the piecewise low-dimension couplings.

    alpha(1) = 2, alpha(2) = 2*pi, and alpha(N) = N*(N-2)*V(N) for N >= 3.
    """
    if not isinstance(N, int):
        raise ValueError(f"dimension must be an integer, got {N!r}")
    volume = unit_ball_volume(N)
    if N == 1:
        alpha = 2.0
    elif N == 2:
        alpha = 2.0 * math.pi
    else:
        alpha = N * (N - 2) * volume
    return DimensionConstants(N=N, volume=volume, alpha=alpha)
