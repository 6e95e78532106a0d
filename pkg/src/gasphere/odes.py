"""Small second-order ODE helpers: a classical RK4 step and cubic Hermite
interpolation on a single integrator segment.

Both profile and scale-factor integrations share the structure
u' = v, v' = f(t, u, v) with scalar state, so the stepper is specialised
to that shape for speed (these loops run for 1e5-1e6 steps).
"""
from __future__ import annotations

from typing import Callable, Tuple

Rhs = Callable[[float, float, float], float]


def rk4_step(f: Rhs, t: float, u: float, v: float, h: float) -> Tuple[float, float]:
    """One fixed-step fourth-order Runge-Kutta step for u' = v, v' = f(t, u, v)."""
    k1u = v
    k1v = f(t, u, v)
    th = t + 0.5 * h
    k2u = v + 0.5 * h * k1v
    k2v = f(th, u + 0.5 * h * k1u, k2u)
    k3u = v + 0.5 * h * k2v
    k3v = f(th, u + 0.5 * h * k2u, k3u)
    k4u = v + h * k3v
    k4v = f(t + h, u + h * k3u, k4u)
    un = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    vn = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return un, vn


def hermite_value(x0: float, f0: float, d0: float,
                  x1: float, f1: float, d1: float, x: float) -> float:
    """Cubic Hermite interpolant on [x0, x1] evaluated at x."""
    w = x1 - x0
    s = (x - x0) / w
    s2 = s * s
    s3 = s2 * s
    return ((2.0 * s3 - 3.0 * s2 + 1.0) * f0
            + (s3 - 2.0 * s2 + s) * w * d0
            + (-2.0 * s3 + 3.0 * s2) * f1
            + (s3 - s2) * w * d1)


def hermite_derivative(x0: float, f0: float, d0: float,
                       x1: float, f1: float, d1: float, x: float) -> float:
    """Derivative of the cubic Hermite interpolant at x."""
    w = x1 - x0
    s = (x - x0) / w
    s2 = s * s
    return ((6.0 * s2 - 6.0 * s) * f0 / w
            + (3.0 * s2 - 4.0 * s + 1.0) * d0
            + (-6.0 * s2 + 6.0 * s) * f1 / w
            + (3.0 * s2 - 2.0 * s) * d1)


def hermite_crossing(x0: float, f0: float, d0: float,
                     x1: float, f1: float, d1: float,
                     target: float, rel_tol: float) -> float:
    """Bisect the Hermite cubic for f(x) = target on a segment that straddles it.

    The endpoints must satisfy (f0 - target) and (f1 - target) with opposite
    (or zero) signs.  Returns the abscissa refined to |x1 - x0| <= rel_tol * |x|.
    """
    g0 = f0 - target
    g1 = f1 - target
    if g0 == 0.0:
        return x0
    if g1 == 0.0:
        return x1
    if g0 * g1 > 0.0:
        raise ValueError("segment does not straddle the target value")
    lo, hi = x0, x1
    glo = g0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = hermite_value(x0, f0, d0, x1, f1, d1, mid) - target
        if gm == 0.0:
            return mid
        if (gm > 0.0) == (glo > 0.0):
            lo = mid
            glo = gm
        else:
            hi = mid
        if hi - lo <= rel_tol * max(abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)
