"""Radial hydrostatic profile ODEs and the closed-form gamma = 6/5 star.

Supported profile kinds
-----------------------
classic
    y'' + (2/z) y' + y^n = 0,  y(0) = alpha, y'(0) = 0.  The dimensionless
    structure equation of a gamma-law hydrostatic sphere with n = 1/(gamma-1).
power
    y'' + ((N-1)/z) y' + [N (N-2)^2 V(N) / ((2N-2) K)] y^(N/(N-2)) = mu.
    Forced generalisation whose y^(N/(N-2)) mapping feeds the compactly
    supported collapse family in N >= 3 dimensions (gamma = (2N-2)/N).
isothermal2d
    y'' + (1/z) y' + (2 pi / K) e^y = mu.  Log-density profile of the 2D
    isothermal (gamma = 1) family; integrates through y < 0, no surface.

All kinds integrate with a fixed-step classical RK4 scheme started at z = h
from the regular series y = alpha + c2 z^2 + c4 z^4 (c2 = (mu - f(alpha))/(2N)
for the (N-1)/z drag).  Fractional powers of y are sign-guarded; the classic
and power kinds stop at the first bracketed sign change of y.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NumericalError
from .geometry import dimension_constants
from .odes import hermite_crossing, hermite_derivative

CLASSIC = "classic"
POWER = "power"
ISOTHERMAL2D = "isothermal2d"

_KINDS = (CLASSIC, POWER, ISOTHERMAL2D)

#: relative tolerance of the bracketed first-zero refinement
ZERO_REL_TOL = 1e-12


@dataclass(frozen=True)
class PolytropeProfile:
    """Sampled solution of one of the profile ODEs.

    Samples are uniformly spaced in z (step h, starting at 0).  When the
    integration bracketed a sign change of y, ``zero_index`` is the index of
    the first sample with y <= 0 and ``first_zero`` the refined crossing.
    """

    kind: str
    N: int
    n: Optional[float]
    alpha: float
    mu: float
    K: float
    h: float
    z: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    first_zero: Optional[float]
    zero_index: Optional[int]

    @property
    def z_last(self) -> float:
        return float(self.z[-1])

    def _segment(self, idx: np.ndarray):
        z0 = self.z[idx]
        z1 = self.z[idx + 1]
        return z0, self.y[idx], self.dy[idx], z1, self.y[idx + 1], self.dy[idx + 1]

    def values_at(self, z: np.ndarray) -> np.ndarray:
        """Cubic-Hermite evaluation of y at arbitrary z within the sampled span.

        Beyond the last sample: returns 0 when a first zero was recorded
        (the profile has a surface there), otherwise raises ValueError.
        """
        z = np.asarray(z, dtype=float)
        if np.any(z < 0.0):
            raise ValueError("profile is defined for z >= 0")
        beyond = z > self.z_last * (1.0 + 1e-12)
        if np.any(beyond) and self.first_zero is None:
            raise ValueError(
                f"evaluation at z up to {float(np.max(z)):g} is outside the sampled "
                f"span [0, {self.z_last:g}] and the profile has no recorded zero")
        zc = np.minimum(z, self.z_last)
        idx = np.clip((zc / self.h).astype(int), 0, len(self.z) - 2)
        z0, y0, d0, z1, y1, d1 = self._segment(idx)
        w = z1 - z0
        s = np.clip((zc - z0) / w, 0.0, 1.0)
        s2 = s * s
        s3 = s2 * s
        out = ((2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * w * d0
               + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * w * d1)
        if np.any(beyond):
            out = np.where(beyond, 0.0, out)
        return out

    def value_at(self, z: float) -> float:
        return float(self.values_at(np.array([z]))[0])


def _series_start(D: int, fnl: Callable[[float], float],
                  dfnl: Callable[[float], float],
                  mu: float, alpha: float, h: float):
    """Regular-center series through O(z^4): y = alpha + c2 z^2 + c4 z^4."""
    c2 = (mu - fnl(alpha)) / (2.0 * (D + 1))
    c4 = -dfnl(alpha) * c2 / (4.0 * (D + 3))
    y1 = alpha + c2 * h * h + c4 * h ** 4
    dy1 = 2.0 * c2 * h + 4.0 * c4 * h ** 3
    return y1, dy1


def _integrate_profile(kind: str, N: int, n: Optional[float], alpha: float,
                       mu: float, K: float, z_max: float, h: float,
                       fnl, dfnl, stop_at_sign_change: bool) -> PolytropeProfile:
    if z_max <= h:
        raise ValueError("z_max must exceed the step h")
    if h <= 0.0:
        raise ValueError("step h must be positive")

    D = float(N - 1)
    n_steps = int(round(z_max / h))
    ys = np.empty(n_steps + 1)
    dys = np.empty(n_steps + 1)
    ys[0] = alpha
    dys[0] = 0.0
    y, dy = _series_start(N - 1, fnl, dfnl, mu, alpha, h)
    ys[1] = y
    dys[1] = dy
    zero_index: Optional[int] = None
    if alpha > 0.0 >= y:
        zero_index = 1

    # inlined RK4 on (y' = v, v' = mu - D v / z - fnl(y)); this loop runs up
    # to ~1e7 times for deep scans, so it stays in plain floats and locals
    f = fnl
    half = 0.5 * h
    sixth = h / 6.0
    prev_positive = y > 0.0
    k = 1
    try:
        while k < n_steps and not (zero_index is not None and stop_at_sign_change):
            z = k * h
            zm = z + half
            k1v = mu - D * dy / z - f(y)
            y2 = y + half * dy
            v2 = dy + half * k1v
            k2v = mu - D * v2 / zm - f(y2)
            y3 = y + half * v2
            v3 = dy + half * k2v
            k3v = mu - D * v3 / zm - f(y3)
            y4 = y + h * v3
            v4 = dy + h * k3v
            k4v = mu - D * v4 / (z + h) - f(y4)
            y = y + sixth * (dy + 2.0 * (v2 + v3) + v4)
            dy = dy + sixth * (k1v + 2.0 * (k2v + k3v) + k4v)
            if not (-1e308 < y < 1e308 and -1e308 < dy < 1e308):
                raise NumericalError(f"non-finite profile value near z={z:g}")
            k += 1
            ys[k] = y
            dys[k] = dy
            if zero_index is None and prev_positive and y <= 0.0:
                zero_index = k
            prev_positive = y > 0.0
    except OverflowError as exc:
        raise NumericalError(f"profile integration overflowed near z={k * h:g}") from exc

    ys = ys[:k + 1]
    dys = dys[:k + 1]
    zs = np.arange(k + 1) * h
    root: Optional[float] = None
    if zero_index is not None:
        i = zero_index - 1
        root = hermite_crossing(zs[i], ys[i], dys[i],
                                zs[i + 1], ys[i + 1], dys[i + 1],
                                0.0, ZERO_REL_TOL)
    return PolytropeProfile(
        kind=kind, N=N, n=n, alpha=alpha, mu=mu, K=K, h=h,
        z=zs, y=ys, dy=dys, first_zero=root, zero_index=zero_index)


def solve_lane_emden(n: float, alpha: float = 1.0, z_max: float = 50.0,
                     h: float = 1e-4) -> PolytropeProfile:
    """Integrate the classic profile ODE y'' + (2/z)y' + y^n = 0.

    Parameters
    ----------
    n : polytropic index, n >= 0.
    alpha : central value y(0) > 0.
    z_max : integration span; the run stops earlier at the first sign change.
    h : fixed RK4 step.
    """
    if n < 0.0:
        raise ValueError(f"index n must be >= 0, got {n}")
    if alpha <= 0.0:
        raise ValueError(f"central value alpha must be > 0, got {alpha}")

    def fnl(y: float) -> float:
        return (y if y > 0.0 else 0.0) ** n

    def dfnl(y: float) -> float:
        if n == 0.0:
            return 0.0
        return n * (y if y > 0.0 else 0.0) ** (n - 1.0)

    return _integrate_profile(CLASSIC, 3, n, alpha, 0.0, 1.0, z_max, h,
                              fnl, dfnl, stop_at_sign_change=True)


def power_coefficient(N: int, K: float) -> float:
    """Nonlinearity coefficient N (N-2)^2 V(N) / ((2N-2) K) of the power kind."""
    dc = dimension_constants(N)
    return N * (N - 2) ** 2 * dc.volume / ((2.0 * N - 2.0) * K)


def solve_generalized_profile(kind: str, N: int, K: float, mu: float,
                              alpha: float, z_max: float = 50.0,
                              h: float = 1e-4) -> PolytropeProfile:
    """Integrate the forced power / isothermal2d profile ODEs.

    The power kind requires N >= 3 and stops at the first sign change of y
    (its first zero Z_mu is the family's support edge).  The isothermal2d
    kind fixes N = 2 and integrates the full span.
    """
    if kind not in (POWER, ISOTHERMAL2D):
        raise ValueError(f"kind must be one of {POWER!r}, {ISOTHERMAL2D!r}, got {kind!r}")
    if K <= 0.0:
        raise ValueError(f"pressure constant K must be > 0, got {K}")

    if kind == POWER:
        if N < 3:
            raise ValueError(f"power kind requires N >= 3, got N={N}")
        if alpha <= 0.0:
            raise ValueError(f"power kind requires alpha > 0, got {alpha}")
        p = N / (N - 2.0)
        c = power_coefficient(N, K)

        def fnl(y: float) -> float:
            return c * (y if y > 0.0 else 0.0) ** p

        def dfnl(y: float) -> float:
            return c * p * (y if y > 0.0 else 0.0) ** (p - 1.0)

        return _integrate_profile(POWER, N, None, alpha, mu, K, z_max, h,
                                  fnl, dfnl, stop_at_sign_change=True)

    if N != 2:
        raise ValueError(f"isothermal2d kind fixes N = 2, got N={N}")
    c = 2.0 * math.pi / K

    def fnl(y: float) -> float:
        return c * math.exp(y)

    return _integrate_profile(ISOTHERMAL2D, 2, None, alpha, mu, K, z_max, h,
                              fnl, fnl, stop_at_sign_change=False)


def first_zero(profile: PolytropeProfile) -> Optional[float]:
    """First zero of y, refined by bisection on the bracketing segment.

    Returns None when no sign change was recorded over the integrated span.
    """
    return profile.first_zero


def density_ratio(profile: PolytropeProfile) -> float:
    """Mean-to-central density ratio (-3/z0) y'(z0) of a classic profile.

    Well defined whenever the profile has a finite first zero; physically it
    is the finite-mass ratio of a gamma-law sphere (finite radius needs
    n < 5, i.e. gamma > 6/5).
    """
    if profile.kind != CLASSIC:
        raise ValueError("density ratio is defined for classic profiles")
    z0 = profile.first_zero
    if z0 is None:
        raise ValueError("profile has no finite radius (no first zero recorded)")
    i = profile.zero_index - 1
    dy0 = hermite_derivative(
        float(profile.z[i]), float(profile.y[i]), float(profile.dy[i]),
        float(profile.z[i + 1]), float(profile.y[i + 1]), float(profile.dy[i + 1]),
        z0)
    return -3.0 / z0 * dy0


def stationary_density_6_5(K: float, A: float, r, g: float = 1.0):
    """Closed-form hydrostatic gamma = 6/5 density in three dimensions.

    rho(r) = (9 K A^2 / (2 pi g))^(5/4) * (1 + A^2 r^2)^(-5/2).

    The prefactor is fixed by pressure balance dP/dr = -rho dPhi/dr with
    Delta(Phi) = 4 pi g rho; it equals 1 when K = 2 pi g / (9 A^2).
    """
    if K <= 0.0 or A <= 0.0 or g <= 0.0:
        raise ValueError("K, A and g must all be positive")
    r = np.asarray(r, dtype=float)
    pref = (9.0 * K * A * A / (2.0 * math.pi * g)) ** 1.25
    out = pref * (1.0 + (A * r) ** 2) ** -2.5
    if out.ndim == 0:
        return float(out)
    return out


def profile_to_density(profile: PolytropeProfile, a: float, r) -> np.ndarray:
    """Map a profile to a physical density at scale factor a.

    power:        rho = a^-N * y(r/a)^(N/(N-2)) inside r < a*Z_mu, else 0.
    isothermal2d: rho = a^-2 * exp(y(r/a)).
    """
    if a <= 0.0:
        raise ValueError(f"scale factor must be > 0, got {a}")
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    r = np.atleast_1d(r)
    z = r / a
    if profile.kind == POWER:
        p = profile.N / (profile.N - 2.0)
        zmu = profile.first_zero
        if zmu is None:
            y = profile.values_at(z)
            rho = a ** -profile.N * np.clip(y, 0.0, None) ** p
        else:
            rho = np.zeros_like(r)
            inside = z < zmu
            if np.any(inside):
                y = profile.values_at(z[inside])
                rho[inside] = a ** -profile.N * np.clip(y, 0.0, None) ** p
    elif profile.kind == ISOTHERMAL2D:
        y = profile.values_at(z)
        rho = np.exp(y) / (a * a)
    else:
        raise ValueError("classic profiles carry no family density mapping; "
                         "use the power or isothermal2d kinds")
    if scalar:
        return float(rho[0])
    return rho


def export_profile(profile: PolytropeProfile, csv_path, json_path=None) -> None:
    """Write the samples as CSV (header z,y,dy) plus a JSON metadata sidecar."""
    csv_path = str(csv_path)
    if json_path is None:
        json_path = csv_path[:-4] + ".json" if csv_path.endswith(".csv") else csv_path + ".json"
    with open(csv_path, "w") as fh:
        fh.write("z,y,dy\n")
        for z, y, dy in zip(profile.z, profile.y, profile.dy):
            fh.write(f"{float(z)!r},{float(y)!r},{float(dy)!r}\n")
    meta = {
        "kind": profile.kind,
        "N": profile.N,
        "n": profile.n,
        "alpha": profile.alpha,
        "mu": profile.mu,
        "K": profile.K,
        "h": profile.h,
        "first_zero": profile.first_zero,
    }
    with open(str(json_path), "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
