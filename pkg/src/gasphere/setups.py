"""Initial-condition builders for the finite-volume solver.

Each builder samples a density/velocity pair onto a fresh uniform grid and
returns a ready RadialState.  An optional cutoff radius truncates slowly
decaying profiles so that runs start with genuine vacuum near the outer
boundary (the solver treats a support that touches the boundary as a
termination condition).
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from . import polytrope, similarity
from .hydro import RadialState, make_grid

TWO_PI = 2.0 * math.pi


def _truncate(rho: np.ndarray, r: np.ndarray, cutoff: Optional[float]) -> np.ndarray:
    if cutoff is None:
        return rho
    if cutoff <= 0.0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    return np.where(r <= cutoff, rho, 0.0)


def uniform_ball(n_cells: int, r_max: float, *, N: int = 3, R: float,
                 rho0: float, gamma: float = 1.4, K: float = 1.0,
                 g: float = 1.0, beta: float = 0.0) -> RadialState:
    """Constant density rho0 inside radius R, vacuum outside."""
    if R <= 0.0 or R > r_max:
        raise ValueError("need 0 < R <= r_max")
    r, dr = make_grid(n_cells, r_max)
    rho = np.where(r <= R, float(rho0), 0.0)
    return RadialState(N=N, gamma=gamma, K=K, g=g, beta=beta, r=r, dr=dr,
                       rho=rho, u=np.zeros_like(r))


def stationary_gamma65(n_cells: int, r_max: float, *,
                       K: float = TWO_PI / 9.0, A: float = 1.0,
                       g: float = 1.0, beta: float = 0.0,
                       cutoff: Optional[float] = None) -> RadialState:
    """Hydrostatic gamma = 6/5 sphere from the closed-form density."""
    r, dr = make_grid(n_cells, r_max)
    rho = polytrope.stationary_density_6_5(K, A, r, g=g)
    rho = _truncate(rho, r, cutoff)
    return RadialState(N=3, gamma=1.2, K=K, g=g, beta=beta, r=r, dr=dr,
                       rho=rho, u=np.zeros_like(r))


def isothermal_disk(n_cells: int, r_max: float, *, K: float = TWO_PI,
                    a: float = 1.0, alpha: float = 0.0, g: float = 1.0,
                    beta: float = 0.0, cutoff: Optional[float] = None,
                    profile_h: float = 1e-3) -> RadialState:
    """Hydrostatic 2D isothermal profile rho = a^-2 exp(y(r/a)).

    y solves the unforced (mu = 0) log-density equation; at K = 2 pi and
    alpha = 0 it is exactly -2 ln(1 + x^2/8).
    """
    if a <= 0.0:
        raise ValueError(f"scale a must be positive, got {a}")
    r, dr = make_grid(n_cells, r_max)
    profile = polytrope.solve_generalized_profile(
        polytrope.ISOTHERMAL2D, 2, K, 0.0, alpha,
        z_max=(r_max / a) * (1.0 + 2.0 * profile_h), h=profile_h)
    rho = polytrope.profile_to_density(profile, a, r)
    rho = _truncate(rho, r, cutoff)
    return RadialState(N=2, gamma=1.0, K=K, g=g, beta=beta, r=r, dr=dr,
                       rho=rho, u=np.zeros_like(r))


def cored_disk(n_cells: int, r_max: float, *, rho_c: float = 1.0,
               core: float = 1.0, K: float = 0.01, g: float = 1.0,
               beta: float = 0.0, cutoff: Optional[float] = None) -> RadialState:
    """Cold 2D disk rho = rho_c (1 + (r/core)^2)^-2, at rest.

    With small K its pressure cannot balance gravity; the disk falls in.
    """
    if rho_c <= 0.0 or core <= 0.0:
        raise ValueError("rho_c and core must be positive")
    r, dr = make_grid(n_cells, r_max)
    rho = rho_c / (1.0 + (r / core) ** 2) ** 2
    rho = _truncate(rho, r, cutoff)
    return RadialState(N=2, gamma=1.0, K=K, g=g, beta=beta, r=r, dr=dr,
                       rho=rho, u=np.zeros_like(r))


def gaussian_ball(n_cells: int, r_max: float, *, N: int = 3,
                  gamma: float = 1.4, K: float = 1.0, g: float = 1.0,
                  beta: float = 0.0, rho_c: float = 1.0, sigma: float = 1.0,
                  v0: float = 0.0, cutoff: Optional[float] = None) -> RadialState:
    """Gaussian density bump with an optional smooth inward velocity.

    rho = rho_c exp(-r^2 / (2 sigma^2)), u = -v0 (r/sigma) exp(-r^2/(2 sigma^2)).
    """
    if rho_c <= 0.0 or sigma <= 0.0:
        raise ValueError("rho_c and sigma must be positive")
    r, dr = make_grid(n_cells, r_max)
    shape = np.exp(-0.5 * (r / sigma) ** 2)
    rho = _truncate(rho_c * shape, r, cutoff)
    u = -v0 * (r / sigma) * shape
    u = np.where(rho > 0.0, u, 0.0)
    return RadialState(N=N, gamma=gamma, K=K, g=g, beta=beta, r=r, dr=dr,
                       rho=rho, u=u)


def state_from_family(fam: similarity.FamilySolution, t: float,
                      n_cells: int, r_max: float,
                      beta: float = 0.0) -> RadialState:
    """Sample an exact family's fields at time t onto a solver grid."""
    r, dr = make_grid(n_cells, r_max)
    rho, u = similarity.family_state(fam, t, r)
    return RadialState(N=fam.N, gamma=fam.gamma, K=fam.K, g=fam.g, beta=beta,
                       r=r, dr=dr, rho=np.clip(rho, 0.0, None), u=u, t=t)
