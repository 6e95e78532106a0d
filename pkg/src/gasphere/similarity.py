"""Separable collapse/expansion solutions rho(t, r) = a(t)^-N F(r / a(t)).

The scale factor obeys a'' = -lambda / a^(N-1); paired with a profile from
:mod:`gasphere.polytrope` it yields exact solutions of the self-gravitating
gas equations: the compactly supported power family in N >= 3 dimensions
(gamma = (2N-2)/N) and the 2D isothermal family (gamma = 1).  The profile
forcing mu is tied to lambda by

    power:        mu = N (N-2) lambda / ((2N-2) K)
    isothermal2d: mu = 2 lambda / K

`pde_residual` measures, by centered finite differences, how well arbitrary
(rho, u) fields satisfy the radial mass and momentum equations; on the exact
families it converges to zero at second order in the difference steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import NumericalError
from .geometry import dimension_constants
from .odes import hermite_value, hermite_crossing, rk4_step
from . import polytrope

#: integration halts once a drops below this fraction of a0 (collapse bracket)
COLLAPSE_FLOOR_FRACTION = 1e-10
#: relative tolerance of the refined collapse time
BLOWUP_REL_TOL = 1e-8
#: a step may change a by at most this fraction before it is re-done halved
MAX_STEP_FRACTION = 0.004

TERM_T_END = "t_end"
TERM_COLLAPSE = "collapse_floor"
TERM_UNDERFLOW = "step_underflow"


def scale_potential(N: int, lam: float, a) -> float:
    """Potential V(a) of the scale ODE: a'' = -V'(a).

    V = lambda*ln(a) for N = 2 and -lambda*a^(2-N)/(N-2) for N >= 3.
    """
    a = np.asarray(a, dtype=float)
    if N == 2:
        out = lam * np.log(a)
    else:
        out = -lam * a ** (2.0 - N) / (N - 2.0)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class ScaleTrajectory:
    """Samples (t, a, a') of a'' = -lambda/a^(N-1) with collapse detection."""

    N: int
    lam: float
    a0: float
    a1: float
    t: np.ndarray
    a: np.ndarray
    adot: np.ndarray
    termination: str
    collapse_floor: float

    @property
    def first_integral0(self) -> float:
        """Conserved e = a'(0)^2/2 + V(a(0))."""
        return 0.5 * self.a1 ** 2 + scale_potential(self.N, self.lam, self.a0)

    def first_integral_series(self) -> np.ndarray:
        return 0.5 * self.adot ** 2 + scale_potential(self.N, self.lam, self.a)

    def accel(self, a: float) -> float:
        return -self.lam / a ** (self.N - 1)

    def state_at(self, t: float) -> Tuple[float, float]:
        """Hermite-interpolated (a, a') at time t within the sampled span."""
        ts = self.t
        if t < ts[0] - 1e-14 or t > ts[-1] * (1.0 + 1e-12) + 1e-14:
            raise ValueError(
                f"t={t:g} outside the integrated span [{ts[0]:g}, {ts[-1]:g}]"
                + (" (trajectory ends at collapse)" if self.termination != TERM_T_END else ""))
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        t0, t1 = float(ts[i]), float(ts[i + 1])
        a0, a1 = float(self.a[i]), float(self.a[i + 1])
        v0, v1 = float(self.adot[i]), float(self.adot[i + 1])
        a = hermite_value(t0, a0, v0, t1, a1, v1, t)
        adot = hermite_value(t0, v0, self.accel(a0), t1, v1, self.accel(a1), t)
        return a, adot


def integrate_scale(N: int, lam: float, a0: float, a1: float, t_end: float,
                    dt: float = 1e-3) -> ScaleTrajectory:
    """Integrate the scale ODE with fixed-step RK4 and collapse detection.

    Steps that would change a by more than MAX_STEP_FRACTION (or make it
    non-positive) are re-done at half size, so the approach to a -> 0 is
    resolved deterministically.  Integration halts at t_end, at the collapse
    floor a <= 1e-10*a0, or when the step size underflows near collapse.
    """
    if N < 2:
        raise ValueError(f"dimension must be >= 2, got N={N}")
    if a0 <= 0.0:
        raise ValueError(f"initial scale a0 must be > 0, got {a0}")
    if t_end <= 0.0 or dt <= 0.0:
        raise ValueError("t_end and dt must be positive")

    expo = N - 1

    def rhs(_t: float, a: float, _ad: float) -> float:
        return -lam / a ** expo

    floor = COLLAPSE_FLOOR_FRACTION * a0
    ts = [0.0]
    aa = [a0]
    vv = [a1]
    t, a, ad = 0.0, a0, a1
    termination = TERM_T_END
    while t < t_end - 1e-15 * max(1.0, t_end):
        h = min(dt, t_end - t)
        while True:
            with np.errstate(all="ignore"):
                try:
                    an, adn = rk4_step(rhs, t, a, ad, h)
                except (OverflowError, ZeroDivisionError):
                    an, adn = math.nan, math.nan
            # a'' = -lam/a^(N-1) never changes sign, so a' must be monotone;
            # a step that breaks this has hopped across the a = 0 singularity
            monotone = (adn <= ad if lam > 0.0 else
                        adn >= ad if lam < 0.0 else adn == ad)
            ok = (math.isfinite(an) and math.isfinite(adn) and an > 0.0
                  and abs(an - a) <= MAX_STEP_FRACTION * a and monotone)
            if ok:
                break
            h *= 0.5
            if t + h == t:
                termination = TERM_UNDERFLOW
                break
        if termination == TERM_UNDERFLOW:
            break
        t, a, ad = t + h, an, adn
        ts.append(t)
        aa.append(a)
        vv.append(ad)
        if a <= floor:
            termination = TERM_COLLAPSE
            break

    return ScaleTrajectory(N=N, lam=lam, a0=a0, a1=a1,
                           t=np.asarray(ts), a=np.asarray(aa), adot=np.asarray(vv),
                           termination=termination, collapse_floor=floor)


def blowup_time(traj: ScaleTrajectory) -> Optional[float]:
    """Collapse time T with a(T-) -> 0, or None if none was detected.

    For lam = 0 the trajectory is exactly linear and T = -a0/a1 is returned
    in closed form (None when a1 >= 0).  Otherwise the bracketed floor
    crossing is refined to relative tolerance 1e-8; the remaining fall time
    from the floor to 0 is below that tolerance by construction.
    """
    if traj.lam == 0.0:
        if traj.a1 < 0.0:
            return -traj.a0 / traj.a1
        return None
    if traj.termination == TERM_T_END:
        return None
    if traj.termination == TERM_UNDERFLOW:
        return float(traj.t[-1])
    i = len(traj.t) - 2
    t0, t1 = float(traj.t[i]), float(traj.t[i + 1])
    a0, a1 = float(traj.a[i]), float(traj.a[i + 1])
    return hermite_crossing(t0, a0, float(traj.adot[i]),
                            t1, a1, float(traj.adot[i + 1]),
                            traj.collapse_floor, BLOWUP_REL_TOL)


def _simpson(values: np.ndarray, h: float) -> float:
    """Composite Simpson rule over an odd number of uniform samples."""
    n = len(values) - 1
    if n % 2 != 0:
        raise ValueError("Simpson rule needs an even interval count")
    return h / 3.0 * float(values[0] + values[-1]
                           + 4.0 * np.sum(values[1:-1:2])
                           + 2.0 * np.sum(values[2:-1:2]))


def collapse_time_quadrature(N: int, lam: float, a0: float, a1: float,
                             n_nodes: int = 4001) -> Optional[float]:
    """Collapse time from the conserved integral e = a'^2/2 + V(a).

    Independent of the time stepper: the fall leg from the turning point
    a_t (where V(a_t) = e) has a closed form for every N, and partial legs
    from a0 are integrated by composite Simpson after the substitution
    a = a_t - s^2, which regularizes the turning-point endpoint.  Requires
    lam > 0; returns None when the motion never reaches a = 0 (for N >= 3
    that happens whenever e >= 0).
    """
    if lam <= 0.0:
        raise ValueError("quadrature requires lam > 0 (lam = 0 is linear motion)")
    if a0 <= 0.0:
        raise ValueError(f"initial scale a0 must be > 0, got {a0}")
    e = 0.5 * a1 * a1 + scale_potential(N, lam, a0)

    if N == 2:
        # e - V = lam*ln(a_t/a) turns a = a_t*exp(-w^2) into a Gaussian
        # integral, so every leg is an error function
        a_t = math.exp(e / lam)
        base = a_t * math.sqrt(math.pi / (2.0 * lam))
        if a1 == 0.0:
            return base
        w0 = math.sqrt(max(math.log(a_t / a0), 0.0))
        if a1 < 0.0:
            return base * math.erfc(w0)
        return base * (1.0 + math.erf(w0))

    if e >= 0.0:
        return None
    m = N - 2
    a_t = (lam / (m * (-e))) ** (1.0 / m)
    beta_fn = (math.gamma((m + 2.0) / (2.0 * m)) * math.sqrt(math.pi)
               / math.gamma((m + 2.0) / (2.0 * m) + 0.5))
    t_rest = a_t ** (N / 2.0) * math.sqrt(m / (2.0 * lam)) * beta_fn / m
    if a1 == 0.0:
        return t_rest

    s0 = math.sqrt(max(a_t - a0, 0.0))
    if n_nodes % 2 == 0:
        n_nodes += 1
    s = np.linspace(0.0, s0, n_nodes)
    a = a_t - s * s
    speed_sq = 2.0 * (e - scale_potential(N, lam, a))
    vals = np.empty_like(s)
    vals[0] = math.sqrt(2.0 * a_t ** (N - 1) / lam)  # limit 2s/|a'| at the turning point
    vals[1:] = 2.0 * s[1:] / np.sqrt(np.clip(speed_sq[1:], 1e-300, None))
    leg = _simpson(vals, s0 / (n_nodes - 1))
    if a1 < 0.0:
        return t_rest - leg
    return t_rest + leg


def export_trajectory(traj: ScaleTrajectory, csv_path) -> None:
    """Write the samples as CSV with header t,a,adot."""
    with open(str(csv_path), "w") as fh:
        fh.write("t,a,adot\n")
        for t, a, ad in zip(traj.t, traj.a, traj.adot):
            fh.write(f"{float(t)!r},{float(a)!r},{float(ad)!r}\n")


def coupling_mu(kind: str, N: int, K: float, lam: float) -> float:
    """Profile forcing mu implied by the scale coupling lambda."""
    if kind == polytrope.POWER:
        return N * (N - 2) * lam / ((2.0 * N - 2.0) * K)
    if kind == polytrope.ISOTHERMAL2D:
        return 2.0 * lam / K
    raise ValueError(f"no family coupling for profile kind {kind!r}")


def family_gamma(kind: str, N: int) -> float:
    """Adiabatic exponent implied by the family kind."""
    if kind == polytrope.POWER:
        return (2.0 * N - 2.0) / N
    if kind == polytrope.ISOTHERMAL2D:
        return 1.0
    raise ValueError(f"no family exponent for profile kind {kind!r}")


@dataclass(frozen=True)
class FamilySolution:
    """Profile + scale trajectory + closure forming an exact solution."""

    kind: str
    N: int
    K: float
    gamma: float
    g: float
    lam: float
    profile: polytrope.PolytropeProfile
    scale: ScaleTrajectory

    @property
    def support_zero(self) -> Optional[float]:
        return self.profile.first_zero


def build_family(kind: str, N: int, K: float, lam: float, a0: float, a1: float,
                 t_end: float, dt: float = 1e-3, alpha: float = 1.0,
                 profile_z_max: float = 50.0, profile_h: float = 1e-3,
                 g: float = 1.0, mu: Optional[float] = None) -> FamilySolution:
    """Construct an exact family by solving the coupled profile + scale ODEs.

    The implied forcing mu is derived from (kind, N, K, lambda); passing mu
    explicitly merely cross-checks the triple and raises on mismatch.
    Only g = 1 admits the separable form.
    """
    if g != 1.0:
        raise ValueError("separable families require g = 1")
    mu_implied = coupling_mu(kind, N, K, lam)
    if mu is not None and abs(mu - mu_implied) > 1e-12 * max(1.0, abs(mu_implied)):
        raise ValueError(
            f"inconsistent coupling: mu={mu:g} but lambda={lam:g}, K={K:g} "
            f"imply mu={mu_implied:g}")
    profile = polytrope.solve_generalized_profile(
        kind, N, K, mu_implied, alpha, z_max=profile_z_max, h=profile_h)
    if kind == polytrope.POWER and profile.first_zero is None:
        raise NumericalError(
            "power profile has no zero within the sampled span; increase profile_z_max")
    scale = integrate_scale(N, lam, a0, a1, t_end, dt=dt)
    return FamilySolution(kind=kind, N=N, K=K, gamma=family_gamma(kind, N),
                          g=g, lam=lam, profile=profile, scale=scale)


def family_state(fam: FamilySolution, t: float, r) -> Tuple[np.ndarray, np.ndarray]:
    """Density and velocity fields of the family at time t on radii r.

    u = (a'/a) r everywhere; rho follows the profile mapping and is 0 outside
    the support a(t)*Z_mu for the power kind.
    """
    a, adot = fam.scale.state_at(t)
    r = np.asarray(r, dtype=float)
    rho = polytrope.profile_to_density(fam.profile, a, r)
    u = (adot / a) * r
    return np.atleast_1d(rho), np.atleast_1d(u)


FieldFn = Callable[[float, np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ResidualNorms:
    """Sup norms of the radial mass and momentum equation residuals."""

    mass: float
    momentum: float
    dr: float
    dt: float
    n_points: int


def pde_residual(fields: FieldFn, N: int, gamma: float, K: float, g: float,
                 t: float, radii: np.ndarray, dr: float, dt: float,
                 beta: float = 0.0, support_floor: float = 1e-12) -> ResidualNorms:
    """Centered finite-difference residuals of the radial gas equations.

    fields(t, r) -> (rho, u) supplies the candidate solution.  The mass
    residual is rho_t + u rho_r + rho u_r + (N-1) rho u / r; the momentum
    residual is rho (u_t + u u_r) + P_r + rho Phi_r + beta rho u with
    P = K rho^gamma and Phi_r from the cumulative midpoint enclosed-mass
    quadrature at step dr.  Only radii whose full difference stencil stays
    above support_floor * max(rho) contribute to the sup norms.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii - dr <= 0.0):
        raise ValueError("all radii must exceed the spatial step dr")
    if t - dt < 0.0:
        raise ValueError("t must exceed the temporal step dt")

    rho0, u0 = fields(t, radii)
    max_rho = float(np.max(rho0)) if rho0.size else 0.0
    if max_rho == 0.0:
        return ResidualNorms(mass=0.0, momentum=0.0, dr=dr, dt=dt, n_points=len(radii))

    rho_tp, u_tp = fields(t + dt, radii)
    rho_tm, u_tm = fields(t - dt, radii)
    rho_rp, u_rp = fields(t, radii + dr)
    rho_rm, u_rm = fields(t, radii - dr)

    rho_t = (rho_tp - rho_tm) / (2.0 * dt)
    u_t = (u_tp - u_tm) / (2.0 * dt)
    rho_r = (rho_rp - rho_rm) / (2.0 * dr)
    u_r = (u_rp - u_rm) / (2.0 * dr)
    P_r = (K * rho_rp ** gamma - K * rho_rm ** gamma) / (2.0 * dr)

    # enclosed mass on a midpoint grid at a quarter of the difference step,
    # so the quadrature error stays well below the stencil truncation
    r_hi = float(np.max(radii))
    dq = 0.25 * dr
    n_q = int(math.ceil(r_hi / dq)) + 8
    edges = np.arange(n_q + 1) * dq
    mids = 0.5 * (edges[:-1] + edges[1:])
    rho_q, _ = fields(t, mids)
    menc_edges = np.concatenate(([0.0], np.cumsum(rho_q * mids ** (N - 1) * dq)))
    menc = np.interp(radii, edges, menc_edges)
    alpha = dimension_constants(N).alpha
    phi_r = alpha * g * menc / radii ** (N - 1)

    mass_res = rho_t + u0 * rho_r + rho0 * u_r + (N - 1) * rho0 * u0 / radii
    mom_res = rho0 * (u_t + u0 * u_r) + P_r + rho0 * phi_r + beta * rho0 * u0

    thresh = support_floor * max_rho
    mask = ((rho0 > thresh) & (rho_rp > thresh) & (rho_rm > thresh)
            & (rho_tp > thresh) & (rho_tm > thresh))
    if not np.any(mask):
        raise ValueError("no evaluation radii survive the support mask; "
                         "move radii inside the support or reduce dr")
    return ResidualNorms(mass=float(np.max(np.abs(mass_res[mask]))),
                         momentum=float(np.max(np.abs(mom_res[mask]))),
                         dr=dr, dt=dt, n_points=int(np.sum(mask)))


def family_residual(fam: FamilySolution, t: float, radii: np.ndarray,
                    dr: float, dt: float) -> ResidualNorms:
    """PDE residual norms of an exact family at time t."""

    def fields(tt: float, rr: np.ndarray):
        return family_state(fam, tt, rr)

    return pde_residual(fields, fam.N, fam.gamma, fam.K, fam.g,
                        t, radii, dr, dt, beta=0.0)
