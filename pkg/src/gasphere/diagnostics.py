"""Mass, energy, virial series, and the blowup/expansion classification.

All quadratures are midpoint rules with exact shell weights: a cell value
f_i is weighted by the true shell measure V(N) (r_out^N - r_in^N), which
makes the mass of piecewise-constant data exact and everything else second
order.  The two-dimensional potential energy never goes through Phi: it is
the pairwise ring-kernel sum (1/2) g sum_ij m_i m_j ln(max(r_i, r_j)),
whose kernel is the exact angular mean of ln|x - y| over circles.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .geometry import dimension_constants
from .hydro import (EvolveResult, GravityField, RadialState,
                    VACUUM_FLOOR_FRACTION, poisson_radial)

#: absolute tolerance (times max(1, scale)) for treating an energy as zero
E_ZERO_TOL = 1e-10
#: tolerance for gamma sitting exactly on the critical exponent 2(N-1)/N
GAMMA_TOL = 1e-12

OUTCOME_BLOWUP = "finite-time-blowup"
OUTCOME_EXPANSION = "global-expansion-bound"
OUTCOME_INCONCLUSIVE = "inconclusive"

TAG_THM1 = "Thm1-2D"
TAG_EXPANSION = "Thm2-expansion"
TAG_THM2_2A = "Thm2-2a"
TAG_THM2_2B = "Thm2-2b"
TAG_THM3_1 = "Thm3-1"
TAG_THM3_2 = "Thm3-2"
TAG_REMARK = "Remark-critical"
TAG_INCONCLUSIVE = "inconclusive"


def critical_gamma(N: int) -> float:
    return 2.0 * (N - 1.0) / N


def _cell_volumes(state: RadialState) -> np.ndarray:
    rf = state.faces()
    return dimension_constants(state.N).volume * (rf[1:] ** state.N - rf[:-1] ** state.N)


def total_mass(state: RadialState) -> float:
    """Total mass by exact integration of the piecewise-constant density."""
    return float(np.sum(state.rho * _cell_volumes(state)))


def ring_potential_energy(r: np.ndarray, ring_mass: np.ndarray, g: float) -> float:
    """(1/2) g sum_ij m_i m_j ln(max(r_i, r_j)) over circular rings.

    ln(max) is the angular mean of ln|x - y| for points on circles of radii
    r_i, r_j (including i = j), so this is the radial reduction of the
    two-dimensional pairwise potential energy (1/2) g integral of
    rho(x) rho(y) ln|x - y|.
    """
    kernel = np.log(np.maximum.outer(r, r))
    return 0.5 * g * float(ring_mass @ kernel @ ring_mass)


@dataclass(frozen=True)
class EnergyBreakdown:
    t: float
    kinetic: float
    internal: float
    potential: float

    @property
    def total(self) -> float:
        return self.kinetic + self.internal + self.potential


def energy(state: RadialState, gravity: Optional[GravityField] = None) -> EnergyBreakdown:
    """Kinetic, internal and potential energy of a radial state.

    internal is P/(gamma-1) for gamma > 1 and K rho ln rho for gamma = 1
    (cells at or below the vacuum floor are excluded from the logarithm).
    The potential term is (1/2) rho Phi for N >= 3 and the pairwise ring
    sum for N = 2.
    """
    vols = _cell_volumes(state)
    kinetic = 0.5 * float(np.sum(state.rho * state.u ** 2 * vols))
    if state.gamma > 1.0:
        internal = float(np.sum(state.pressure() * vols)) / (state.gamma - 1.0)
    else:
        floor = VACUUM_FLOOR_FRACTION * float(np.max(state.rho, initial=0.0))
        live = state.rho > max(floor, 0.0)
        rho_live = state.rho[live]
        internal = state.K * float(np.sum(rho_live * np.log(rho_live) * vols[live]))
    if state.N == 2:
        potential = ring_potential_energy(np.asarray(state.r), state.rho * vols, state.g)
    else:
        if gravity is None:
            gravity = poisson_radial(state)
        potential = 0.5 * float(np.sum(state.rho * gravity.phi * vols))
    return EnergyBreakdown(t=state.t, kinetic=kinetic, internal=internal,
                           potential=potential)


@dataclass(frozen=True)
class VirialSample:
    t: float
    H: float
    Hdot_formula: float
    Hddot_formula: float
    Hdot_measured: Optional[float] = None
    Hddot_measured: Optional[float] = None


def virial_sample(state: RadialState,
                  gravity: Optional[GravityField] = None) -> VirialSample:
    """Second-inertia value and its first two formula derivatives.

    H = int rho r^2, Hdot = 2 int rho u r, and Hddot by the undamped
    identity: 2 int(rho u^2 + N P) + (N-2) int rho Phi for N >= 3, and
    2 int(rho u^2 + 2 P) - g M^2 for N = 2.
    """
    vols = _cell_volumes(state)
    r = np.asarray(state.r)
    H = float(np.sum(state.rho * r ** 2 * vols))
    Hdot = 2.0 * float(np.sum(state.rho * state.u * r * vols))
    ke2 = float(np.sum(state.rho * state.u ** 2 * vols))
    P_int = float(np.sum(state.pressure() * vols))
    if state.N == 2:
        M = total_mass(state)
        Hddot = 2.0 * (ke2 + 2.0 * P_int) - state.g * M * M
    else:
        if gravity is None:
            gravity = poisson_radial(state)
        pot = float(np.sum(state.rho * gravity.phi * vols))
        Hddot = 2.0 * (ke2 + state.N * P_int) + (state.N - 2.0) * pot
    return VirialSample(t=state.t, H=H, Hdot_formula=Hdot, Hddot_formula=Hddot)


def virial_series(samples: Sequence[VirialSample]) -> List[VirialSample]:
    """Fill measured derivatives by finite differences of the H samples.

    Requires at least 3 uniformly spaced samples.  Interior points use
    centered second-order stencils; endpoints use one-sided second-order
    stencils (the plain three-point stencils when only 3 samples exist).
    """
    n = len(samples)
    if n < 3:
        raise ValueError("need at least 3 samples to difference")
    t = np.array([s.t for s in samples])
    H = np.array([s.H for s in samples])
    dt = np.diff(t)
    step = float(dt[0])
    if step <= 0.0 or np.any(np.abs(dt - step) > 1e-8 * step):
        raise ValueError("samples must be uniformly spaced in time")

    Hdot = np.empty(n)
    Hddot = np.empty(n)
    Hdot[1:-1] = (H[2:] - H[:-2]) / (2.0 * step)
    Hddot[1:-1] = (H[2:] - 2.0 * H[1:-1] + H[:-2]) / step ** 2
    Hdot[0] = (-3.0 * H[0] + 4.0 * H[1] - H[2]) / (2.0 * step)
    Hdot[-1] = (3.0 * H[-1] - 4.0 * H[-2] + H[-3]) / (2.0 * step)
    if n >= 4:
        Hddot[0] = (2.0 * H[0] - 5.0 * H[1] + 4.0 * H[2] - H[3]) / step ** 2
        Hddot[-1] = (2.0 * H[-1] - 5.0 * H[-2] + 4.0 * H[-3] - H[-4]) / step ** 2
    else:
        Hddot[0] = Hddot[1]
        Hddot[-1] = Hddot[1]
    return [replace(s, Hdot_measured=float(Hdot[i]), Hddot_measured=float(Hddot[i]))
            for i, s in enumerate(samples)]


@dataclass(frozen=True)
class StationaryReport:
    """Both sides of the stationary pressure identity and their mismatch."""

    N: int
    lhs: float
    rhs: float
    rel_mismatch: float
    max_speed: float
    velocity_warning: bool


def stationary_identities(state: RadialState,
                          gravity: Optional[GravityField] = None) -> StationaryReport:
    """Check N int P = -((N-2)/2) int rho Phi (N >= 3) or int P = g M^2 / 4 (N = 2).

    Expects u = 0; a nonzero velocity only sets velocity_warning, it does
    not invalidate the quadratures.
    """
    vols = _cell_volumes(state)
    P_int = float(np.sum(state.pressure() * vols))
    if state.N == 2:
        M = total_mass(state)
        lhs = P_int
        rhs = state.g * M * M / 4.0
    else:
        if gravity is None:
            gravity = poisson_radial(state)
        pot = float(np.sum(state.rho * gravity.phi * vols))
        lhs = state.N * P_int
        rhs = -0.5 * (state.N - 2.0) * pot
    scale = max(abs(lhs), abs(rhs), 1e-300)
    max_speed = float(np.max(np.abs(state.u), initial=0.0))
    c_max = float(np.max(state.sound_speed(), initial=0.0))
    return StationaryReport(N=state.N, lhs=lhs, rhs=rhs,
                            rel_mismatch=abs(lhs - rhs) / scale,
                            max_speed=max_speed,
                            velocity_warning=max_speed > 1e-8 * max(c_max, 1e-300))


def theorem1_functional(state: RadialState) -> float:
    """The 2D gap functional 2 int (rho u^2 + 2 P) dx."""
    if state.N != 2:
        raise ValueError("the gap functional is defined for N = 2")
    vols = _cell_volumes(state)
    ke2 = float(np.sum(state.rho * state.u ** 2 * vols))
    return 2.0 * (ke2 + 2.0 * float(np.sum(state.pressure() * vols)))


def measured_gap(result: EvolveResult, window: Optional[float] = None) -> float:
    """min over recorded snapshots of g M^2 - 2 int (rho u^2 + 2 P).

    window restricts the minimum to snapshot times t <= window (the gap of
    the observed early phase; a collapsing run eventually destroys it).
    """
    gaps = []
    for snap in result.snapshots:
        if window is not None and snap.state.t > window * (1.0 + 1e-12):
            continue
        s = snap.state
        M = total_mass(s)
        gaps.append(s.g * M * M - theorem1_functional(s))
    if not gaps:
        raise ValueError("no snapshots inside the gap window")
    return min(gaps)


@dataclass(frozen=True)
class BlowupVerdict:
    theorem_tag: str
    outcome: str
    bound: Optional[float]
    checked: Dict[str, object]


@dataclass(frozen=True)
class ExpansionBound:
    rate: float
    weight: float
    branch: str


def expansion_bound(N: int, gamma: float, E: float, M: float,
                    K: Optional[float] = None,
                    domain_measure: Optional[float] = None,
                    e_scale: float = 1.0) -> ExpansionBound:
    """Lower expansion rate of the support radius for N in {3, 4}.

    E > 0 with gamma >= 2(N-1)/N: rate sqrt((N-2) E / M), weight 1 (the
    bound reads lim inf R(t)/t >= rate).  E = 0 with gamma > 2(N-1)/N:
    rate sqrt((N gamma - 2(N-1)) K M^(gamma-1) / (gamma-1)) together with
    the weight |Omega|^((gamma-1)/2) multiplying R(t)/t on the left side.
    """
    if N not in (3, 4):
        raise ValueError(f"expansion bounds cover N = 3, 4 only, got N={N}")
    if M <= 0.0:
        raise ValueError("M must be positive")
    gc = critical_gamma(N)
    zero_tol = E_ZERO_TOL * max(1.0, e_scale)
    if E > zero_tol:
        if gamma < gc - GAMMA_TOL:
            raise ValueError(
                f"positive-energy branch needs gamma >= {gc:g}, got {gamma:g}")
        return ExpansionBound(rate=math.sqrt((N - 2.0) * E / M), weight=1.0,
                              branch="positive-energy")
    if abs(E) <= zero_tol:
        if gamma <= gc + GAMMA_TOL:
            raise ValueError(
                f"zero-energy branch needs gamma > {gc:g} strictly, got {gamma:g}")
        if K is None or K <= 0.0:
            raise ValueError("zero-energy branch needs the pressure constant K")
        if domain_measure is None or domain_measure <= 0.0:
            raise ValueError("zero-energy branch needs the domain measure")
        rate = math.sqrt((N * gamma - 2.0 * (N - 1.0)) * K * M ** (gamma - 1.0)
                         / (gamma - 1.0))
        return ExpansionBound(rate=rate,
                              weight=domain_measure ** ((gamma - 1.0) / 2.0),
                              branch="zero-energy")
    raise ValueError("no expansion branch covers E < 0")


def classify_blowup(N: int, gamma: float, beta: float, E0: float, M: float,
                    g: float = 1.0,
                    sup_functional: Optional[float] = None,
                    eps: Optional[float] = None,
                    eps_margin: float = 0.0,
                    K: Optional[float] = None,
                    domain_measure: Optional[float] = None,
                    e_scale: float = 1.0) -> BlowupVerdict:
    """Match (N, gamma, beta, E0, ...) against the blowup/expansion statements.

    Pure and total: every input combination returns a verdict, with the
    checked hypothesis values echoed in ``checked``.  The energy-zero test
    uses |E0| <= 1e-10 max(1, e_scale); gamma sits on the critical exponent
    when |gamma - 2(N-1)/N| <= 1e-12.  For N = 2 the gap may be supplied
    either directly (eps) or as the observed sup of 2 int(rho u^2 + 2P)
    (sup_functional); supplying eps <= 0 is a contradiction and raises.
    """
    for name, val in (("N", N), ("gamma", gamma), ("beta", beta),
                      ("E0", E0), ("M", M), ("g", g)):
        if not math.isfinite(float(val)):
            raise ConfigError(f"{name} must be finite, got {val!r}")
    if N < 2 or gamma < 1.0 or beta < 0.0 or M <= 0.0 or g <= 0.0:
        raise ConfigError("need N >= 2, gamma >= 1, beta >= 0, M > 0, g > 0")

    gc = critical_gamma(N)
    zero_tol = E_ZERO_TOL * max(1.0, e_scale)
    e_sign = 0 if abs(E0) <= zero_tol else (1 if E0 > 0.0 else -1)
    on_critical = abs(gamma - gc) <= GAMMA_TOL
    checked: Dict[str, object] = {
        "N": N, "gamma": gamma, "gamma_critical": gc, "beta": beta,
        "E0": E0, "E0_sign": e_sign, "M": M, "e_zero_tol": zero_tol,
    }

    def verdict(tag: str, outcome: str, bound: Optional[float] = None,
                **extra) -> BlowupVerdict:
        checked.update(extra)
        return BlowupVerdict(theorem_tag=tag, outcome=outcome, bound=bound,
                             checked=dict(sorted(checked.items())))

    if N == 2:
        if eps is not None and eps <= 0.0:
            raise ConfigError(f"a supplied 2D gap must be positive, got eps={eps:g}")
        gap = eps
        if gap is None and sup_functional is not None:
            gap = g * M * M - sup_functional
        if beta > 0.0:
            return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                           note="the 2D gap statement assumes no damping")
        if gap is None:
            return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                           note="no gap measurement supplied")
        if gap <= max(eps_margin, 0.0):
            return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE, gap=gap,
                           eps_margin=eps_margin,
                           note="observed gap does not clear the margin")
        return verdict(TAG_THM1, OUTCOME_BLOWUP, gap=gap, eps_margin=eps_margin)

    if gamma <= 1.0 + GAMMA_TOL:
        return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                       note="the energy-sign statements need gamma > 1")

    if e_sign < 0 and on_critical and N >= 4:
        return verdict(TAG_REMARK, OUTCOME_BLOWUP)

    if beta == 0.0:
        if e_sign > 0:
            if N in (3, 4) and gamma >= gc - GAMMA_TOL:
                rate = expansion_bound(N, gamma, E0, M, e_scale=e_scale)
                return verdict(TAG_EXPANSION, OUTCOME_EXPANSION, bound=rate.rate,
                               rate_weight=rate.weight, branch=rate.branch)
            return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                           note="positive energy is covered only for N in {3, 4} "
                                "with gamma at or above critical")
        if e_sign == 0:
            if N in (3, 4) and gamma > gc + GAMMA_TOL:
                if K is None or domain_measure is None:
                    return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                                   note="zero-energy expansion rate needs K and "
                                        "the domain measure")
                rate = expansion_bound(N, gamma, E0, M, K=K,
                                       domain_measure=domain_measure,
                                       e_scale=e_scale)
                return verdict(TAG_EXPANSION, OUTCOME_EXPANSION, bound=rate.rate,
                               rate_weight=rate.weight, branch=rate.branch, K=K,
                               domain_measure=domain_measure)
            if N >= 4 and gamma < gc - GAMMA_TOL:
                return verdict(TAG_THM2_2B, OUTCOME_BLOWUP, K=K,
                               domain_measure=domain_measure)
            return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                           note="zero energy at or below critical gamma is "
                                "covered only for N >= 4 with gamma strictly "
                                "below critical")
        if N >= 4 and gamma <= gc + GAMMA_TOL:
            return verdict(TAG_THM2_2A, OUTCOME_BLOWUP)
        return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                       note="negative energy is stated only for N >= 4 with "
                            "gamma at or below critical")

    # beta > 0
    if e_sign < 0:
        if N >= 4 and gamma <= gc + GAMMA_TOL:
            return verdict(TAG_THM3_1, OUTCOME_BLOWUP)
        return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                       note="damped negative energy is stated only for N >= 4 "
                            "with gamma at or below critical")
    if e_sign == 0:
        if N >= 4 and gamma < gc - GAMMA_TOL:
            return verdict(TAG_THM3_2, OUTCOME_BLOWUP, K=K,
                           domain_measure=domain_measure)
        return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                       note="damped zero energy is stated only for N >= 4 with "
                            "gamma strictly below critical")
    return verdict(TAG_INCONCLUSIVE, OUTCOME_INCONCLUSIVE,
                   note="no damped statement covers positive energy")


def _positive_quadratic_root(a: float, b: float, c: float) -> float:
    """Positive root of a t^2 + b t + c with a < 0, c >= 0."""
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise ValueError("quadratic bound has no real root")
    root = (b + math.sqrt(disc)) / (-2.0 * a)
    if root <= 0.0:
        raise ValueError("quadratic bound has no positive root")
    return root


def _decaying_exponential_root(C1: float, C2: float, beta: float, slope: float) -> float:
    """First positive root of C1 + C2 exp(-beta t) + slope t (slope < 0)."""
    def f(t: float) -> float:
        return C1 + C2 * math.exp(-beta * t) + slope * t

    hi = max(1.0, -(C1 + abs(C2)) / slope)
    tries = 0
    while f(hi) > 0.0:
        hi *= 2.0
        tries += 1
        if tries > 200:
            raise ValueError("failed to bracket the damped bound's root")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def blowup_time_bound(tag: str, H0: float, Hdot0: float, *,
                      eps: Optional[float] = None,
                      N: Optional[int] = None,
                      E0: Optional[float] = None,
                      beta: Optional[float] = None,
                      gamma: Optional[float] = None,
                      K: Optional[float] = None,
                      M: Optional[float] = None,
                      domain_measure: Optional[float] = None) -> float:
    """Upper bound on the breakdown time implied by a blowup verdict.

    Thm1-2D: positive root of H0 + Hdot0 t - (eps/2) t^2.  Thm2-2a (and the
    critical remark at beta = 0): root of H0 + Hdot0 t + (N-2) E0 t^2.
    Thm2-2b: the same with quadratic coefficient
    (N gamma - 2(N-1)) K M^gamma |Omega|^(1-gamma) / (gamma-1).  Thm3-1 and
    Thm3-2: root of C1 + C2 exp(-beta t) + slope t with slope
    2 (N-2) E0 / beta (respectively the pressure form divided by beta) and
    C2 = (slope - Hdot0) / beta, C1 = H0 - C2 fixed by matching H(0), Hdot(0).

    Raises ValueError when the bound has no positive root (a vacuous bound
    for these initial values).
    """
    if H0 < 0.0:
        raise ValueError("H0 must be nonnegative")

    if tag == TAG_THM1:
        if eps is None or eps <= 0.0:
            raise ConfigError("the 2D bound needs a positive gap eps")
        return _positive_quadratic_root(-0.5 * eps, Hdot0, H0)

    if tag == TAG_REMARK:
        tag = TAG_THM2_2A if not beta else TAG_THM3_1

    if tag == TAG_THM2_2A:
        if N is None or E0 is None:
            raise ConfigError("the undamped negative-energy bound needs N and E0")
        a = (N - 2.0) * E0
        if a >= 0.0:
            raise ValueError("bound is vacuous: (N-2) E0 is not negative")
        return _positive_quadratic_root(a, Hdot0, H0)

    if tag == TAG_THM2_2B:
        if None in (N, gamma, K, M, domain_measure):
            raise ConfigError("the zero-energy bound needs N, gamma, K, M "
                              "and the domain measure")
        a = ((N * gamma - 2.0 * (N - 1.0)) * K * M ** gamma
             * domain_measure ** (1.0 - gamma) / (gamma - 1.0))
        if a >= 0.0:
            raise ValueError("bound is vacuous: gamma is not below critical")
        return _positive_quadratic_root(a, Hdot0, H0)

    if tag in (TAG_THM3_1, TAG_THM3_2):
        if beta is None or beta <= 0.0 or N is None:
            raise ConfigError("the damped bounds need beta > 0 and N")
        if tag == TAG_THM3_1:
            if E0 is None:
                raise ConfigError("the damped negative-energy bound needs E0")
            slope = 2.0 * (N - 2.0) * E0 / beta
        else:
            if None in (gamma, K, M, domain_measure):
                raise ConfigError("the damped zero-energy bound needs gamma, K, "
                                  "M and the domain measure")
            slope = (2.0 * (N * gamma - 2.0 * (N - 1.0)) * K * M ** gamma
                     * domain_measure ** (1.0 - gamma) / (beta * (gamma - 1.0)))
        if slope >= 0.0:
            raise ValueError("bound is vacuous: the linear slope is not negative")
        C2 = (slope - Hdot0) / beta
        C1 = H0 - C2
        return _decaying_exponential_root(C1, C2, beta, slope)

    raise ConfigError(f"no time bound is associated with tag {tag!r}")


def run_diagnostics_rows(result: EvolveResult) -> List[Dict[str, float]]:
    """Per-snapshot diagnostics of an evolve result.

    Keys: t, M, E_kin, E_int, E_pot, E_tot, H, Hdot_f, Hddot_f, Hdot_m,
    Hddot_m, R_support.  The measured virial derivatives difference the
    longest uniformly spaced snapshot prefix; rows beyond it carry NaN.
    """
    snaps = result.snapshots
    floor = VACUUM_FLOOR_FRACTION * float(np.max(snaps[0].state.rho))
    samples = [virial_sample(s.state, s.gravity) for s in snaps]

    times = np.array([s.t for s in samples])
    n_uniform = len(samples)
    if len(times) >= 3:
        step = times[1] - times[0]
        for i in range(2, len(times)):
            if abs((times[i] - times[i - 1]) - step) > 1e-8 * max(step, 1e-300):
                n_uniform = i
                break
    else:
        n_uniform = 0
    if n_uniform >= 3:
        measured = virial_series(samples[:n_uniform])
        samples = measured + samples[n_uniform:]

    rows: List[Dict[str, float]] = []
    for snap, vs in zip(snaps, samples):
        e = energy(snap.state, snap.gravity)
        rows.append({
            "t": snap.state.t,
            "M": total_mass(snap.state),
            "E_kin": e.kinetic,
            "E_int": e.internal,
            "E_pot": e.potential,
            "E_tot": e.total,
            "H": vs.H,
            "Hdot_f": vs.Hdot_formula,
            "Hddot_f": vs.Hddot_formula,
            "Hdot_m": math.nan if vs.Hdot_measured is None else vs.Hdot_measured,
            "Hddot_m": math.nan if vs.Hddot_measured is None else vs.Hddot_measured,
            "R_support": snap.state.support_radius(floor),
        })
    return rows


DIAGNOSTIC_COLUMNS = ("t", "M", "E_kin", "E_int", "E_pot", "E_tot",
                      "H", "Hdot_f", "Hddot_f", "Hdot_m", "Hddot_m", "R_support")


def write_diagnostics_csv(rows: Sequence[Dict[str, float]], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(DIAGNOSTIC_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(row[c])) for c in DIAGNOSTIC_COLUMNS) + "\n")
