"""Finite-volume evolution of the radial self-gravitating gas equations.

Scheme summary: cell-centered uniform grid on [0, r_max] in shell-volume
form, local Lax-Friedrichs (Rusanov) face fluxes with optional second-order
minmod reconstruction of the primitives, the geometric pressure source in
the well-balanced cell-average form P_i (A_out - A_in) / V_i, reflecting
inner boundary (automatic at r = 0 where the face area vanishes), outflow
outer boundary, and a two-stage strong-stability-preserving Runge-Kutta
update with gravity recomputed at every stage.  A vacuum floor of
1e-14 x (initial max density) keeps near-empty cells inert: their
velocities are zeroed and any negative densities are clamped (the clamped
mass is logged).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import NumericalError
from .geometry import dimension_constants

#: vacuum floor as a fraction of the initial maximum density
VACUUM_FLOOR_FRACTION = 1e-14
#: collapse indicator: max density exceeding this factor times its initial value
COLLAPSE_GROWTH_FACTOR = 1e3

TERM_T_END = "t_end"
TERM_SUPPORT_BOUNDARY = "support_boundary"
TERM_COLLAPSE_INDICATOR = "collapse_indicator"


@dataclass(frozen=True)
class RadialState:
    """Density and radial velocity on a uniform cell-centered grid.

    r are cell centers, dr the (uniform) widths; the first face sits at
    r = 0.  gamma >= 1, K > 0, g > 0, beta >= 0, rho >= 0.
    """

    N: int
    gamma: float
    K: float
    g: float
    beta: float
    r: np.ndarray
    dr: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.N < 2:
            raise ValueError(f"dimension must be >= 2, got N={self.N}")
        if self.gamma < 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if self.K <= 0.0:
            raise ValueError(f"K must be > 0, got {self.K}")
        if self.g <= 0.0:
            raise ValueError(f"g must be > 0, got {self.g}")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        n = len(self.r)
        if not (len(self.dr) == len(self.rho) == len(self.u) == n) or n < 4:
            raise ValueError("r, dr, rho, u must share a length >= 4")
        if np.any(self.rho < 0.0):
            raise ValueError("rho must be nonnegative")
        h = float(self.dr[0])
        if not np.allclose(self.dr, h, rtol=1e-12, atol=0.0):
            raise ValueError("grid widths must be uniform")
        if abs(self.r[0] - 0.5 * h) > 1e-10 * h:
            raise ValueError("innermost cell center must sit at dr/2 (first face at r = 0)")

    @property
    def n_cells(self) -> int:
        return len(self.r)

    @property
    def r_max(self) -> float:
        return float(self.r[-1] + 0.5 * self.dr[-1])

    def faces(self) -> np.ndarray:
        return np.concatenate(([0.0], np.asarray(self.r) + 0.5 * np.asarray(self.dr)))

    def shell_volumes(self) -> np.ndarray:
        rf = self.faces()
        return (rf[1:] ** self.N - rf[:-1] ** self.N) / self.N

    def sound_speed(self) -> np.ndarray:
        return _sound(self.rho, self.gamma, self.K)

    def pressure(self) -> np.ndarray:
        return self.K * self.rho ** self.gamma

    def support_radius(self, floor: float) -> float:
        above = self.rho > floor
        if not np.any(above):
            return 0.0
        return float(self.r[np.nonzero(above)[0][-1]])

    def velocity_total_variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self.u))))


def make_grid(n_cells: int, r_max: float) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform cell centers and widths covering [0, r_max]."""
    if n_cells < 4:
        raise ValueError("need at least 4 cells")
    if r_max <= 0.0:
        raise ValueError("r_max must be positive")
    h = r_max / n_cells
    r = (np.arange(n_cells) + 0.5) * h
    return r, np.full(n_cells, h)


def _sound(rho: np.ndarray, gamma: float, K: float) -> np.ndarray:
    if gamma == 1.0:
        return np.full_like(rho, math.sqrt(K))
    return np.sqrt(gamma * K * rho ** (gamma - 1.0))


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    same = (a > 0.0) & (b > 0.0)
    opp = (a < 0.0) & (b < 0.0)
    return np.where(same, np.minimum(a, b), np.where(opp, np.maximum(a, b), 0.0))


class _Mesh:
    """Precomputed geometric factors of a uniform radial grid."""

    def __init__(self, N: int, r: np.ndarray, dr: np.ndarray):
        self.N = N
        self.r = np.asarray(r, dtype=float)
        self.h = float(dr[0])
        self.faces = np.concatenate(([0.0], self.r + 0.5 * self.h))
        self.areas = self.faces ** (N - 1)
        self.vols = (self.faces[1:] ** N - self.faces[:-1] ** N) / N
        self.alpha = dimension_constants(N).alpha
        self.r_pow = self.r ** (N - 1)
        # kernel mass between the inner face and the cell center, per unit rho
        self.half_shell = (self.r ** N - self.faces[:-1] ** N) / N


def _gravity_centers(mesh: _Mesh, g: float, rho: np.ndarray) -> np.ndarray:
    """dPhi/dr at cell centers for the given density."""
    m_faces_in = np.concatenate(([0.0], np.cumsum(rho * mesh.vols)[:-1]))
    m_centers = m_faces_in + rho * mesh.half_shell
    return mesh.alpha * g * m_centers / mesh.r_pow


@dataclass(frozen=True)
class GravityField:
    """Radial gravity solve at cell centers: slope, potential, enclosed mass."""

    phi_r: np.ndarray
    phi: np.ndarray
    m_enc: np.ndarray


def poisson_radial(state: RadialState) -> GravityField:
    """Solve the radial field equation for the state's density.

    The slope comes from the exact piecewise-constant enclosed-mass
    quadrature (the same one the solver uses).  The potential integrates
    the slope inward by trapezoid from the outer face, anchored to the
    exterior closed form there: -g M / r^(N-2) for N >= 3 and g M ln(r)
    for N = 2 (matching the pairwise logarithmic kernel convention).
    """
    mesh = _Mesh(state.N, state.r, state.dr)
    N, g = state.N, state.g
    rho = np.asarray(state.rho, dtype=float)

    kernel_in = np.concatenate(([0.0], np.cumsum(rho * mesh.vols)[:-1]))
    kernel_centers = kernel_in + rho * mesh.half_shell
    kernel_tot = float(np.sum(rho * mesh.vols))
    phi_r = mesh.alpha * g * kernel_centers / mesh.r_pow

    mass_w = N * dimension_constants(N).volume
    m_enc = mass_w * kernel_centers
    m_tot = mass_w * kernel_tot

    r_out = mesh.faces[-1]
    if N == 2:
        phi_out = g * m_tot * math.log(r_out)
    else:
        phi_out = -g * m_tot / r_out ** (N - 2)
    xs = np.concatenate((mesh.r, [r_out]))
    fs = np.concatenate((phi_r, [mesh.alpha * g * kernel_tot / r_out ** (N - 1)]))
    segs = 0.5 * (fs[:-1] + fs[1:]) * np.diff(xs)
    phi = phi_out - np.cumsum(segs[::-1])[::-1]
    return GravityField(phi_r=phi_r, phi=phi, m_enc=m_enc)


def _rhs(mesh: _Mesh, gamma: float, K: float, g: float, beta: float,
         rho: np.ndarray, u: np.ndarray, second_order: bool):
    """Time derivatives of (rho, rho*u) in shell-volume form."""
    n = len(rho)
    if second_order:
        rho_e = np.concatenate(([rho[0]], rho, [rho[-1]]))
        u_e = np.concatenate(([-u[0]], u, [u[-1]]))
        d_rho = np.diff(rho_e)
        d_u = np.diff(u_e)
        s_rho = _minmod(d_rho[:-1], d_rho[1:])
        s_u = _minmod(d_u[:-1], d_u[1:])
    else:
        s_rho = np.zeros(n)
        s_u = np.zeros(n)

    # face j+1 takes its left value from cell j, its right value from cell j+1
    # (outer face: outflow copy of the last cell)
    rho_L = np.clip(rho + 0.5 * s_rho, 0.0, None)
    u_L = u + 0.5 * s_u
    rho_R = np.concatenate((np.clip(rho[1:] - 0.5 * s_rho[1:], 0.0, None), [rho[-1]]))
    u_R = np.concatenate((u[1:] - 0.5 * s_u[1:], [u[-1]]))

    P_L = K * rho_L ** gamma
    P_R = K * rho_R ** gamma
    s_max = np.maximum(np.abs(u_L) + _sound(rho_L, gamma, K),
                       np.abs(u_R) + _sound(rho_R, gamma, K))

    m_L = rho_L * u_L
    m_R = rho_R * u_R
    f_rho = np.concatenate(([0.0], 0.5 * (m_L + m_R) - 0.5 * s_max * (rho_R - rho_L)))
    f_mom = np.concatenate(([0.0], 0.5 * (m_L * u_L + P_L + m_R * u_R + P_R)
                            - 0.5 * s_max * (m_R - m_L)))

    A, V = mesh.areas, mesh.vols
    d_rho_dt = -(A[1:] * f_rho[1:] - A[:-1] * f_rho[:-1]) / V

    P_cell = K * rho ** gamma
    phi_r = _gravity_centers(mesh, g, rho)
    d_mom_dt = (-(A[1:] * f_mom[1:] - A[:-1] * f_mom[:-1]) / V
                + P_cell * (A[1:] - A[:-1]) / V
                - rho * phi_r - beta * rho * u)
    return d_rho_dt, d_mom_dt, phi_r


def cfl_limit(state: RadialState) -> float:
    """Largest dt allowed by the acoustic CFL condition (unit Courant number)."""
    s = float(np.max(np.abs(state.u) + state.sound_speed()))
    if s <= 0.0:
        return math.inf
    return float(state.dr[0]) / s


def _apply_floor(rho: np.ndarray, mom: np.ndarray, floor: float,
                 vols: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
    """Clamp negative densities, zero velocities in near-vacuum cells.

    Returns the kernel-mass change caused by clamping (0 when nothing was
    negative).
    """
    clipped = np.clip(rho, 0.0, None)
    shift = float(np.sum((clipped - rho) * vols))
    dead = clipped <= floor
    mom = np.where(dead, 0.0, mom)
    return clipped, mom, shift


def step(state: RadialState, dt: float, second_order: bool = True,
         floor: Optional[float] = None,
         stats: Optional[dict] = None) -> RadialState:
    """Advance one SSP-RK2 step.  dt must satisfy the acoustic CFL bound."""
    if not math.isfinite(dt) or dt <= 0.0:
        raise ValueError(f"dt must be positive and finite, got {dt}")
    limit = cfl_limit(state)
    if dt > limit * (1.0 + 1e-9):
        raise ValueError(f"dt={dt:g} violates the CFL bound {limit:g}")
    if floor is None:
        floor = VACUUM_FLOOR_FRACTION * float(np.max(state.rho))

    mesh = _Mesh(state.N, state.r, state.dr)
    gamma, K, g, beta = state.gamma, state.K, state.g, state.beta
    rho0 = np.asarray(state.rho, dtype=float)
    mom0 = rho0 * np.asarray(state.u, dtype=float)

    d_rho, d_mom, _ = _rhs(mesh, gamma, K, g, beta, rho0, state.u, second_order)
    rho1 = rho0 + dt * d_rho
    mom1 = mom0 + dt * d_mom
    rho1, mom1, shift1 = _apply_floor(rho1, mom1, floor, mesh.vols)
    u1 = np.where(rho1 > floor, mom1 / np.maximum(rho1, floor), 0.0)

    d_rho, d_mom, _ = _rhs(mesh, gamma, K, g, beta, rho1, u1, second_order)
    rho2 = 0.5 * (rho0 + rho1 + dt * d_rho)
    mom2 = 0.5 * (mom0 + mom1 + dt * d_mom)
    rho2, mom2, shift2 = _apply_floor(rho2, mom2, floor, mesh.vols)
    u2 = np.where(rho2 > floor, mom2 / np.maximum(rho2, floor), 0.0)

    if not (np.all(np.isfinite(rho2)) and np.all(np.isfinite(u2))):
        raise NumericalError(f"non-finite state after step at t={state.t:g}")
    if stats is not None:
        mass_w = state.N * dimension_constants(state.N).volume
        stats["floor_mass"] = stats.get("floor_mass", 0.0) + mass_w * (shift1 + shift2)
    return replace(state, rho=rho2, u=u2, t=state.t + dt)


@dataclass(frozen=True)
class Snapshot:
    """State plus its gravity solve at one output time."""

    state: RadialState
    gravity: GravityField
    tv_u: float


@dataclass(frozen=True)
class TerminationRecord:
    kind: str
    time: float
    detail: str = ""


@dataclass
class EvolveResult:
    snapshots: List[Snapshot]
    termination: TerminationRecord
    floor_mass_shift: float
    collapse_time: Optional[float]
    #: first snapshot time at which the velocity total variation exceeded
    #: twice its initial value (plus a tiny absolute allowance); None when
    #: the run stayed in that near-initial regime throughout
    tv_flag_time: Optional[float]

    @property
    def final(self) -> RadialState:
        return self.snapshots[-1].state

    def times(self) -> np.ndarray:
        return np.array([s.state.t for s in self.snapshots])


def evolve(state: RadialState, t_end: float, cfl: float = 0.4,
           snapshot_every: Optional[float] = None,
           second_order: bool = True,
           stop_on_collapse: bool = True,
           callbacks: Sequence[Callable[[RadialState], None]] = ()) -> EvolveResult:
    """March the state to t_end, recording snapshots at uniform intervals.

    The time step is the CFL fraction of the acoustic limit, further capped
    by the free-fall scale sqrt(dr / max|dPhi/dr|) and by 0.5/beta, and
    shortened to land exactly on snapshot times.  Termination: reaching
    t_end, the support touching the outer boundary, or (when
    stop_on_collapse) the collapse indicator max rho > 1e3 x initial.
    """
    if t_end <= state.t:
        raise ValueError("t_end must exceed the initial time")
    if not (0.0 < cfl <= 1.0):
        raise ValueError("cfl must lie in (0, 1]")
    if snapshot_every is None:
        snapshot_every = (t_end - state.t) / 50.0
    if snapshot_every <= 0.0:
        raise ValueError("snapshot_every must be positive")

    rho_max0 = float(np.max(state.rho))
    if rho_max0 <= 0.0:
        raise ValueError("initial state has no mass")
    floor = VACUUM_FLOOR_FRACTION * rho_max0
    tv0 = state.velocity_total_variation()
    tv_scale = float(np.max(np.abs(state.u)) + np.max(state.sound_speed()))
    tv_limit = 2.0 * tv0 + 1e-8 * max(tv_scale, 1.0)

    mesh = _Mesh(state.N, state.r, state.dr)
    stats: dict = {}
    snapshots: List[Snapshot] = []
    collapse_time: Optional[float] = None

    def record(s: RadialState):
        snapshots.append(Snapshot(state=s, gravity=poisson_radial(s),
                                  tv_u=s.velocity_total_variation()))
        for cb in callbacks:
            cb(s)

    record(state)
    next_snap = state.t + snapshot_every
    termination: Optional[TerminationRecord] = None
    boundary_guard = max(1, state.n_cells - 2)

    support0 = np.nonzero(state.rho > floor)[0]
    if len(support0) and support0[-1] >= boundary_guard:
        termination = TerminationRecord(
            TERM_SUPPORT_BOUNDARY, state.t,
            "initial support already reaches the outer cells; enlarge the domain")

    while termination is None:
        acoustic = cfl * cfl_limit(state)
        phi_r = _gravity_centers(mesh, state.g, state.rho)
        grav_scale = float(np.max(np.abs(phi_r)))
        dt = acoustic
        if grav_scale > 0.0:
            dt = min(dt, cfl * math.sqrt(mesh.h / grav_scale))
        if state.beta > 0.0:
            dt = min(dt, 0.5 / state.beta)
        if not math.isfinite(dt) or dt <= 0.0:
            raise NumericalError(f"time step collapsed to {dt!r} at t={state.t:g}")
        hit_snap = False
        hit_end = False
        if state.t + dt >= next_snap - 1e-12 * snapshot_every:
            dt = next_snap - state.t
            hit_snap = True
        if state.t + dt >= t_end - 1e-12 * max(t_end, 1.0):
            dt = t_end - state.t
            hit_end = True
            hit_snap = hit_snap and abs(next_snap - t_end) <= 1e-9 * snapshot_every
        if dt <= 0.0:
            raise NumericalError(f"time step underflow at t={state.t:g}")

        state = step(state, dt, second_order=second_order, floor=floor, stats=stats)

        rho_max = float(np.max(state.rho))
        if collapse_time is None and rho_max > COLLAPSE_GROWTH_FACTOR * rho_max0:
            collapse_time = state.t

        support_idx = np.nonzero(state.rho > floor)[0]
        if len(support_idx) and support_idx[-1] >= boundary_guard:
            termination = TerminationRecord(
                TERM_SUPPORT_BOUNDARY, state.t,
                "support reached the outer cells; enlarge the domain")
        elif stop_on_collapse and collapse_time is not None:
            termination = TerminationRecord(
                TERM_COLLAPSE_INDICATOR, state.t,
                f"max density exceeded {COLLAPSE_GROWTH_FACTOR:g} x initial")
        elif hit_end:
            termination = TerminationRecord(TERM_T_END, state.t)

        if termination is not None:
            record(state)
        elif hit_snap:
            record(state)
            next_snap += snapshot_every

    tv_flag_time: Optional[float] = None
    for snap in snapshots:
        if snap.tv_u > tv_limit:
            tv_flag_time = snap.state.t
            break
    return EvolveResult(snapshots=snapshots, termination=termination,
                        floor_mass_shift=stats.get("floor_mass", 0.0),
                        collapse_time=collapse_time,
                        tv_flag_time=tv_flag_time)


def hydrostatic_residual(state: RadialState) -> Tuple[float, float]:
    """Sup-norm of dP/dr + rho dPhi/dr over the support, and the central
    pressure-gradient scale max|dP/dr| used to normalize it."""
    gravity = poisson_radial(state)
    P = state.pressure()
    dP = np.gradient(P, state.r)
    resid = dP + state.rho * gravity.phi_r
    floor = VACUUM_FLOOR_FRACTION * float(np.max(state.rho))
    mask = state.rho > floor
    # np.gradient is one-sided at the ends; skip the touched cells
    mask[0] = mask[-1] = False
    idx = np.nonzero(mask)[0]
    if len(idx) == 0:
        return 0.0, 0.0
    scale = float(np.max(np.abs(dP[idx])))
    return float(np.max(np.abs(resid[idx]))), scale


def save_checkpoint(state: RadialState, path) -> None:
    """Bit-exact state serialization (numpy archive)."""
    np.savez(path,
             scalars=np.array([float(state.N), state.gamma, state.K,
                               state.g, state.beta, state.t]),
             r=state.r, dr=state.dr, rho=state.rho, u=state.u)


def load_checkpoint(path) -> RadialState:
    with np.load(path) as data:
        sc = data["scalars"]
        return RadialState(N=int(sc[0]), gamma=float(sc[1]), K=float(sc[2]),
                           g=float(sc[3]), beta=float(sc[4]),
                           r=data["r"], dr=data["dr"],
                           rho=data["rho"], u=data["u"], t=float(sc[5]))


def write_snapshot_csv(state: RadialState, gravity: GravityField, path) -> None:
    """Columns r, rho, u, phi_r; full float precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r,rho,u,phi_r\n")
        for r, rho, u, pr in zip(state.r, state.rho, state.u, gravity.phi_r):
            fh.write(f"{float(r)!r},{float(rho)!r},{float(u)!r},{float(pr)!r}\n")
