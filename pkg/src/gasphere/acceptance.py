"""Built-in verification battery behind the ``verify`` subcommand.

Each numbered check runs part of the library end to end against an
independent yardstick: closed-form solutions, quadrature oracles, conserved
quantities, or hand-derived classification tables.  Parameters and
tolerances are pinned here so a pass/fail line means the same thing on
every machine.  The test suite asserts the same checks one by one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np

from . import diagnostics, hydro, polytrope, setups, similarity


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str


# ---------------------------------------------------------------------------
# shared runs (cached so verify and the test suite pay for each once)

@lru_cache(maxsize=None)
def _lane_emden(n: float, z_max: float) -> polytrope.PolytropeProfile:
    return polytrope.solve_lane_emden(n, z_max=z_max, h=1e-4)


@lru_cache(maxsize=None)
def _power_family() -> similarity.FamilySolution:
    return similarity.build_family("power", 3, 1.0, 0.02, 1.0, -0.1, 0.5,
                                   dt=1e-3, alpha=1.0, profile_z_max=12.0,
                                   profile_h=5e-4)


@lru_cache(maxsize=None)
def _iso_family() -> similarity.FamilySolution:
    return similarity.build_family("isothermal2d", 2, 2.0 * math.pi, 0.2,
                                   1.0, -0.1, 0.5, dt=1e-3, alpha=0.0,
                                   profile_z_max=8.0, profile_h=5e-4)


@lru_cache(maxsize=None)
def _ball_run(cells: int, snapshot: float, beta: float):
    """Self-bound Gaussian ball near virial balance, mildly perturbed."""
    state = setups.gaussian_ball(cells, 9.0, N=3, gamma=1.4, K=2.5, g=1.0,
                                 rho_c=1.0, sigma=1.0, v0=0.25, cutoff=6.5,
                                 beta=beta)
    result = hydro.evolve(state, 1.6, snapshot_every=snapshot)
    return result, diagnostics.run_diagnostics_rows(result)


# ---------------------------------------------------------------------------
# the checks

def _c1_profile_analytic() -> Tuple[bool, str]:
    cases: Tuple[Tuple[float, Optional[float], Callable], ...] = (
        (0.0, math.sqrt(6.0), lambda z: 1.0 - z * z / 6.0),
        (1.0, math.pi, lambda z: np.sinc(z / np.pi)),
        (5.0, None, lambda z: (1.0 + z * z / 3.0) ** -0.5),
    )
    ok = True
    parts = []
    for n, zero_ref, analytic in cases:
        prof = _lane_emden(n, 1000.0 if n == 5 else 20.0)
        z0 = polytrope.first_zero(prof)
        if zero_ref is None:
            ok = ok and z0 is None
            parts.append("n=5 no zero to 1e3" if z0 is None
                         else f"n=5 unexpected zero {z0:.3f}")
            hi = 10.0
        else:
            zerr = abs(z0 - zero_ref) if z0 is not None else math.inf
            ok = ok and zerr <= 1e-8
            parts.append(f"n={n:g} zero err {zerr:.1e}")
            hi = min(z0 if z0 is not None else math.inf, 10.0)
        sel = prof.z <= hi + 1e-12
        yerr = float(np.max(np.abs(prof.y[sel] - analytic(prof.z[sel]))))
        ok = ok and yerr <= 1e-8
        parts.append(f"y err {yerr:.1e}")
    return ok, "; ".join(parts) + " (tol 1e-8)"


def _c2_density_ratio() -> Tuple[bool, str]:
    e0 = abs(polytrope.density_ratio(_lane_emden(0.0, 20.0)) - 1.0)
    e1 = abs(polytrope.density_ratio(_lane_emden(1.0, 20.0)) - 3.0 / math.pi ** 2)
    return (e0 <= 1e-6 and e1 <= 1e-6,
            f"n=0 err {e0:.1e}, n=1 err {e1:.1e} (tol 1e-6)")


def _c3_collapse_time() -> Tuple[bool, str]:
    lin = similarity.blowup_time(similarity.integrate_scale(3, 0.0, 1.0, -0.25, 5.0))
    lin_err = abs(lin - 4.0) if lin is not None else math.inf
    ok = lin_err <= 1e-10
    parts = [f"lam=0 err {lin_err:.1e} (tol 1e-10)"]
    worst_drift = 0.0
    for N in (2, 3):
        traj = similarity.integrate_scale(N, 1.0, 1.0, 0.0, 3.0)
        T = similarity.blowup_time(traj)
        T_quad = similarity.collapse_time_quadrature(N, 1.0, 1.0, 0.0)
        terr = abs(T - T_quad) if T is not None and T_quad is not None else math.inf
        ok = ok and terr <= 1e-6
        parts.append(f"N={N} |T - quad| {terr:.1e}")
        keep = traj.a >= 0.01 * traj.a0
        series = traj.first_integral_series()[keep]
        drift = float(np.max(np.abs(series - traj.first_integral0)))
        ok = ok and drift <= 1e-8 * max(1.0, abs(traj.first_integral0))
        worst_drift = max(worst_drift, drift)
    parts.append(f"drift {worst_drift:.1e} (tol 1e-8)")
    return ok, "; ".join(parts)


def _c4_family_residual_order() -> Tuple[bool, str]:
    t_eval = 0.25
    steps = (2e-3, 1e-3, 5e-4)
    ok = True
    parts = []
    for fam in (_power_family(), _iso_family()):
        if fam.kind == polytrope.POWER:
            edge = fam.scale.state_at(t_eval)[0] * fam.support_zero
            radii = np.linspace(0.15 * edge, 0.7 * edge, 48)
        else:
            radii = np.linspace(0.3, 3.0, 48)
        norms = [similarity.family_residual(fam, t_eval, radii, s, s)
                 for s in steps]
        for comp in ("mass", "momentum"):
            v = [getattr(nn, comp) for nn in norms]
            ratios = (v[0] / v[1], v[1] / v[2])
            ok = ok and all(2.8 <= r <= 5.2 for r in ratios)
            parts.append(f"{fam.kind} {comp} x{ratios[0]:.2f},x{ratios[1]:.2f}")
    return ok, "; ".join(parts) + " (band 4 +/- 30%)"


def _c5_hydrostatic_balance() -> Tuple[bool, str]:
    rel = []
    for cells in (1024, 2048, 4096):
        state = setups.stationary_gamma65(cells, 20.0)
        resid, scale = hydro.hydrostatic_residual(state)
        rel.append(resid / scale)
    ok = (rel[2] <= 1e-3
          and rel[0] / rel[1] >= 2.0 and rel[1] / rel[2] >= 2.0)
    return ok, (f"relative residual {rel[0]:.2e} -> {rel[1]:.2e} -> "
                f"{rel[2]:.2e} (<= 1e-3 at 4096, halving gains >= 2x)")


def _c6_stationary_identities() -> Tuple[bool, str]:
    rep3 = diagnostics.stationary_identities(setups.stationary_gamma65(4096, 40.0))
    rep2 = diagnostics.stationary_identities(setups.isothermal_disk(4096, 50.0))
    ok = rep3.rel_mismatch <= 1e-2 and rep2.rel_mismatch <= 1e-2
    return ok, (f"N=3 mismatch {rep3.rel_mismatch:.2e}; "
                f"N=2 mismatch {rep2.rel_mismatch:.2e} (tol 1e-2)")


def _c7_energy_law() -> Tuple[bool, str]:
    drifts = []
    for cells in (1024, 2048):
        _, rows = _ball_run(cells, 0.05, 0.0)
        E = np.array([row["E_tot"] for row in rows])
        drifts.append(float(np.max(np.abs(E - E[0])) / abs(E[0])))
    _, rows = _ball_run(2048, 0.05, 1.0)
    E = np.array([row["E_tot"] for row in rows])
    dE = np.diff(E)
    monotone = bool(np.all(dE <= 0.0))
    ok = drifts[1] <= 5e-3 and drifts[1] < drifts[0] and monotone
    return ok, (f"beta=0 drift {drifts[0]:.1e} @1024 -> {drifts[1]:.1e} @2048 "
                f"(tol 5e-3); beta=1 monotone={monotone} "
                f"(max step {float(np.max(dE)):+.1e})")


def _c8_virial_identity() -> Tuple[bool, str]:
    errs = []
    for cells, snap in ((1024, 0.05), (2048, 0.025)):
        _, rows = _ball_run(cells, snap, 0.0)
        hf = np.array([row["Hddot_f"] for row in rows])
        hm = np.array([row["Hddot_m"] for row in rows])
        errs.append(float(np.nanmax(np.abs(hm - hf) / np.maximum(1.0, np.abs(hf)))))
    ok = errs[0] <= 0.05 and errs[1] < errs[0]
    parts = [f"run err {errs[0]:.1e} -> {errs[1]:.1e} (tol 5e-2)"]

    fam = _power_family()
    tc, step = 0.2, 1e-3
    r_max = 1.05 * fam.scale.state_at(tc)[0] * fam.support_zero
    H = []
    hf0 = 0.0
    for k in (-1, 0, 1):
        sample = diagnostics.virial_sample(
            setups.state_from_family(fam, tc + k * step, 8192, r_max))
        H.append(sample.H)
        if k == 0:
            hf0 = sample.Hddot_formula
    hm0 = (H[0] - 2.0 * H[1] + H[2]) / step ** 2
    fam_err = abs(hm0 - hf0) / max(1.0, abs(hf0))
    ok = ok and fam_err <= 1e-4
    parts.append(f"family err {fam_err:.1e} (tol 1e-4)")

    disk = setups.isothermal_disk(32768, 400.0)
    gm2 = disk.g * diagnostics.total_mass(disk) ** 2
    rel = abs(diagnostics.virial_sample(disk).Hddot_formula) / gm2
    ok = ok and rel <= 1e-3
    parts.append(f"2D stationary |Hddot|/gM^2 {rel:.1e} (tol 1e-3)")
    return ok, "; ".join(parts)


# 40 classification cells: (N, gamma, E0, beta) -> (tag, outcome).  "crit"
# resolves to the exact critical exponent 2(N-1)/N.  Worked out by hand
# from the hypothesis rules each tag stands for, including the
# strict/non-strict boundary cases and the uncovered regions that must
# stay inconclusive.
_SWEEP_TABLE: Tuple[Tuple[int, object, float, float, str, str], ...] = (
    (2, 1.0, -1.0, 0.0, "inconclusive", "inconclusive"),
    (2, 1.0, 1.0, 0.0, "inconclusive", "inconclusive"),
    (2, 1.0, -1.0, 0.5, "inconclusive", "inconclusive"),
    (2, 1.4, 0.0, 0.0, "inconclusive", "inconclusive"),
    (3, 1.2, -1.0, 0.0, "inconclusive", "inconclusive"),
    (3, "crit", -1.0, 0.0, "inconclusive", "inconclusive"),
    (3, 1.5, -1.0, 0.0, "inconclusive", "inconclusive"),
    (3, 1.2, 0.0, 0.0, "inconclusive", "inconclusive"),
    (3, "crit", 0.0, 0.0, "inconclusive", "inconclusive"),
    (3, 1.5, 0.0, 0.0, "Thm2-expansion", "global-expansion-bound"),
    (3, 1.2, 1.0, 0.0, "inconclusive", "inconclusive"),
    (3, "crit", 1.0, 0.0, "Thm2-expansion", "global-expansion-bound"),
    (3, 1.5, 1.0, 0.0, "Thm2-expansion", "global-expansion-bound"),
    (3, "crit", -1.0, 0.5, "inconclusive", "inconclusive"),
    (3, 1.5, 0.0, 0.5, "inconclusive", "inconclusive"),
    (3, 1.5, 1.0, 0.5, "inconclusive", "inconclusive"),
    (4, 1.4, -1.0, 0.0, "Thm2-2a", "finite-time-blowup"),
    (4, "crit", -1.0, 0.0, "Remark-critical", "finite-time-blowup"),
    (4, 1.7, -1.0, 0.0, "inconclusive", "inconclusive"),
    (4, 1.4, 0.0, 0.0, "Thm2-2b", "finite-time-blowup"),
    (4, "crit", 0.0, 0.0, "inconclusive", "inconclusive"),
    (4, 1.7, 0.0, 0.0, "Thm2-expansion", "global-expansion-bound"),
    (4, 1.4, 1.0, 0.0, "inconclusive", "inconclusive"),
    (4, "crit", 1.0, 0.0, "Thm2-expansion", "global-expansion-bound"),
    (4, 1.7, 1.0, 0.0, "Thm2-expansion", "global-expansion-bound"),
    (4, 1.4, -1.0, 0.5, "Thm3-1", "finite-time-blowup"),
    (4, "crit", -1.0, 0.5, "Remark-critical", "finite-time-blowup"),
    (4, 1.7, -1.0, 0.5, "inconclusive", "inconclusive"),
    (4, 1.4, 0.0, 0.5, "Thm3-2", "finite-time-blowup"),
    (4, "crit", 0.0, 0.5, "inconclusive", "inconclusive"),
    (5, 1.4, -1.0, 0.0, "Thm2-2a", "finite-time-blowup"),
    (5, "crit", -1.0, 0.0, "Remark-critical", "finite-time-blowup"),
    (5, 1.4, 0.0, 0.0, "Thm2-2b", "finite-time-blowup"),
    (5, "crit", 0.0, 0.0, "inconclusive", "inconclusive"),
    (5, 1.8, 0.0, 0.0, "inconclusive", "inconclusive"),
    (5, 1.4, 1.0, 0.0, "inconclusive", "inconclusive"),
    (5, 1.8, 1.0, 0.0, "inconclusive", "inconclusive"),
    (5, 1.4, -1.0, 0.5, "Thm3-1", "finite-time-blowup"),
    (5, "crit", -1.0, 0.5, "Remark-critical", "finite-time-blowup"),
    (5, 1.4, 0.0, 0.5, "Thm3-2", "finite-time-blowup"),
)


def _c9_hypothesis_sweep() -> Tuple[bool, str]:
    from . import cli
    from .config import SweepCell, SweepConfig

    cells = []
    expected = []
    for N, gam, e0, beta, tag, outcome in _SWEEP_TABLE:
        gamma = diagnostics.critical_gamma(N) if gam == "crit" else float(gam)
        cells.append(SweepCell(n_dim=N, gamma=gamma, e0=e0, beta=beta))
        expected.append((tag, outcome))
    rows = cli.sweep_rows(SweepConfig(cells=tuple(cells)))
    bad = [i for i, (row, exp) in enumerate(zip(rows, expected))
           if (row["theorem_tag"], row["outcome"]) != exp]
    if len(rows) != len(_SWEEP_TABLE) or bad:
        return False, f"{len(bad)} of {len(rows)} verdicts differ (first: {bad[:5]})"
    return True, f"{len(rows)}/40 verdicts match, boundary strictness included"


def _c10_gap_blowup() -> Tuple[bool, str]:
    state = setups.cored_disk(2048, 12.0, rho_c=1.0, core=1.0, K=0.01,
                              cutoff=10.0)
    result = hydro.evolve(state, 2.0, snapshot_every=0.02)
    gap = diagnostics.measured_gap(result, window=0.5)
    rows = diagnostics.run_diagnostics_rows(result)
    H0, Hdot0 = rows[0]["H"], rows[0]["Hdot_f"]
    M0, E0 = rows[0]["M"], rows[0]["E_tot"]
    verdict = diagnostics.classify_blowup(2, 1.0, 0.0, E0, M0, g=state.g,
                                          sup_functional=state.g * M0 * M0 - gap)
    bound = diagnostics.blowup_time_bound(verdict.theorem_tag, H0, Hdot0,
                                          eps=gap)
    roots = np.roots([-0.5 * gap, Hdot0, H0])
    root = float(max(r.real for r in roots
                     if abs(r.imag) <= 1e-12 * max(1.0, abs(r.real)) and r.real > 0.0))
    collapse = result.collapse_time
    ok = (gap > 0.0
          and verdict.theorem_tag == diagnostics.TAG_THM1
          and abs(bound - root) <= 1e-10 * max(1.0, root)
          and collapse is not None and collapse <= 1.25 * bound)
    collapse_txt = "none" if collapse is None else f"{collapse:.3f}"
    return ok, (f"tag {verdict.theorem_tag}, gap {gap:.3f}, bound {bound:.6f} "
                f"(root err {abs(bound - root):.1e}, tol 1e-10), collapse at "
                f"{collapse_txt} <= {1.25 * bound:.3f}")


def _c11_ring_kernel() -> Tuple[bool, str]:
    from scipy.integrate import quad

    n = 64
    dr = 3.0 / n
    r = (np.arange(n) + 0.5) * dr
    rho = (np.exp(-0.5 * ((r - 1.0) / 0.08) ** 2)
           + 0.6 * np.exp(-0.5 * ((r - 2.2) / 0.12) ** 2))
    mass = rho * 2.0 * np.pi * r * dr
    u_kernel = diagnostics.ring_potential_energy(r, mass, 1.0)

    def mean_log_distance(ri: float, rj: float) -> float:
        def f(th: float) -> float:
            return 0.5 * math.log(ri * ri + rj * rj - 2.0 * ri * rj * math.cos(th))
        with warnings.catch_warnings():
            # the i = j entries have an integrable log singularity at th = 0;
            # quad converges but reports its roundoff-limited extrapolation
            warnings.simplefilter("ignore")
            val, _ = quad(f, 0.0, 2.0 * math.pi, points=[0.0, 2.0 * math.pi],
                          limit=200, epsabs=1e-11, epsrel=1e-11)
        return val / (2.0 * math.pi)

    kernel = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            kernel[i, j] = kernel[j, i] = mean_log_distance(r[i], r[j])
    u_direct = 0.5 * float(mass @ kernel @ mass)
    rel = abs(u_kernel - u_direct) / abs(u_direct)
    return rel <= 1e-6, (f"kernel {u_kernel:.9f} vs direct {u_direct:.9f}, "
                         f"rel {rel:.1e} (tol 1e-6)")


_CRITERIA: Tuple[Tuple[int, str, Callable[[], Tuple[bool, str]]], ...] = (
    (1, "profile-analytic", _c1_profile_analytic),
    (2, "density-ratio", _c2_density_ratio),
    (3, "collapse-time", _c3_collapse_time),
    (4, "family-residual-order", _c4_family_residual_order),
    (5, "hydrostatic-balance", _c5_hydrostatic_balance),
    (6, "stationary-identities", _c6_stationary_identities),
    (7, "energy-law", _c7_energy_law),
    (8, "virial-identity", _c8_virial_identity),
    (9, "hypothesis-sweep", _c9_hypothesis_sweep),
    (10, "2d-gap-blowup", _c10_gap_blowup),
    (11, "ring-kernel", _c11_ring_kernel),
)


def criterion_indices() -> Tuple[int, ...]:
    return tuple(idx for idx, _, _ in _CRITERIA)


def run_criterion(index: int) -> CriterionResult:
    for idx, name, fn in _CRITERIA:
        if idx == index:
            try:
                passed, detail = fn()
            except Exception as exc:
                passed, detail = False, f"raised {type(exc).__name__}: {exc}"
            return CriterionResult(index=idx, name=name, passed=passed,
                                   detail=detail)
    raise ValueError(f"no acceptance criterion numbered {index}")


def run_criteria(only: Optional[Iterable[int]] = None) -> List[CriterionResult]:
    wanted = criterion_indices() if not only else tuple(only)
    return [run_criterion(idx) for idx in wanted]
