"""Energy, virial, and classification diagnostics.

Uniform balls give hand-computable energies; quadratic inertia histories
pin the finite-difference stencils; the damped time bound is checked
against a numerically integrated equality case; the classifier is probed
at its tolerance edges and, with hypothesis, for totality.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from gasphere import diagnostics, hydro, setups
from gasphere.errors import ConfigError


def test_uniform_ball_energy_3d():
    g, rho0, R = 2.0, 1.5, 1.0
    state = setups.uniform_ball(2048, 1.5, N=3, R=R, rho0=rho0, gamma=1.4,
                                K=0.8, g=g)
    e = diagnostics.energy(state)
    # the discrete ball ends on a cell face, so take M and the effective
    # radius from the grid and compare against -(3/5) g M^2 / R
    M = diagnostics.total_mass(state)
    R_eff = (3.0 * M / (4.0 * math.pi * rho0)) ** (1.0 / 3.0)
    vol = M / rho0
    assert e.kinetic == 0.0
    assert e.internal == pytest.approx(0.8 * rho0 ** 1.4 * vol / 0.4, rel=1e-12)
    assert e.potential == pytest.approx(-0.6 * g * M ** 2 / R_eff, rel=1e-4)
    assert e.total == e.kinetic + e.internal + e.potential


def test_uniform_disk_energy_2d():
    # ln-kernel self-energy of a uniform disk: g M^2 (ln R - 1/4) / 2
    g, rho0, R = 1.0, 2.0, 1.0
    state = setups.uniform_ball(4096, 1.25, N=2, R=R, rho0=rho0, gamma=1.4,
                                K=1.0, g=g)
    e = diagnostics.energy(state)
    M = diagnostics.total_mass(state)
    R_eff = math.sqrt(M / (rho0 * math.pi))
    expect = 0.5 * g * M * M * (math.log(R_eff) - 0.25)
    assert e.potential == pytest.approx(expect, rel=2e-4)


def test_ring_potential_energy_two_rings():
    r = np.array([0.5, 2.0])
    m = np.array([3.0, 4.0])
    expect = 0.5 * (9.0 * math.log(0.5) + 16.0 * math.log(2.0)
                    + 2.0 * 12.0 * math.log(2.0))
    assert diagnostics.ring_potential_energy(r, m, 1.0) == \
        pytest.approx(expect, rel=1e-14)


def test_isothermal_internal_energy_uses_log():
    state = setups.uniform_ball(64, 1.5, N=2, R=1.0, rho0=2.0, gamma=1.0,
                                K=3.0, g=1.0)
    e = diagnostics.energy(state)
    # K rho ln(rho) integrated over the support; with uniform rho the
    # quadrature collapses to K M ln(rho0) regardless of the grid
    M = diagnostics.total_mass(state)
    assert e.internal == pytest.approx(3.0 * M * math.log(2.0), rel=1e-10)


def test_virial_series_exact_on_quadratic():
    ts = np.linspace(0.0, 1.0, 6)
    samples = [diagnostics.VirialSample(t=float(t), H=3.0 + 2.0 * t - 0.5 * t * t,
                                        Hdot_formula=0.0, Hddot_formula=0.0)
               for t in ts]
    filled = diagnostics.virial_series(samples)
    for t, s in zip(ts, filled):
        assert s.Hdot_measured == pytest.approx(2.0 - t, abs=1e-12)
        assert s.Hddot_measured == pytest.approx(-1.0, abs=1e-11)


def test_virial_series_needs_uniform_samples():
    samples = [diagnostics.VirialSample(t=t, H=1.0, Hdot_formula=0.0,
                                        Hddot_formula=0.0)
               for t in (0.0, 0.1, 0.35)]
    with pytest.raises(ValueError):
        diagnostics.virial_series(samples)


def test_virial_sample_stationary_ball_matches_identity():
    state = setups.stationary_gamma65(2048, 30.0)
    s = diagnostics.virial_sample(state)
    assert s.Hdot_formula == 0.0
    # hydrostatic: 2 ke + N int P + (N-2) pot reduces to the stationary
    # identity, so the formula value is near zero at this resolution
    scale = 3.0 * float(np.sum(state.pressure()
                               * np.pi * 4 / 3 * np.diff(state.faces() ** 3)))
    assert abs(s.Hddot_formula) < 2e-3 * scale


def test_theorem1_functional_dimension_guard():
    state = setups.gaussian_ball(64, 4.0, N=3, cutoff=3.0)
    with pytest.raises(ValueError):
        diagnostics.theorem1_functional(state)


def test_measured_gap_window_and_value():
    state = setups.cored_disk(256, 12.0, rho_c=1.0, core=1.0, K=0.01,
                              cutoff=10.0)
    result = hydro.evolve(state, 0.4, snapshot_every=0.1)
    gap_all = diagnostics.measured_gap(result)
    gap_early = diagnostics.measured_gap(result, window=0.2)
    assert gap_early >= gap_all > 0.0
    # recompute by hand over the windowed snapshots
    M = diagnostics.total_mass(state)
    vals = [state.g * M * M - diagnostics.theorem1_functional(s.state)
            for s in result.snapshots if s.state.t <= 0.2 + 1e-12]
    assert gap_early == pytest.approx(min(vals), rel=1e-12)


def test_classifier_energy_zero_tolerance():
    v = diagnostics.classify_blowup(4, 1.4, 0.0, 5e-11, 1.0, K=1.0,
                                    domain_measure=1.0)
    assert v.theorem_tag == diagnostics.TAG_THM2_2B
    v = diagnostics.classify_blowup(4, 1.4, 0.0, -1e-9, 1.0)
    assert v.theorem_tag == diagnostics.TAG_THM2_2A


def test_classifier_gamma_tolerance():
    gc = diagnostics.critical_gamma(4)
    v = diagnostics.classify_blowup(4, gc + 5e-13, 0.0, -1.0, 1.0)
    assert v.theorem_tag == diagnostics.TAG_REMARK
    v = diagnostics.classify_blowup(4, gc + 1e-10, 0.0, -1.0, 1.0)
    assert v.theorem_tag == diagnostics.TAG_INCONCLUSIVE


def test_classifier_validation():
    with pytest.raises(ConfigError):
        diagnostics.classify_blowup(1, 1.4, 0.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        diagnostics.classify_blowup(3, 0.5, 0.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        diagnostics.classify_blowup(2, 1.0, 0.0, 1.0, 1.0, eps=-1.0)
    with pytest.raises(ConfigError):
        diagnostics.classify_blowup(3, 1.4, 0.0, math.nan, 1.0)


_TAGS = {diagnostics.TAG_THM1, diagnostics.TAG_EXPANSION,
         diagnostics.TAG_THM2_2A, diagnostics.TAG_THM2_2B,
         diagnostics.TAG_THM3_1, diagnostics.TAG_THM3_2,
         diagnostics.TAG_REMARK, diagnostics.TAG_INCONCLUSIVE}
_BLOWUP_TAGS = {diagnostics.TAG_THM1, diagnostics.TAG_THM2_2A,
                diagnostics.TAG_THM2_2B, diagnostics.TAG_THM3_1,
                diagnostics.TAG_THM3_2, diagnostics.TAG_REMARK}


@settings(max_examples=300, deadline=None)
@given(N=st.integers(min_value=2, max_value=8),
       gamma=st.floats(min_value=1.0, max_value=3.0),
       beta=st.floats(min_value=0.0, max_value=2.0),
       E0=st.floats(min_value=-10.0, max_value=10.0),
       M=st.floats(min_value=0.1, max_value=10.0))
def test_classifier_total_and_consistent(N, gamma, beta, E0, M):
    v = diagnostics.classify_blowup(N, gamma, beta, E0, M, K=1.0,
                                    domain_measure=1.0)
    assert v.theorem_tag in _TAGS
    if v.theorem_tag in _BLOWUP_TAGS:
        assert v.outcome == diagnostics.OUTCOME_BLOWUP
    elif v.theorem_tag == diagnostics.TAG_EXPANSION:
        assert v.outcome == diagnostics.OUTCOME_EXPANSION
    else:
        assert v.outcome == diagnostics.OUTCOME_INCONCLUSIVE
    again = diagnostics.classify_blowup(N, gamma, beta, E0, M, K=1.0,
                                        domain_measure=1.0)
    assert again.theorem_tag == v.theorem_tag and again.outcome == v.outcome


def test_time_bound_quadratic_forms():
    # 2D gap: 1 - t^2 crosses at t = 1
    assert diagnostics.blowup_time_bound(diagnostics.TAG_THM1, 1.0, 0.0,
                                         eps=2.0) == pytest.approx(1.0)
    # undamped negative energy: 4 - 2 t^2 crosses at sqrt(2)
    assert diagnostics.blowup_time_bound(diagnostics.TAG_THM2_2A, 4.0, 0.0,
                                         N=4, E0=-1.0) == \
        pytest.approx(math.sqrt(2.0), rel=1e-14)
    # the critical remark reuses the undamped form when beta = 0
    assert diagnostics.blowup_time_bound(diagnostics.TAG_REMARK, 4.0, 0.0,
                                         N=4, E0=-1.0, beta=0.0) == \
        pytest.approx(math.sqrt(2.0), rel=1e-14)


def test_time_bound_damped_matches_ode_crossing():
    H0, Hdot0, N, E0, beta = 5.0, 1.0, 4, -2.0, 0.7
    T = diagnostics.blowup_time_bound(diagnostics.TAG_THM3_1, H0, Hdot0,
                                      N=N, E0=E0, beta=beta)

    def rhs(_t, y):
        return [y[1], 2.0 * (N - 2.0) * E0 - beta * y[1]]

    hit = lambda _t, y: y[0]
    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(rhs, (0.0, 10.0 * T), [H0, Hdot0], events=hit,
                    rtol=1e-11, atol=1e-12)
    assert sol.t_events[0].size == 1
    assert T == pytest.approx(float(sol.t_events[0][0]), rel=1e-7)


def test_time_bound_vacuous_raises():
    with pytest.raises(ValueError):
        diagnostics.blowup_time_bound(diagnostics.TAG_THM2_2A, 1.0, 0.0,
                                      N=4, E0=1.0)
    with pytest.raises(ConfigError):
        diagnostics.blowup_time_bound(diagnostics.TAG_INCONCLUSIVE, 1.0, 0.0)


def test_diagnostics_rows_and_csv(tmp_path):
    state = setups.gaussian_ball(128, 6.0, N=3, gamma=1.4, K=2.5, sigma=1.0,
                                 cutoff=4.5)
    result = hydro.evolve(state, 0.3, snapshot_every=0.1)
    rows = diagnostics.run_diagnostics_rows(result)
    assert len(rows) == len(result.snapshots)
    assert math.isnan(rows[0]["Hdot_m"]) is False  # one-sided stencil filled
    path = tmp_path / "diagnostics.csv"
    diagnostics.write_diagnostics_csv(rows, path)
    header = path.read_text().splitlines()[0].split(",")
    assert header == list(diagnostics.DIAGNOSTIC_COLUMNS)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (len(rows), len(header))
    col_e = header.index("E_tot")
    assert data[0, col_e] == rows[0]["E_tot"]
