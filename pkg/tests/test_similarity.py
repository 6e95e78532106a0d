"""Scale-factor dynamics and exact-family checks.

Collapse times are cross-checked three ways: frozen closed-form values,
an independent scipy quadrature of the first-integral relation, and the
package's own composite-Simpson oracle.  The family residuals are checked
to vanish on the exact solutions and to detect a deliberately wrong
pressure constant.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from gasphere import polytrope, similarity
from gasphere.errors import NumericalError

# rest-fall collapse times for lam = 1, a0 = 1, a1 = 0
T_REST_2D = math.sqrt(math.pi / 2.0)
T_REST_3D = math.pi / (2.0 * math.sqrt(2.0))


def quad_fall_time(N, lam, a0, a1):
    """Independent quadrature of dt = da / sqrt(2 (e - V(a))), falling leg."""
    e = 0.5 * a1 * a1 + similarity.scale_potential(N, lam, a0)

    def speed(a):
        return math.sqrt(max(2.0 * (e - similarity.scale_potential(N, lam, a)), 0.0))

    val, err = quad(lambda a: 1.0 / speed(a), 0.0, a0, limit=400,
                    epsabs=1e-10, epsrel=1e-10)
    assert err < 1e-8
    return val


def test_linear_trajectory_matches_to_roundoff():
    traj = similarity.integrate_scale(3, 0.0, 2.0, 0.5, 1.0)
    exact = 2.0 + 0.5 * traj.t
    assert np.max(np.abs(traj.a - exact)) <= 1e-13 * np.max(exact)
    assert np.max(np.abs(traj.adot - 0.5)) == 0.0
    assert traj.termination == similarity.TERM_T_END


def test_linear_blowup_closed_form():
    traj = similarity.integrate_scale(3, 0.0, 1.0, -0.25, 5.0)
    assert similarity.blowup_time(traj) == 4.0
    growing = similarity.integrate_scale(3, 0.0, 1.0, 0.25, 1.0)
    assert similarity.blowup_time(growing) is None


@pytest.mark.parametrize("N,frozen", [(2, T_REST_2D), (3, T_REST_3D)])
def test_rest_fall_times(N, frozen):
    traj = similarity.integrate_scale(N, 1.0, 1.0, 0.0, 3.0)
    assert traj.termination in (similarity.TERM_COLLAPSE, similarity.TERM_UNDERFLOW)
    T = similarity.blowup_time(traj)
    assert T == pytest.approx(frozen, abs=1e-9)
    assert similarity.collapse_time_quadrature(N, 1.0, 1.0, 0.0) == \
        pytest.approx(frozen, abs=1e-10)
    assert quad_fall_time(N, 1.0, 1.0, 0.0) == pytest.approx(frozen, abs=1e-7)


def test_falling_leg_against_quadratures():
    # strictly falling start: no turning point between a0 and 0
    T = similarity.blowup_time(similarity.integrate_scale(3, 1.0, 1.0, -0.3, 3.0))
    assert T == pytest.approx(quad_fall_time(3, 1.0, 1.0, -0.3), abs=1e-7)
    assert T == pytest.approx(
        similarity.collapse_time_quadrature(3, 1.0, 1.0, -0.3), abs=1e-8)


def test_rise_and_fall_time_2d():
    # starts outward, turns around at a_t = exp(e / lam), then collapses
    lam, a0, a1 = 1.0, 1.0, 0.5
    e = 0.5 * a1 * a1
    a_t = math.exp(e / lam)
    w0 = math.sqrt(math.log(a_t / a0))
    closed = a_t * math.sqrt(math.pi / (2.0 * lam)) * (1.0 + math.erf(w0))
    traj = similarity.integrate_scale(2, lam, a0, a1, 3.0)
    T = similarity.blowup_time(traj)
    assert T == pytest.approx(closed, abs=1e-8)
    assert similarity.collapse_time_quadrature(2, lam, a0, a1) == \
        pytest.approx(closed, abs=1e-10)


def test_no_silent_singularity_crossing():
    # a step landing on the far side of a = 0 must be rejected, so the
    # termination can never read t_end for a collapsing trajectory
    for N in (2, 3, 4):
        traj = similarity.integrate_scale(N, 1.0, 1.0, 0.0, 10.0)
        assert traj.termination != similarity.TERM_T_END
        assert float(traj.t[-1]) < 2.0


def test_first_integral_drift_away_from_collapse():
    for N, lam in ((2, 1.0), (3, 1.0), (3, 0.25)):
        traj = similarity.integrate_scale(N, lam, 1.0, 0.0, 5.0)
        keep = traj.a >= 0.01 * traj.a0
        drift = np.max(np.abs(traj.first_integral_series()[keep]
                              - traj.first_integral0))
        assert drift <= 1e-8 * max(1.0, abs(traj.first_integral0))


def test_repulsive_coupling_expands():
    traj = similarity.integrate_scale(3, -0.5, 1.0, 0.0, 2.0)
    assert traj.termination == similarity.TERM_T_END
    assert float(traj.a[-1]) > 1.0
    assert np.all(np.diff(traj.adot) >= 0.0)
    assert similarity.blowup_time(traj) is None


def test_quadrature_argument_handling():
    with pytest.raises(ValueError):
        similarity.collapse_time_quadrature(3, 0.0, 1.0, -1.0)
    # positive-energy 3D orbit never returns: no finite collapse time
    assert similarity.collapse_time_quadrature(3, 1.0, 1.0, 2.0) is None


def test_state_at_interpolation_and_span():
    traj = similarity.integrate_scale(3, 1.0, 1.0, 0.0, 0.5)
    a, adot = traj.state_at(0.25)
    i = int(np.searchsorted(traj.t, 0.25))
    assert abs(a - traj.a[i]) < 1e-6
    assert adot < 0.0
    with pytest.raises(ValueError):
        traj.state_at(1.0)


def test_coupling_and_exponent_maps():
    assert similarity.coupling_mu(polytrope.POWER, 3, 1.0, 0.02) == \
        pytest.approx(0.015, rel=1e-14)
    assert similarity.family_gamma(polytrope.POWER, 3) == pytest.approx(4.0 / 3.0)
    assert similarity.family_gamma(polytrope.POWER, 4) == pytest.approx(1.5)
    assert similarity.family_gamma(polytrope.ISOTHERMAL2D, 2) == 1.0


def test_build_family_support_and_center():
    fam = similarity.build_family("power", 3, 1.0, 0.02, 1.0, -0.1, 0.5,
                                  dt=1e-3, profile_z_max=12.0, profile_h=1e-3)
    assert fam.gamma == pytest.approx(4.0 / 3.0)
    assert fam.support_zero == pytest.approx(4.488, abs=2e-3)
    r = np.array([0.0, 0.5, 1.0])
    rho, u = similarity.family_state(fam, 0.0, r)
    assert rho[0] == pytest.approx(1.0, rel=1e-10)  # alpha = 1, a0 = 1
    assert u == pytest.approx(-0.1 * r, rel=1e-12)  # u = (adot/a) r


def test_build_family_rejects_unbounded_profile():
    # large forcing removes the profile zero, so no compact power family
    with pytest.raises(NumericalError):
        similarity.build_family("power", 3, 1.0, 0.5, 1.0, 0.0, 0.5,
                                profile_z_max=30.0, profile_h=1e-3)


def test_family_residual_detects_wrong_pressure():
    fam = similarity.build_family("power", 3, 1.0, 0.02, 1.0, -0.1, 0.5,
                                  dt=1e-3, profile_z_max=12.0, profile_h=5e-4)
    t_eval = 0.25
    edge = fam.scale.state_at(t_eval)[0] * fam.support_zero
    radii = np.linspace(0.15 * edge, 0.7 * edge, 32)
    good = similarity.family_residual(fam, t_eval, radii, 1e-3, 1e-3)

    def fields(t, r):
        return similarity.family_state(fam, t, r)

    bad = similarity.pde_residual(fields, fam.N, fam.gamma, fam.K * 1.05,
                                  fam.g, t_eval, radii, 1e-3, 1e-3)
    assert bad.momentum > 50.0 * good.momentum
    # mass residual has no pressure term, so it stays at the exact level
    assert bad.mass == pytest.approx(good.mass, rel=1e-12)


def test_export_trajectory_roundtrip(tmp_path):
    traj = similarity.integrate_scale(3, 1.0, 1.0, 0.0, 0.2)
    path = tmp_path / "trajectory.csv"
    similarity.export_trajectory(traj, path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], traj.t)
    assert np.array_equal(data[:, 1], traj.a)
    assert np.array_equal(data[:, 2], traj.adot)
