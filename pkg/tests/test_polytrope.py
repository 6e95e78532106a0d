"""Profile ODE solvers against their closed-form solutions.

The classic equation has exact solutions at n = 0, 1, 5; the generalized
2D isothermal equation has one at mu = 0, K = 2*pi.  Those pin the solver;
everything else is checked through invariants (zero refinement, evaluation
consistency, parameter validation).
"""

import math

import numpy as np
import pytest

from gasphere import polytrope

SQRT6 = math.sqrt(6.0)


def test_n0_parabola():
    prof = polytrope.solve_lane_emden(0.0, z_max=10.0, h=1e-3)
    exact = 1.0 - prof.z ** 2 / 6.0
    keep = prof.z <= SQRT6
    assert np.max(np.abs(prof.y[keep] - exact[keep])) < 1e-10
    assert polytrope.first_zero(prof) == pytest.approx(SQRT6, abs=1e-10)


def test_n1_sinc():
    prof = polytrope.solve_lane_emden(1.0, z_max=10.0, h=1e-3)
    keep = prof.z <= math.pi
    exact = np.sinc(prof.z[keep] / np.pi)
    assert np.max(np.abs(prof.y[keep] - exact)) < 1e-10
    assert polytrope.first_zero(prof) == pytest.approx(math.pi, abs=1e-10)


def test_n5_closed_form_no_zero():
    prof = polytrope.solve_lane_emden(5.0, z_max=40.0, h=1e-3)
    exact = (1.0 + prof.z ** 2 / 3.0) ** -0.5
    assert np.max(np.abs(prof.y - exact)) < 1e-10
    assert polytrope.first_zero(prof) is None
    assert prof.y[-1] > 0.0


def test_density_ratio_values():
    p0 = polytrope.solve_lane_emden(0.0, z_max=5.0, h=1e-3)
    p1 = polytrope.solve_lane_emden(1.0, z_max=5.0, h=1e-3)
    assert polytrope.density_ratio(p0) == pytest.approx(1.0, abs=1e-8)
    assert polytrope.density_ratio(p1) == pytest.approx(3.0 / math.pi ** 2, abs=1e-8)


def test_density_ratio_needs_finite_radius():
    prof = polytrope.solve_lane_emden(5.0, z_max=5.0, h=1e-3)
    with pytest.raises(ValueError):
        polytrope.density_ratio(prof)


def test_values_at_matches_samples_and_surface():
    prof = polytrope.solve_lane_emden(1.0, z_max=5.0, h=1e-3)
    mid = prof.z[:-1] + 0.5e-3
    assert np.max(np.abs(prof.values_at(mid) - np.sinc(mid / np.pi))) < 1e-11
    # past the surface the star contributes nothing
    assert prof.values_at(np.array([4.0, 9.0])).tolist() == [0.0, 0.0]


def test_values_at_rejects_unsampled_span():
    prof = polytrope.solve_lane_emden(5.0, z_max=2.0, h=1e-3)
    with pytest.raises(ValueError):
        prof.value_at(3.0)


def test_isothermal2d_liouville_form():
    # at K = 2*pi, mu = 0, alpha = 0 the forced equation integrates to
    # y = -2 ln(1 + x^2 / 8)
    prof = polytrope.solve_generalized_profile(
        polytrope.ISOTHERMAL2D, 2, 2.0 * math.pi, 0.0, 0.0, z_max=20.0, h=1e-3)
    exact = -2.0 * np.log(1.0 + prof.z ** 2 / 8.0)
    assert np.max(np.abs(prof.y - exact)) < 1e-9


def test_power_coefficient_n3():
    # N = 3, K = 1: N (N-2)^2 V(N) / (2N-2) = 3 * (4 pi / 3) / 4 = pi
    assert polytrope.power_coefficient(3, 1.0) == pytest.approx(math.pi, rel=1e-14)


def test_power_profile_forcing_shifts_zero():
    free = polytrope.solve_generalized_profile(
        polytrope.POWER, 3, 1.0, 0.0, 1.0, z_max=12.0, h=1e-3)
    forced = polytrope.solve_generalized_profile(
        polytrope.POWER, 3, 1.0, 0.015, 1.0, z_max=12.0, h=1e-3)
    z_free = polytrope.first_zero(free)
    z_forced = polytrope.first_zero(forced)
    assert z_free == pytest.approx(6.897 / math.sqrt(math.pi), abs=5e-4)
    assert z_forced is not None and z_forced > z_free


def test_power_profile_large_forcing_has_no_zero():
    prof = polytrope.solve_generalized_profile(
        polytrope.POWER, 3, 1.0, 0.375, 1.0, z_max=50.0, h=1e-3)
    assert polytrope.first_zero(prof) is None
    # the profile settles towards the forced equilibrium (mu / c)^(1/3)
    y_eq = (0.375 / math.pi) ** (1.0 / 3.0)
    assert abs(float(prof.y[-1]) - y_eq) < 0.05


def test_stationary_density_6_5_prefactor():
    # K = 2 pi g / (9 A^2) makes the closed-form central density exactly 1
    r = np.linspace(0.0, 5.0, 200)
    rho = polytrope.stationary_density_6_5(2.0 * math.pi / 9.0, 1.0, r)
    assert rho[0] == pytest.approx(1.0, rel=1e-13)
    assert np.max(np.abs(rho - (1.0 + r ** 2) ** -2.5)) < 1e-12


def test_profile_to_density_power_scaling():
    prof = polytrope.solve_generalized_profile(
        polytrope.POWER, 3, 1.0, 0.0, 1.0, z_max=12.0, h=1e-3)
    a = 0.5
    r = np.array([0.0, 0.2, 1.0])
    rho = polytrope.profile_to_density(prof, a, r)
    expect = a ** -3.0 * prof.values_at(r / a) ** 3.0
    assert rho == pytest.approx(expect, rel=1e-12)


def test_parameter_validation():
    with pytest.raises(ValueError):
        polytrope.solve_lane_emden(-1.0)
    with pytest.raises(ValueError):
        polytrope.solve_lane_emden(1.0, alpha=0.0)
    with pytest.raises(ValueError):
        polytrope.solve_generalized_profile(polytrope.POWER, 2, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        polytrope.solve_generalized_profile(polytrope.ISOTHERMAL2D, 3, 1.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        polytrope.solve_generalized_profile("spiral", 3, 1.0, 0.0, 1.0)


def test_export_profile_roundtrip(tmp_path):
    prof = polytrope.solve_lane_emden(1.0, z_max=5.0, h=1e-2)
    csv_path = tmp_path / "profile.csv"
    json_path = tmp_path / "profile.json"
    polytrope.export_profile(prof, csv_path, json_path)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    assert data.shape[0] == len(prof.z)
    assert np.array_equal(data[:, 0], prof.z)
    assert np.array_equal(data[:, 1], prof.y)
