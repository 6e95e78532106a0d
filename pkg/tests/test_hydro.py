"""Finite-volume evolution and the radial field solver.

The field solver is pinned by uniform balls, whose enclosed mass and
interior/exterior fields are elementary.  The scheme itself is checked
through conservation, the discrete hydrostatic hold, terminations, and
file round-trips.
"""

import math

import numpy as np
import pytest

from gasphere import hydro, setups
from gasphere.errors import NumericalError
from gasphere.geometry import dimension_constants


def uniform_ball_state(N, n_cells=128, r_max=2.0, R=1.0, rho0=1.0):
    return setups.uniform_ball(n_cells, r_max, N=N, R=R, rho0=rho0,
                               gamma=1.4, K=1.0)


def test_state_validation():
    r, dr = hydro.make_grid(8, 1.0)
    good = dict(N=3, gamma=1.4, K=1.0, g=1.0, beta=0.0, r=r, dr=dr,
                rho=np.ones(8), u=np.zeros(8))
    hydro.RadialState(**good)
    for key, val in (("N", 1), ("gamma", 0.9), ("K", 0.0), ("beta", -1.0)):
        with pytest.raises(ValueError):
            hydro.RadialState(**{**good, key: val})
    with pytest.raises(ValueError):
        hydro.RadialState(**{**good, "rho": -np.ones(8)})
    with pytest.raises(ValueError):
        hydro.RadialState(**{**good, "u": np.zeros(7)})
    with pytest.raises(ValueError):
        hydro.RadialState(**{**good, "r": r + 0.2})


def test_make_grid_centers_and_faces():
    r, dr = hydro.make_grid(10, 5.0)
    assert len(r) == 10
    assert r[0] == pytest.approx(0.25)
    assert r[-1] == pytest.approx(4.75)
    assert np.all(dr == 0.5)


def test_field_uniform_ball_3d():
    g = 1.3
    st = setups.uniform_ball(128, 2.0, N=3, R=1.0, rho0=2.0, gamma=1.4,
                             K=1.0, g=g)
    field = hydro.poisson_radial(st)
    M = 2.0 * 4.0 * math.pi / 3.0
    inside = st.r < 1.0
    exact_in = 4.0 * math.pi * g * 2.0 * st.r[inside] / 3.0
    assert field.phi_r[inside] == pytest.approx(exact_in, rel=1e-12)
    outside = st.r > 1.0
    assert field.phi_r[outside] == pytest.approx(
        g * M / st.r[outside] ** 2, rel=1e-12)
    assert field.m_enc[outside] == pytest.approx(M, rel=1e-12)
    # potential: exact outside up to quadrature of the sampled field,
    # and matching the interior parabola
    assert field.phi[outside] == pytest.approx(
        -g * M / st.r[outside], rel=1e-4)
    exact_phi_in = -g * M * (3.0 - st.r[inside] ** 2) / 2.0
    assert field.phi[inside] == pytest.approx(exact_phi_in, rel=1e-3)


def test_field_uniform_disk_2d():
    g, rho0 = 1.0, 1.5
    st = setups.uniform_ball(128, 2.0, N=2, R=1.0, rho0=rho0, gamma=1.4,
                             K=1.0, g=g)
    field = hydro.poisson_radial(st)
    M = rho0 * math.pi
    inside = st.r < 1.0
    assert field.phi_r[inside] == pytest.approx(
        math.pi * g * rho0 * st.r[inside], rel=1e-12)
    outside = st.r > 1.0
    assert field.phi_r[outside] == pytest.approx(g * M / st.r[outside], rel=1e-12)
    # anchored so that the vacuum potential is g M ln r (ln changes sign at
    # r = 1, so compare absolutely)
    assert field.phi[outside] == pytest.approx(
        g * M * np.log(st.r[outside]), abs=2e-4)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_enclosed_mass_against_dense_quadrature(N):
    sigma = 1.0
    st = setups.gaussian_ball(512, 4.0, N=N, gamma=1.4, K=1.0, sigma=sigma)
    field = hydro.poisson_radial(st)
    w = N * dimension_constants(N).volume
    s = np.linspace(0.0, 4.0, 40001)
    integrand = np.exp(-0.5 * (s / sigma) ** 2) * s ** (N - 1)
    dense = w * np.concatenate(
        ([0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(s))))
    expect = np.interp(st.r, s, dense)
    assert field.m_enc == pytest.approx(expect, rel=2e-4, abs=1e-8)


def test_step_conserves_mass_and_checks_cfl():
    st = setups.gaussian_ball(256, 6.0, N=3, gamma=1.4, K=2.0, sigma=1.0,
                              v0=0.2, cutoff=4.5)
    dt = 0.5 * hydro.cfl_limit(st)
    stats = {}
    new = hydro.step(st, dt, stats=stats)
    m0 = float(np.sum(st.rho * st.shell_volumes()))
    m1 = float(np.sum(new.rho * new.shell_volumes()))
    shift = stats.get("floor_mass", 0.0)
    assert m1 - shift == pytest.approx(m0, rel=1e-13)
    assert new.t == pytest.approx(st.t + dt)
    with pytest.raises(ValueError):
        hydro.step(st, 10.0 * hydro.cfl_limit(st))


def test_hydrostatic_hold_interior():
    st = setups.stationary_gamma65(512, 20.0, cutoff=15.0)
    result = hydro.evolve(st, 0.2, snapshot_every=0.1)
    assert result.termination.kind == hydro.TERM_T_END
    fin = result.final
    interior = fin.r < 12.0
    # only the truncation edge moves (a physical rarefaction into vacuum);
    # the balanced interior stays still to scheme accuracy
    assert float(np.max(np.abs(fin.u[interior]))) < 5e-3
    m0 = float(np.sum(st.rho * st.shell_volumes()))
    m1 = float(np.sum(fin.rho * fin.shell_volumes()))
    assert m1 == pytest.approx(m0, rel=1e-12)


def test_evolve_snapshot_cadence_and_landing():
    st = setups.gaussian_ball(128, 6.0, N=3, gamma=1.4, K=2.5, sigma=1.0,
                              cutoff=4.5)
    result = hydro.evolve(st, 0.3, snapshot_every=0.1)
    times = result.times()
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(0.3, abs=1e-12)
    assert len(times) == 4
    diffs = np.diff(times)
    assert np.max(np.abs(diffs - 0.1)) < 1e-9


def test_support_boundary_termination():
    # an untruncated profile touches the outer cells immediately
    st = setups.stationary_gamma65(128, 10.0)
    result = hydro.evolve(st, 0.5, snapshot_every=0.1)
    assert result.termination.kind == hydro.TERM_SUPPORT_BOUNDARY
    assert result.termination.time == 0.0


def test_collapse_indicator_fires():
    st = setups.cored_disk(512, 12.0, rho_c=1.0, core=1.0, K=0.01,
                           cutoff=10.0)
    result = hydro.evolve(st, 2.0, snapshot_every=0.05)
    assert result.termination.kind == hydro.TERM_COLLAPSE_INDICATOR
    assert result.collapse_time is not None
    peak = float(np.max(result.final.rho))
    assert peak >= hydro.COLLAPSE_GROWTH_FACTOR * float(np.max(st.rho))


def test_damping_slows_the_flow():
    kw = dict(N=3, gamma=1.4, K=2.5, sigma=1.0, v0=0.3, cutoff=4.5)
    free = hydro.evolve(setups.gaussian_ball(256, 6.0, **kw), 0.5,
                        snapshot_every=0.5)
    damped = hydro.evolve(setups.gaussian_ball(256, 6.0, beta=6.0, **kw), 0.5,
                          snapshot_every=0.5)
    v_free = float(np.max(np.abs(free.final.u)))
    v_damped = float(np.max(np.abs(damped.final.u)))
    assert v_damped < 0.5 * v_free


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    st = setups.gaussian_ball(64, 5.0, N=3, gamma=1.4, K=1.0, sigma=1.2,
                              v0=0.1, cutoff=4.0)
    path = tmp_path / "state.npz"
    hydro.save_checkpoint(st, path)
    back = hydro.load_checkpoint(path)
    assert back.N == st.N and back.gamma == st.gamma and back.K == st.K
    assert back.g == st.g and back.beta == st.beta and back.t == st.t
    assert np.array_equal(back.r, st.r)
    assert np.array_equal(back.rho, st.rho)
    assert np.array_equal(back.u, st.u)


def test_snapshot_csv_roundtrip(tmp_path):
    st = setups.gaussian_ball(64, 5.0, N=3, gamma=1.4, K=1.0, sigma=1.2,
                              cutoff=4.0)
    field = hydro.poisson_radial(st)
    path = tmp_path / "snap.csv"
    hydro.write_snapshot_csv(st, field, path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], st.r)
    assert np.array_equal(data[:, 1], st.rho)
    assert np.array_equal(data[:, 2], st.u)
    assert np.array_equal(data[:, 3], field.phi_r)
