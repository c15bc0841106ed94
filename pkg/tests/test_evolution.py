import numpy as np
import pytest

from mixzone.curves import Curve, Grid
from mixzone.evolution import (SpeedFamily, build_jet, c_max, cbar,
                               convergence_quantities, dyadic_ladder,
                               fit_slope, muskat_rhs, normal_velocity,
                               regime_sign, sigma, velocity_table)
from mixzone.quadrature import PVConfig

GRID = Grid(-40.0, 40.0, 2001)
CFG = PVConfig()


@pytest.fixture(scope="module")
def gauss_jet():
    z0 = Curve(kind="gaussian-bump", amplitude=0.1)
    return build_jet(z0, SpeedFamily((0.5,)), "unstable", GRID, CFG, threads=4)


def test_regime_sign():
    assert regime_sign("unstable") == 1.0
    assert regime_sign("stable") == -1.0
    with pytest.raises(ValueError):
        regime_sign("neutral")


def test_speed_family_validation():
    with pytest.raises(ValueError):
        SpeedFamily(())
    with pytest.raises(ValueError):
        SpeedFamily((0.5, 0.5))
    with pytest.raises(ValueError):
        SpeedFamily((-0.1, 0.5))
    fam = SpeedFamily((0.3, 0.9))
    assert fam.n == 2
    assert fam.c(2) == 0.9 and fam.c(-2) == -0.9
    with pytest.raises(ValueError):
        fam.c(0)
    with pytest.raises(ValueError):
        fam.c(3)


def test_speed_bound_violations():
    assert SpeedFamily((0.6, 0.9)).bound_violations() == [1]
    assert SpeedFamily((0.2, 1.6)).bound_violations() == [2]
    assert SpeedFamily((1.0 / 3 - 0.05, 1.0 - 0.05, 5.0 / 3 - 0.05),
                       ).bound_violations() == []


def test_cbar_against_double_loop():
    for speeds in [(0.7,), (0.3, 0.9), (0.2, 0.5, 1.4)]:
        fam = SpeedFamily(speeds)
        brute = sum(max(a, b) for a in speeds for b in speeds) / fam.n**2
        assert cbar(fam) == pytest.approx(brute)
    assert cbar(SpeedFamily((0.7,))) == 0.7


def test_sigma_values():
    flat = Curve(kind="flat")
    assert sigma(flat, np.array([0.0]))[0] == 1.0
    steep = Curve(kind="tilted", beta=2.0)
    assert sigma(steep, np.array([1.0]))[0] == pytest.approx(-0.12)


def test_c_max_values():
    assert c_max("unstable") == 1.0
    assert c_max("stable", beta=1.0, slope_norm=0.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        c_max("stable", beta=0.5, slope_norm=0.6)


def test_flat_jet_is_stationary():
    jet = build_jet(Curve(kind="flat"), SpeedFamily((0.9,)), "unstable",
                    GRID, CFG)
    assert np.max(np.abs(jet.z1)) == 0.0
    assert np.max(np.abs(jet.z2)) == 0.0
    assert np.max(np.abs(jet.dz_dt(GRID.nodes(), 0.1))) == 0.0


def test_tilted_stable_jet_is_stationary():
    jet = build_jet(Curve(kind="tilted", beta=1.0), SpeedFamily((0.2,)),
                    "stable", GRID, CFG)
    assert np.max(np.abs(jet.z1)) < 1e-12
    assert np.max(np.abs(jet.z2)) < 1e-12
    s = GRID.nodes()
    assert np.allclose(jet.z_at(s, 0.1), s)


def test_jet_sign_flips_with_regime(gauss_jet):
    z0 = Curve(kind="gaussian-bump", amplitude=0.1)
    down = build_jet(z0, SpeedFamily((0.5,)), "stable", GRID, CFG, threads=4)
    assert np.max(np.abs(down.z1 + gauss_jet.z1)) < 1e-14


def test_jet_slice_and_tables(gauss_jet):
    s = np.linspace(-3, 3, 11)
    t = 0.05
    sl = gauss_jet.slice_at(t)
    direct = (gauss_jet.z0.pert(s, 0) + t * gauss_jet.z1_fn().value(s)
              + 0.5 * t * t * gauss_jet.z2_fn().value(s))
    assert np.max(np.abs(sl.pert(s, 0) - direct)) < 1e-14
    with pytest.raises(ValueError):
        gauss_jet.pert_at(s, t, 3)


def test_z1_matches_independent_quadrature(gauss_jet):
    s = GRID.nodes()
    for k in range(0, GRID.n, 97):
        ref = muskat_rhs(gauss_jet.z0, s[k])
        assert abs(ref - gauss_jet.z1[k]) < 1e-5


def test_muskat_rhs_flat_zero():
    assert muskat_rhs(Curve(kind="tilted", beta=0.7), 1.3) == pytest.approx(0.0, abs=1e-12)


def test_normal_velocity_matches_table(gauss_jet):
    t = 0.05
    table = velocity_table(gauss_jet, t, CFG)
    s = GRID.nodes()[::400]
    spot = normal_velocity(gauss_jet, 1, t, s, CFG)
    ref = table[1][::400]
    assert np.max(np.abs(spot - ref)) < 1e-12
    # cache hit returns the same arrays
    again = velocity_table(gauss_jet, t, CFG)
    assert again is table


def test_normal_velocity_index_checks(gauss_jet):
    with pytest.raises(ValueError):
        normal_velocity(gauss_jet, 0, 0.1, 0.0)
    with pytest.raises(ValueError):
        normal_velocity(gauss_jet, 1, -0.1, 0.0)


def test_velocities_approach_dzdt(gauss_jet):
    sups = []
    for t in (0.1, 0.05, 0.025):
        sup, _ = convergence_quantities(gauss_jet, t, CFG, threads=4)
        sups.append(max(sup.values()))
    assert sups[0] > sups[1] > sups[2]


def test_fit_slope_behaviour():
    ts = [0.2, 0.1, 0.05]
    assert fit_slope(ts, [t**2 for t in ts]) == pytest.approx(2.0)
    assert fit_slope(ts, [0.0, 0.0, 0.0]) == "exact-zero"
    assert fit_slope(ts, [0.04, 0.0, 0.0]) == "exact-zero"


def test_dyadic_ladder():
    ts = dyadic_ladder(0.2, 6)
    assert len(ts) == 7
    assert ts[0] == 0.2 and ts[-1] == pytest.approx(0.2 / 64)
    assert all(a / b == pytest.approx(2.0) for a, b in zip(ts, ts[1:]))
