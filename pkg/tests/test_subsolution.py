import numpy as np
import pytest

from mixzone.curves import Curve, Grid
from mixzone.evolution import SpeedFamily, build_jet
from mixzone.quadrature import PVConfig
from mixzone.subsolution import (BumpTest, admissibility_report,
                                 admissible_horizon, band_index, classify,
                                 density, full_velocity, g_family,
                                 jump_residual, m_field)

GRID = Grid(-40.0, 40.0, 2001)
CFG = PVConfig()


def flat_jet(c=0.9, regime="unstable", speeds=None):
    fam = SpeedFamily(speeds if speeds else (c,))
    kind = "flat"
    return build_jet(Curve(kind=kind), fam, regime, GRID, CFG)


@pytest.fixture(scope="module")
def flat9():
    return flat_jet(0.9)


def test_band_index_examples():
    fam = SpeedFamily((0.3, 0.9))
    t = 0.5
    lam = np.array([-0.5, -0.2, 0.0, 0.1, 0.2, 0.5])
    got = band_index(lam, t, fam)
    assert list(got) == [-2, -1, 0, 0, 1, 2]
    # a point exactly on an interface belongs to the band above
    assert band_index(np.array([0.15]), t, fam)[0] == 1
    assert band_index(np.array([-0.15]), t, fam)[0] == 0


def test_classify_follows_curve():
    jet = flat_jet(0.5)
    t = 0.2
    x1 = np.zeros(3)
    x2 = np.array([-0.2, 0.0, 0.2])
    assert list(classify(x1, x2, t, jet)) == [-1, 0, 1]


def test_density_sign_convention():
    band = np.array([-2, 0, 2])
    assert np.allclose(density(band, 2, "unstable"), [-1.0, 0.0, 1.0])
    assert np.allclose(density(band, 2, "stable"), [1.0, 0.0, -1.0])


def test_m_field_pure_region_is_transport():
    rho = np.array([1.0, -1.0])
    u = (np.array([0.3, 0.3]), np.array([-0.1, -0.1]))
    m1, m2 = m_field(rho, u, (np.array([9.0, 9.0]), np.array([9.0, 9.0])))
    assert np.allclose(m1, rho * u[0])
    assert np.allclose(m2, rho * u[1])


def test_flat_mixing_zone_fields(flat9):
    t = 0.1
    gf = g_family(flat9, t, CFG)
    s = np.linspace(-5, 5, 21)
    gx1, gx2 = gf.grad_g(s, np.zeros_like(s))
    assert np.max(np.abs(gx1 - 0.4)) < 1e-12
    assert np.max(np.abs(gx2)) < 1e-12
    # m = (0, -c) inside the zone
    u1, u2 = full_velocity(flat9, t, s, np.zeros_like(s), CFG)
    m1, m2 = m_field(np.zeros_like(s), (u1, u2), (gx1, gx2))
    assert np.max(np.abs(m1)) < 1e-10
    assert np.max(np.abs(m2 + 0.9)) < 1e-10


def test_flat_admissibility_margin(flat9):
    gf = g_family(flat9, 0.1, CFG)
    rep = admissibility_report(gf)
    assert rep["margin"] == pytest.approx(0.1, abs=1e-12)
    fast = flat_jet(1.1)
    rep_fast = admissibility_report(g_family(fast, 0.1, CFG))
    assert rep_fast["margin"] < 0


def test_flat_jump_residual_vanishes(flat9):
    gf = g_family(flat9, 0.1, CFG)
    for i in (1, -1):
        assert np.max(np.abs(jump_residual(gf, i))) < 1e-12
    with pytest.raises(ValueError):
        jump_residual(gf, 0)


def test_two_band_flat_outer_slopes():
    c2 = 0.9
    jet = flat_jet(speeds=(0.3, c2))
    gf = g_family(jet, 0.1, CFG)
    want = (c2 / 2.0 - 3.0 / 8.0) / (1.0 - 0.25)
    assert np.max(np.abs(gf.dg[1] - want)) < 1e-12
    assert np.max(np.abs(gf.dg[-1] - want)) < 1e-12
    assert gf.limits[1] == pytest.approx(want)


def test_midpoint_speeds_flatten_g():
    # speeds at band midpoints c_j = (2j-1)/(2N) make every drift vanish
    n = 3
    jet = flat_jet(speeds=tuple((2 * j - 1) / (2.0 * n) for j in range(1, n + 1)))
    gf = g_family(jet, 0.1, CFG)
    assert gf.limits[0] == pytest.approx(0.0)
    for i in (1, 2):
        assert np.max(np.abs(gf.dg[i])) < 1e-12
    assert np.max(np.abs(gf.e_plus)) < 1e-12


def test_telescoped_slope_identity():
    z0 = Curve(kind="gaussian-bump", amplitude=0.1)
    fam = SpeedFamily((1.0 / 3 - 0.05, 1.0 - 0.05, 5.0 / 3 - 0.05))
    jet = build_jet(z0, fam, "unstable", GRID, CFG, threads=4)
    t = 0.05
    gf = g_family(jet, t, CFG, threads=4)
    n = fam.n
    from mixzone.evolution import velocity_table
    table = velocity_table(jet, t, CFG)
    dzdt = jet.dz_dt(GRID.nodes(), t)
    for i in (1, 2):
        total = 0.0
        for j in range(i + 1, n + 1):
            drift = fam.speeds[j - 1] / n - (2 * j - 1) / (2.0 * n * n)
            total = total + drift + (dzdt - table[j]) / n
        lhs = (1.0 - (i / n) ** 2) * gf.dg[i]
        assert np.max(np.abs(lhs - total)) < 1e-12


def test_stable_shear_gradient_magnitude():
    c = 0.15
    jet = build_jet(Curve(kind="tilted", beta=1.0), SpeedFamily((c,)),
                    "stable", GRID, CFG)
    t = 0.1
    gf = g_family(jet, t, CFG)
    s = np.linspace(-5, 5, 31)
    for lam in (-0.9 * c * t, 0.0, 0.6 * c * t):
        x2 = jet.z_at(s, t) + lam
        gx1, gx2 = gf.grad_g(s, x2)
        mag = np.hypot(gx1, gx2)
        assert np.max(np.abs(mag - (c + 0.5) / np.sqrt(2.0))) < 1e-10
    for i in (1, -1):
        assert np.max(np.abs(jump_residual(gf, i))) < 1e-12


def test_stable_requires_single_band():
    jet = build_jet(Curve(kind="tilted", beta=1.0), SpeedFamily((0.05, 0.1)),
                    "stable", GRID, CFG)
    with pytest.raises(ValueError):
        g_family(jet, 0.1, CFG)


def test_g_family_requires_positive_time(flat9):
    with pytest.raises(ValueError):
        g_family(flat9, 0.0, CFG)


def test_admissible_horizon_flat(flat9):
    t_star, margins = admissible_horizon(flat9, [0.2, 0.1, 0.05], CFG)
    assert t_star == 0.2
    assert all(m == pytest.approx(0.1, abs=1e-12) for _, m in margins)


def test_full_velocity_matches_interface_trace():
    z0 = Curve(kind="gaussian-bump", amplitude=0.1)
    jet = build_jet(z0, SpeedFamily((0.5,)), "unstable", GRID, CFG, threads=4)
    t = 0.1
    from mixzone.evolution import velocity_table
    table = velocity_table(jet, t, CFG)
    s = np.linspace(-2, 2, 9)
    z_top = jet.z_at(s, t) + 0.5 * t
    eps = 1e-4
    u1a, u2a = full_velocity(jet, t, s, z_top + eps, CFG)
    u1b, u2b = full_velocity(jet, t, s, z_top - eps, CFG)
    zp = jet.z_at(s, t, 1)
    # the normal component (u2 - z' u1) is continuous across the sheet and
    # matches the contour-kernel trace used by the jet
    n_above = u2a - zp * u1a
    n_below = u2b - zp * u1b
    ref = np.interp(s, GRID.nodes(), table[1])
    assert np.max(np.abs(n_above - n_below)) < 1e-3
    assert np.max(np.abs(0.5 * (n_above + n_below) - ref)) < 1e-3


def test_bump_partition_of_support():
    bump = BumpTest(0.1, 0.05, 0.0, 1.0, 0.0, 0.2)
    phi, dt, d1, d2 = bump.value_and_grad(0.1, 0.0, 0.0)
    assert phi == pytest.approx(np.exp(-3.0))
    assert dt == pytest.approx(0.0)
    # vanishes outside the box
    phi_out, *_ = bump.value_and_grad(0.3, 0.0, 0.0)
    assert phi_out == 0.0
    # gradient consistency by differencing
    h = 1e-6
    p_plus, *_ = bump.value_and_grad(0.1, 0.3 + h, 0.05)
    p_minus, *_ = bump.value_and_grad(0.1, 0.3 - h, 0.05)
    _, _, d1_mid, _ = bump.value_and_grad(0.1, 0.3, 0.05)
    assert abs((p_plus - p_minus) / (2 * h) - d1_mid) < 1e-6
