"""Mixing-zone subsolution fields: regions, density, velocity, and g.

The relaxed momentum is m = rho u - (1 - rho^2)(gamma + e2/2) with
gamma = (-d_x2 g, d_x1 g).  In the outer bands g depends on x1 only and
its slope telescopes exactly:

    (1 - (i/N)^2) d_x1 g^(+-i) = sum_{j>i} q_j^(+-),
    q_j^(+-) = c_j/N - (2j-1)/(2N^2) +- (dz/dt - u_nu^(+-j))/N,

seeded by g^(+-N) = 0.  The innermost band interpolates linearly in the
transverse coordinate between the two endpoint slopes.  In the stable
regime (N = 1) the band is flattened first by the shear
(x1, x2) -> (x1 + b (x2 - z(x1)), x2 - z(x1)) with b = beta/(1+beta^2),
and the endpoint integrands are composed with the shear offset so the
tangential boundary conditions hold pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from mixzone.evolution import InterfaceJet, velocity_table
from mixzone.quadrature import PVConfig, inner_nodes, outer_nodes


def band_index(lam, t: float, speeds) -> np.ndarray:
    """Region index in {-N..N} of transverse offsets lam = x2 - z(x1,t).

    Points exactly on an interface belong to the band above.
    """
    lam = np.asarray(lam, dtype=float)
    cs = np.asarray(speeds.speeds)
    edges = t * np.concatenate((-cs[::-1], cs))
    return np.searchsorted(edges, lam, side="right") - speeds.n


def classify(x1, x2, t: float, jet: InterfaceJet) -> np.ndarray:
    lam = np.asarray(x2, dtype=float) - jet.z_at(np.asarray(x1, dtype=float), t)
    return band_index(lam, t, jet.speeds)


def density(band, n: int, regime: str = "unstable"):
    """rho = +-i/N per band; the sign flips in the stable regime."""
    band = np.asarray(band)
    sgn = 1.0 if regime == "unstable" else -1.0
    return sgn * band / n


def m_field(rho, u, grad_g):
    """Momentum m = rho u - (1 - rho^2)(grad^perp g + e2/2)."""
    rho = np.asarray(rho, dtype=float)
    u1, u2 = u
    gx1, gx2 = grad_g
    w = 1.0 - rho * rho
    m1 = rho * u1 - w * (-np.asarray(gx2, dtype=float))
    m2 = rho * u2 - w * (np.asarray(gx1, dtype=float) + 0.5)
    return m1, m2


def full_velocity(jet: InterfaceJet, t: float, x1, x2,
                  cfg: Optional[PVConfig] = None):
    """Velocity from the contour integrals over all 2N interfaces.

    Each interface carries a vorticity sheet of strength proportional to
    its density jump (sgn/N); the 1/eta tails of the two contour-kernel
    components cancel between symmetric nodes, so the shared signed node
    sets integrate both the principal value and the far field.
    """
    if cfg is None:
        cfg = jet.cfg
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    sl = jet.slice_at(t)
    eta_i, w_i = inner_nodes(cfg.inner_n)
    eta_o, w_o = outer_nodes(cfg.outer_r, cfg.outer_n_per_decade)
    eta = np.concatenate((eta_i, eta_o))
    w = np.concatenate((w_i, w_o))
    X1 = x1[:, None]
    arg = X1 - eta
    zc = sl.z(arg, 0)
    zp = sl.z(arg, 1)
    jump = jet.sign / jet.speeds.n
    u1 = np.zeros(x1.shape)
    u2 = np.zeros(x1.shape)
    N = jet.speeds.n
    for i in [k for k in range(-N, N + 1) if k != 0]:
        dz = zc + jet.speeds.c(i) * t - x2[:, None]
        ker = eta / (eta * eta + dz * dz)
        u1 = u1 + jump / (2.0 * np.pi) * (ker * w).sum(axis=1)
        u2 = u2 + jump / (2.0 * np.pi) * (zp * ker * w).sum(axis=1)
    return u1, u2


def _anchored_antiderivative(s: np.ndarray, f: np.ndarray, i_zero: int):
    """Trapezoid antiderivative int_0^s f, exact zero at the s = 0 node."""
    F = np.concatenate(([0.0], cumulative_trapezoid(f, s)))
    return F - F[i_zero]


@dataclass
class GFamily:
    """Potential data of every band at a fixed time."""

    jet: InterfaceJet
    t: float
    shear_b: float
    e_plus: np.ndarray
    e_minus: np.ndarray
    g_hat_plus: np.ndarray
    g_hat_minus: np.ndarray
    dg: Dict[int, np.ndarray]
    g_outer: Dict[int, np.ndarray]
    limits: Dict[int, float]

    @property
    def s(self) -> np.ndarray:
        return self.jet.grid.nodes()

    def _interp(self, table: np.ndarray, x):
        return np.interp(np.asarray(x, dtype=float), self.s, table)

    def hat(self, s, lam):
        """Inner-band (g, dg/ds, dg/dlam) in sheared coordinates."""
        c1t = self.jet.speeds.speeds[0] * self.t
        lam = np.asarray(lam, dtype=float)
        if np.any(np.abs(lam) > c1t * (1.0 + 1.0e-12)):
            raise ValueError("lam outside the inner band")
        gp = self._interp(self.g_hat_plus, s)
        gm = self._interp(self.g_hat_minus, s)
        ep = self._interp(self.e_plus, s)
        em = self._interp(self.e_minus, s)
        wp = (c1t + lam) / (2.0 * c1t)
        wm = (c1t - lam) / (2.0 * c1t)
        g = wp * gp + wm * gm
        dgs = wp * ep + wm * em
        dgl = (gp - gm) / (2.0 * c1t)
        return g, dgs, dgl

    def grad_g(self, x1, x2):
        """(d_x1 g, d_x2 g) at points of the plane; zero outside the zone."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        t = self.t
        lam = x2 - self.jet.z_at(x1, t)
        band = band_index(lam, t, self.jet.speeds)
        gx1 = np.zeros(x1.shape)
        gx2 = np.zeros(x1.shape)
        inner = band == 0
        if np.any(inner):
            b = self.shear_b
            s = x1[inner] + b * lam[inner]
            _, dgs, dgl = self.hat(s, lam[inner])
            zp = self.jet.z_at(x1[inner], t, 1)
            gx1[inner] = (1.0 - b * zp) * dgs - zp * dgl
            gx2[inner] = b * dgs + dgl
        for i, table in self.dg.items():
            m = band == i
            if np.any(m):
                gx1[m] = self._interp(table, x1[m])
        return gx1, gx2

    def g_value(self, x1, x2):
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.atleast_1d(np.asarray(x2, dtype=float))
        t = self.t
        lam = x2 - self.jet.z_at(x1, t)
        band = band_index(lam, t, self.jet.speeds)
        out = np.zeros(x1.shape)
        inner = band == 0
        if np.any(inner):
            s = x1[inner] + self.shear_b * lam[inner]
            g, _, _ = self.hat(s, lam[inner])
            out[inner] = g
        for i, table in self.g_outer.items():
            m = band == i
            if np.any(m):
                out[m] = self._interp(table, x1[m])
        return out


def g_family(jet: InterfaceJet, t: float, cfg: Optional[PVConfig] = None,
             threads: int = 0) -> GFamily:
    """Assemble all band potentials at time t > 0."""
    if t <= 0:
        raise ValueError("band potentials require t > 0")
    grid = jet.grid
    s = grid.nodes()
    N = jet.speeds.n
    table = velocity_table(jet, t, cfg, threads)
    dzdt = jet.dz_dt(s, t)

    if jet.regime == "stable":
        if N != 1:
            raise ValueError("stable construction is defined for N = 1")
        c = jet.speeds.speeds[0]
        beta = jet.z0.beta
        b = beta / (1.0 + beta * beta)
        rp = dzdt - table[1]
        rm = dzdt - table[-1]
        # endpoint integrands composed with the shear offset -+ b c t
        rp_sh = np.interp(s - b * c * t, s, rp)
        rm_sh = np.interp(s + b * c * t, s, rm)
        e_plus = -(c + 0.5) - rp_sh
        e_minus = -(c + 0.5) + rm_sh
        gp = _anchored_antiderivative(s, e_plus, grid.i_zero)
        gm = _anchored_antiderivative(s, e_minus, grid.i_zero)
        return GFamily(jet=jet, t=t, shear_b=b, e_plus=e_plus, e_minus=e_minus,
                       g_hat_plus=gp, g_hat_minus=gm, dg={}, g_outer={},
                       limits={0: -(c + 0.5)})

    cs = jet.speeds.speeds
    drift = {j: cs[j - 1] / N - (2 * j - 1) / (2.0 * N * N)
             for j in range(1, N + 1)}
    q = {}
    for j in range(1, N + 1):
        q[j] = drift[j] + (dzdt - table[j]) / N
        q[-j] = drift[j] - (dzdt - table[-j]) / N
    dg: Dict[int, np.ndarray] = {}
    g_outer: Dict[int, np.ndarray] = {}
    limits: Dict[int, float] = {}
    for i in range(1, N):
        fac = 1.0 / (1.0 - (i / N) ** 2)
        dg[i] = fac * sum(q[j] for j in range(i + 1, N + 1))
        dg[-i] = fac * sum(q[-j] for j in range(i + 1, N + 1))
        g_outer[i] = _anchored_antiderivative(s, dg[i], grid.i_zero)
        g_outer[-i] = _anchored_antiderivative(s, dg[-i], grid.i_zero)
        limits[i] = fac * sum(drift[j] for j in range(i + 1, N + 1))
        limits[-i] = limits[i]
    e_plus = sum(q[j] for j in range(1, N + 1))
    e_minus = sum(q[-j] for j in range(1, N + 1))
    limits[0] = sum(drift[j] for j in range(1, N + 1))
    gp = _anchored_antiderivative(s, e_plus, grid.i_zero)
    gm = _anchored_antiderivative(s, e_minus, grid.i_zero)
    return GFamily(jet=jet, t=t, shear_b=0.0, e_plus=e_plus, e_minus=e_minus,
                   g_hat_plus=gp, g_hat_minus=gm, dg=dg, g_outer=g_outer,
                   limits=limits)


def jump_residual(gf: GFamily, i: int, s=None) -> np.ndarray:
    """Residual of the mass-flux jump identity on interface i (signed).

    Combines the one-sided traces of the tangential derivative of g with
    the interface speed and the continuous normal velocity; vanishes up
    to quadrature and integration error by construction.
    """
    jet = gf.jet
    if i == 0:
        raise ValueError("interface index must be nonzero")
    if s is None:
        s = jet.grid.nodes()
    s = np.asarray(s, dtype=float)
    t = gf.t
    N = jet.speeds.n
    table = velocity_table(jet, t)
    u_i = np.interp(s, jet.grid.nodes(), table[i])
    dzdt = jet.dz_dt(s, t)
    k = abs(i)
    up = np.sign(i)

    def tangential(band):
        if abs(band) == N:
            return np.zeros(s.shape)
        if band == 0:
            c1t = jet.speeds.speeds[0] * t
            lam = up * c1t
            if jet.regime == "stable":
                _, dgs, _ = gf.hat(s + gf.shear_b * lam, lam)
            else:
                _, dgs, _ = gf.hat(s, lam)
            return dgs
        return np.interp(s, jet.grid.nodes(), gf.dg[band])

    band_above = up * k if up > 0 else -(k - 1)
    band_below = up * (k - 1) if up > 0 else -k
    rho_above = density(band_above, N, jet.regime)
    rho_below = density(band_below, N, jet.regime)
    jump_rho = float(rho_above - rho_below)
    res = (jump_rho * (dzdt + jet.speeds.c(i) - u_i)
           + (1.0 - rho_above**2) * (tangential(band_above) + 0.5)
           - (1.0 - rho_below**2) * (tangential(band_below) + 0.5))
    return res


def admissibility_report(gf: GFamily, n_lambda: int = 9) -> Dict[str, float]:
    """Per-band sups of |grad g| and the global margin 1/2 - sup."""
    jet = gf.jet
    t = gf.t
    s = jet.grid.nodes()
    N = jet.speeds.n
    c1t = jet.speeds.speeds[0] * t
    sup_by_band: Dict[int, float] = {}
    report: Dict[str, float] = {}
    lam_inner = np.linspace(-c1t, c1t, n_lambda)
    sup_inner = 0.0
    sup_gx2 = 0.0
    for lam in lam_inner:
        x2 = jet.z_at(s, t) + lam
        gx1, gx2 = gf.grad_g(s, x2)
        sup_inner = max(sup_inner, float(np.max(np.hypot(gx1, gx2))))
        sup_gx2 = max(sup_gx2, float(np.max(np.abs(gx2))))
    sup_by_band[0] = sup_inner
    report["sup_grad_g_band_0"] = sup_inner
    report["sup_gx2_band_0"] = sup_gx2
    report["dev_band_0"] = float(
        np.max(np.abs(0.5 * (gf.e_plus + gf.e_minus) - gf.limits[0])))
    for i, table in gf.dg.items():
        sup_i = float(np.max(np.abs(table)))
        sup_by_band[i] = sup_i
        report[f"sup_grad_g_band_{i}"] = sup_i
        report[f"dev_band_{i}"] = float(np.max(np.abs(table - gf.limits[i])))
    sup_all = max(sup_by_band.values())
    report["sup_grad_g"] = sup_all
    report["margin"] = 0.5 - sup_all
    report["n_bands"] = 2 * N - 1
    return report


def admissible_horizon(jet: InterfaceJet, ladder,
                       cfg: Optional[PVConfig] = None,
                       threads: int = 0):
    """Largest ladder time below which every smaller time is admissible."""
    margins = []
    for t in sorted(ladder):
        gf = g_family(jet, t, cfg, threads)
        margins.append((t, admissibility_report(gf)["margin"]))
    t_star = 0.0
    for t, m in margins:
        if m > 0:
            t_star = t
        else:
            break
    return t_star, margins


@dataclass(frozen=True)
class BumpTest:
    """Tensor-product smooth bump on (t, x1, x2) for weak-form testing."""

    t_center: float
    t_halfwidth: float
    x1_center: float
    x1_halfwidth: float
    x2_center: float
    x2_halfwidth: float

    def _profile(self, u):
        out = np.zeros(np.shape(u))
        m = np.abs(u) < 1.0
        out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
        return out

    def _dprofile(self, u):
        out = np.zeros(np.shape(u))
        m = np.abs(u) < 1.0
        v = u[m]
        out[m] = np.exp(-1.0 / (1.0 - v * v)) * (-2.0 * v / (1.0 - v * v) ** 2)
        return out

    def value_and_grad(self, t, x1, x2):
        ut = (np.asarray(t, dtype=float) - self.t_center) / self.t_halfwidth
        u1 = (np.asarray(x1, dtype=float) - self.x1_center) / self.x1_halfwidth
        u2 = (np.asarray(x2, dtype=float) - self.x2_center) / self.x2_halfwidth
        bt, b1, b2 = self._profile(ut), self._profile(u1), self._profile(u2)
        phi = bt * b1 * b2
        dphit = self._dprofile(ut) * b1 * b2 / self.t_halfwidth
        dphi1 = bt * self._dprofile(u1) * b2 / self.x1_halfwidth
        dphi2 = bt * b1 * self._dprofile(u2) / self.x2_halfwidth
        return phi, dphit, dphi1, dphi2


def weak_residual(jet: InterfaceJet, bump: BumpTest, n_panels: int = 4,
                  gl_order: int = 4, cfg: Optional[PVConfig] = None,
                  threads: int = 0) -> float:
    """|integral of rho dphi/dt + m . grad phi| for one bump test function.

    Composite tensor Gauss-Legendre over the bump support; the exact
    integral vanishes, so the returned value measures construction plus
    discretization error and shrinks under panel refinement.
    """
    from numpy.polynomial.legendre import leggauss

    if cfg is None:
        cfg = jet.cfg
    x, w = leggauss(gl_order)

    def axis(center, half):
        edges = np.linspace(center - half, center + half, n_panels + 1)
        a, b = edges[:-1][:, None], edges[1:][:, None]
        return (0.5 * (b - a) * x + 0.5 * (b + a)).ravel(), \
               (0.5 * (b - a) * np.broadcast_to(w, (n_panels, gl_order))).ravel()

    tq, tw = axis(bump.t_center, bump.t_halfwidth)
    x1q, x1w = axis(bump.x1_center, bump.x1_halfwidth)
    x2q, x2w = axis(bump.x2_center, bump.x2_halfwidth)
    X1, X2 = np.meshgrid(x1q, x2q, indexing="ij")
    X1f, X2f = X1.ravel(), X2.ravel()
    WS = np.outer(x1w, x2w).ravel()
    total = 0.0
    N = jet.speeds.n
    for t, wt in zip(tq, tw):
        if t <= 0:
            continue
        band = classify(X1f, X2f, t, jet)
        rho = density(band, N, jet.regime)
        u1, u2 = full_velocity(jet, t, X1f, X2f, cfg)
        gf = g_family(jet, t, cfg, threads)
        gx1, gx2 = gf.grad_g(X1f, X2f)
        m1, m2 = m_field(rho, (u1, u2), (gx1, gx2))
        _, dphit, dphi1, dphi2 = bump.value_and_grad(t, X1f, X2f)
        total += wt * np.sum(WS * (rho * dphit + m1 * dphi1 + m2 * dphi2))
    return float(abs(total))
