"""Transform kernels for the interface velocity operators.

All kernels are rational functions of the slope quotient

    Z_t(xi, s) = (z(s,t) - z(s-xi,t)) / xi,

built from a curve slice z = beta*s + zbar.  The generic building block is
the shifted pair

    Phi(xi, s) = sum_k 1 / (1 + (Z_t + d_k/xi)^2),    k = 1, 2,

which covers Phi_0 (d = 0, 0), the two-interface kernels Phi_+/- and the
staircase kernels Phi_{i,j} with offsets d = (c_i -+ c_j) t.  Far-field
data Phi_bar and Phi_tilde come from the closed-form identities

    xi dZ/dxi = dz/ds(s-xi) - Z,
    xi (W - beta) = zbar(s) - zbar(s-xi) + d,      W = Z + d/xi,

so the transform engine never differentiates these kernels numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mixzone.curves import Curve, CurveSlice, Grid
from mixzone.quadrature import PVFunction, Weight, weight_from_phi


def slope_quotient(sl: CurveSlice, xi, s):
    """Z_t(xi, s), continued by dz/ds(s) at xi = 0."""
    xi = np.asarray(xi, dtype=float)
    zero = xi == 0.0
    safe = np.where(zero, 1.0, xi)
    q = sl.beta + (sl.pert(s, 0) - sl.pert(s - xi, 0)) / safe
    if np.any(zero):
        q = np.where(zero, sl.z(s, 1), q)
    return q


def pair_weight(sl: CurveSlice, d1: float, d2: float, label: str = "") -> Weight:
    """Weight with two shifted summands 1/(1 + (Z_t + d_k/xi)^2)."""
    beta = sl.beta
    inf_val = 2.0 / (1.0 + beta * beta)
    offsets = (float(d1), float(d2))

    def phi(xi, s):
        xi = np.asarray(xi, dtype=float)
        Z = sl.beta + (sl.pert(s, 0) - sl.pert(s - xi, 0)) / xi
        total = 0.0
        for d in offsets:
            W = Z + d / xi
            total = total + 1.0 / (1.0 + W * W)
        return total

    def phi_inf(s):
        return inf_val + np.zeros(np.shape(s))

    def phi_bar(xi, s):
        xi = np.asarray(xi, dtype=float)
        dz = sl.pert(s - xi, 0) - sl.pert(s, 0)
        Z = beta - dz / xi
        total = 0.0
        for d in offsets:
            W = Z + d / xi
            total = total + (beta + W) * (dz - d) / ((1.0 + W * W) * (1.0 + beta * beta))
        return total

    def phi_tilde(xi, s):
        xi = np.asarray(xi, dtype=float)
        Z = beta + (sl.pert(s, 0) - sl.pert(s - xi, 0)) / xi
        zp_shift = beta + sl.pert(s - xi, 1)
        total = 0.0
        for d in offsets:
            W = Z + d / xi
            den = 1.0 + W * W
            total = total + (-2.0 * W * (zp_shift - W) / den**2 - 1.0 / den)
        return total

    return Weight(phi=phi, phi_inf=phi_inf, phi_bar=phi_bar,
                  phi_tilde=phi_tilde, label=label)


def phi0(z0: Curve) -> Weight:
    """Kernel 2 xi^2 / (xi^2 + (z0(s-xi) - z0(s))^2) of the initial curve."""
    sl = CurveSlice.from_curve(z0)
    return pair_weight(sl, 0.0, 0.0, label="phi0")


def phi_pm(sl: CurveSlice, c: float, t: float, sign: int) -> Weight:
    """Two-interface kernel for the boundary at z +/- ct."""
    if t <= 0:
        raise ValueError("phi_pm requires t > 0; use phi0 at t = 0")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return phi_ij(sl, sign * c, c, t)


def phi_ij(sl: CurveSlice, c_i: float, c_j: float, t: float) -> Weight:
    """Staircase kernel with offsets (c_i - c_j) t and (c_i + c_j) t.

    c_i is signed (c_{-i} = -c_i); c_j > 0.  At t = 0 both summands
    coincide and the weight equals the initial-curve kernel.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    return pair_weight(sl, (c_i - c_j) * t, (c_i + c_j) * t,
                       label=f"phi({c_i},{c_j},t={t})")


def phi1(z0: Curve, z1_fn: PVFunction) -> Weight:
    """First-order kernel -4 Z0 Z0' / (1 + Z0^2)^2.

    Z0' is the slope quotient of the initial interface velocity z1
    (supplied with its derivative), so this weight feeds the acceleration
    term of the jet.
    """
    sl = CurveSlice.from_curve(z0)
    beta = sl.beta

    def _parts(xi, s):
        xi = np.asarray(xi, dtype=float)
        zero = xi == 0.0
        safe = np.where(zero, 1.0, xi)
        Z0 = beta + (sl.pert(s, 0) - sl.pert(s - xi, 0)) / safe
        Z0p = (np.asarray(z1_fn.value(s)) - np.asarray(z1_fn.value(s - xi))) / safe
        if np.any(zero):
            Z0 = np.where(zero, sl.z(s, 1), Z0)
            Z0p = np.where(zero, np.asarray(z1_fn.deriv(s)), Z0p)
        return Z0, Z0p

    def phi(xi, s):
        Z0, Z0p = _parts(xi, s)
        return -4.0 * Z0 * Z0p / (1.0 + Z0 * Z0) ** 2

    def phi_inf(s):
        return np.zeros(np.shape(s))

    def phi_bar(xi, s):
        xi = np.asarray(xi, dtype=float)
        Z0 = beta + (sl.pert(s, 0) - sl.pert(s - xi, 0)) / xi
        num = np.asarray(z1_fn.value(s)) - np.asarray(z1_fn.value(s - xi))
        return -4.0 * Z0 * num / (1.0 + Z0 * Z0) ** 2

    def phi_tilde(xi, s):
        xi = np.asarray(xi, dtype=float)
        Z0, Z0p = _parts(xi, s)
        den = 1.0 + Z0 * Z0
        dZ0 = (beta + sl.pert(s - xi, 1)) - Z0
        dZ0p = np.asarray(z1_fn.deriv(s - xi)) - Z0p
        xi_dphi = (-4.0 * (dZ0 * Z0p + Z0 * dZ0p) / den**2
                   + 16.0 * Z0 * Z0 * Z0p * dZ0 / den**3)
        return xi_dphi - (-4.0 * Z0 * Z0p / den**2)

    return Weight(phi=phi, phi_inf=phi_inf, phi_bar=phi_bar,
                  phi_tilde=phi_tilde, label="phi1")


def _delta_parts(sl: CurveSlice, z0: Curve, c_i: float, c_j: float, t: float):
    sl0 = CurveSlice.from_curve(z0)
    bigd = (c_i - c_j, c_i + c_j)

    def reg(xi, s):
        xi = np.asarray(xi, dtype=float)
        Z0 = slope_quotient(sl0, xi, s)
        Zt = slope_quotient(sl, xi, s)
        pref = (Z0 * Z0 - Zt * Zt) / (2.0 * (1.0 + Z0 * Z0))
        total = 0.0
        for D in bigd:
            for sgn in (1.0, -1.0):
                W = Zt + sgn * D * t / xi
                total = total + 1.0 / (1.0 + W * W)
        return pref * total

    def sing(xi, s):
        xi = np.asarray(xi, dtype=float)
        Z0 = slope_quotient(sl0, xi, s)
        Zt = slope_quotient(sl, xi, s)
        total = 0.0
        for D in bigd:
            a = D * t * Zt * xi
            b = 0.5 * D * D * t * t
            total = total + ((-a - b) / (xi**2 + (Zt * xi + D * t) ** 2)
                             + (a - b) / (xi**2 + (Zt * xi - D * t) ** 2))
        return total / (1.0 + Z0 * Z0)

    return reg, sing


def delta_split(sl: CurveSlice, z0: Curve, c_i: float, c_j: float, t: float):
    """Regular/singular split of (Phi_{i,j} + Phi_{-i,j})/2 - Phi_0.

    Returns (reg, sing) as Weights; the sum identity against the pair
    kernels is exact pointwise.  Both parts vanish in the far field, so
    phi_bar = xi * phi is exact; phi_tilde is differenced numerically.
    """
    if t <= 0:
        raise ValueError("delta_split requires t > 0")
    reg, sing = _delta_parts(sl, z0, c_i, c_j, t)
    zero_inf = lambda s: np.zeros(np.shape(s))
    w_reg = weight_from_phi(reg, zero_inf, label="delta_reg")
    w_sing = weight_from_phi(sing, zero_inf, label="delta_sing")
    return w_reg, w_sing


def rescaled_profile(sl: CurveSlice, z0: Curve, c: float, t: float,
                     xi, s):
    """Singular profile Psi_t(xi, s) = Delta_sing Phi(t xi, s, t).

    For t > 0 the exact rational form in the quotients Z_t, Z_0 at
    argument t*xi is used; at t = 0 the limit profile with constant slope
    a = dz0/ds(s).  Its integral (1/2pi) int Psi_0 dxi equals
    -c (1 - a^2)/(1 + a^2)^2, the closed profile integral divided by
    1 + a^2.
    """
    xi = np.asarray(xi, dtype=float)
    if t > 0:
        arg = t * xi
        Z0 = slope_quotient(CurveSlice.from_curve(z0), arg, s)
        Zt = slope_quotient(sl, arg, s)
        num = -4.0 * c * c * (4.0 * c * c + (1.0 - 3.0 * Zt * Zt) * xi * xi)
        den = ((1.0 + Z0 * Z0)
               * (xi**2 + (Zt * xi + 2.0 * c) ** 2)
               * (xi**2 + (Zt * xi - 2.0 * c) ** 2))
        return num / den
    a = z0.z(s, 1)
    pref = 1.0 / (1.0 + a * a)
    return pref * ((-2.0 * a * c * xi - 2.0 * c * c) / (xi**2 + (a * xi + 2.0 * c) ** 2)
                   + (2.0 * a * c * xi - 2.0 * c * c) / (xi**2 + (a * xi - 2.0 * c) ** 2))


@dataclass(frozen=True)
class WeightReport:
    """Sampled weight norm: sup|Phi| near 0 plus far-field sups."""

    sup_phi_inner: float
    sup_bar_outer: float
    sup_tilde_outer: float

    @property
    def norm0(self) -> float:
        return self.sup_phi_inner + self.sup_bar_outer + self.sup_tilde_outer


def _default_xi_samples():
    dyadic = 2.0 ** np.arange(-20, 21).astype(float)
    logpts = np.logspace(0.05, 6, 40)
    pos = np.unique(np.concatenate((dyadic, logpts)))
    return np.concatenate((-pos, pos))


def weight_norm0(weight: Weight, grid: Grid, xi_samples=None,
                 s_stride: int = 10) -> WeightReport:
    """Estimate the weight norm by sampling (xi, s)."""
    if xi_samples is None:
        xi_samples = _default_xi_samples()
    xi = np.asarray(xi_samples, dtype=float)
    s = grid.nodes()[::s_stride][:, None]
    inner = xi[np.abs(xi) <= 1.0]
    outer = xi[np.abs(xi) > 1.0]
    sup_phi = float(np.max(np.abs(weight.phi(inner, s)))) if inner.size else 0.0
    if outer.size:
        sup_bar = float(np.max(np.abs(weight.phi_bar(outer, s))))
        sup_tilde = float(np.max(np.abs(weight.phi_tilde(outer, s))))
    else:
        sup_bar = sup_tilde = 0.0
    for v in (sup_phi, sup_bar, sup_tilde):
        if not np.isfinite(v):
            raise ValueError("non-finite weight sample in norm report")
    return WeightReport(sup_phi, sup_bar, sup_tilde)
