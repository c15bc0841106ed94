"""Second-order interface jets and normal velocities.

The interface is advanced as a jet z(s,t) = z0 + t z1 + t^2 z2 / 2 with

    z1 = sgn T_{Phi0} zbar0,
    z2 = sgn (T_{Phi0} z1 + T_{Phi1} zbar0 + cbar sigma d^2z0/ds^2),

where sgn = (rho+ - rho-)/2 is +1 in the unstable regime (heavy fluid on
top) and -1 in the stable one.  The same sign multiplies the transforms in
the normal velocities u_nu^(i) = sgn (1/N) sum_j T_{Phi_ij} z.  The
classical sharp-interface evolution provides an independent cross-check of
z1 through a separate adaptive quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from mixzone.curves import Curve, CurveSlice, Grid, default_grid, fd4, spline_fill0
from mixzone.kernels import phi0, phi1, phi_ij
from mixzone.quadrature import PVConfig, PVFunction, transform, transform_grid

REGIMES = ("unstable", "stable")


def regime_sign(regime: str) -> float:
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    return 1.0 if regime == "unstable" else -1.0


@dataclass(frozen=True)
class SpeedFamily:
    """Ordered interface speeds 0 < c_1 < ... < c_N."""

    speeds: Tuple[float, ...]

    def __post_init__(self):
        cs = tuple(float(c) for c in self.speeds)
        if not cs:
            raise ValueError("need at least one speed")
        if any(c <= 0 for c in cs):
            raise ValueError("speeds must be positive")
        if any(b <= a for a, b in zip(cs, cs[1:])):
            raise ValueError("speeds must be strictly increasing")
        object.__setattr__(self, "speeds", cs)

    @property
    def n(self) -> int:
        return len(self.speeds)

    def c(self, i: int) -> float:
        """Signed speed c_i with c_{-i} = -c_i; i in {-N..N} \\ {0}."""
        if i == 0 or abs(i) > self.n:
            raise ValueError(f"interface index {i} out of range")
        return float(np.sign(i)) * self.speeds[abs(i) - 1]

    def bound_violations(self):
        """Indices whose speed breaks c_i < (2i-1)/N (flagged, not fatal)."""
        N = self.n
        return [i + 1 for i, c in enumerate(self.speeds)
                if c >= (2 * (i + 1) - 1) / N]


def sigma(z0: Curve, s):
    """Slope factor (1 - z0'^2) / (1 + z0'^2)^2."""
    a = z0.z(s, 1)
    return (1.0 - a * a) / (1.0 + a * a) ** 2


def cbar(speeds: SpeedFamily) -> float:
    """Effective expansion rate (1/N^2) sum_ij max(c_i, c_j)."""
    c = np.asarray(speeds.speeds)
    return float(np.maximum(c[:, None], c[None, :]).mean())


def c_max(regime: str, beta: float = 0.0, slope_norm: float = 0.0) -> float:
    """Largest admissible mixing speed for flat-profile data."""
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}")
    if regime == "unstable":
        return 1.0
    b = abs(beta)
    if slope_norm >= b:
        raise ValueError("stable regime requires slope_norm < |beta|")
    return 0.5 * b * (b - slope_norm) / (1.0 + b * slope_norm)


@dataclass
class InterfaceJet:
    """Sampled jet (z0, z1, z2) with slice and velocity evaluators."""

    z0: Curve
    speeds: SpeedFamily
    regime: str
    grid: Grid
    cfg: PVConfig
    z1: np.ndarray
    z2: np.ndarray
    cbar: float
    _z1_tables: tuple = field(repr=False, default=())
    _z2_tables: tuple = field(repr=False, default=())
    _u_cache: Dict = field(default_factory=dict, repr=False)

    @property
    def sign(self) -> float:
        return regime_sign(self.regime)

    def z1_fn(self) -> PVFunction:
        return PVFunction(self._z1_tables[0], self._z1_tables[1])

    def z2_fn(self) -> PVFunction:
        return PVFunction(self._z2_tables[0], self._z2_tables[1])

    def pert_at(self, s, t: float, j: int = 0):
        """j-th s-derivative of the decaying part zbar(s, t)."""
        if j < 0 or j > 2:
            raise ValueError("derivative order must be 0, 1 or 2")
        return (self.z0.pert(s, j) + t * self._z1_tables[j](s)
                + 0.5 * t * t * self._z2_tables[j](s))

    def slice_at(self, t: float) -> CurveSlice:
        return CurveSlice(self.z0.beta,
                          lambda s, j=0: self.pert_at(s, t, j),
                          t=t, max_j=2)

    def z_at(self, s, t: float, j: int = 0):
        out = self.pert_at(s, t, j)
        if j == 0:
            return out + self.z0.beta * np.asarray(s, dtype=float)
        if j == 1:
            return out + self.z0.beta
        return out

    def dz_dt(self, s, t: float):
        return self._z1_tables[0](s) + t * self._z2_tables[0](s)


def _sample_tables(grid: Grid, values: np.ndarray):
    """Value/derivative/second-derivative evaluators for grid samples."""
    s = grid.nodes()
    d1 = fd4(values, grid.h)
    d2 = fd4(d1, grid.h)
    return (spline_fill0(s, values), spline_fill0(s, d1), spline_fill0(s, d2))


def build_jet(z0: Curve, speeds: SpeedFamily, regime: str,
              grid: Optional[Grid] = None, cfg: Optional[PVConfig] = None,
              threads: int = 0) -> InterfaceJet:
    """Construct the jet by two passes of the transform over the grid."""
    if grid is None:
        grid = default_grid()
    if cfg is None:
        cfg = PVConfig()
    sgn = regime_sign(regime)
    s = grid.nodes()
    fbar = PVFunction(value=lambda x: z0.pert(x, 0),
                      deriv=lambda x: z0.pert(x, 1))
    w0 = phi0(z0)
    z1 = sgn * transform_grid(fbar, w0, grid, cfg, threads=threads)
    z1_tabs = _sample_tables(grid, z1)
    z1_fn = PVFunction(z1_tabs[0], z1_tabs[1])
    w1 = phi1(z0, z1_fn)
    cb = cbar(speeds)
    z2 = sgn * (transform_grid(z1_fn, w0, grid, cfg, threads=threads)
                + transform_grid(fbar, w1, grid, cfg, threads=threads)
                + cb * sigma(z0, s) * z0.z(s, 2))
    z2_tabs = _sample_tables(grid, z2)
    return InterfaceJet(z0=z0, speeds=speeds, regime=regime, grid=grid,
                        cfg=cfg, z1=z1, z2=z2, cbar=cb,
                        _z1_tables=z1_tabs, _z2_tables=z2_tabs)


def normal_velocity(jet: InterfaceJet, i: int, t: float, s,
                    cfg: Optional[PVConfig] = None):
    """u_nu on interface i at time t, evaluated at s (scalar or array)."""
    if i == 0:
        raise ValueError("interface index must be nonzero")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if cfg is None:
        cfg = jet.cfg
    sl = jet.slice_at(t)
    fn = PVFunction.from_slice(sl)
    ci = jet.speeds.c(i)
    total = 0.0
    for cj in jet.speeds.speeds:
        total = total + transform(fn, phi_ij(sl, ci, cj, t), s, cfg)
    return jet.sign * total / jet.speeds.n


def velocity_table(jet: InterfaceJet, t: float,
                   cfg: Optional[PVConfig] = None,
                   threads: int = 0) -> Dict[int, np.ndarray]:
    """Grid samples of u_nu^(i) for every interface, cached per t."""
    if cfg is None:
        cfg = jet.cfg
    key = (float(t), cfg)
    if key in jet._u_cache:
        return jet._u_cache[key]
    sl = jet.slice_at(t)
    fn = PVFunction.from_slice(sl)
    N = jet.speeds.n
    table: Dict[int, np.ndarray] = {}
    # T depends on i only through the kernel offsets, which coincide in
    # pairs; computing each distinct weight once halves the work
    for i in [k for k in range(-N, N + 1) if k != 0]:
        ci = jet.speeds.c(i)
        acc = 0.0
        for cj in jet.speeds.speeds:
            acc = acc + transform_grid(fn, phi_ij(sl, ci, cj, t), jet.grid,
                                       cfg, threads=threads)
        table[i] = jet.sign * acc / N
    jet._u_cache[key] = table
    return table


def muskat_rhs(z0: Curve, s, regime: str = "unstable",
               epsabs: float = 1.0e-9) -> float:
    """Classical sharp-interface velocity by independent quadrature.

    Integrates the symmetrized kernel of the graph evolution equation
    with adaptive quadrature; serves as an oracle for z1 and shares no
    code with the panel-based transform engine.
    """
    sgn = regime_sign(regime)
    s = float(s)
    zs = float(z0.z(s, 0))
    zps = float(z0.z(s, 1))
    zpp = float(z0.z(s, 2))

    def one_side(eta):
        dz = zs - float(z0.z(s - eta, 0))
        dp = zps - float(z0.z(s - eta, 1))
        return -dp * eta / (eta * eta + dz * dz)

    def sym(eta):
        if eta == 0.0:
            return -2.0 * zpp / (1.0 + zps * zps)
        return one_side(eta) + one_side(-eta)

    # the integrand has features near eta = 0 and eta = |s| (where the
    # shifted argument crosses the perturbation); flag both to the
    # adaptive routine, then add the smooth tail separately
    cut = abs(s) + 50.0
    pts = [abs(s)] if abs(s) > 0 else None
    val, _ = quad(sym, 0.0, cut, epsabs=epsabs, epsrel=1.0e-10, limit=400,
                  points=pts)
    tail, _ = quad(sym, cut, np.inf, epsabs=epsabs, epsrel=1.0e-10, limit=200)
    val += tail
    # rho- - rho+ = -2 sgn under the +/-1 normalization
    return sgn * val / np.pi


def convergence_quantities(jet: InterfaceJet, t: float,
                           cfg: Optional[PVConfig] = None,
                           threads: int = 0):
    """Hypothesis quantities at one time: per-interface sups and the L1.

    Returns (sup_dict, l1) where sup_dict[i] = max_s |dz/dt - u_nu^(i)|
    and l1 is the grid L1 norm of dz/dt minus the symmetrized mean of the
    velocities.
    """
    table = velocity_table(jet, t, cfg, threads)
    s = jet.grid.nodes()
    dz = jet.dz_dt(s, t)
    sups = {i: float(np.max(np.abs(dz - u))) for i, u in table.items()}
    N = jet.speeds.n
    mean = sum(table[i] + table[-i] for i in range(1, N + 1)) / (2.0 * N)
    l1 = float(jet.grid.h * np.sum(np.abs(dz - mean)))
    return sups, l1


def fit_slope(ts, qs, floor: float = 1.0e-14):
    """Least-squares log-log slope of q(t); 'exact-zero' when q ~ 0."""
    ts = np.asarray(ts, dtype=float)
    qs = np.asarray(qs, dtype=float)
    if np.all(qs < floor):
        return "exact-zero"
    if np.any(qs < floor):
        keep = qs >= floor
        ts, qs = ts[keep], qs[keep]
    if ts.size < 2:
        return "exact-zero"
    return float(np.polyfit(np.log(ts), np.log(qs), 1)[0])


def dyadic_ladder(t0: float = 0.2, k_max: int = 6):
    """Times t0 * 2^-k, k = 0..k_max."""
    return [t0 * 2.0 ** -k for k in range(k_max + 1)]
