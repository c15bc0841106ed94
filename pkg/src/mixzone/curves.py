"""Initial interface curves, sampling grids, and weighted Holder norms.

A curve is z0(s) = beta*s + zbar0(s) with a decaying perturbation zbar0.
The catalog kinds (flat, tilted, gaussian-bump, rational-bump) have
closed-form derivatives up to order 3; sampled curves fall back to
4th-order finite differences on their sample grid.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

CATALOG_KINDS = ("flat", "tilted", "gaussian-bump", "rational-bump", "sampled")


@dataclass(frozen=True)
class Grid:
    """Symmetric uniform sampling grid on [s_min, s_max]."""

    s_min: float
    s_max: float
    n: int

    def __post_init__(self):
        if self.s_min >= self.s_max:
            raise ValueError("grid requires s_min < s_max")
        if self.n < 2:
            raise ValueError("grid requires n >= 2")
        if abs(self.s_min + self.s_max) > 1e-12 * max(1.0, abs(self.s_max)):
            raise ValueError("grid must be symmetric about 0 (s_min = -s_max)")

    @property
    def h(self) -> float:
        return (self.s_max - self.s_min) / (self.n - 1)

    def nodes(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.n)

    @property
    def i_zero(self) -> int:
        """Index of the node closest to s = 0."""
        return int(round(-self.s_min / self.h))


def default_grid() -> Grid:
    # perturbations decay like |s|^-2 or faster; s_max = 40 keeps truncation
    # error below quadrature tolerance
    return Grid(-40.0, 40.0, 4001)


def fd4(values: np.ndarray, h: float) -> np.ndarray:
    """4th-order finite-difference derivative of uniformly sampled values."""
    f = np.asarray(values, dtype=float)
    if f.size < 5:
        raise ValueError("need at least 5 samples for 4th-order differences")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    out[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    out[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    out[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    out[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    return out


def spline_fill0(x: np.ndarray, y: np.ndarray):
    """Cubic-spline interpolant that returns 0 outside the sample range.

    Suitable for decaying quantities sampled on a finite window.
    """
    sp = CubicSpline(x, y)
    lo, hi = x[0], x[-1]

    def f(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape)
        m = (s >= lo) & (s <= hi)
        if np.any(m):
            out[m] = sp(s[m])
        return out

    return f


@dataclass(frozen=True)
class Curve:
    """Initial curve z0(s) = beta*s + zbar0(s).

    kind selects the perturbation: 'flat' and 'tilted' have zbar0 = 0,
    'gaussian-bump' is A*exp(-(s/w)^2), 'rational-bump' is A/(1+(s/w)^2),
    'sampled' interpolates user samples with FD derivatives.
    """

    kind: str
    beta: float = 0.0
    amplitude: float = 0.0
    width: float = 1.0
    alpha: float = 0.5
    samples: Optional[tuple] = None  # (Grid, values) for kind='sampled'

    def __post_init__(self):
        if self.kind not in CATALOG_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.kind == "sampled":
            if self.samples is None:
                raise ValueError("sampled curve requires samples=(grid, values)")
            grid, vals = self.samples
            vals = np.asarray(vals, dtype=float)
            if vals.shape != (grid.n,):
                raise ValueError("sample values must match the sample grid")
            tables = [vals]
            for _ in range(3):
                tables.append(fd4(tables[-1], grid.h))
            splines = tuple(CubicSpline(grid.nodes(), tab) for tab in tables)
            object.__setattr__(self, "_splines", splines)
        elif self.samples is not None:
            raise ValueError("samples only allowed for kind='sampled'")

    def pert(self, s, j: int = 0):
        """j-th derivative of the decaying perturbation zbar0."""
        if j not in (0, 1, 2, 3):
            raise ValueError("derivative order must be in {0,1,2,3}")
        s = np.asarray(s, dtype=float)
        if self.kind in ("flat", "tilted"):
            return np.zeros(s.shape)
        A, w = self.amplitude, self.width
        if self.kind == "gaussian-bump":
            u = s / w
            e = np.exp(-u * u)
            if j == 0:
                return A * e
            if j == 1:
                return A * (-2 * u) * e / w
            if j == 2:
                return A * (4 * u * u - 2) * e / w**2
            return A * (12 * u - 8 * u**3) * e / w**3
        if self.kind == "rational-bump":
            u = s / w
            d = 1.0 + u * u
            if j == 0:
                return A / d
            if j == 1:
                return A * (-2 * u) / d**2 / w
            if j == 2:
                return A * (6 * u * u - 2) / d**3 / w**2
            return A * (24 * u - 24 * u**3) / d**4 / w**3
        # sampled
        grid, _ = self.samples
        if np.any(s < grid.s_min) or np.any(s > grid.s_max):
            raise ValueError("s outside sampled support")
        return np.asarray(self._splines[j](s))

    def z(self, s, j: int = 0):
        """j-th derivative of the full curve z0 = beta*s + zbar0."""
        out = self.pert(s, j)
        if j == 0:
            return out + self.beta * np.asarray(s, dtype=float)
        if j == 1:
            return out + self.beta
        return out


def eval_curve(curve: Curve, s, j: int = 0):
    return curve.z(s, j)


class CurveSlice:
    """A curve at a fixed time: z(s) = beta*s + zbar(s) with derivatives.

    pert(s, j) evaluates the decaying part, z(s, j) the full curve.
    """

    def __init__(self, beta: float, pert_eval, t: float = 0.0, max_j: int = 3):
        self.beta = beta
        self.t = t
        self.max_j = max_j
        self._pert = pert_eval

    def pert(self, s, j: int = 0):
        if j < 0 or j > self.max_j:
            raise ValueError("derivative order out of range for this slice")
        return self._pert(s, j)

    def z(self, s, j: int = 0):
        out = self.pert(s, j)
        if j == 0:
            return out + self.beta * np.asarray(s, dtype=float)
        if j == 1:
            return out + self.beta
        return out

    @classmethod
    def from_curve(cls, curve: Curve) -> "CurveSlice":
        return cls(curve.beta, curve.pert, t=0.0)


def decay_profile(curve: Curve, grid: Grid, j: int = 0) -> np.ndarray:
    """(1+|s|^(1+alpha)) * |d^j zbar0| sampled on the grid."""
    s = grid.nodes()
    w = 1.0 + np.abs(s) ** (1.0 + curve.alpha)
    return w * np.abs(curve.pert(s, j))


def decay_is_bounded(curve: Curve, grid: Grid, tol: float = np.inf) -> bool:
    """Check the weighted decay of zbar0 and derivatives on the grid."""
    return all(np.max(decay_profile(curve, grid, j)) < tol for j in range(4))


def holder_seminorm_star(f: Sequence[float], alpha: float, grid: Grid) -> float:
    """Discrete weighted Holder seminorm.

    Estimates sup over offsets |xi| <= 1 and grid points s of
    (1+|s|^(1+alpha)) |f(s-xi)-f(s)| / |xi|^alpha, with xi restricted to
    grid offsets.  A lower bound of the true seminorm; nondecreasing
    under grid refinement.
    """
    f = np.asarray(f, dtype=float)
    if f.size == 0:
        raise ValueError("empty sample set")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    s = grid.nodes()
    w = 1.0 + np.abs(s) ** (1.0 + alpha)
    h = grid.h
    kmax = min(int(np.floor(1.0 / h)), f.size - 1)
    best = 0.0
    for k in range(1, kmax + 1):
        d = np.abs(f[k:] - f[:-k])
        wmax = np.maximum(w[k:], w[:-k])
        val = np.max(wmax * d) / (k * h) ** alpha
        if val > best:
            best = float(val)
    return best


def norm_k_alpha_star(derivs: Sequence[np.ndarray], k: int, alpha: float,
                      grid: Grid) -> float:
    """Discrete weighted C^{k,alpha} norm from sampled derivatives.

    derivs must hold samples of f, f', ..., f^(k) on the grid.
    """
    if k not in (0, 1, 2, 3):
        raise ValueError("k must be in {0,1,2,3}")
    if len(derivs) < k + 1:
        raise ValueError("missing derivative samples")
    s = grid.nodes()
    w = 1.0 + np.abs(s) ** (1.0 + alpha)
    sup = max(float(np.max(w * np.abs(np.asarray(d, dtype=float))))
              for d in derivs[:k + 1])
    return sup + holder_seminorm_star(derivs[k], alpha, grid)


def curve_norm_star(curve: Curve, k: int, grid: Grid) -> float:
    """Weighted norm of the perturbation zbar0 of a curve."""
    s = grid.nodes()
    derivs = [curve.pert(s, j) for j in range(k + 1)]
    return norm_k_alpha_star(derivs, k, curve.alpha, grid)


def normalize_densities(rho_plus: float, rho_minus: float):
    """Affine normalization sending {rho+, rho-} to {+1, -1}.

    Returns (a, b) with a = (rho+ - rho-)/2, b = (rho+ + rho-)/2.
    """
    if rho_plus == rho_minus:
        raise ValueError("equal densities define no interface")
    return (rho_plus - rho_minus) / 2.0, (rho_plus + rho_minus) / 2.0
