"""Scenario runner: config in, verification report and CSV tables out.

Config files are flat ``key = value`` text with dotted keys::

    curve.kind = gaussian-bump
    curve.amplitude = 0.1
    regime = unstable
    speeds = 0.5            # or "near-max 3 0.05"
    times.t0 = 0.2
    times.k = 6

Verbs: ``run`` (full pipeline), ``oracle`` (closed-form suite only),
``sweep-c`` (bisect the admissible mixing speed at fixed small time).
Exit codes: 0 all enabled flags pass, 1 verification failure, 2 bad
usage or config.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from mixzone.curves import (Curve, Grid, curve_norm_star, default_grid)
from mixzone.evolution import (SpeedFamily, build_jet, c_max, cbar,
                               convergence_quantities, dyadic_ladder,
                               fit_slope, muskat_rhs, sigma)
from mixzone.kernels import phi0, weight_norm0
from mixzone.quadrature import (PVConfig, PVFunction, constant_weight,
                                profile_integral_closed,
                                profile_integral_quadrature, transform)
from mixzone.subsolution import (admissibility_report, classify, density,
                                 full_velocity, g_family, jump_residual,
                                 m_field)

FMT = "%.12g"


def fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return v
    if isinstance(v, (list, tuple, np.ndarray)):
        return ",".join(fmt(x) for x in v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return FMT % float(v)


class ConfigError(Exception):
    pass


def parse_config(text: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _parse_speeds(raw: str) -> SpeedFamily:
    parts = raw.replace(",", " ").split()
    if parts and parts[0] == "near-max":
        if len(parts) != 3:
            raise ConfigError("near-max speeds need: near-max <N> <eps>")
        n, eps = int(parts[1]), float(parts[2])
        return SpeedFamily(tuple((2 * i - 1) / n - eps for i in range(1, n + 1)))
    try:
        return SpeedFamily(tuple(float(p) for p in parts))
    except ValueError as e:
        raise ConfigError(f"bad speeds: {raw!r}") from e


@dataclass
class Scenario:
    curve: Curve
    regime: str
    speeds: SpeedFamily
    grid: Grid
    quad: PVConfig
    times: List[float]
    out_dir: Optional[Path] = None
    threads: int = 0
    name: str = "scenario"


def scenario_from_config(cfg: Dict[str, str]) -> Scenario:
    try:
        kind = cfg.get("curve.kind", "flat")
        curve = Curve(
            kind=kind,
            beta=float(cfg.get("curve.beta", 0.0)),
            amplitude=float(cfg.get("curve.amplitude", 0.0)),
            width=float(cfg.get("curve.width", 1.0)),
            alpha=float(cfg.get("curve.alpha", 0.5)),
        )
        regime = cfg.get("regime", "unstable")
        if regime not in ("unstable", "stable"):
            raise ConfigError(f"bad regime {regime!r}")
        speeds = _parse_speeds(cfg.get("speeds", "0.5"))
        s_max = float(cfg.get("grid.s_max", 40.0))
        n = int(cfg.get("grid.n", 4001))
        grid = Grid(-s_max, s_max, n)
        quad = PVConfig(
            inner_n=int(cfg.get("quad.inner_n", 512)),
            outer_r=float(cfg.get("quad.outer_r", 1.0e4)),
            outer_n_per_decade=int(cfg.get("quad.outer_n_per_decade", 64)),
        )
        if "times" in cfg:
            times = sorted(float(p) for p in cfg["times"].split(","))[::-1]
        else:
            times = dyadic_ladder(float(cfg.get("times.t0", 0.2)),
                                  int(cfg.get("times.k", 6)))
        out = cfg.get("out")
        return Scenario(curve=curve, regime=regime, speeds=speeds, grid=grid,
                        quad=quad, times=times,
                        out_dir=Path(out) if out else None,
                        name=cfg.get("name", "scenario"))
    except (ValueError, KeyError) as e:
        raise ConfigError(str(e)) from e


@dataclass
class Report:
    entries: Dict[str, object] = field(default_factory=dict)
    flags: Dict[str, bool] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def set(self, key: str, value) -> None:
        self.entries[key] = value

    def flag(self, key: str, ok: bool, measured, threshold) -> None:
        self.flags[key] = bool(ok)
        self.entries[f"{key}.measured"] = measured
        self.entries[f"{key}.threshold"] = threshold
        self.entries[f"{key}.pass"] = bool(ok)

    def passed(self) -> bool:
        return all(self.flags.values())

    def manifest_lines(self) -> List[str]:
        lines = [f"{k} = {fmt(v)}" for k, v in self.entries.items()]
        lines.append(f"all_pass = {fmt(self.passed())}")
        for w in self.warnings:
            lines.append(f"warning = {w}")
        return lines


def oracle_suite(quad: Optional[PVConfig] = None) -> Report:
    """Closed-form checks: profile integral, Hilbert pair, integer sums."""
    rep = Report()
    if quad is None:
        quad = PVConfig()
    worst = 0.0
    for a in (0.0, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0):
        for c in (0.5, 1.0, 2.0):
            err = abs(profile_integral_quadrature(a, c, quad)
                      - profile_integral_closed(a, c))
            worst = max(worst, err)
    rep.flag("oracle.profile_integral", worst < 1.0e-6, worst, 1.0e-6)

    fn = PVFunction(value=lambda s: 1.0 / (1.0 + np.asarray(s) ** 2),
                    deriv=lambda s: -2.0 * np.asarray(s) / (1.0 + np.asarray(s) ** 2) ** 2)
    s = np.linspace(-10.0, 10.0, 101)
    got = transform(fn, constant_weight(1.0), s, quad)
    exact = (1.0 - s * s) / (2.0 * (1.0 + s * s) ** 2)
    herr = float(np.max(np.abs(got - exact)))
    rep.flag("oracle.hilbert_pair", herr < 1.0e-6, herr, 1.0e-6)

    ok = True
    for n in range(1, 65):
        for i in range(1, n + 1):
            ok = ok and sum(2 * j - 1 for j in range(i + 1, n + 1)) == n * n - i * i
    ok = ok and cbar(SpeedFamily((0.7,))) == 0.7
    rep.flag("oracle.integer_identities", ok, 1.0 if ok else 0.0, 1.0)
    return rep


def _write_csv(path: Path, header: List[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _export_snapshot(sc: Scenario, jet, gf, t: float, out: Path) -> None:
    N = sc.speeds.n
    s_sub = sc.grid.nodes()[:: max(1, sc.grid.n // 40)]
    c_top = sc.speeds.speeds[-1] * t
    x2_vals = np.linspace(-2.0 * c_top, 2.0 * c_top, 21)
    rows = []
    for x2_off in x2_vals:
        x1 = s_sub
        x2 = jet.z_at(x1, t) + x2_off
        band = classify(x1, x2, t, jet)
        rho = density(band, N, sc.regime)
        u1, u2 = full_velocity(jet, t, x1, x2, sc.quad)
        gx1, gx2 = gf.grad_g(x1, x2)
        m1, m2 = m_field(rho, (u1, u2), (gx1, gx2))
        g = gf.g_value(x1, x2)
        margin = 0.5 * (1.0 - rho**2) - np.hypot(
            m1 - rho * u1, m2 - rho * u2 + 0.5 * (1.0 - rho**2))
        for k in range(x1.size):
            rows.append([x1[k], x2[k], t, int(band[k]), rho[k], u1[k], u2[k],
                         m1[k], m2[k], g[k], gx1[k], gx2[k], margin[k]])
    _write_csv(out / "fields.csv",
               ["x1", "x2", "t", "region", "rho", "u1", "u2", "m1", "m2",
                "g", "gx1", "gx2", "margin"], rows)

    from mixzone.evolution import velocity_table
    table = velocity_table(jet, t, sc.quad)
    rows = []
    for i in [k for k in range(-N, N + 1) if k != 0]:
        res = jump_residual(gf, i)
        u_i = table[i]
        z_i = jet.z_at(sc.grid.nodes(), t) + sc.speeds.c(i) * t
        for k in range(0, sc.grid.n, max(1, sc.grid.n // 100)):
            rows.append([sc.grid.nodes()[k], i, z_i[k], u_i[k], res[k]])
    _write_csv(out / "interfaces.csv", ["s", "i", "z", "u_nu", "jump_residual"],
               rows)


def run_scenario(sc: Scenario) -> Report:
    rep = Report()
    rep.set("name", sc.name)
    rep.set("curve.kind", sc.curve.kind)
    rep.set("curve.beta", sc.curve.beta)
    rep.set("curve.amplitude", sc.curve.amplitude)
    rep.set("regime", sc.regime)
    rep.set("speeds", list(sc.speeds.speeds))
    rep.set("cbar", cbar(sc.speeds))
    viol = sc.speeds.bound_violations()
    if viol:
        rep.warnings.append(f"speed bound violated at i = {viol}")

    s = sc.grid.nodes()
    slope_norm = float(np.max(np.abs(sc.curve.pert(s, 1))))
    rep.set("norm.z0bar_sup_slope", slope_norm)
    for k in (1, 3):
        rep.set(f"norm.z0bar_star_{k}_alpha", curve_norm_star(sc.curve, k, sc.grid))
    w0rep = weight_norm0(phi0(sc.curve), sc.grid)
    rep.set("weight.phi0_norm0", w0rep.norm0)

    if sc.regime == "unstable":
        rep.set("c_max", c_max("unstable"))
    else:
        beta = sc.curve.beta
        formula = c_max("stable", beta, slope_norm)
        rep.set("c_max_formula", formula)
        if slope_norm == 0.0:
            # exact shear evaluation: |grad g| = (c + 1/2)/sqrt(1+beta^2)
            exact = 0.5 * (np.sqrt(1.0 + beta * beta) - 1.0)
            rep.set("c_max_exact_threshold", exact)
            rep.set("c_max_discrepancy", bool(abs(formula - exact) > 1.0e-12))

    jet = build_jet(sc.curve, sc.speeds, sc.regime, sc.grid, sc.quad,
                    threads=sc.threads)
    rep.set("jet.z1_sup", float(np.max(np.abs(jet.z1))))
    rep.set("jet.z2_sup", float(np.max(np.abs(jet.z2))))

    # classical sharp-interface cross-check of z1
    stride = max(1, sc.grid.n // 200)
    idx = np.arange(0, sc.grid.n, stride)
    merr = max(abs(muskat_rhs(sc.curve, s[k], sc.regime) - jet.z1[k])
               for k in idx)
    rep.flag("muskat.z1_agreement", merr < 1.0e-5, merr, 1.0e-5)

    sup_q, l1_q, margins, gx2_sups = [], [], [], []
    gf_last = None
    for t in sc.times:
        sups, l1 = convergence_quantities(jet, t, sc.quad, sc.threads)
        sup_q.append(max(sups.values()))
        l1_q.append(l1)
        gf = g_family(jet, t, sc.quad, sc.threads)
        arep = admissibility_report(gf)
        margins.append(arep["margin"])
        gx2_sups.append(arep["sup_gx2_band_0"])
        gf_last = gf
    rep.set("times", sc.times)
    rep.set("convergence.sup", sup_q)
    rep.set("convergence.l1", l1_q)
    rep.set("admissibility.margins", margins)
    rep.set("admissibility.sup_gx2", gx2_sups)
    rep.set("convergence.sup_slope", fit_slope(sc.times, sup_q))
    rep.set("convergence.l1_slope", fit_slope(sc.times, l1_q))

    t_star = 0.0
    for t, m in sorted(zip(sc.times, margins)):
        if m > 0:
            t_star = t
        else:
            break
    rep.set("admissibility.t_star", t_star)
    rep.flag("admissibility", margins[-1] > 0, margins[-1], 0.0)

    jerr = 0.0
    N = sc.speeds.n
    for i in [k for k in range(-N, N + 1) if k != 0]:
        jerr = max(jerr, float(np.max(np.abs(jump_residual(gf_last, i)))))
    rep.flag("jump_residual", jerr < 1.0e-4, jerr, 1.0e-4)

    # empirical operator-norm ratio for the base transform (reported only)
    z1_norm = curve_norm_star_samples(jet, sc)
    rep.set("transform.operator_ratio", z1_norm)

    if sc.out_dir is not None:
        out = sc.out_dir
        out.mkdir(parents=True, exist_ok=True)
        sig = sigma(sc.curve, s)
        _write_csv(out / "jet.csv", ["s", "z0", "z1", "z2", "sigma"],
                   zip(s, sc.curve.z(s, 0), jet.z1, jet.z2, sig))
        rows = []
        for t, a, b in zip(sc.times, sup_q, l1_q):
            rows.append(["sup_dzdt_minus_u", t, a])
            rows.append(["l1_dzdt_minus_mean_u", t, b])
        _write_csv(out / "convergence.csv", ["quantity", "t", "value"], rows)
        _export_snapshot(sc, jet, gf_last, sc.times[-1], out)
        with open(out / "manifest.txt", "w") as fh:
            fh.write("\n".join(rep.manifest_lines()) + "\n")
    return rep


def curve_norm_star_samples(jet, sc: Scenario) -> float:
    """Ratio of output to input weighted norms for the first transform."""
    from mixzone.curves import norm_k_alpha_star, fd4
    s = sc.grid.nodes()
    fin = [sc.curve.pert(s, j) for j in range(3)]
    nin = norm_k_alpha_star(fin, 2, sc.curve.alpha, sc.grid)
    if nin == 0:
        return 0.0
    z1p = fd4(jet.z1, sc.grid.h)
    nout = norm_k_alpha_star([jet.z1, z1p], 1, sc.curve.alpha, sc.grid)
    w0 = weight_norm0(phi0(sc.curve), sc.grid).norm0
    return nout / (w0 * nin)


def sweep_c(sc: Scenario, t_fix: Optional[float] = None,
            tol: float = 1.0e-3) -> Report:
    """Bisect the largest admissible mixing speed at a fixed small time."""
    rep = Report()
    if sc.speeds.n != 1:
        raise ConfigError("sweep-c works with a single interface")
    if t_fix is None:
        t_fix = min(sc.times)
    rep.set("sweep.t", t_fix)

    def margin_at(c: float) -> float:
        jet = build_jet(sc.curve, SpeedFamily((c,)), sc.regime, sc.grid,
                        sc.quad, threads=sc.threads)
        gf = g_family(jet, t_fix, sc.quad, sc.threads)
        return admissibility_report(gf)["margin"]

    lo, hi = 0.01, 2.0
    if margin_at(lo) <= 0:
        rep.set("sweep.c_threshold", 0.0)
        rep.flag("sweep", False, 0.0, lo)
        return rep
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin_at(mid) > 0:
            lo = mid
        else:
            hi = mid
    rep.set("sweep.c_threshold", 0.5 * (lo + hi))
    rep.flag("sweep", True, 0.5 * (lo + hi), tol)
    return rep


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="mixzone",
                                 description="mixing-zone subsolution verifier")
    ap.add_argument("verb", choices=["run", "oracle", "sweep-c"])
    ap.add_argument("config", nargs="?", help="scenario config path")
    ap.add_argument("--config", dest="config_flag", help="scenario config path")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--threads", type=int, default=0, help="0 = serial")
    ap.add_argument("--strict", action="store_true",
                    help="treat warnings as failures")
    try:
        args = ap.parse_args(argv)
    except SystemExit:
        return 2

    try:
        if args.verb == "oracle":
            rep = oracle_suite()
        else:
            path = args.config_flag or args.config
            if not path:
                print("error: config path required", file=sys.stderr)
                return 2
            sc = scenario_from_config(parse_config(Path(path).read_text()))
            if args.out:
                sc.out_dir = Path(args.out)
            sc.threads = args.threads
            rep = run_scenario(sc) if args.verb == "run" else sweep_c(sc)
    except (ConfigError, FileNotFoundError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2

    for line in rep.manifest_lines():
        print(line)
    if args.strict and rep.warnings:
        return 1
    return 0 if rep.passed() else 1


if __name__ == "__main__":
    sys.exit(main())
