import numpy as np
import pytest

from mixzone.cli import (ConfigError, Scenario, fmt, main, oracle_suite,
                         parse_config, run_scenario, scenario_from_config,
                         _parse_speeds)


def test_fmt_styles():
    assert fmt(True) == "true" and fmt(False) == "false"
    assert fmt(3) == "3"
    assert fmt([1.0, 2.5]) == "1,2.5"
    assert fmt(1.0 / 3.0) == "0.333333333333"
    assert fmt("exact-zero") == "exact-zero"


def test_parse_config_comments_and_errors():
    cfg = parse_config("a.b = 1  # trailing\n\n# full line\nc = x,y\n")
    assert cfg == {"a.b": "1", "c": "x,y"}
    with pytest.raises(ConfigError):
        parse_config("just a line\n")


def test_parse_speeds():
    assert _parse_speeds("0.3, 0.9").speeds == (0.3, 0.9)
    fam = _parse_speeds("near-max 3 0.05")
    assert fam.n == 3
    assert fam.speeds[0] == pytest.approx(1.0 / 3 - 0.05)
    assert fam.speeds[2] == pytest.approx(5.0 / 3 - 0.05)
    with pytest.raises(ConfigError):
        _parse_speeds("near-max 3")
    with pytest.raises(ConfigError):
        _parse_speeds("fast")


def test_scenario_defaults_and_validation():
    sc = scenario_from_config({"curve.kind": "flat"})
    assert sc.regime == "unstable" and sc.speeds.speeds == (0.5,)
    assert sc.grid.n == 4001 and len(sc.times) == 7
    with pytest.raises(ConfigError):
        scenario_from_config({"regime": "sideways"})
    with pytest.raises(ConfigError):
        scenario_from_config({"curve.kind": "flat", "grid.n": "two"})


def test_oracle_suite_passes():
    rep = oracle_suite()
    assert rep.passed()
    assert rep.entries["oracle.profile_integral.measured"] < 1e-6
    assert rep.entries["oracle.hilbert_pair.measured"] < 1e-6


def test_main_usage_errors(tmp_path):
    assert main(["run"]) == 2
    assert main(["run", str(tmp_path / "missing.cfg")]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("regime = sideways\n")
    assert main(["run", str(bad)]) == 2


def test_main_oracle_verb(capsys):
    assert main(["oracle"]) == 0
    out = capsys.readouterr().out
    assert "all_pass = true" in out


FLAT_CFG = """
name = flat-small
curve.kind = flat
regime = unstable
speeds = 0.9
grid.n = 1001
times = 0.1
"""


def test_run_flat_scenario_and_determinism(tmp_path):
    cfg_path = tmp_path / "flat.cfg"
    cfg_path.write_text(FLAT_CFG)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        code = main(["run", str(cfg_path), "--out", str(out)])
        assert code == 0
        outs.append(out)
    for fname in ("manifest.txt", "fields.csv", "interfaces.csv",
                  "jet.csv", "convergence.csv"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
    text = (outs[0] / "manifest.txt").read_text()
    assert "admissibility.measured = 0.1" in text
    assert "all_pass = true" in text
    header = (outs[0] / "fields.csv").read_text().splitlines()[0]
    assert header == "x1,x2,t,region,rho,u1,u2,m1,m2,g,gx1,gx2,margin"


def test_run_scenario_reports_stable_threshold(tmp_path):
    cfg = parse_config("""
curve.kind = tilted
curve.beta = 1.0
regime = stable
speeds = 0.15
grid.n = 1001
times = 0.1
""")
    rep = run_scenario(scenario_from_config(cfg))
    assert rep.entries["c_max_formula"] == pytest.approx(0.5)
    assert rep.entries["c_max_exact_threshold"] == pytest.approx(
        0.5 * (np.sqrt(2.0) - 1.0))
    assert rep.entries["c_max_discrepancy"] is True
    assert rep.passed()
