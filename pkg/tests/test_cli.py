import math
import subprocess
import sys
import textwrap

import numpy as np
import pytest

from qdspin import cli
from qdspin.observables import SpinTrajectory, read_csv

MINIMAL = """
couplings: {n_nuclei: 3, uniform: 1.0}
epsilon_e: 0.0
initial: {electron: down, nuclear_mask: 0}
time: {t_max: 50, n_points: 500}
"""


def write(tmp_path, text, name="run.yaml"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


def test_minimal_config_and_defaults():
    cfg = cli.parse_config(MINIMAL)
    assert cfg.n_nuclei == 3
    assert cfg.couplings.epsilon_n == 0.0
    assert cfg.solver == "sector-eigen"
    assert len(cfg.times) == 500 and cfg.times[-1] == 50.0
    assert np.allclose(np.diff(cfg.times), 50 / 499)


def test_exponential_profile():
    cfg = cli.parse_config(MINIMAL.replace("{n_nuclei: 3, uniform: 1.0}",
                                           "{n_nuclei: 5, exponential: {a_max: 1, gamma: 0.3}}"))
    assert list(cfg.couplings.a) == pytest.approx([math.exp(-0.3 * k) for k in range(5)])


def test_log_grid_and_pole_shortcut():
    text = MINIMAL.replace("{t_max: 50, n_points: 500}",
                           "{t_max: 10, n_points: 5, spacing: log, t_min: 0.01}")
    cfg = cli.parse_config(text + "solver: pole-approx-PA0\n")
    np.testing.assert_allclose(cfg.times, np.geomspace(0.01, 10, 5))
    assert (cfg.solver, cfg.pole_variant) == ("pole-approx", "PA0")


@pytest.mark.parametrize("old, new, field", [
    ("{n_nuclei: 3, uniform: 1.0}", "{n_nuclei: 3, uniform: 1.0, explicit: [1, 2, 3]}",
     "couplings"),
    ("{n_nuclei: 3, uniform: 1.0}", "{uniform: 1.0}", "couplings.n_nuclei"),
    ("{n_nuclei: 3, uniform: 1.0}", "{explicit: [1, 2], n_nuclei: 3}", "couplings.n_nuclei"),
    ("nuclear_mask: 0", "nuclear_mask: 8", "initial.nuclear_mask"),
    ("nuclear_mask: 0", "down_nuclei: [4]", "initial.down_nuclei"),
    ("electron: down", "electron: sideways", "initial.electron"),
    ("n_points: 500", "n_points: 1", "time.n_points"),
    ("t_max: 50", "t_max: -1", "time.t_max"),
    ("t_max: 50", "t_max: abc", "time.t_max"),
    ("epsilon_e: 0.0", "epsilon_e: .nan", "epsilon_e"),
])
def test_config_errors_name_the_field(old, new, field):
    with pytest.raises(cli.ConfigError) as info:
        cli.parse_config(MINIMAL.replace(old, new))
    assert info.value.field == field


def test_missing_section_and_bad_solver():
    with pytest.raises(cli.ConfigError, match="time"):
        cli.parse_config(MINIMAL.split("time:")[0])
    with pytest.raises(cli.ConfigError) as info:
        cli.parse_config(MINIMAL + "solver: magic\n")
    assert info.value.field == "solver"
    with pytest.raises(cli.ConfigError):
        cli.parse_config("- just\n- a list\n")


def test_explicit_sector_amplitudes():
    cfg = cli.parse_config("""
couplings: {explicit: [0.4, 0.9]}
initial:
  sectors:
    - {m: 0, weight: 2.0, y: [1], x: [0, "0.5j"]}
    - {m: -1, x: [[0, 1]]}
time: {t_max: 1, n_points: 3}
""")
    assert cfg.initial.sectors == [-1, 0]
    np.testing.assert_allclose(cfg.initial.column(-1), [1j / np.sqrt(6)])
    with pytest.raises(cli.ConfigError, match="needs 1 Y and 2 X"):
        cli.parse_config("""
couplings: {explicit: [0.4, 0.9]}
initial: {sectors: [{m: 0, y: [1, 0]}]}
time: {t_max: 1, n_points: 3}
""")


def test_run_down_all_up_single_sector(tmp_path):
    cfg = cli.parse_config(MINIMAL)
    assert cfg.initial.sectors == [0]
    result = cli.run(cfg, out=str(tmp_path / "o.csv"))
    assert result.ok
    assert result.trajectory.s_z[0] == pytest.approx(-1.0, abs=1e-14)
    assert list(result.trajectory.sectors) == [0]


def test_laplace_refused_outside_m0():
    cfg = cli.parse_config(MINIMAL.replace("nuclear_mask: 0", "nuclear_mask: 2")
                           + "solver: laplace-m0\n")
    with pytest.raises(ValueError, match="only the m=0 sector"):
        cli.run(cfg)


def test_laplace_route_matches_spectral():
    cfg = cli.parse_config("""
couplings: {explicit: [1.0, 0.7, 0.45, 0.3]}
epsilon_e: 0.5
initial: {electron: +x, nuclear_mask: 0}
time: {t_max: 50, n_points: 300}
""")
    a = cli.solve(cfg, "laplace-m0")
    b = cli.solve(cfg, "sector-eigen")
    for key in ("s_x", "s_y", "s_z"):
        assert np.max(np.abs(getattr(a, key) - getattr(b, key))) <= 1e-10


def test_capacity_error_names_sector():
    cfg = cli.parse_config(MINIMAL.replace("{n_nuclei: 3, uniform: 1.0}",
                                           "{n_nuclei: 14, uniform: 0.1}")
                           .replace("nuclear_mask: 0", "nuclear_mask: 63"))
    with pytest.raises(cli.CapacityError, match=r"N=14, m=6 .*6435"):
        cli.run(cfg)


def test_evolve_compare_writes_two_csvs(tmp_path, capsys):
    path = write(tmp_path, """
couplings: {n_nuclei: 4, exponential: {a_max: 1.0, gamma: 0.3}}
epsilon_e: 2.0
initial: {electron: +y, down_nuclei: [1, 3]}
time: {t_max: 20, n_points: 50}
""")
    out = tmp_path / "eig.csv"
    code = cli.main(["evolve", path, "--solver", "pole-approx", "--out", str(out),
                     "--compare", "sector-eigen"])
    assert code == 0
    assert out.exists() and (tmp_path / "eig.sector-eigen.csv").exists()
    assert "max |delta s_z|" in capsys.readouterr().out


def test_determinism_across_workers(tmp_path):
    path = write(tmp_path, """
couplings: {n_nuclei: 6, exponential: {a_max: 1.0, gamma: 0.2}}
epsilon_e: 0.7
initial: {theta: 1.1, phi: 0.4, nuclear_mask: 21}
time: {t_max: 30, n_points: 200}
""")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["evolve", path, "--out", str(a), "--workers", "1"]) == 0
    assert cli.main(["evolve", path, "--out", str(b), "--workers", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_invariant_violation_gives_nonzero_exit(tmp_path, monkeypatch):
    path = write(tmp_path, MINIMAL)
    monkeypatch.setattr(SpinTrajectory, "check", lambda self, **kw: ["norm drift 1 exceeds 0"])
    assert cli.main(["evolve", path, "--out", str(tmp_path / "x.csv")]) == 1


def test_config_error_exit_code(tmp_path, capsys):
    path = write(tmp_path, MINIMAL.replace("n_points: 500", "n_points: 1"))
    assert cli.main(["evolve", path]) == 2
    assert "time.n_points" in capsys.readouterr().err


def test_sectors_command(capsys):
    assert cli.main(["sectors", "3"]) == 0
    text = capsys.readouterr().out
    assert "all states: 16 = 2^4" in text
    assert "   1     0          3          3          6" in text


def test_poles_command(tmp_path, capsys):
    path = write(tmp_path, """
couplings: {n_nuclei: 6, uniform: 1.0}
epsilon_e: 100.0
initial: {electron: down, nuclear_mask: 0}
time: {t_max: 1, n_points: 2}
""")
    out = tmp_path / "poles.csv"
    assert cli.main(["poles", path, "--m", "1", "--format", "csv", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "index,config,exact,pa0,pa1" and len(rows) == 7
    assert cli.main(["poles", path]) == 0
    assert "all poles of D_{N+1}" in capsys.readouterr().out
    assert cli.main(["poles", path, "--m", "6"]) == 2


def test_validation_commands(tmp_path, capsys):
    path = write(tmp_path, """
couplings: {explicit: [0.9, 0.5, 0.3]}
epsilon_e: 1.0
initial: {electron: +x, nuclear_mask: 2}
time: {t_max: 10, n_points: 20}
""")
    assert cli.main(["oracle-check", path, "--random", "3", "--seed", "7"]) == 0
    assert "PASS oracle-check" in capsys.readouterr().out
    assert cli.main(["liouville-check", path, "--points", "6"]) == 0
    assert "PASS liouville-check" in capsys.readouterr().out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qdspin", "sectors", "2"],
                          capture_output=True, text=True, check=True)
    assert "all states: 8 = 2^3" in proc.stdout


def test_csv_output_readable(tmp_path):
    path = write(tmp_path, MINIMAL)
    out = tmp_path / "o.csv"
    assert cli.main(["evolve", path, "--out", str(out)]) == 0
    data = read_csv(out)
    assert len(data["t"]) == 500 and data["s_z"][0] == pytest.approx(-1.0, abs=1e-14)
