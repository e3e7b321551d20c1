import json
import subprocess
import sys

import numpy as np
import pytest

from blockade_ladder import cli, linsys, tables
from blockade_ladder.config import PRESETS, ConfigError, ScenarioConfig, parse_flipping, resolve


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def fig3_files(tmp_path):
    a, b = tmp_path / "ladder.csv", tmp_path / "casc.csv"
    assert run("simulate", "ladder", "--preset", "fig3", "--out", a) == 0
    assert run("simulate", "decomposition", "--preset", "fig3", "--out", b) == 0
    return a, b


def test_fig3_decomposition_columns(fig3_files):
    _, b = fig3_files
    table = tables.load(b)
    assert table.columns == ["t", "p_0", "p_1", "p_2", "p_3"]
    assert table["t"][-1] == pytest.approx(10.0)
    assert table.meta["preset"] == "fig3"


def test_manifest(fig3_files):
    a, _ = fig3_files
    manifest = json.loads(cli.manifest_path(a).read_text())
    assert manifest["data_file"] == a.name
    assert manifest["version"] == cli.tool_version()
    assert manifest["config"]["omega_resolved"] == 30.0
    assert manifest["config"]["flipping"] == "prop:0.5,0.5"
    assert manifest["rows"] == PRESETS["fig3"]["t_steps"]
    assert manifest["wall_time_s"] >= 0


def test_compare_fig3(fig3_files, capsys):
    a, b = fig3_files
    cols = "p_0,p_1,p_2,p_3"
    assert run("compare", a, b, "--columns", cols, "--tolerance", 0.02, "--from", 8 / 7) == 0
    assert "PASS" in capsys.readouterr().out
    assert run("compare", a, b, "--columns", cols, "--tolerance", 1e-6) == cli.EXIT_TOLERANCE


def test_compare_identical_is_zero(fig3_files, capsys):
    a, _ = fig3_files
    assert run("compare", a, a) == 0
    out = capsys.readouterr().out
    assert "worst deviation 0 " in out


def test_compare_schema_mismatch(fig3_files, tmp_path):
    a, _ = fig3_files
    other = tmp_path / "rel.csv"
    assert run("simulate", "decomposition", "--relaxation", "--n", "10,100", "--out", other) == 0
    assert run("compare", a, other) == cli.EXIT_CONFIG
    junk = tmp_path / "junk.csv"
    junk.write_text("# schema: other/9\nx,y\n1,2\n")
    assert run("compare", junk, junk) == cli.EXIT_CONFIG


def test_relaxation_table(tmp_path):
    out = tmp_path / "rel.csv"
    assert run("simulate", "decomposition", "--relaxation", "--n", "10,100", "--out", out) == 0
    t = tables.load(out)
    assert t.columns == ["N", "t_r_closed", "t_r_numeric", "rel_diff"]
    assert np.allclose(t["t_r_closed"], [9.0417, 165.238], atol=1e-3)
    assert np.all(np.abs(t["rel_diff"]) < 0.05)


def test_deterministic_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("simulate", "single", "--preset", "mollow", "--spectrum", "--delta-steps", 257, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()


def test_round_trip_json(tmp_path):
    out = tmp_path / "traj.json"
    assert run("simulate", "single", "--omega", 5, "--t-max", 2, "--t-steps", 11, "--format", "json",
               "--out", out) == 0
    t = tables.load(out)
    assert np.allclose(t["trace"], 1.0)
    assert tables.loads_csv(tables.to_csv(t)).columns == t.columns


def test_round_trip_csv_exact():
    t = tables.Table(["x", "y"], {"x": [0.1, 1 / 3], "y": [np.pi, -1e-300]}, {"note": "a b", "k": [1, 2]})
    back = tables.loads_csv(tables.to_csv(t))
    assert np.array_equal(back["y"], t["y"]) and back.meta == t.meta


def test_stdout_output(capsys):
    assert run("simulate", "decomposition", "--n", 2, "--t-max", 1, "--t-steps", 3) == 0
    text = capsys.readouterr().out
    assert tables.loads_csv(text).columns == ["t", "p_0", "p_1", "p_2"]


def test_fig4_spectrum_columns(tmp_path):
    out = tmp_path / "fig4.csv"
    assert run("simulate", "ladder", "--preset", "fig4", "--spectrum", "--method", "resolvent",
               "--delta-steps", 257, "--out", out) == 0
    t = tables.load(out)
    for col in ("delta", "S_numeric", "S_analytic", "S_normalized"):
        assert col in t.columns
    i0 = np.argmin(np.abs(t["delta"]))
    assert t["S_normalized"][i0] == pytest.approx(1.0)
    assert run("compare", out, out, "--columns", "S_normalized:S_analytic_normalized",
               "--relative-to-peak", "--tolerance", 0.1) == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "ladder", "--gamma", "-1"],
        ["simulate", "ladder", "--t-steps", "0"],
        ["simulate", "ladder", "--flipping", "bogus"],
        ["simulate", "single", "--n", "3"],
        ["simulate", "single", "--fractions"],
        ["simulate", "ladder", "--n", "3,4"],
        ["simulate", "nothing"],
        ["simulate", "ladder", "--spectrum", "--fractions"],
        ["simulate", "decomposition", "--fractions", "--gamma-rd", "0"],
    ],
)
def test_config_errors_exit_one(argv):
    with pytest.raises(SystemExit) as info:
        code = cli.main(argv)
        raise SystemExit(code)
    assert info.value.code == cli.EXIT_CONFIG


def test_config_file_precedence(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"preset": "fig3", "omega": 12.0, "t_max": 1.0, "t_steps": 5}))
    out = tmp_path / "o.csv"
    assert run("simulate", "ladder", "--config", cfg_path, "--t-steps", 3, "--out", out) == 0
    manifest = json.loads(cli.manifest_path(out).read_text())["config"]
    assert manifest["omega"] == 12.0 and manifest["t_steps"] == 3 and manifest["flipping"] == "prop:0.5,0.5"


def test_unknown_config_key(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"omegaa": 1}))
    assert run("simulate", "ladder", "--config", cfg_path) == cli.EXIT_CONFIG


def test_numerical_failure_exit_two(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise linsys.IntegrationError("step size collapsed", 0.25)

    monkeypatch.setattr(linsys, "integrate", boom)
    assert run("simulate", "ladder", "--n", 2, "--t-max", 1) == cli.EXIT_NUMERIC
    assert "t_fail = 0.25" in capsys.readouterr().err


def test_photon_rate_sets_omega(tmp_path):
    out = tmp_path / "o.csv"
    assert run("simulate", "single", "--photon-rate", 25, "--t-max", 1, "--t-steps", 3, "--out", out) == 0
    assert json.loads(cli.manifest_path(out).read_text())["config"]["omega_resolved"] == 10.0


def test_flipping_table_file(tmp_path):
    path = tmp_path / "flip.csv"
    path.write_text("0,0\n0.5,0.5\n1.0,1.0\n")
    model = parse_flipping(f"table:{path}")
    assert model.rates(3)[1].tolist() == [0, 0.5, 1.0]
    out_table, out_prop = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("simulate", "ladder", "--n", 3, "--flipping", f"table:{path}", "--t-max", 2, "--out", out_table) == 0
    assert run("simulate", "ladder", "--n", 3, "--flipping", "prop:0.5,0.5", "--t-max", 2, "--out", out_prop) == 0
    assert out_table.read_text().split("\n", 3)[3] == out_prop.read_text().split("\n", 3)[3]


def test_g2_and_revival_modes(tmp_path):
    g2 = tmp_path / "g2.csv"
    assert run("simulate", "ladder", "--n", 1, "--gamma-rg", 0, "--gamma-rd", 0, "--g2", "--seed-time", 10,
               "--tau-steps", 201, "--out", g2) == 0
    assert abs(tables.load(g2)["g2"][0]) < 1e-3
    rev = tmp_path / "rev.csv"
    assert run("simulate", "decomposition", "--preset", "fig3", "--revival", "--out", rev) == 0
    manifest = json.loads(cli.manifest_path(rev).read_text())
    assert manifest["warnings"] == []


def test_fig5_fractions(tmp_path):
    out = tmp_path / "fig5.csv"
    assert run("simulate", "decomposition", "--preset", "fig5", "--t-steps", 101, "--out", out) == 0
    t = tables.load(out)
    assert sorted(set(t["N"])) == [10.0, 100.0]
    assert len(t) == 202


def test_scenario_config_roundtrip():
    cfg = resolve("ladder", "fig4")
    again = ScenarioConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg
    with pytest.raises(ConfigError):
        resolve("ladder", "fig9")


def test_module_entry_point(tmp_path):
    out = tmp_path / "x.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "blockade_ladder", "simulate", "decomposition", "--n", "3", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
