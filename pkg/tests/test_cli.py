import json

import pytest

from hmtsim.cli import main, parse_config_text, parse_range


def read(path):
    return path.read_text()


def test_parse_range():
    assert parse_range("0:2:6") == (0.0, 2.0, 4.0, 6.0)
    assert parse_range("0.05:0.05:0.35")[-1] == pytest.approx(0.35)
    assert parse_range("1,5, 9") == (1.0, 5.0, 9.0)
    assert parse_range("") == ()


def test_parse_config_text():
    cfg = parse_config_text("# demo\nchannel = exp\nspread=0.1  # factor\nreceivers = tpr, ub\nsnr_db = 0:10:20\nseed = 4\n")
    assert cfg == {"channel": "exp", "spread": 0.1, "receivers": ("tpr", "ub"), "snr_db": (0.0, 10.0, 20.0), "seed": 4}


def test_sinr_curve_one_row_per_snr(tmp_path):
    rc = main(["sinr-curve", "--channel", "uni", "--spread", "0.07", "--receiver", "maxsinr",
               "--snr", "0:10:20", "--realizations", "3", "--out", str(tmp_path)])
    assert rc == 0
    lines = read(tmp_path / "sinr-curve.csv").splitlines()
    assert len(lines) == 4
    manifest = json.loads(read(tmp_path / "sinr-curve.manifest.json"))
    assert manifest["status"] == "ok" and manifest["config"]["spread"] == 0.07
    assert manifest["outputs"] == [str(tmp_path / "sinr-curve.csv")]


def test_rerun_is_byte_identical(tmp_path):
    args = ["sinr-curve", "--channel", "exp", "--spread", "0.2", "--snr", "10", "--realizations", "3", "--seed", "9"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert read(tmp_path / "a" / "sinr-curve.csv") == read(tmp_path / "b" / "sinr-curve.csv")


def test_upper_bound_column_on_uniform_channel(tmp_path):
    rc = main(["sinr-curve", "--channel", "uni", "--spread", "0.2", "--receiver", "ub",
               "--method", "analytic", "--snr", "0:10:30", "--out", str(tmp_path)])
    assert rc == 0
    rows = read(tmp_path / "sinr-curve.csv").splitlines()[1:]
    dts = {float(r.split(",")[9]) for r in rows}
    from hmtsim.channel import ScatteringSpec
    from hmtsim.lattice import LatticeSpec, default_sigma

    tau = ScatteringSpec.from_spread("uni", 0.2, default_sigma(LatticeSpec(1e-4, 2.5e4))).delay
    assert len(rows) == 4
    assert all(dt == pytest.approx(tau / 2, rel=1e-3) for dt in dts)


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("channel = exp\nspread = 0.35\nreceivers = tpr,maxsinr\nsnr_db = 20\n")
    rc = main(["sinr-curve", "--config", str(cfg), "--set", "spread=0.1", "--method", "analytic", "--out", str(tmp_path)])
    assert rc == 0
    manifest = json.loads(read(tmp_path / "sinr-curve.manifest.json"))
    assert manifest["config"]["spread"] == 0.1 and manifest["config"]["channel"] == "exp"


def test_spread_sweep_analytic_trends(tmp_path):
    rc = main(["spread-sweep", "--channel", "uni", "--method", "analytic", "--out", str(tmp_path)])
    assert rc == 0
    rows = [r.split(",") for r in read(tmp_path / "spread-sweep.csv").splitlines()[1:]]
    tpr = [float(r[2]) for r in rows if r[4] == "tpr"]
    mx = [float(r[2]) for r in rows if r[4] == "maxsinr"]
    assert all(a > b for a, b in zip(tpr, tpr[1:])) and all(a > b for a, b in zip(mx, mx[1:]))
    gains = [m - t for m, t in zip(mx, tpr)]
    assert max(gains) == gains[-1]


@pytest.mark.parametrize("argv", [
    ["spread-sweep", "--channel", "exp", "--spreads", ""],
    ["spread-sweep", "--channel", "exp", "--spreads", "0.1,-0.2"],
    ["sinr-curve", "--channel", "uni", "--snr", "5:1:0"],
    ["sinr-curve", "--channel", "uni", "--set", "colour=red"],
    ["sinr-curve", "--channel", "uni", "--sigma", "-1"],
    ["sinr-curve", "--channel", "mystery"],
    ["sinr-curve", "--config", "/nonexistent/run.cfg"],
    ["validate", "--sigma", "-1"],
    [],
])
def test_bad_input_exit_code(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv and argv[0] != "validate" else [])) == 2


def test_validate_writes_report(tmp_path):
    out = tmp_path / "report.json"
    assert main(["validate", "--report", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["passed"] is True and len(doc["reports"]) == 3


def test_ber_curve_and_robustness_commands(tmp_path):
    assert main(["ber-curve", "--channel", "uni", "--spread", "0.2", "--snr", "10,20", "--realizations", "2",
                 "--out", str(tmp_path)]) == 0
    manifest = json.loads(read(tmp_path / "ber-curve.manifest.json"))
    assert "ebn0_convention" in manifest and len(manifest["snr_db_per_point"]) == 2
    assert main(["robustness", "--channel", "exp", "--spread", "0.1", "--snr", "0,30", "--realizations", "3",
                 "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "robustness.csv").splitlines()[1:]
    assert {r.split(",")[4] for r in rows} == {"ub", "maxsinr", "tpr"}


def test_runtime_failure_exit_code(tmp_path, monkeypatch):
    import hmtsim.cli as cli

    def boom(cfg):
        raise RuntimeError("solver exploded")

    monkeypatch.setattr(cli, "measure_sinr", boom)
    rc = main(["sinr-curve", "--channel", "uni", "--realizations", "3", "--out", str(tmp_path)])
    assert rc == 3
    manifest = json.loads(read(tmp_path / "sinr-curve.manifest.json"))
    assert manifest["status"] == "error"
    assert not (tmp_path / "sinr-curve.csv").exists()
