import json
import math

import pytest

from bohmpair import __version__, cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr()


@pytest.mark.parametrize("text,want", [("90deg", math.pi / 2), ("1.5rad", 1.5), ("0.25", 0.25),
                                       ("-45deg", -math.pi / 4)])
def test_parse_angle(text, want):
    assert cli.parse_angle(text) == pytest.approx(want)


def test_parse_angle_rejects():
    import argparse

    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_angle("ninety")


def test_dist_json(capsys):
    code, out = run(capsys, "dist", "--observable", "m1z", "--grid", "8", "--bins", "200")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["schema"] == cli.SCHEMA and doc["version"] == __version__
    assert "threads" not in doc["config"]
    assert doc["result"]["analytic_form"] == "m1z_maxent"
    assert len(doc["result"]["mu"]) == 200
    assert doc["monitors"]["mz_sum_residual"] <= 1e-12


def test_dist_csv_header(capsys):
    code, out = run(capsys, "dist", "--observable", "mxy", "--theta", "0", "--grid", "8",
                    "--format", "csv", "--epsilon", "0.05")
    assert code == 0
    lines = out.out.splitlines()
    assert lines[0].startswith("# bohmpair")
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "mu,density,std_error,analytic"


def test_corr_and_sweep(capsys):
    code, out = run(capsys, "corr", "--sweep", "3", "--grid", "8")
    assert code == 0
    pts = json.loads(out.out)["result"]
    assert [p["theta"] for p in pts] == pytest.approx([0, math.pi / 4, math.pi / 2])
    assert "predicted" in pts[-1]["two_thirds"]


def test_entropy_csv(capsys):
    code, out = run(capsys, "entropy", "--grid", "8", "--format", "csv", "--nu", "2,4")
    assert code == 0
    assert "h_nu_4_over_nu" in out.out


def test_bell_note(capsys):
    code, out = run(capsys, "bell", "--theta", "90deg", "--phi", "180deg", "--grid", "8",
                    "--random", "2")
    assert code == 0
    doc = json.loads(out.out)
    assert "pre-measurement" in doc["result"]["note"]
    assert len(doc["result"]["setups"]) == 3
    assert doc["result"]["setups"][0]["chsh_C"] == pytest.approx(2 * math.sqrt(2))


def test_bell_angles(capsys):
    code, out = run(capsys, "bell", "--grid", "6", "--angles", "0deg,90deg,45deg,315deg")
    assert code == 0


def test_traj_csv(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, _ = run(capsys, "traj", "--theta", "60deg", "--t-end", "1", "--points", "5",
                  "--format", "csv", "--output", str(path), "--backward")
    assert code == 0
    rows = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].startswith("t,alpha1") and "res_energy" in rows[0]
    assert len(rows) == 6


def test_env_override(capsys, monkeypatch):
    monkeypatch.setenv("BOHMPAIR_THETA", "0deg")
    monkeypatch.setenv("BOHMPAIR_FORMAT", "json")
    code, out = run(capsys, "dist", "--observable", "m1x", "--grid", "6", "--bins", "50")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["config"]["theta"] == 0.0
    assert doc["result"]["analytic_form"] == "m1x_product_state"


def test_config_error_exit_code(capsys):
    code, out = run(capsys, "dist", "--observable", "m1z", "--theta", "400deg", "--grid", "4")
    assert code == 2
    assert "outside" in out.err


def test_argparse_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["dist", "--observable", "nope"])
    assert exc.value.code == 2


def test_selftest_quick(capsys):
    code, out = run(capsys, "selftest", "--quick", "--criteria", "4")
    assert code == 0
    assert "[PASS] criterion  4" in out.out
