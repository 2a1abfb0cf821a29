import json

import pytest

from gossip_age import cli


def test_simulate_writes_stable_csv(tmp_path):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    argv = [
        "simulate", "--topology", "torus-grid", "--side", "3", "--horizon", "400",
        "--seed", "6", "--reps", "2",
    ]
    assert cli.main(argv + ["--out", str(out1)]) == 0
    assert cli.main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "# gossip-age v1"
    assert lines[1] == cli.SIMULATE_COLUMNS
    fields = dict(zip(lines[1].split(","), lines[2].split(",")))
    assert fields["topology"] == "torus-grid-d2-L3"
    assert float(fields["estimate"]) > 0


def test_simulate_rejects_bad_side(capsys):
    assert cli.main(["simulate", "--side", "2"]) == 2
    assert "side" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert cli.main(["simulate", "--bogus", "1"]) == 2


def test_missing_subcommand_is_usage_error():
    assert cli.main([]) == 2


def test_simulate_json_format(tmp_path):
    out = tmp_path / "r.json"
    assert (
        cli.main(
            ["simulate", "--topology", "ring", "--n", "4", "--horizon", "200",
             "--seed", "2", "--reps", "2", "--format", "json", "--out", str(out)]
        )
        == 0
    )
    rows = json.loads(out.read_text())
    assert len(rows) == 1
    assert rows[0]["n"] == 4
    assert rows[0]["estimate"] > 0


def test_exact_complete2(tmp_path, capsys):
    out = tmp_path / "table.csv"
    assert cli.main(["exact", "--topology", "complete", "--n", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "subset,size,v_S"
    rows = {line.split(",")[0]: line.split(",")[2] for line in lines[2:]}
    assert float(rows["0x3"]) == 1.0
    assert float(rows["0x1"]) == pytest.approx(4 / 3)
    assert "v_singleton" in capsys.readouterr().err


def test_exact_cap_exceeded(capsys):
    assert cli.main(["exact", "--topology", "torus-grid", "--side", "5"]) == 2
    assert "cap" in capsys.readouterr().err


def test_bounds_report(tmp_path):
    out = tmp_path / "report.json"
    assert cli.main(["bounds", "--n", "100", "--j", "9", "--vmax", "5", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["E_lower"] == 6
    assert data["n"] == 100
    assert data["beta_prime"] == pytest.approx(3.2594, abs=5e-4)


def test_bounds_rejects_csv():
    assert cli.main(["bounds", "--n", "100", "--format", "csv"]) == 2


def test_isoperimetry_single_size(tmp_path):
    out = tmp_path / "iso.csv"
    assert cli.main(["isoperimetry", "--side", "4", "--j", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "j,min_E,witness,lower_bound,spiral_E"
    j, min_e, witness, lower, spiral_e = lines[2].split(",")
    assert (j, min_e, lower, spiral_e) == ("1", "4", "2", "4")


def test_verify_passes(capsys):
    assert cli.main(["verify", "--n-max", "300"]) == 0
    out = capsys.readouterr().out
    assert "ok   floor-inequality" in out
    assert "FAIL" not in out


def test_verify_writes_report_artifact(tmp_path):
    out = tmp_path / "checks.csv"
    assert cli.main(["verify", "--n-max", "200", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == "check,status,detail"
    assert all(",ok," in line for line in lines[2:])


def test_deterministic_subcommands_accept_seed(tmp_path):
    out = tmp_path / "t.csv"
    assert cli.main(["exact", "--topology", "complete", "--n", "2", "--seed", "4",
                     "--out", str(out)]) == 0
    assert cli.main(["isoperimetry", "--side", "4", "--j", "1", "--seed", "4",
                     "--out", str(out)]) == 0


def test_verify_detects_injected_fault():
    checks = cli.run_verification(n_max=50, floor_alpha=1.0)
    assert any(not ok for _, ok, _ in checks)


def test_verify_exit_code_on_failure(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_verification", lambda n_max: [("demo", False, "boom")])
    assert cli.main(["verify"]) == 4


def test_sweep_rows_and_domination(tmp_path):
    out = tmp_path / "sweep.csv"
    argv = [
        "sweep", "--sides", "4,3", "--horizon", "600", "--seed", "11", "--reps", "2",
        "--out", str(out),
    ]
    assert cli.main(argv) == 0
    lines = out.read_text().splitlines()
    assert lines[1] == cli.SWEEP_COLUMNS
    rows = [line.split(",") for line in lines[2:]]
    assert [int(r[0]) for r in rows] == [9, 16]  # ordered by n
    for r in rows:
        estimate, bound_closed = float(r[2]), float(r[7])
        assert bound_closed >= estimate


def test_config_file_merging(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("kind = torus-grid\nside = 3\nseed = 6\nreps = 2\n# comment\n")
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert cli.main(["simulate", "--config", str(cfg), "--horizon", "400", "--out", str(out1)]) == 0
    assert (
        cli.main(
            ["simulate", "--topology", "torus-grid", "--side", "3", "--seed", "6",
             "--reps", "2", "--horizon", "400", "--out", str(out2)]
        )
        == 0
    )
    assert out1.read_bytes() == out2.read_bytes()


def test_config_file_flag_overrides(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("side = 3\nseed = 1\n")
    out = tmp_path / "a.csv"
    assert cli.main(["simulate", "--config", str(cfg), "--seed", "9", "--horizon", "300",
                     "--out", str(out)]) == 0
    fields = dict(zip(*[line.split(",") for line in out.read_text().splitlines()[1:3]]))
    assert fields["seed"] == "9"


def test_config_file_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("sides = 3\n")
    assert cli.main(["simulate", "--config", str(cfg)]) == 2
    assert "unknown config keys" in capsys.readouterr().err
