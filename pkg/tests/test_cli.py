import csv
import json
import math
import shutil
import subprocess

import pytest

from gibbs_charts.cli import main

TRIG = json.dumps({"trig": {"terms": [[1, 0, 0.1, 0.0]]}})
BERNOULLI = json.dumps({"table": {"depth": 1, "values": {"0": 0.0, "1": math.log(2)}}})


def run(tmp_path, *args):
    return main(list(args) + ["--output-dir", str(tmp_path)])


def read_header(path):
    first = path.read_text().splitlines()[0]
    assert first.startswith("# ")
    return json.loads(first[2:])


def test_pressure_log3(tmp_path, capsys):
    code = run(tmp_path, "pressure", "--shift-matrix", "[[1,1],[1,1]]",
               "--potential", BERNOULLI, "--depth", "8")
    assert code == 0
    out = json.loads((tmp_path / "pressure.json").read_text())
    assert abs(out["P"] - math.log(3)) < 1e-10
    assert out["schema_version"] == 1 and "config" in out


def test_pressure_add_constant(tmp_path):
    run(tmp_path, "pressure", "--shift-matrix", "[[1,1],[1,1]]", "--potential", BERNOULLI,
        "--add-constant", "0.5")
    P = json.loads((tmp_path / "pressure.json").read_text())["P"]
    assert P == pytest.approx(math.log(3) + 0.5, abs=1e-10)


def test_gibbs_masses_csv(tmp_path):
    assert run(tmp_path, "gibbs", "--shift-matrix", "[[1,1],[1,1]]",
               "--potential", BERNOULLI, "--mass-depth", "2") == 0
    path = tmp_path / "masses.csv"
    assert read_header(path)["schema_version"] == 1
    rows = list(csv.DictReader(path.read_text().splitlines()[1:]))
    masses = {r["word"]: float(r["mass"]) for r in rows}
    assert masses["11"] == pytest.approx(4 / 9)
    # the cylinder bound is only asserted for the invariant measure
    assert all(r["bound_ok"] == "" for r in rows)
    assert run(tmp_path, "gibbs", "--shift-matrix", "[[1,1],[1,1]]", "--potential", BERNOULLI,
               "--mass-depth", "4", "--measure", "invariant") == 0
    rows = list(csv.DictReader(path.read_text().splitlines()[1:]))
    assert len(rows) == 16 and all(r["bound_ok"] == "1" for r in rows)


def test_partition_outputs(tmp_path):
    assert run(tmp_path, "partition") == 0
    data = json.loads((tmp_path / "partition.json").read_text())
    assert data["schema_version"] == 1
    assert (tmp_path / "partition_checks.csv").exists()


def test_eigencheck_linear(tmp_path):
    assert run(tmp_path, "eigencheck", "--depth", "10", "--max-period", "3") == 0
    rows = list(csv.DictReader((tmp_path / "eigencheck.csv").read_text().splitlines()[1:]))
    assert list(rows[0]) == ["orbit", "n", "lambda_u_meas", "lambda_u_pred",
                             "lambda_s_meas", "lambda_s_pred", "err"]
    assert max(float(r["err"]) for r in rows) <= 1e-3


def test_synthesize_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["synthesize", "--phi-u", TRIG, "--depth", "8",
                     "--output-dir", str(d)]) == 0
    for name in ("structure.json", "F_u.csv", "F_s.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


@pytest.mark.parametrize("cmd,fname", [("geometry-check", "geometry_check.jsonl"),
                                       ("qs-check", "qs_check.jsonl"),
                                       ("boundary-check", "boundary_check.jsonl")])
def test_check_commands_write_jsonl(tmp_path, cmd, fname):
    assert run(tmp_path, cmd, "--depth", "9", "--geometry-depth", "10") == 0
    for line in (tmp_path / fname).read_text().splitlines():
        rec = json.loads(line)
        assert rec["schema_version"] == 1 and rec["passed"]


def test_verify_non_certified_exit_1(tmp_path):
    hf = json.dumps({"trig": {"terms": [[100000, 0, 0.1, 0.0]]}})
    code = run(tmp_path, "verify", "--phi-u", hf, "--depth", "6", "--geometry-depth", "6",
               "--holonomy-samples", "20", "--max-period", "2")
    assert code == 1
    recs = [json.loads(x) for x in (tmp_path / "verify.jsonl").read_text().splitlines()]
    cert = [r for r in recs if r["name"] == "certified_u"][0]
    assert not cert["passed"]


class TestInputErrors:
    def test_malformed_json(self, tmp_path, capsys):
        assert run(tmp_path, "pressure", "--potential", "{not json") == 2
        assert "malformed JSON" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"dpeth": 3}))
        assert run(tmp_path, "pressure", "--config", str(cfg)) == 2

    def test_depth_cap(self, tmp_path):
        assert run(tmp_path, "pressure", "--depth", "40") == 2

    def test_non_mixing_shift(self, tmp_path):
        assert run(tmp_path, "pressure", "--shift-matrix", "[[1,0],[0,1]]") == 2

    def test_trig_on_bare_shift(self, tmp_path):
        assert run(tmp_path, "pressure", "--shift-matrix", "[[1,1],[1,1]]",
                   "--potential", TRIG) == 2

    def test_parabolic_matrix(self, tmp_path):
        assert run(tmp_path, "partition", "--matrix", "[[1,1],[0,1]]") == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"shift_matrix": [[1, 1], [1, 1]], "depth": 5,
                               "potential": json.loads(BERNOULLI)}))
    assert run(tmp_path, "pressure", "--config", str(cfg), "--depth", "9") == 0
    out = json.loads((tmp_path / "pressure.json").read_text())
    assert out["config"]["depth"] == 9


@pytest.mark.skipif(shutil.which("gibbs-charts") is None, reason="console script not installed")
def test_console_script(tmp_path):
    out = subprocess.run(["gibbs-charts", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "0.1.0"
