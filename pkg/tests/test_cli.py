import csv
import json

import pytest

from msetcond.cli import main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_enumerate_partitions(tmp_path):
    assert run(tmp_path, "enumerate", "--class", "partitions", "--K", "6", "--n-max", "6") == 0
    rows = read_csv(tmp_path / "table.csv")
    assert {"n": "6", "N": "3", "g": "3"} in rows
    assert (tmp_path / "run.json").exists()


def test_enumerate_json(tmp_path):
    assert run(tmp_path, "enumerate", "--class", "free_trees", "--K", "8", "--n-max", "8",
               "--format", "json") == 0
    data = json.loads((tmp_path / "table.json").read_text())
    assert data["config"]["class_name"] == "free_trees"


def test_series_free_trees(tmp_path):
    assert run(tmp_path, "series", "--class", "free_trees", "--K", "300", "--rho-window", "20") == 0
    data = json.loads((tmp_path / "series.json").read_text())
    assert 0.33 < data["rho"]["rho"] < 0.35
    assert (tmp_path / "series.csv").exists()


def test_series_reports_bad_radius(tmp_path):
    # series has no verdicts; a failed radius estimate is reported in the output
    assert run(tmp_path, "series", "--class", "partitions", "--K", "50") == 0
    data = json.loads((tmp_path / "series.json").read_text())
    assert "error" in data["rho"]


def test_sample_zero(tmp_path):
    assert run(tmp_path, "sample", "--class", "free_trees", "--K", "20", "--n", "10", "--N", "3",
               "--M", "0") == 0
    assert (tmp_path / "samples.jsonl").read_text() == ""


def test_sample_uniform_lines(tmp_path):
    assert run(tmp_path, "sample", "--class", "free_trees", "--K", "30", "--n", "30", "--N", "8",
               "--M", "5", "--seed", "3") == 0
    lines = [json.loads(x) for x in (tmp_path / "samples.jsonl").read_text().splitlines()]
    assert len(lines) == 5 and all(x["n"] == 30 and x["kappa"] == 8 for x in lines)


def test_same_seed_same_bytes(tmp_path):
    args = ["sample", "--class", "free_trees", "--K", "2000", "--mode", "boltzmann", "--M", "20",
            "--seed", "9"]
    assert run(tmp_path / "a", *args) == 0
    assert run(tmp_path / "b", *args) == 0
    assert (tmp_path / "a" / "samples.jsonl").read_bytes() == \
        (tmp_path / "b" / "samples.jsonl").read_bytes()


def test_verify_unsatisfiable_threshold(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiments": ["p_tail"], "thresholds": {"p_tail": {"ratio_tol": -1}},
                               "experiment_args": {"p_tail": {"Ns": [50, 100]}}}))
    code = run(tmp_path, "verify", "--class", "free_trees", "--config", str(cfg))
    assert code == 1
    out = capsys.readouterr().out
    assert "FAIL p_tail.ratio_within_tol" in out
    report = json.loads((tmp_path / "reports" / "p_tail.json").read_text())
    assert report["passed"] is False
    assert any(r["passed"] == "False" for r in read_csv(tmp_path / "summary.csv"))


def test_verify_passing(tmp_path):
    assert run(tmp_path, "verify", "--class", "plane_partitions", "--K", "40",
               "--experiments", "oracle_equivalence,dual_representation") == 0


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(tmp_path, "series", "--config", str(cfg)) == 2


def test_bfile_input(tmp_path):
    seq = tmp_path / "c.txt"
    seq.write_text("1\n1 0\n2 3\n")
    assert run(tmp_path, "enumerate", "--sequence", str(seq), "--n-max", "2") == 0
    rows = read_csv(tmp_path / "table.csv")
    assert {"n": "2", "N": "1", "g": "3"} in rows
    # the file is a truncation, not a finite class
    assert run(tmp_path, "enumerate", "--sequence", str(seq), "--n-max", "4") == 2


@pytest.mark.parametrize("bad", ["1 -1\n", ""])
def test_bad_bfile(tmp_path, bad):
    seq = tmp_path / "c.txt"
    seq.write_text(bad)
    assert run(tmp_path, "enumerate", "--sequence", str(seq), "--n-max", "4") == 2
