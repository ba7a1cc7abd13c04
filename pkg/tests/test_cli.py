import csv
import io
import json

import pytest

from indexopt.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_single_run_csv(capsys):
    code, out, _ = _run(capsys, "--problem", "P1", "--delta", "1e-3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and rows[0]["method"] == "local-tuning"
    assert float(rows[0]["phi_c"]) < -1.4


def test_json_output(capsys):
    code, out, _ = _run(capsys, "--problem", "P4", "--method", "strongin-markin", "--output", "json")
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert rec["method"] == "strongin-markin" and len(rec["n_constraint"]) == 2


def test_penalty_method(capsys):
    code, out, _ = _run(capsys, "--problem", "P4", "--method", "penalty")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["p_star"] and row["n_1"] == row["n_2"] == row["n_phi"]


def test_dump_trials_flag(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = _run(capsys, "--problem", "P2", "--dump-trials", str(path))
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert len(path.read_text().splitlines()) == int(row["iterations"]) + 1


def test_deterministic_output(capsys):
    a = _run(capsys, "--problem", "P3")[1]
    b = _run(capsys, "--problem", "P3")[1]
    assert a == b


def test_p5_dimension(capsys):
    code, out, _ = _run(capsys, "--problem", "P5", "--dim", "3", "--max-iters", "200")
    assert code == 0
    assert "y3" in out.splitlines()[0]


@pytest.mark.parametrize(
    "argv",
    [
        ["--problem", "P5"],
        ["--problem", "P5", "--dim", "9"],
        ["--problem", "P1", "--r", "0.5"],
        ["--problem", "P5", "--dim", "6", "--level", "10"],
        [],
    ],
)
def test_config_errors(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code != 0 and "error" in err


def test_unknown_problem_exits_nonzero():
    with pytest.raises(SystemExit) as info:
        main(["--problem", "P9"])
    assert info.value.code != 0


def test_unwritable_dump_path(capsys, tmp_path):
    code, _, err = _run(capsys, "--problem", "P4", "--dump-trials", str(tmp_path / "no" / "t.csv"))
    assert code == 1 and err


def test_experiment_one_preset(capsys):
    code, out, _ = _run(capsys, "--experiment", "1", "--delta", "1e-3")
    assert code == 0
    records, speedups = out.split("\n\n")
    assert len(records.strip().splitlines()) == 1 + 12
    assert speedups.startswith("problem,delta,index,s1,s2,s3")
    assert len(speedups.strip().splitlines()) == 1 + 8


def test_experiment_three_single_dimension(capsys):
    code, out, _ = _run(capsys, "--experiment", "3", "--dim", "2", "--delta", "1e-3")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["method"] for r in rows] == ["local-tuning", "strongin-markin"]
    assert rows[0]["r"] == "2.3500000000000001"
