import csv
import io
import json
import math
import subprocess
import sys

import pytest

from wealthstat import cli
from wealthstat.solver import NonConvergenceError


def invoke(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            key, value = line[2:].split(": ", 1)
            meta[key] = value
        else:
            body.append(line)
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return meta, rows[0], rows[1:]


def test_gini_bosonic_example(capsys):
    code, out, _ = invoke(capsys, "gini", "--kind", "bosonic", "--m", "1")
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["m", "gini"]
    assert float(rows[0][1]) == pytest.approx(0.666667, abs=5e-7)


def test_lorenz_geometric_example(capsys):
    code, out, _ = invoke(capsys, "lorenz", "--kind", "geometric", "--m", "1", "--points", "100")
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["x", "y"]
    assert len(rows) == 101
    row = next(r for r in rows if float(r[0]) == 0.75)
    assert float(row[1]) == pytest.approx(0.25, abs=1e-12)


def test_verify_intro_example(capsys):
    code, out, _ = invoke(capsys, "verify", "--case", "intro", "--format", "json")
    assert code == 0
    rows = json.loads(out)["data"]["rows"]
    totals = {r[0]: r[2] for r in rows if r[1] == "total"}
    assert totals == {"distinguishable": 4, "identical": 3}


def test_metadata_header(capsys):
    _, out, _ = invoke(capsys, "entropy", "--kind", "bosonic", "--m", "1")
    meta, _, _ = parse_csv(out)
    for key in ("command", "parameters", "seed", "version"):
        assert key in meta
    assert json.loads(meta["command"]) == "entropy"
    assert json.loads(meta["parameters"])["kind"] == "bosonic"


def test_csv_fifteen_significant_digits(capsys):
    _, out, _ = invoke(capsys, "gini", "--kind", "bosonic", "--m", "1")
    _, _, rows = parse_csv(out)
    assert rows[0][1] == "0.666666666666667"
    assert "," not in rows[0][1].replace(".", "")


def test_simulate_seed_default_is_recorded(capsys):
    _, out, _ = invoke(capsys, "simulate", "--class", "bosonic", "--units", "20", "--owners", "10", "--samples", "50")
    meta, _, _ = parse_csv(out)
    assert json.loads(meta["seed"]) == 0
    assert json.loads(meta["seed_defaulted"]) is True
    _, again, _ = invoke(capsys, "simulate", "--class", "bosonic", "--units", "20", "--owners", "10", "--samples", "50", "--seed", "0")
    assert parse_csv(again)[2] == parse_csv(out)[2]


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--class", "distinguishable", "--units", "30", "--owners", "12", "--samples", "40", "--seed", "5"],
        ["banks", "--m", "3", "--banks", "1,2,8", "--sweep"],
        ["bitcoin", "--mean-value", "1000", "--v-max", "40"],
        ["dist", "--kind", "poisson", "--m", "2.5"],
    ],
)
def test_json_round_trip(capsys, tmp_path, argv):
    first = tmp_path / "first.json"
    assert cli.run([*argv, "--format", "json", "-o", str(first)]) == 0
    second = tmp_path / "second.json"
    cmd = argv[0]
    assert cli.run([cmd, "--config", str(first), "--format", "json", "-o", str(second)]) == 0
    a, b = json.loads(first.read_text()), json.loads(second.read_text())
    assert a["data"] == b["data"]
    assert a["meta"]["parameters"] == b["meta"]["parameters"]


def test_config_file_flags_win(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# gini of a bosonic system\nkind = bosonic\nm = 3\n")
    _, from_file, _ = invoke(capsys, "gini", "--config", str(cfg))
    assert parse_csv(from_file)[2][0][0] == "3"
    _, flagged, _ = invoke(capsys, "gini", "--config", str(cfg), "--m", "1")
    assert parse_csv(flagged)[2][0][1] == "0.666666666666667"


def test_config_errors(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kind bosonic\n")
    code, _, err = invoke(capsys, "gini", "--config", str(cfg))
    assert code == 2 and "key = value" in err
    code, _, err = invoke(capsys, "gini", "--kind", "nope", "--m", "1")
    assert code == 2 and "'kind'" in err
    code, _, _ = invoke(capsys, "nonsense")
    assert code == 2


def test_missing_config_file_is_io_error(capsys, tmp_path):
    code, _, err = invoke(capsys, "gini", "--config", str(tmp_path / "absent.cfg"))
    assert code == 4 and "I/O" in err


def test_unwritable_output(capsys, tmp_path):
    target = tmp_path / "no" / "such" / "dir" / "out.csv"
    code, _, err = invoke(capsys, "gini", "--kind", "bosonic", "--m", "1", "-o", str(target))
    assert code == 4 and str(target) in err


def test_non_convergence_exit_code(capsys, monkeypatch):
    def fail(params):
        raise NonConvergenceError("no sign change above", (1.0, 8.0))

    monkeypatch.setitem(cli.HANDLERS, "gini", fail)
    code, _, err = invoke(capsys, "gini", "--kind", "bosonic", "--m", "1")
    assert code == 3 and "8.0" in err


def test_output_is_deterministic(tmp_path):
    paths = [tmp_path / f"{i}.csv" for i in range(2)]
    for p in paths:
        assert cli.run(["lorenz", "--kind", "poisson", "--m", "0.35", "-o", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_module_entry_point():
    done = subprocess.run(
        [sys.executable, "-m", "wealthstat", "gini", "--kind", "fermionic", "--m", "0.25"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert done.returncode == 0
    assert done.stdout.strip().splitlines()[-1] == "0.25,0.75"


def test_bitcoin_log_probability_column(capsys):
    _, out, _ = invoke(capsys, "bitcoin", "--betabar", "0.5", "--v-max", "30", "--format", "json")
    doc = json.loads(out)["data"]
    i, j = doc["columns"].index("probability"), doc["columns"].index("log_probability")
    for row in doc["rows"]:
        assert math.exp(row[j]) == pytest.approx(row[i], rel=1e-12)
    # at a large mean the probabilities underflow but the logs stay finite
    _, out, _ = invoke(capsys, "bitcoin", "--mean-value", "1e6", "--v-max", "5", "--format", "json")
    rows = json.loads(out)["data"]["rows"]
    assert all(r[i] == 0.0 and math.isfinite(r[j]) for r in rows)
