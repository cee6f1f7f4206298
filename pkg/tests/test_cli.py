import csv
import io
import json
import math

import pytest

from logspectra.cli import EXIT_INVALID, EXIT_OK, main


def test_constants_json(capsys):
    assert main(["constants", "--dim", "1", "--s", "0.5", "--json"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert set(body) == {"c_frac", "c_log", "rho", "omega", "kappa_riesz", "kappa_form"}
    assert body["c_frac"] == pytest.approx(1.0 / math.pi)


def test_invalid_order_exits_with_two(capsys):
    assert main(["constants", "--dim", "1", "--s", "1.5"]) == EXIT_INVALID
    assert "error" in capsys.readouterr().err


def test_opeval_prints_value(capsys):
    assert main(["opeval", "--op", "symbol", "--symbol", "log", "--at", "0.0"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("value: ")


def test_opeval_dimension_mismatch(capsys):
    assert main(["opeval", "--center", "0,0", "--at", "0"]) == EXIT_INVALID


def test_forms_elementary_check(capsys):
    assert main(["forms", "--check", "elementary"]) == EXIT_OK
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["case", "s", "delta", "slack"]
    assert len(rows) == 1 + 10
    assert all(float(row[3]) >= 0.0 for row in rows[1:])


def test_assemble_and_spectrum(tmp_path, capsys):
    domain = tmp_path / "domain.json"
    domain.write_text(json.dumps({"kind": "interval", "a": -1.0, "b": 1.0}))
    a, m = tmp_path / "a.nlfm", tmp_path / "m.nlfm"
    assert main(["assemble", "--domain", str(domain), "--kind", "frac", "--s", "0.2", "--n", "16", "--out", str(a)]) == EXIT_OK
    assert main(["assemble", "--domain", str(domain), "--kind", "mass", "--n", "16", "--out", str(m)]) == EXIT_OK
    capsys.readouterr()
    assert main(["spectrum", "--A", str(a), "--M", str(m), "-k", "3", "--json"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert len(body["eigenvalues"]) == 3
    assert body["eigenvalues"] == sorted(body["eigenvalues"])


def test_spectrum_rejects_corrupt_file(tmp_path):
    bad = tmp_path / "bad.nlfm"
    bad.write_bytes(b"not a matrix")
    assert main(["spectrum", "--A", str(bad), "--M", str(bad)]) == EXIT_INVALID


def test_missing_domain_file(tmp_path):
    args = ["assemble", "--domain", str(tmp_path / "none.json"), "--kind", "mass", "--out", str(tmp_path / "m.nlfm")]
    assert main(args) == EXIT_INVALID


def test_bounds_command(capsys):
    assert main(["bounds", "--dim", "1", "--s", "0.1,0.05", "--n", "16", "--no-refine"]) == EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert len(body["rows"]) == 2


def test_sweep_command(tmp_path):
    config = tmp_path / "sweep.json"
    config.write_text(json.dumps({"domain": {"kind": "interval", "a": -1.0, "b": 1.0}, "n": 16, "s_grid": [0.1, 0.05, 0.025], "k": 2}))
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config), "--out", str(out)]) in (0, 1)
    assert (out / "report.json").exists()
    assert (out / "eigenvalues.csv").read_text().splitlines()[0] == "s,k,lambda,diffquot"


def test_forms_check_aliases(capsys):
    assert main(["forms", "--check", "lemma22"]) == EXIT_OK
    aliased = capsys.readouterr().out
    assert main(["forms", "--check", "elementary"]) == EXIT_OK
    assert capsys.readouterr().out == aliased
    assert main(["forms", "--check", "lemma23", "--seed", "2"]) != EXIT_INVALID
    assert capsys.readouterr().out.startswith("case,s,delta,slack")
