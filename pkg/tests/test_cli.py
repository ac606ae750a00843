import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from schwinger_trotter import cli
from schwinger_trotter.circuit import loads
from schwinger_trotter.cost_engine import UNRESOLVED_MARK, ft_sampling_cost
from schwinger_trotter.lattice import LatticeParams

SAMPLING = ["cost", "ft-sampling", "--n", "2", "--lambda", "1", "--x", "1", "--mu", "1", "--t", "1",
            "--eps", "0.1", "--kappa", "0.5", "--tau", "0.5", "--workers", "1"]


@pytest.fixture(scope="module")
def schema():
    text = resources.files("schwinger_trotter").joinpath("schemas/records.schema.json").read_text()
    return json.loads(text)


def run(argv, capsys):
    code = cli.run(argv)
    out, err = capsys.readouterr()
    return code, out, err


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_cost_csv_row_matches_engine(capsys):
    code, out, _ = run(SAMPLING, capsys)
    assert code == 0
    header, row = out.strip().splitlines()
    assert header.split(",")[:15] == ["N", "Lambda", "eta", "x", "mu", "T", "eps", "kappa", "tau",
                                      "trotter_steps", "expected_T", "cnots", "qubits", "shots_or_queries",
                                      "scheme"]
    rec = dict(zip(header.split(","), row.split(",")))
    rep = ft_sampling_cost(LatticeParams(2, 1, 1.0, 1.0), 1.0, 0.1, 0.5, 0.5)
    assert float(rec["expected_T"]) == rep.expected_T
    assert int(rec["trotter_steps"]) == rep.trotter_steps == 28
    assert int(rec["shots_or_queries"]) == 51
    assert int(rec["qubits"]) == 7
    assert rec["scheme"] == "ft-sampling"


def test_unknown_flag_exits_2(capsys):
    code, _, err = run(["cost", "ft-sampling", "--bogus"], capsys)
    assert code == 2
    assert "usage" in err


@pytest.mark.parametrize("argv", [
    ["cost", "ft-sampling", "--n", "3"],
    ["cost", "ft-sampling", "--lambda", "3"],
    ["cost", "ft-sampling", "--eps", "-1"],
    ["cost", "ft-sampling", "--kappa", "1.5"],
    ["measure-sim", "--scheme", "ae", "--state", "evolved", "--n", "4"],
    ["measure-sim", "--scheme", "ae", "--state", "vacuum", "--n", "6"],
])
def test_bad_values_exit_2(argv, capsys):
    code, _, err = run(argv + ["--workers", "1"], capsys)
    assert code == 2
    assert err.startswith("error:")


def test_verify_circuits_small(capsys, schema):
    code, out, _ = run(["verify", "circuits", "--max-eta", "2", "--max-n", "2", "--t", "0.1"], capsys)
    assert code == 0
    recs = json_lines(out)
    assert recs and all(r["pass"] for r in recs)
    for r in recs:
        jsonschema.validate(r, schema)


def test_verify_trotter_csv_and_json(capsys, schema):
    argv = ["verify", "trotter", "--n", "2", "--lambda", "1", "--x", "1", "--mu", "1", "--t", "0.05", "0.1"]
    code, out, _ = run(argv, capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == ",".join(cli.TROTTER_COLUMNS)
    assert len(lines) == 3
    for line in lines[1:]:
        rec = dict(zip(cli.TROTTER_COLUMNS, line.split(",")))
        assert float(rec["ratio"]) <= 1.0 and rec["pass"] == "True"
    code, out, _ = run(argv + ["--format", "json"], capsys)
    assert code == 0
    for r in json_lines(out):
        jsonschema.validate(r, schema)


def test_verify_failure_exits_1_with_record(capsys, monkeypatch):
    bad = [{"check": "trotter_bound", "params": {"N": 2}, "value": 2.0, "bound": 1.0, "pass": False}]
    monkeypatch.setattr(cli, "trotter_checks", lambda grid, times: bad)
    code, _, err = run(["verify", "trotter", "--n", "2", "--lambda", "1"], capsys)
    assert code == 1
    failure = json.loads(err)
    assert failure["status"] == "fail" and failure["failures"] == bad


@pytest.mark.parametrize("argv", [
    SAMPLING + ["--format", "json"],
    ["cost", "ft-ae", "--n", "4", "--lambda", "2", "--format", "json"],
    ["cost", "ft-evolve", "--n", "2", "--delta", "0.1", "0.01", "--format", "json"],
    ["cost", "neg", "--n", "2", "--t", "10", "--delta-g", "1e-5", "--format", "json"],
    ["cost", "ft-sampling", "--n", "2", "--optimize", "--format", "json"],
    ["table", "neg-errors", "--format", "json"],
    ["table", "appendixB", "--n", "8", "--lambda", "2", "--t", "1", "--eps", "0.1", "--format", "json"],
    ["measure-sim", "--scheme", "sampling", "--runs", "3"],
    ["measure-sim", "--scheme", "ae", "--state", "full", "--n", "4", "--runs", "2"],
])
def test_json_outputs_validate(argv, capsys, schema):
    code, out, _ = run(argv + ["--workers", "1"], capsys)
    assert code == 0
    recs = json_lines(out)
    assert recs
    for r in recs:
        jsonschema.validate(r, schema)


def test_schema_rejects_malformed_records(schema):
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"check": "x", "params": {}, "value": 1.0}, schema)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"scheme": "ft-ae", "N": 2, "surprise": 1}, schema)


def test_neg_table_text_marks_unresolved(capsys):
    code, out, _ = run(["table", "neg-errors", "--text", "--x", "0.01", "1", "--delta-g", "0", "1e-3"], capsys)
    assert code == 0
    assert UNRESOLVED_MARK in out
    code, out, _ = run(["table", "neg-errors", "--x", "1", "--delta-g", "0"], capsys)
    assert out.strip().splitlines()[1].split(",")[3] == "0.0"


def test_measure_sim_is_seeded(capsys):
    argv = ["measure-sim", "--scheme", "sampling", "--runs", "4", "--seed", "7"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b
    assert [r["seed"] for r in json_lines(a)] == [7, 8, 9, 10]
    _, c, _ = run(["measure-sim", "--scheme", "sampling", "--runs", "4", "--seed", "8"], capsys)
    assert json_lines(c)[0] == json_lines(a)[1]


def test_dump_circuit_round_trips(capsys):
    code, out, _ = run(["dump-circuit", "electric", "--eta", "2", "--t", "0.3"], capsys)
    assert code == 0
    c = loads(out)
    assert c.n_qubits == 2
    code, out, _ = run(["dump-circuit", "trotter-step", "--mode", "ft", "--n", "2", "--lambda", "2", "--census"],
                       capsys)
    info = json.loads(out)
    assert info["toffoli"] == 28 and info["ft_qubits_formula"] == 2 * 3 + 8 - 1 - 1
    code, out, _ = run(["dump-circuit", "hadamard-test", "--n", "4"], capsys)
    assert code == 0 and loads(out).n_qubits > 0


def test_config_precedence_and_round_trip(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"eps": [0.05], "kappa": [0.3]}))
    _, from_cfg, _ = run(["cost", "ft-sampling", "--config", str(cfg), "--workers", "1"], capsys)
    row = dict(zip(*[line.split(",") for line in from_cfg.strip().splitlines()]))
    assert (row["eps"], row["kappa"]) == ("0.05", "0.3")
    _, flagged, _ = run(["cost", "ft-sampling", "--config", str(cfg), "--eps", "0.2", "--workers", "1"], capsys)
    row = dict(zip(*[line.split(",") for line in flagged.strip().splitlines()]))
    assert (row["eps"], row["kappa"]) == ("0.2", "0.3")

    saved = tmp_path / "saved.json"
    _, first, _ = run(SAMPLING + ["--save-config", str(saved)], capsys)
    assert json.loads(saved.read_text())["command"] == SAMPLING
    _, again, _ = run(["cost", "ft-sampling", "--config", str(saved)], capsys)
    assert again == first


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(["cost", "ft-sampling", "--config", str(bad)], capsys)[0] == 2
    assert run(["cost", "ft-sampling", "--config", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_output_locations(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    code, out, _ = run(SAMPLING, capsys)
    assert code == 0 and out == ""
    written = (tmp_path / "env" / "cost-ft-sampling.csv").read_text()
    explicit = tmp_path / "explicit.csv"
    run(SAMPLING + ["--output", str(explicit)], capsys)
    assert explicit.read_text() == written


def test_worker_pool_keeps_grid_order(capsys):
    argv = ["cost", "ft-evolve", "--n", "2", "4", "--lambda", "1", "2", "--delta", "0.1", "0.01"]
    _, serial, _ = run(argv + ["--workers", "1"], capsys)
    _, pooled, _ = run(argv + ["--workers", "2"], capsys)
    assert serial == pooled


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "schwinger_trotter.cli"] + SAMPLING,
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].endswith("ft-sampling,,0,4")
    proc = subprocess.run([sys.executable, "-m", "schwinger_trotter.cli", "--help"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "measure-sim" in proc.stdout
