import io
import json
import subprocess
import sys

import pytest

from ruelle.cli import dumps, load_problem, main, parse_problem, run
from ruelle.exceptions import InputParse

GOLDEN = {
    "alphabet_size": 2,
    "transition": [[1, 1], [1, 0]],
    "theta": 0.5,
    "potential": {"memory": 1, "values": [{"word": [1], "value": 0.0}, {"word": [2], "value": 0.0}]},
    "observables": [
        {
            "name": "x",
            "memory": 2,
            "values": [
                {"word": [1, 1], "value": 1.0},
                {"word": [1, 2], "value": -0.5},
                {"word": [2, 1], "value": 0.3},
            ],
        }
    ],
}

FULL = {
    "alphabet_size": 2,
    "transition": [[1, 1], [1, 1]],
    "theta": 0.5,
    "potential": {"memory": 1, "values": [{"word": [1], "value": 0.0}, {"word": [2], "value": 0.0}]},
}


def invoke(doc, *argv):
    text = doc if isinstance(doc, str) else json.dumps(doc)
    return run([*argv, "--input", "-"], stdin=io.StringIO(text))


def test_perron_golden():
    status, report = invoke(GOLDEN, "perron")
    assert status == 0
    assert report["perron"]["lambda"] == pytest.approx(1.6180339887, abs=1e-10)


def test_verify_full_shift():
    status, report = invoke(FULL, "verify", "--steps", "10")
    assert status == 0
    assert report["summary"]["violations"] == 0
    assert all(row["margin"] >= -1e-9 * abs(row["bound_value"]) for row in report["checks"] if isinstance(row["margin"], float))
    for row in report["checks"]:
        assert row["passed"] == (row["margin"] == "inf" or row["margin"] >= -1e-9 * abs(row["bound_value"]))


def test_missing_word():
    doc = json.loads(json.dumps(FULL))
    doc["potential"] = {
        "memory": 2,
        "values": [{"word": [1, 1], "value": 0.0}, {"word": [1, 2], "value": 0.0}, {"word": [2, 2], "value": 0.0}],
    }
    status, report = invoke(doc, "perron")
    assert status == 1
    assert report["error"]["type"] == "InputParse"
    assert "[2, 1]" in report["error"]["message"]


@pytest.mark.parametrize(
    "mutate, needle",
    [
        (lambda d: d.update(theta=1.0), "theta"),
        (lambda d: d.update(transition=[[0, 1], [1, 0]]), "NotAperiodic"),
        (lambda d: d["potential"]["values"].append({"word": [1], "value": 1.0}), "duplicate"),
        (lambda d: d["potential"]["values"].append({"word": [3], "value": 1.0}), "potential.values"),
        (lambda d: d["potential"]["values"][0].update(value="nan"), "potential.values"),
        (lambda d: d.pop("potential"), "potential"),
    ],
)
def test_bad_documents(mutate, needle):
    doc = json.loads(json.dumps(FULL))
    mutate(doc)
    status, report = invoke(doc, "perron")
    assert status == 1
    err = report["error"]
    assert needle in err["type"] + ": " + err["message"]


def test_json_syntax_error_has_position():
    status, report = invoke('{"alphabet_size": 2,\n  oops}', "perron")
    assert status == 1
    assert "line 2" in report["error"]["message"]


def test_round_trip_echo():
    for doc in (GOLDEN, FULL):
        _, report = invoke(doc, "certificate")
        assert parse_problem(report["input"]) == parse_problem(doc)
        assert load_problem(json.dumps(report["input"])) == parse_problem(doc)


def test_parse_problem_raises():
    with pytest.raises(InputParse):
        parse_problem({"alphabet_size": 2})


@pytest.mark.parametrize("argv", [["verify", "--steps", "5"], ["sample", "--length", "2000", "--seed", "4"],
                                  ["correlate", "--u", "x", "--v", "x", "--steps", "5"]])
def test_byte_identical(argv):
    outs = [dumps(invoke(GOLDEN, *argv)[1]) for _ in range(2)]
    assert outs[0] == outs[1]


def test_correlate_and_sample_content():
    status, report = invoke(GOLDEN, "correlate", "--u", "x", "--v", "potential", "--steps", "3")
    assert status == 0 and len(report["correlation"]["values"]) == 4
    assert all(abs(v) < 1e-14 for v in report["correlation"]["values"])
    status, report = invoke(GOLDEN, "sample", "--length", "5000")
    s = report["sampling"]
    assert status == 0 and s["seed"] == 0 and s["length"] == 5000
    assert sum(s["symbol_frequencies"]) == pytest.approx(1.0)
    assert set(s["empirical_averages"]) == {"potential", "x"}
    status, report = invoke(GOLDEN, "correlate", "--u", "nope", "--v", "x")
    assert status == 1


def test_pressure_and_invariance():
    status, report = invoke(FULL, "pressure")
    assert status == 0 and report["pressure"] == pytest.approx(0.6931471805599453)
    status, report = invoke(GOLDEN, "invariance", "--depth", "5")
    assert status == 0 and report["checks"][0]["passed"]


def test_main_text_and_usage(capsys, tmp_path, monkeypatch):
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(GOLDEN), encoding="utf-8")
    assert main(["certificate", "--input", str(path), "--format", "text"]) == 0
    out = capsys.readouterr().out
    assert "K" in out and "{" not in out.splitlines()[0]
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["perron", "--steps", "many"])
    assert info.value.code == 1
    assert main(["perron", "--input", str(tmp_path / "missing.json")]) == 1
    assert "InputParse" in capsys.readouterr().err


def test_output_is_strict_json(tmp_path):
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(GOLDEN), encoding="utf-8")
    proc = subprocess.run(
        [sys.executable, "-m", "ruelle", "verify", "--input", str(path), "--steps", "5"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    json.loads(proc.stdout, parse_constant=lambda c: pytest.fail(f"non-standard constant {c}"))


def test_violation_exit_code(monkeypatch):
    import ruelle.cli as cli
    from ruelle.certificate import bound_constants

    real = bound_constants(0.5, 2, 1, 0.0, 0.0)
    fake = type(real)(**{**real.as_dict(), "K": 0.5, "log_K": -0.7})
    monkeypatch.setattr(cli, "compute_constants", lambda *a, **k: fake)
    status, report = invoke(FULL, "verify", "--steps", "3")
    assert status == 2
    assert report["summary"]["violations"] > 0
