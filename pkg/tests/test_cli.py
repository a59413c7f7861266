import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from serieslab.cli import EXIT_ERROR, EXIT_OK, EXIT_UNDECIDED, main
from serieslab.corpus import builtin_corpus

THRESHOLD = math.log(2) / 2


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def check_report_schema(doc):
    """The documented stable keys of a classify report."""
    assert set(doc) >= {"version", "input", "schedule", "tests", "overall"}
    assert set(doc["input"]) == {"term", "first_index"}
    assert set(doc["schedule"]) == {"n0", "growth", "samples", "window"}
    for t in doc["tests"]:
        assert set(t) >= {"name", "verdict", "evidence", "notes", "millis"}
        assert t["verdict"] in ("converges", "diverges", "inconclusive", "undecided", "inapplicable")
        assert isinstance(t["evidence"], dict) and isinstance(t["notes"], list)
    assert set(doc["overall"]) == {"verdict", "decided_by"}
    assert isinstance(doc["overall"]["decided_by"], list)


# -- classify --------------------------------------------------------------------


def test_classify_harmonic_second_raabe_json(capsys):
    code, out, _ = run(capsys, "classify", "--term", "1/n", "--tests", "second_raabe", "--json")
    assert code == EXIT_OK
    doc = json.loads(out)
    check_report_schema(doc)
    (t,) = doc["tests"]
    assert t["name"] == "second_raabe" and t["verdict"] == "diverges"
    ev = t["evidence"]["second_raabe"]
    assert abs(ev["M"]) <= 0.02
    assert ev["threshold"] == pytest.approx(0.346574, abs=5e-7)
    assert doc["overall"] == {"verdict": "diverges", "decided_by": ["second_raabe"]}


def test_classify_log_p2_text(capsys):
    code, out, _ = run(capsys, "classify", "--term", "1/(n*ln(n)^2)")
    assert code == EXIT_OK
    assert "overall: converges" in out
    line = next(l for l in out.splitlines() if l.strip().startswith("second_raabe "))
    assert "converges" in line


def test_classify_positivity_violation(capsys):
    code, _, err = run(capsys, "classify", "--term", "ln(n)-1")
    assert code == EXIT_ERROR
    assert "positivity violation at n=2" in err


def test_classify_parse_error_reports_position(capsys):
    code, _, err = run(capsys, "classify", "--term", "2^-n")
    assert code == EXIT_ERROR
    assert "at offset 2" in err


def test_classify_undecided_exit(capsys):
    code, _, _ = run(capsys, "classify", "--term", "1/n", "--tests", "second_ratio")
    assert code == EXIT_UNDECIDED


def test_text_and_json_verdicts_agree(capsys):
    _, text, _ = run(capsys, "classify", "--term", "1/sqrt(n)")
    _, js, _ = run(capsys, "classify", "--term", "1/sqrt(n)", "--json")
    doc = json.loads(js)
    for t in doc["tests"]:
        line = next(l for l in text.splitlines() if l.strip().startswith(t["name"] + " "))
        assert line.split()[1] == t["verdict"]
    assert f"overall: {doc['overall']['verdict']}" in text


def test_json_is_byte_identical_and_round_trips(capsys, tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"r{i}.json"
        assert run(capsys, "classify", "--term", "exp(-sqrt(n))", "--json", "--out", str(path))[0] == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert (json.dumps(doc, indent=2) + "\n").encode() == outs[0]


def test_timing_fills_millis(capsys):
    _, out, _ = run(capsys, "classify", "--term", "1/n^2", "--tests", "ratio", "--json", "--timing")
    assert json.loads(out)["tests"][0]["millis"] >= 0
    _, out, _ = run(capsys, "classify", "--term", "1/n^2", "--tests", "ratio", "--json")
    assert json.loads(out)["tests"][0]["millis"] is None


def test_non_finite_evidence_is_encoded_as_strings(capsys):
    _, out, _ = run(capsys, "classify", "--term", "1.1^n", "--json")
    assert "NaN" not in out and "Infinity" not in out
    json.loads(out)


# -- battery -----------------------------------------------------------------------


def test_battery_builtin_is_sound(capsys):
    code, out, _ = run(capsys, "battery", "--corpus", "builtin")
    assert code == EXIT_OK
    assert "soundness violations: 0" in out


def test_battery_second_ratio_harmonic_row(capsys):
    code, out, _ = run(capsys, "battery", "--corpus", "builtin", "--tests", "second_ratio", "--json")
    doc = json.loads(out)
    row = next(e for e in doc["entries"] if e["id"] == "harmonic")
    assert row["tests"][0]["verdict"] == "inconclusive"


def test_battery_json_file_round_trips(capsys, tmp_path):
    path = tmp_path / "report.json"
    code, out, _ = run(capsys, "battery", "--corpus", "builtin", "--json", "--out", str(path))
    assert code == EXIT_OK and out == ""
    text = path.read_text()
    doc = json.loads(text)
    assert json.dumps(doc, indent=2) + "\n" == text
    assert len(doc["entries"]) == len(builtin_corpus())
    assert doc["soundness"]["violations"] == []


def test_battery_unknown_corpus(capsys):
    assert run(capsys, "battery", "--corpus", "mine")[0] == EXIT_ERROR


# -- lemma ---------------------------------------------------------------------------


def test_lemma_p1_errors_shrink(capsys):
    code, out, _ = run(capsys, "lemma", "--p", "1", "--json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["target"] == pytest.approx(0.346574, abs=5e-7)
    errs = [r["err1"] for r in doc["rows"]]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_lemma_p0_is_zero(capsys):
    _, out, _ = run(capsys, "lemma", "--p", "0", "--json")
    assert all(r["eq1"] == 0.0 for r in json.loads(out)["rows"])


def test_lemma_extrapolate(capsys):
    _, out, _ = run(capsys, "lemma", "--p", "2", "--extrapolate", "--json")
    ext = json.loads(out)["extrapolated_eq1"]
    assert abs(ext["liminf"] - math.log(2)) < 0.01
    _, text, _ = run(capsys, "lemma", "--p", "2", "--extrapolate")
    assert "extrapolated eq1" in text


@pytest.mark.parametrize("lam", ["0", "-1"])
def test_lemma_rejects_nonpositive_lambda(capsys, lam):
    code, _, err = run(capsys, "lemma", "--p", "1", "--lambda", lam)
    assert code == EXIT_ERROR and "lambda" in err


# -- malformed inputs ----------------------------------------------------------------

MALFORMED = [
    [],
    ["classify"],
    ["classify", "--term", ""],
    ["classify", "--term", "1/"],
    ["classify", "--term", "foo(n)"],
    ["classify", "--term", "1/n", "--tests", "nope"],
    ["classify", "--term", "1/n", "--lambda", "abc"],
    ["classify", "--term", "1/n", "--lambda", "-2"],
    ["classify", "--term", "1/n", "--p-exp", "1"],
    ["classify", "--term", "1/n", "--aux", "n2"],
    ["classify", "--term", "1/n", "--window", "2"],
    ["classify", "--term", "1/n", "--growth", "1"],
    ["classify", "--term", "1/n", "--n0", "0"],
    ["classify", "--term", "sqrt(n)-n"],
    ["classify", "--term", "1/(n-3)"],
    ["battery", "--tests", "ratio,,"],
    ["lemma"],
    ["lemma", "--p", "x"],
    ["frobnicate"],
]


@pytest.mark.parametrize("argv", MALFORMED)
def test_malformed_inputs_exit_1(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_ERROR


@settings(max_examples=25)
@given(st.text(alphabet="n0123456789+-*/^().lnsqrtexpabs ", max_size=20))
def test_exit_code_contract_on_random_terms(term):
    code = main(["classify", "--term", term, "--tests", "ratio,second_ratio", "--samples", "16", "--window", "4"])
    assert code in (EXIT_OK, EXIT_ERROR, EXIT_UNDECIDED)


@pytest.mark.parametrize("entry", builtin_corpus(), ids=lambda e: e.id)
def test_exit_code_contract_on_corpus(capsys, entry):
    argv = ["classify", "--term", entry.spec.source_text, "--first-index", str(entry.spec.first_index), "--json"]
    code, out, _ = run(capsys, *argv)
    verdict = json.loads(out)["overall"]["verdict"]
    assert code == (EXIT_OK if verdict in ("converges", "diverges") else EXIT_UNDECIDED)
    if code == EXIT_OK:
        assert verdict == entry.truth


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "serieslab", "classify", "--term", "(1/2)^n", "--tests", "ratio"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and "overall: converges" in res.stdout
    res = subprocess.run([sys.executable, "-m", "serieslab", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "serieslab" in res.stdout
