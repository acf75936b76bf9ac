from __future__ import annotations

import csv
import io
import json

import pytest

from canardkit.cli import fmt_exact, main
from canardkit.errors import ModelFileError
from canardkit.modelfile import load, loads
from fractions import Fraction

GOOD = """\
name = toy
[variables]
independent = x
dependent = y
parameter = c
epsilon = eps
[constants]
eps = 1/10   # comment
[system]
F = "y - (x^3/3 - x)"
G = "eps*(c - x)"
bracket = 1/2 3/2
[task]
k_max = 2
"""


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_model_file_round_trip():
    mf = loads(GOOD, "toy.model")
    assert mf.constants["eps"] == Fraction(1, 10) and mf.bracket == (Fraction(1, 2), Fraction(3, 2))
    assert loads(mf.serialize()) == mf


def test_bundled_models_load():
    assert load("vdp").name == "vdp"
    assert load("templator.model").branch == "quadratic-positive"


@pytest.mark.parametrize("text, line", [
    (GOOD.replace('F = "y - (x^3/3 - x)"', 'F = "y - (x^^3)"'), 10),
    (GOOD.replace("eps = 1/10", "eps = one"), 8),
    (GOOD.replace("[task]", "[tasks]"), 13),
    (GOOD.replace('G = "eps*(c - x)"', 'G = "eps*(c - z)"'), 11),
    (GOOD.replace("k_max = 2", "k_max = two"), 14),
])
def test_model_file_errors_carry_line_numbers(text, line):
    with pytest.raises(ModelFileError) as info:
        loads(text, "toy.model")
    assert info.value.line == line


def test_model_file_needs_one_system_form():
    with pytest.raises(ModelFileError):
        loads(GOOD.replace("[task]", 'phi = "x"\n[task]'))


def test_fmt_exact():
    assert fmt_exact(Fraction(-3, 32)) == "-3/32 (-0.09375)"
    assert fmt_exact(Fraction(5)) == "5"
    assert "/" not in fmt_exact(Fraction(1, 3 ** 40))


def test_iterate_table(tmp_path):
    p = tmp_path / "toy.model"
    p.write_text(GOOD)
    code, out = run_cli("iterate", str(p), "--reference", "0.986394")
    assert code == 0
    assert "# model: toy" in out and "0.987258010849354" in out


def test_iterate_json_and_csv_are_stable():
    code, a = run_cli("iterate", "vdp", "--k", "2", "--format", "json")
    doc = json.loads(a)
    assert code == 0 and [r["k"] for r in doc["rows"]] == [1, 2]
    assert doc["rows"][0]["c"] == {"fraction": "1/1", "decimal": 1.0}
    _, c1 = run_cli("iterate", "vdp", "--k", "2", "--format", "csv")
    _, c2 = run_cli("iterate", "vdp", "--k", "2", "--format", "csv")
    assert c1 == c2 and c1.endswith("\r\n")
    rows = list(csv.DictReader(io.StringIO(c1)))
    assert rows[1]["certified"] == "True"


def test_expand_classical_and_iterative():
    code, out = run_cli("expand", "vdp", "--order", "3", "--format", "csv")
    coeffs = [r["coefficient"] for r in csv.DictReader(io.StringIO(out))]
    assert code == 0 and coeffs == ["1", "-1/8 (-0.125)", "-3/32 (-0.09375)", "-173/1024 (-0.1689453125)"]
    code, out = run_cli("expand", "vdp", "--order", "3", "--method", "iterative", "--k", "3", "--bound")
    assert code == 0 and "-75/1024" in out and "existence_bound: 27/16" in out


def test_exit_codes(tmp_path, capsys):
    assert run_cli("expand", "templator")[0] == 2
    bad = tmp_path / "bad.model"
    bad.write_text(GOOD.replace("x^3", "x^^3"))
    assert run_cli("iterate", str(bad))[0] == 2
    assert "bad.model:10" in capsys.readouterr().err
    assert run_cli("iterate", "no-such-model")[0] == 2
    tiny = tmp_path / "tiny.model"
    tiny.write_text(GOOD.replace("bracket = 1/2 3/2", "bracket = 2 3"))
    assert run_cli("iterate", str(tiny))[0] == 4


def test_simulate_csv():
    code, out = run_cli("simulate", "vdp", "--value", "0.9", "--t-end", "10", "--samples", "3")
    assert code == 0 and out.splitlines()[0] == "t,x,y" and len(out.splitlines()) == 4


@pytest.mark.slow
def test_explode_reports_bracket():
    code, out = run_cli("explode", "templator", "--interval", "0.9675", "0.9676", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and abs(doc["explosion"] - 0.967555) < 5e-5
    assert doc["bracket"][1] - doc["bracket"][0] <= 1e-6
    code, _ = run_cli("explode", "vdp", "--interval", "0.9", "0.9001")
    assert code == 4
