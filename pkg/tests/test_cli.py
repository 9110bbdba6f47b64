import json
from pathlib import Path

import jsonschema
import pytest

from symspin.cli import Check, Report, RunConfig, main
from symspin.hodge import STANDARD_ALGEBRAS, complex_to_dict, random_complex

SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


def schema(name):
    return json.loads((SCHEMAS / name).read_text())


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(n=0)
    with pytest.raises(ValueError):
        RunConfig(tol=0.5)
    with pytest.raises(ValueError):
        RunConfig(fmt="xml")


def test_report_gating():
    rep = Report("osp", {})
    rep.add("a", 1e-12, 1e-9)
    rep.add("b", 1.0, 1e-9, gating=False)
    assert rep.passed
    rep.add("c", 1.0, 1e-9)
    assert not rep.passed
    assert Check("x", 0, 0).passed


def test_usage_error_for_bad_rank(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--n", "0"])
    assert exc.value.code == 2


def test_classify_report(capsys, tmp_path):
    table = tmp_path / "table.csv"
    code, out = run(capsys, "classify", "--n", "2", "--sweep", "200", "--bound", "1", "--table-csv", str(table))
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, schema("report.schema.json"))
    assert len(rep["data"]["spinor_tensor_summands"]) == 2
    assert table.read_text().startswith("lambda,mu,c,d,dim\n")


def test_byte_identical_runs(capsys):
    argv = ["classify", "--n", "3", "--sweep", "100", "--bound", "1", "--seed", "4"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_timing_is_opt_in(capsys):
    _, out = run(capsys, "classify", "--sweep", "10", "--bound", "1", "--timing")
    assert "wall_time" in json.loads(out)


def test_csv_format(capsys):
    code, out = run(capsys, "classify", "--sweep", "10", "--bound", "1", "--format", "csv")
    assert code == 0 and out.startswith("name,residual,threshold,passed,gating\n")


def test_env_defaults(capsys, monkeypatch):
    monkeypatch.setenv("SYMSPIN_SEED", "7")
    _, out = run(capsys, "classify", "--sweep", "10", "--bound", "1")
    assert json.loads(out)["config"]["seed"] == 7


def test_hodge_from_file(capsys, tmp_path):
    cx = complex_to_dict(random_complex(STANDARD_ALGEBRAS["C+M2"], (2, 2, 1), 0))
    jsonschema.validate(cx, schema("complex.schema.json"))
    src = tmp_path / "cx.json"
    src.write_text(json.dumps(cx))
    export = tmp_path / "res.json"
    code, out = run(capsys, "hodge", "--input", str(src), "--export", str(export))
    assert code == 0
    jsonschema.validate(json.loads(out), schema("report.schema.json"))
    assert export.exists()


def test_hodge_random_small(capsys):
    code, out = run(capsys, "hodge", "--count", "2")
    assert code == 0 and json.loads(out)["data"]["complexes"] == 8


def test_malformed_input_exits_nonzero(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"algebra": [1]}')
    assert main(["hodge", "--input", str(bad)]) == 2
    bad.write_text("not json")
    assert main(["hodge", "--input", str(bad)]) == 2
    assert main(["hodge", "--input", str(tmp_path / "missing.json")]) == 2


def test_curvature_rank_one_is_an_error(capsys):
    assert main(["curvature", "--n", "1"]) == 2
    assert main(["curvature", "--variant", "zzz", "--seeds", "1"]) == 2


def test_curvature_single_variant(capsys):
    code, out = run(capsys, "curvature", "--variant", "c", "--seeds", "2")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, schema("report.schema.json"))
    names = {c["name"]: c for c in rep["checks"]}
    assert names["projection formulas corrected (measured coefficient)"]["passed"]
    assert not names["projection formulas corrected (nominal coefficient)"]["gating"]


def test_osp_report(capsys):
    code, out = run(capsys, "osp", "--n", "1", "--trunc", "6")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("report.schema.json"))
    assert code == 0 and rep["passed"]


def test_output_file(tmp_path, capsys):
    target = tmp_path / "r.json"
    assert main(["classify", "--sweep", "5", "--bound", "1", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text())["command"] == "classify"
