import csv
import io
import json

import pytest

from artifact.cli import EXIT_MISMATCH, EXIT_MISSING, EXIT_OK, EXIT_USAGE, UsageError, main, parse_range
from artifact.jacobian import ResidualRow
from artifact.reports import CASE4_COLUMNS, Report, case4_report, render


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    assert parse_range("7") == range(7, 8)
    assert parse_range("2..10") == range(2, 11)
    assert parse_range("5..4") == range(5, 5)
    for bad in ("0", "x", "3..1", "-2..5"):
        with pytest.raises(UsageError):
            parse_range(bad)


def test_render_formats():
    rep = Report(("a", "b"), ((1, None), (2, [1, 2])))
    assert render(rep, "md") == "| a | b |\n|---|---|\n| 1 |  |\n| 2 | [1,2] |\n"
    assert list(csv.reader(io.StringIO(render(rep, "csv")))) == [["a", "b"], ["1", ""], ["2", "[1,2]"]]
    assert json.loads(render(rep, "json")) == [{"a": 1, "b": None}, {"a": 2, "b": [1, 2]}]
    with pytest.raises(ValueError):
        render(rep, "xml")
    with pytest.raises(ValueError):
        Report(("a",), ((1, 2),))


def test_case4_report_orders_rows():
    rows = [ResidualRow(227, 19, 5, 2, 14, 18), ResidualRow(223, 18, 6, 2, 14, 17)]
    rep = case4_report(rows)
    assert rep.columns == CASE4_COLUMNS and [r[0] for r in rep.rows] == [223, 227]


def test_genus_command(capsys):
    code, out, _ = run(capsys, "genus", "223", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines() == ["N,psi,nu2,nu3,nu_inf,g0,g0_plus", "223,224,0,2,2,18,6"]
    code, out, _ = run(capsys, "genus", "20..22", "--format", "csv")
    assert out.splitlines()[1:] == ["20,36,0,0,6,1,", "21,32,0,2,4,1,", "22,36,0,0,4,2,"]


def test_usage_errors(capsys):
    assert run(capsys, "genus", "0")[0] == EXIT_USAGE
    assert run(capsys, "nonsense")[0] == EXIT_USAGE
    assert run(capsys, "classify-degree", "11", "--degree", "5", "--expect-theorem17")[0] == EXIT_USAGE
    assert run(capsys, "classify-degree", "11", "--degree", "7")[0] == EXIT_USAGE
    assert run(capsys, "genus", "5", "--jobs", "0")[0] == EXIT_USAGE


def test_classify_morphisms_single(capsys):
    code, out, _ = run(capsys, "classify-morphisms", "227", "--show-residual", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[1] == "227,19,5,2,14,18"


def test_classify_morphisms_missing_kernel_data(capsys, tmp_path):
    empty = tmp_path / "kd.json"
    empty.write_text(json.dumps({"records": []}))
    code, _, err = run(capsys, "classify-morphisms", "223", "--kernel-data", str(empty))
    assert code == EXIT_MISSING
    assert "NeedsKernelData: level 223: {223.2.a.a}" in err


def test_classify_morphisms_offline_beyond_bundle(capsys, bundle):
    p = bundle.morphism_level_bound + 1
    assert run(capsys, "classify-morphisms", f"{p}..{p + 20}", "--offline")[0] == EXIT_MISSING


def test_classify_degree_json(capsys):
    code, out, _ = run(capsys, "classify-degree", "193..197", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [(v["level"], v["status"], v["evidence"][0]["rule_id"]) for v in doc] == [
        (193, "Finite", "DFMinimality"),
        (197, "Finite", "Certificate"),
    ]
    assert doc[1]["evidence"][0]["inputs"]["statement_id"] == "W60_no_positive_rank_translate"


def test_classify_degree_unknown_exit(capsys, tmp_path, bundle):
    import shutil

    from artifact.ingest import default_fixture_dir

    fx = tmp_path / "fx"
    shutil.copytree(default_fixture_dir(), fx)
    # the degree-minimality route alone settles 211, so both facts have to go
    for name in ("gonality", "plus_cubic"):
        doc = json.loads((fx / f"{name}.json").read_text())
        doc["records"] = [r for r in doc["records"] if r["level"] != 211]
        (fx / f"{name}.json").write_text(json.dumps(doc))
    code, out, err = run(capsys, "classify-degree", "211", "--facts", str(fx), "--format", "csv")
    assert code == EXIT_MISSING
    assert out.splitlines()[1] == '211,Unknown,,,"gonality,plus_cubic"'


def test_expect_theorem17_mismatch(capsys, tmp_path):
    import shutil

    from artifact.ingest import default_fixture_dir

    fx = tmp_path / "fx"
    shutil.copytree(default_fixture_dir(), fx)
    doc = json.loads((fx / "plus_cubic.json").read_text())
    for r in doc["records"]:
        if r["level"] == 269:
            r["infinite"] = False
    (fx / "plus_cubic.json").write_text(json.dumps(doc))
    code, _, err = run(capsys, "classify-degree", "260..280", "--facts", str(fx), "--expect-theorem17")
    assert code == EXIT_MISMATCH
    assert "missing [269]" in err


def test_invalid_bundle_exit(capsys, tmp_path):
    assert run(capsys, "classify-degree", "11", "--facts", str(tmp_path))[0] == EXIT_MISSING


def test_thm13_stats(capsys):
    code, out, _ = run(capsys, "thm13-stats", "2..12", "--format", "csv")
    assert code == EXIT_OK and out.splitlines()[1] == "5,5,100.00"
    code, out, _ = run(capsys, "thm13-stats", "14..16", "--format", "csv")
    assert out.splitlines()[1] == "0,0,"


def test_jobs_parallel_equals_serial(capsys):
    serial = run(capsys, "classify-degree", "150..300", "--format", "csv")
    parallel = run(capsys, "classify-degree", "150..300", "--format", "csv", "--jobs", "2")
    assert serial[0] == parallel[0] == EXIT_OK
    assert serial[1] == parallel[1]


def test_reports_byte_deterministic(capsys):
    a = run(capsys, "classify-morphisms", "2..400", "--show-residual")
    b = run(capsys, "classify-morphisms", "2..400", "--show-residual")
    assert a == b
