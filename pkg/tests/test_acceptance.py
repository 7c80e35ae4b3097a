"""Acceptance criteria, one reported line each (see the 'acceptance criteria' summary section)."""

import json
import random
import shutil
import time
from pathlib import Path

import pytest

from artifact.arith import genus_x0, primes_in
from artifact.cli import EXIT_OK, main
from artifact.density import (
    EXPECTED_DEGREE6_INFINITE,
    Rule,
    _ANCHORS,
    classify_degree6,
    df_genus_bound,
    kv_thresholds,
    rank_filter_dim_cap,
)
from artifact.ingest import default_fixture_dir, load_fixture
from artifact.jacobian import ValidationError
from artifact.pointbounds import finite_by_ogg
from artifact.quadforms import (
    Discriminant,
    analytic_threshold_check,
    class_number_cox,
    class_number_reduced,
    genus_x0_plus,
    is_fundamental,
    plus_genus_inequality,
    ramare_bound,
)

from .conftest import ACCEPTANCE_LINES

GOLDEN = Path(__file__).parent / "golden"


def report(n, ok, detail, started):
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({time.time() - started:.1f}s) {detail}")
    assert ok, detail


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_criterion_1_genus_table():
    t = time.time()
    rows = [(223, 18, 6), (227, 19, 5), (359, 30, 6), (383, 32, 8), (491, 41, 12), (809, 67, 26), (929, 77, 30),
            (1409, 117, 50)]
    bad = [(p, g, gp) for p, g, gp in rows if (genus_x0(p), genus_x0_plus(p)) != (g, gp)]
    bad += [(n, g) for n, g in ((37, 2), (193, 15), (197, 16), (211, 17)) if genus_x0(n) != g]
    report(1, not bad and time.time() - t < 1, f"mismatches={bad}", t)


def test_criterion_2_class_number_oracles():
    t = time.time()
    cox_bad, checked = [], 0
    for D in range(-10**5, 0):
        if D % 4 not in (0, 1) or is_fundamental(D):
            continue
        disc = Discriminant.of(D)
        checked += 1
        if class_number_cox(disc.d, disc.m) != class_number_reduced(D):
            cox_bad.append(D)
    ram_bad, fund = [], 0
    for d in range(-10**5 + 1, -4):
        if is_fundamental(d):
            fund += 1
            if not ramare_bound(d).certainly_ge(class_number_reduced(d)):
                ram_bad.append(d)
    ok = not cox_bad and not ram_bad
    report(2, ok, f"non-fundamental={checked} cox_mismatch={cox_bad[:5]} fundamental={fund} "
                  f"ramare_violations={ram_bad[:5]}", t)


def test_criterion_3_sandwich_and_analytic():
    t = time.time()
    sweep = primes_in(3001, 43644)
    bad = [p for p in sweep if not plus_genus_inequality(p)]
    rng = random.Random(20240101)
    sample = sorted(rng.sample(primes_in(43645, 10**6 + 1), 100))
    analytic_bad = [p for p in sample if not analytic_threshold_check(p)]
    report(3, not bad and not analytic_bad,
           f"sweep={len(sweep)} primes, failures={bad[:5]}; analytic sample={len(sample)}, failures={analytic_bad}", t)


def test_criterion_4_ogg_threshold():
    t = time.time()
    got = {p for p in primes_in(2, 2000) if finite_by_ogg(p, 6)}
    ok = got == {p for p in primes_in(697, 2000)} and not finite_by_ogg(691, 6) and finite_by_ogg(701, 6)
    report(4, ok, f"smallest finite prime={min(got)}", t)


def test_criterion_5_case4_table(capsys):
    t = time.time()
    code, out, err = run_cli(capsys, "classify-morphisms", "2..2999", "--show-residual", "--format", "md")
    want = (GOLDEN / "case4_table.md").read_text()
    extra = sorted(set(out.splitlines()) - set(want.splitlines()))
    missing = sorted(set(want.splitlines()) - set(out.splitlines()))
    ok = code == EXIT_OK and out == want and time.time() - t < 60
    report(5, ok, f"exit={code} table_equal={out == want} extra_rows={extra} missing_rows={missing} "
                  f"[{err.strip().splitlines()[-1] if err.strip() else ''}]", t)


def test_criterion_6_degree6_set(capsys):
    t = time.time()
    code, out, err = run_cli(capsys, "classify-degree", "2..2999", "--expect-theorem17", "--format", "json")
    doc = json.loads(out)
    infinite = {v["level"] for v in doc if v["status"] == "Infinite"}
    unknown = [v["level"] for v in doc if v["status"] == "Unknown"]
    ok = code == EXIT_OK and infinite == EXPECTED_DEGREE6_INFINITE and not unknown and time.time() - t < 60
    report(6, ok, f"exit={code} infinite={len(infinite)} unknown={unknown}", t)


def test_criterion_7_thresholds(facts):
    t = time.time()
    kv = classify_degree6(211, facts).evidence[0]
    df = classify_degree6(193, facts).evidence[0]
    rf = classify_degree6(157, facts).evidence[0]
    ok = (
        kv_thresholds(6) == (2, 5, 16)
        and df_genus_bound(6) == 12
        and rank_filter_dim_cap(6) == 3
        and kv.rule_id is Rule.KVGate and kv.inputs["genus"] > 16 and "Kadets-Vogt" in kv.paper_anchor
        and df.rule_id is Rule.DFMinimality and df.inputs["genus_bound"] == 12 and "d-minimality" in df.paper_anchor
        and rf.rule_id is Rule.RankFilter and rf.inputs["dim_cap"] == 3 and "Debarre-Fahlaoui" in rf.paper_anchor
        and all(_ANCHORS.values())
    )
    report(7, ok, f"kv={kv_thresholds(6)} df={df_genus_bound(6)} cap={rank_filter_dim_cap(6)}", t)


def test_criterion_8_thm13_golden(capsys, bundle):
    t = time.time()
    golden = json.loads((GOLDEN / "thm13_primes_below_10000.json").read_text())
    code, out, _ = run_cli(capsys, "thm13-stats", "2..9999", "--format", "json")
    (row,) = json.loads(out)
    from artifact.jacobian import check_thm13_hypothesis

    greedy_failing = [p for p in primes_in(2, 10000) if not check_thm13_hypothesis(bundle.factors[p])]
    ok = (
        code == EXIT_OK
        and (row["satisfying"], row["total"]) == (golden["satisfying"], golden["total"])
        and greedy_failing == golden["failing"]
    )
    report(8, ok, f"cli={row['satisfying']}/{row['total']} golden={golden['satisfying']}/{golden['total']}", t)


def test_criterion_9_fault_injection(tmp_path, capsys):
    t = time.time()
    fx = tmp_path / "fx"
    shutil.copytree(default_fixture_dir(), fx)
    doc = json.loads((fx / "factors.json").read_text())
    victim = next(r for r in doc["records"] if r["level"] == 1409)
    victim["dim"] += 1
    (fx / "factors.json").write_text(json.dumps(doc))
    raised = False
    try:
        load_fixture(fx)
    except ValidationError as exc:
        raised = "1409" in str(exc)
    code, out, err = run_cli(capsys, "classify-morphisms", "2..2999", "--facts", str(fx))
    report(9, raised and code == 2 and out == "", f"validation_error={raised} cli_exit={code} stdout_empty={out == ''}", t)
