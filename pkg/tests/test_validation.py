import io
import json
import math

import pytest

from cpforce.validation import (
    ACCEPTANCE_IDS,
    CHECKS,
    CheckResult,
    Comparison,
    Status,
    UnknownCheckError,
    _result,
    exit_code,
    honesty_corpus,
    log_log_slope,
    run_check,
    run_suite,
    summary_line,
    write_report,
)


def test_acceptance_ids_are_the_first_twelve():
    assert len(ACCEPTANCE_IDS) == 12
    assert list(ACCEPTANCE_IDS) == list(CHECKS)[:12]


def test_comparison_bound_uses_floor():
    c = Comparison("x", 1e-9, 0.0, 1e-6, floor=1e-3)
    assert c.bound == 1e-9 and c.passed
    assert not Comparison("x", 2e-9, 0.0, 1e-6, floor=1e-3).passed


def test_comparison_nan_fails():
    c = Comparison("x", math.nan, 1.0, 0.1)
    assert not c.passed and c.score == math.inf


def test_multi_comparison_reports_worst_score():
    comps = [Comparison("a", 1.05, 1.0, 0.1), Comparison("b", 2.0, 1.0, 0.5)]
    r = _result("x", comps, 0.0)
    assert r.status is Status.FAIL
    assert r.measured == pytest.approx(2.0)
    assert set(r.details) == {"a", "b"}


def test_log_log_slope_exact_power():
    x = [1.0, 2.0, 4.0, 8.0]
    assert log_log_slope(x, [xi**-3 for xi in x]) == pytest.approx(-3.0, abs=1e-12)


def test_single_check_passes():
    r = run_check("kernels.TprimeA_relation")
    assert r.status is Status.PASS
    assert r.runtime >= 0


def test_unknown_check_id():
    with pytest.raises(UnknownCheckError):
        run_check("no.such.check")
    with pytest.raises(UnknownCheckError):
        run_suite(["kernels.TprimeA_relation", "no.such.check"])


def test_empty_selection_rejected():
    with pytest.raises(ValueError):
        run_suite([])


def test_zero_budget_is_inconclusive():
    results = run_suite(["force.sign_law", "kernels.TprimeA_relation"], budget=0.0)
    assert [r.status for r in results] == [Status.INCONCLUSIVE] * 2
    assert exit_code(results) == 0


def test_suite_order_follows_registry_and_deduplicates():
    sel = ["kernels.TprimeA_relation", "vacuum.short_distance_law", "kernels.TprimeA_relation"]
    ids = [r.check_id for r in run_suite(sel)]
    assert ids == ["vacuum.short_distance_law", "kernels.TprimeA_relation"]


def test_results_are_deterministic():
    a = run_check("vacuum.short_distance_law")
    b = run_check("vacuum.short_distance_law")
    assert (a.status, a.measured, a.expected) == (b.status, b.measured, b.expected)


def test_report_is_jsonl():
    results = run_suite(["kernels.TprimeA_relation"])
    buf = io.StringIO()
    write_report(results, buf)
    lines = buf.getvalue().splitlines()
    assert len(lines) == 1
    rec = json.loads(lines[0])
    assert rec["check_id"] == "kernels.TprimeA_relation"
    assert rec["status"] == "Pass"
    assert {"measured", "expected", "tolerance", "runtime"} <= set(rec)


def test_exit_code_and_summary():
    fail = CheckResult("x", Status.FAIL, 1.0, 0.0, 0.1, 0.0, message="why")
    ok = CheckResult("y", Status.PASS, 0.0, 0.0, 0.1, 0.0)
    assert exit_code([ok]) == 0
    assert exit_code([ok, fail]) == 1
    assert summary_line(fail).startswith("FAIL") and "why" in summary_line(fail)


def test_crashing_check_is_failure(monkeypatch):
    def boom():
        raise RuntimeError("broken")

    monkeypatch.setitem(CHECKS, "kernels.TprimeA_relation", boom)
    r = run_check("kernels.TprimeA_relation")
    assert r.status is Status.FAIL and "broken" in r.message


def test_honesty_corpus_size():
    assert len(honesty_corpus()) >= 20


@pytest.mark.parametrize("check_id", ["asymptotics.regime_grid", "reference.frozen_coefficients"])
def test_extra_checks_pass(check_id):
    assert run_check(check_id).status is Status.PASS
