import json
import subprocess
import sys

import pytest

from pbengine.cli import main
from pbengine.pabulib import election_from_json, parse_pabulib, read_pabulib


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def pb(fixtures_dir):
    return lambda name: fixtures_dir / f"{name}.pb"


# compute -------------------------------------------------------------------------------


def test_compute_maxwel_cost(capsys, pb):
    code, out, _ = run(capsys, "compute", pb("e1"), "--rule", "maxwel_cost")
    report = json.loads(out)
    assert code == 0
    assert report["allocation"]["selected"] == ["p1"]
    assert report["allocation"]["total_cost"] == "6"
    assert report["election"]["n"] == 3 and report["election"]["m"] == 5


def test_compute_greedy_card(capsys, pb):
    code, out, _ = run(capsys, "compute", pb("e1"), "--rule", "greedy_card")
    assert code == 0
    assert json.loads(out)["allocation"]["selected"] == ["p2", "p3", "p4", "p5"]


def test_compute_assert_project(capsys, pb):
    assert run(capsys, "compute", pb("e3"), "--rule", "mes", "--sat", "card", "--assert-project", "p1")[0] == 0
    code, out, _ = run(capsys, "compute", pb("half_support"), "--rule", "mes", "--sat", "card", "--assert-project", "p1")
    assert code == 3
    assert json.loads(out)["assert_project"] == {"project": "p1", "selected": False}


def test_compute_mes_certificate_and_completion(capsys, pb):
    code, out, _ = run(capsys, "compute", pb("e3"), "--rule", "mes", "--sat", "card")
    report = json.loads(out)
    assert report["certificate"]["alpha"] == "1"
    code, out, _ = run(capsys, "compute", pb("half_support"), "--rule", "mes", "--sat", "card", "--completion", "greedy:score")
    assert code == 0 and json.loads(out)["allocation"]["selected"] == ["p1"]


def test_compute_writes_out_file(capsys, pb, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "compute", pb("e1"), "--rule", "phragmen", "--out", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["command"] == "compute"


def test_reports_are_deterministic(capsys, pb):
    first = run(capsys, "audit", pb("e2"), "--rule", "phragmen", "--axioms", "ejr,pjrx,core", "--sat", "cost")
    second = run(capsys, "audit", pb("e2"), "--rule", "phragmen", "--axioms", "ejr,pjrx,core", "--sat", "cost")
    assert first == second


def test_timing_is_opt_in(capsys, pb):
    _, out, _ = run(capsys, "compute", pb("e1"), "--rule", "maxwel_card")
    assert "timing" not in json.loads(out)
    _, out, _ = run(capsys, "compute", pb("e1"), "--rule", "maxwel_card", "--timing")
    assert "rule" in json.loads(out)["timing"]


# audit ---------------------------------------------------------------------------------


def test_audit_strong_ejr_witness(capsys, pb):
    code, out, _ = run(capsys, "audit", pb("e2"), "--allocation", "p1,p2", "--axioms", "strong-ejr", "--sat", "card")
    assert code == 3
    verdict = json.loads(out)["axioms"][0]
    assert verdict["status"] == "violated"
    assert verdict["witness"]["group"] == ["3", "4"]
    assert verdict["witness"]["bundle"] == ["p3"]


def test_audit_mes_priceable_and_exhaustive(capsys, pb):
    code, out, _ = run(capsys, "audit", pb("e3"), "--rule", "mes", "--sat", "card", "--axioms", "priceable,exhaustive")
    assert code == 0
    assert [v["status"] for v in json.loads(out)["axioms"]] == ["satisfied", "satisfied"]


def test_audit_empty_allocation_and_alpha(capsys, pb):
    code, out, _ = run(capsys, "audit", pb("e2"), "--allocation", "", "--axioms", "core-entitlement", "--sat", "card", "--alpha", "2")
    assert code == 0
    code, _, _ = run(capsys, "audit", pb("e2"), "--allocation", "", "--axioms", "core-entitlement", "--sat", "card", "--alpha", "1")
    assert code == 3


def test_audit_relative_budget(capsys, pb):
    code, _, _ = run(capsys, "audit", pb("e2"), "--allocation", "", "--axioms", "ejr", "--sat", "card", "--relative-budget")
    assert code == 0


# exit codes ----------------------------------------------------------------------------


def test_unknown_axiom_is_usage_error(capsys, pb):
    code, _, err = run(capsys, "audit", pb("e2"), "--allocation", "p1", "--axioms", "nonsense")
    assert code == 2 and "nonsense" in err


def test_incompatible_rule_is_usage_error(capsys, pb):
    code, _, err = run(capsys, "compute", pb("e1"), "--rule", "maxwel_util")
    assert code == 2 and err.startswith("error")


def test_parse_error_names_line(capsys, tmp_path, pb):
    bad = tmp_path / "bad.pb"
    bad.write_text(pb("e3").read_text().replace("p1;1\n", "p1;0\n"))
    code, _, err = run(capsys, "compute", bad, "--rule", "phragmen")
    assert code == 1 and "line" in err
    assert run(capsys, "compute", tmp_path / "missing.pb", "--rule", "phragmen")[0] == 1


def test_caps_exit_code(capsys, pb):
    code, _, err = run(capsys, "audit", pb("e2"), "--allocation", "p1", "--axioms", "ejr", "--sat", "card", "--max-n", "2")
    assert code == 4 and "caps" in err


def test_bad_flags_are_usage_errors(capsys, pb):
    assert run(capsys, "compute", pb("e1"), "--rule", "mes", "--sat", "bogus")[0] == 2
    assert run(capsys, "compute", pb("e1"), "--rule", "phragmen", "--tiebreak", "sideways")[0] == 2
    assert run(capsys, "audit", pb("e1"), "--axioms", "ejr")[0] == 2
    assert run(capsys, "compute", pb("e1"))[0] == 2


# dynamic audits and manipulation --------------------------------------------------------


def test_audit_dynamic_discount(capsys, pb):
    argv = ["audit-dynamic", pb("e1"), "--rule", "maxwel_cost", "--kind", "discount", "--project", "p1", "--new-cost", "5"]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and json.loads(out)["verdict"]["status"] == "satisfied"


def test_manipulate_e1(capsys, pb):
    code, out, _ = run(capsys, "manipulate", pb("e1"), "--rule", "maxwel_cost", "--sat", "card", "--voter", "3", "--mode", "approx")
    assert code == 3
    man = json.loads(out)["manipulation"]
    assert man["ballot"] == ["p2", "p3", "p4", "p5"]
    assert man["after"] == ["p2", "p3", "p4", "p5"]


# convert -------------------------------------------------------------------------------


def test_convert_round_trip(capsys, pb, tmp_path):
    for name in ("e1", "e2", "e3", "half_support"):
        original = read_pabulib(pb(name))
        js = tmp_path / f"{name}.json"
        back = tmp_path / f"{name}.pb"
        assert run(capsys, "convert", pb(name), "--to", "json", "--out", js)[0] == 0
        assert election_from_json(json.loads(js.read_text())) == original
        assert run(capsys, "convert", js, "--to", "pb", "--out", back)[0] == 0
        assert parse_pabulib(back.read_text()) == original


def test_json_is_stable(capsys, pb):
    first = run(capsys, "convert", pb("e2"), "--to", "json")[1]
    assert first == run(capsys, "convert", pb("e2"), "--to", "json")[1]
    assert json.dumps(json.loads(first), sort_keys=True, indent=2) + "\n" == first


def test_module_entry_point(pb):
    proc = subprocess.run(
        [sys.executable, "-m", "pbengine", "compute", str(pb("e1")), "--rule", "maxwel_cost"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["allocation"]["selected"] == ["p1"]
