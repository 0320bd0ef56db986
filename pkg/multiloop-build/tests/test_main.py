"""
End-to-end tests for the command-line front end: exit codes, JSON reports,
error payloads and the text rendering.
"""

import io
import json
import logging
import shutil
import sys

import pytest

from app.core.logging import StderrHandler, setup_logging
from app.main import main
from app.models.schemas import CheckResult, Report, ReportParameters
from app.services.formatters import checks_table, flatten, inputs_digest, render_text, report_json
from tests.conftest import corpus_path


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_grade_json_report(capsys):
    code, out = _run(capsys, "grade", corpus_path("sl2_involution.json"), "--json")
    assert code == 0
    report = json.loads(out)
    assert report["schema"] == 1
    assert report["command"] == "grade"
    assert report["passed"] is True
    assert report["results"]["dimensions"] == {"0": 1, "1": 2}
    assert report["results"]["central_grading_group"] == [[2]]
    assert report["parameters"]["window"] == 3


def test_reports_are_deterministic(capsys):
    _, first = _run(capsys, "grade", corpus_path("sl3_diagram_torus.json"), "--json")
    _, second = _run(capsys, "grade", corpus_path("sl3_diagram_torus.json"), "--json")
    assert first == second


def test_flags_override_settings(capsys, monkeypatch):
    monkeypatch.setenv("MULTILOOP_WINDOW_RADIUS", "4")
    _, out = _run(capsys, "grade", corpus_path("untwisted_sl2.json"), "--json")
    assert json.loads(out)["parameters"]["window"] == 4
    _, out = _run(capsys, "grade", corpus_path("untwisted_sl2.json"), "--json", "--window", "1")
    assert json.loads(out)["parameters"]["window"] == 1


def test_spec_options_sit_between_flags_and_settings(capsys):
    _, out = _run(capsys, "eala-build", corpus_path("eala/sl2_degree0.json"), "--json")
    report = json.loads(out)
    assert report["parameters"]["window"] == 2
    assert report["results"]["frame"]["dim_H"] == 3


def test_torus_check_fails_for_the_involution(capsys):
    code, out = _run(capsys, "torus-check", corpus_path("sl2_involution.json"), "--json")
    assert code == 1
    assert json.loads(out)["results"]["torus"]["is_torus"] is False


def test_toralize_reports_a_verified_chain(capsys):
    code, out = _run(capsys, "toralize", corpus_path("sl2_involution.json"), "--json", "--window", "2")
    assert code == 0
    results = json.loads(out)["results"]
    assert results["verification"]["passed"] is True
    assert results["chain_verification"]["passed"] is True
    assert len(results["P"]) == 1


def test_toralize_without_a_fixed_point(capsys):
    code, out = _run(capsys, "toralize", corpus_path("zero_fixed.json"), "--json")
    assert code == 2
    payload = json.loads(out)
    assert payload["error_code"] == "GRADE_003"
    assert "debug_info" not in payload


def test_iso_verify_with_a_positional_certificate(capsys):
    code, out = _run(
        capsys,
        "iso-verify",
        corpus_path("sl2_torus3.json"),
        corpus_path("pairs/sl2_torus3_inverse.json"),
        corpus_path("pairs/inverse_certificate.json"),
        "--json",
    )
    assert code == 0
    assert json.loads(out)["results"]["verification"]["passed"] is True


def test_iso_verify_needs_a_certificate(capsys):
    code, out = _run(capsys, "iso-verify", corpus_path("sl2_torus3.json"), corpus_path("pairs/sl2_torus3_inverse.json"))
    assert code == 2
    assert json.loads(out)["error_code"] == "INPUT_001"


def test_iso_verify_certificate_changes_the_digest(capsys):
    args = [corpus_path("sl3_diagram_torus.json"), corpus_path("pairs/sl3_torus_diagram.json")]
    _, with_cert = _run(capsys, "iso-verify", *args, "--certificate", corpus_path("pairs/swap_certificate.json"), "--json")
    _, search = _run(capsys, "iso-search", *args, "--bound", "1", "--json")
    assert json.loads(with_cert)["inputs_digest"] != json.loads(search)["inputs_digest"]
    assert json.loads(search)["results"]["found"] is True


def test_non_commuting_tuple_is_a_validation_error(capsys):
    code, out = _run(capsys, "grade", corpus_path("pairs/not_commuting.json"))
    assert code == 2
    payload = json.loads(out)
    assert payload["error_code"] == "INPUT_002"
    assert payload["error"] == "ValidationError"


def test_malformed_json_is_a_parse_error(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text('{"schema": 1, "algebra": ', encoding="utf-8")
    code, out = _run(capsys, "grade", str(broken))
    assert code == 2
    assert json.loads(out)["error_code"] == "INPUT_001"


def test_schema_violation_is_a_parse_error(capsys, tmp_path):
    spec = tmp_path / "bad.json"
    spec.write_text(json.dumps({"schema": 1, "cyclotomic_order": 1, "algebra": {"type": "A"}, "automorphisms": []}))
    code, out = _run(capsys, "grade", str(spec))
    assert code == 2
    assert json.loads(out)["error_code"].startswith("INPUT_")


def test_debug_info_only_in_debug_mode(capsys, monkeypatch, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{\n  oops\n}", encoding="utf-8")
    monkeypatch.setenv("MULTILOOP_DEBUG", "true")
    _, out = _run(capsys, "grade", str(broken))
    assert json.loads(out)["debug_info"]["line"] == 2


@pytest.mark.slow
def test_report_all_over_a_directory(capsys, tmp_path):
    for name in ["untwisted_sl2.json", "sl2_involution.json", "zero_fixed.json"]:
        shutil.copy(corpus_path(name), tmp_path / name)
    code, out = _run(capsys, "report-all", str(tmp_path), "--json", "--window", "1")
    report = json.loads(out)
    assert set(report["results"]) == {"untwisted_sl2", "sl2_involution", "zero_fixed"}
    assert report["results"]["zero_fixed"]["toralize"]["error_code"] == "GRADE_003"
    assert report["results"]["sl2_involution"]["torus"]["is_torus"] is False
    assert code in (0, 1)


def test_text_rendering(capsys):
    code, out = _run(capsys, "torus-check", corpus_path("untwisted_sl2.json"))
    assert code == 0
    assert out.startswith("command: torus-check\nstatus:  PASS\n")
    assert "FAIL" not in out


def test_text_rendering_of_a_failed_check(capsys):
    code, out = _run(capsys, "torus-check", corpus_path("sl2_torus3.json"))
    assert code == 1
    assert out.startswith("command: torus-check\nstatus:  FAIL\n")


def test_inputs_digest_depends_on_content_not_layout():
    a = {"schema": 1, "m": [3], "algebra": {"type": "A", "rank": 1}}
    b = {"algebra": {"rank": 1, "type": "A"}, "m": [3], "schema": 1}
    assert inputs_digest([a]) == inputs_digest([b])
    assert inputs_digest([a]) != inputs_digest([a, a])
    assert len(inputs_digest([])) == 64


def test_report_json_uses_the_schema_alias():
    report = Report(
        command="grade",
        inputs_digest="0" * 64,
        parameters=ReportParameters(window=1, gamma_window=1, search_bound=1, certificate_bound=1, seed=0),
        passed=True,
        results={"b": 1, "a": [1, 2]},
    )
    text = report_json(report)
    assert text.endswith("\n")
    data = json.loads(text)
    assert data["schema"] == 1
    assert list(data) == sorted(data)
    assert "status:  PASS" in render_text(report)


def test_flatten_and_checks_table():
    assert flatten({"x": {"y": [1, 2]}, "z": []}) == [("x.y", "[1, 2]"), ("z", "[]")]
    table = checks_table([CheckResult(name="A0", passed=False, detail="m=[4]", witness={"i": 1})])
    assert list(table["status"]) == ["FAIL"]
    assert table.loc[0, "witness"] == '{"i":1}'


def test_console_logging_follows_the_current_stderr(monkeypatch):
    setup_logging()
    replacement = io.StringIO()
    monkeypatch.setattr(sys, "stderr", replacement)
    logging.getLogger("app.tests").warning("after the swap")
    assert "after the swap" in replacement.getvalue()
    assert any(isinstance(h, StderrHandler) for h in logging.getLogger().handlers)
