import csv
import io
import json

import pytest
from pydantic import ValidationError

from app.api.commands import RunConfig, parse_grid, run_sweeps
from app.core.errors import DomainError
from app.core.theorem1 import TERM_NAMES
from app.main import EXIT_ERROR, EXIT_FAILED_CHECK, EXIT_OK, main


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_parse_grid_forms():
    assert parse_grid("1:100:log:3") == pytest.approx([1.0, 10.0, 100.0])
    assert parse_grid("0:1:lin:5") == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert parse_grid("10,20,50") == [10.0, 20.0, 50.0]
    assert len(parse_grid("50:5000:log")) == 5


def test_parse_grid_rejects_garbage():
    with pytest.raises(DomainError):
        parse_grid("1:2:cubic")
    with pytest.raises(DomainError):
        parse_grid("0:10:log")
    with pytest.raises(DomainError):
        parse_grid("a,b")


def test_run_config_validation():
    with pytest.raises(ValidationError):
        RunConfig(command="verify-t1")
    with pytest.raises(ValidationError):
        RunConfig(command="verify-t2", n=20, precision=32)
    with pytest.raises(ValidationError):
        RunConfig(command="verify-t2", n=20, max_zeros=-1)
    with pytest.raises(ValidationError):
        RunConfig(command="solve-rh")


def test_resolved_ladder():
    assert RunConfig(command="verify-t2", n=20, max_zeros=2000).resolved_ladder() == [100, 500, 2000]
    assert RunConfig(command="verify-t2", n=20, max_zeros=50).resolved_ladder() == [50]
    assert RunConfig(command="verify-t2", n=20, ladder=[500, 100]).resolved_ladder() == [100, 500]


def test_run_sweeps_rejects_other_commands(zero_table):
    with pytest.raises(DomainError):
        run_sweeps(RunConfig(command="verify-t2", n=20), zero_table)


def test_verify_t1_json_report(capsys):
    status = main(["verify-t1", "--z", "0.1", "--ladder", "5,10"])
    report = _json(capsys)
    assert status in (EXIT_OK, EXIT_FAILED_CHECK)
    assert report["schema"] == 1
    assert report["command"] == "verify-t1"
    assert list(report["terms"]) == list(TERM_NAMES)
    assert [rung["K"] for rung in report["refinement"]] == [5, 10]
    assert report["checks"]["reality"] is True
    assert report["checks"]["ei_groups_match_quadrature"] is True
    assert isinstance(report["residual"], str)
    corrections = report["corrections"]
    assert [c["term"] for c in corrections] == ["compensated_zero_sum"]
    assert corrections[0]["note"]
    assert isinstance(corrections[0]["printed_residual"], str)
    assert isinstance(corrections[0]["corrected"], bool)


def test_verify_t1_complex_adds_conjugation_run(capsys):
    status = main(["verify-t1", "--z", "0.05+0.3i", "--max-zeros", "5"])
    report = _json(capsys)
    assert status in (EXIT_OK, EXIT_FAILED_CHECK)
    assert "reality" not in report["checks"]
    assert report["checks"]["conjugation"] is True
    assert set(report["extra"]["conjugation"]) == {"rhs", "lhs", "gap"}
    assert set(report["lhs"]) == {"re", "im"}


def test_verify_t1_missing_zero_file(capsys, tmp_path):
    status = main(["verify-t1", "--z", "0.1", "--zeros", str(tmp_path / "no_existe.txt")])
    assert status == EXIT_ERROR
    assert "error" in _json(capsys)


def test_verify_t2_precondition(capsys):
    status = main(["verify-t2", "--n", "4", "--ladder", "5"])
    report = _json(capsys)
    assert status == EXIT_ERROR
    assert report["term"] == "theorem2Rhs"


def test_invalid_precision_exits_with_error(capsys):
    status = main(["verify-t2", "--n", "20", "--precision", "32"])
    assert status == EXIT_ERROR
    assert _json(capsys)["term"] is None


def test_verify_t2_csv(capsys):
    status = main(["verify-t2", "--n", "20", "--ladder", "5,10", "--format", "csv"])
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert status in (EXIT_OK, EXIT_FAILED_CHECK)
    assert rows[0] == ["term", "re", "im"]
    names = [row[0] for row in rows[1:]]
    assert names[:10] == [f"s{m}" for m in range(1, 11)]
    assert {"H1", "H2", "H3", "V9", "lhs", "rhs", "residual"} <= set(names)


def test_verify_t2_records_closed_form_corrections(capsys):
    status = main(["verify-t2", "--n", "20", "--ladder", "5"])
    report = _json(capsys)
    assert status in (EXIT_OK, EXIT_FAILED_CHECK)
    corrections = report["corrections"]
    assert corrections
    assert {c["term"] for c in corrections} >= {"H1", "H2", "H3", "V8"}
    assert all(c["correction_note"] for c in corrections)
    assert report["extra"]["cesaro_k1"]["double_sums_identical"] is True


def test_regime_e_to_file(capsys, tmp_path):
    out = tmp_path / "regimen.json"
    status = main(["regime-e", "--a", "0.01", "--y-grid", "0.001,0.5,2,100", "--out", str(out)])
    assert status == EXIT_OK
    assert capsys.readouterr().out == ""
    report = json.loads(out.read_text())
    assert report["checks"]["large_y_improvement"] is True
    assert len(report["extra"]["points"]) == 4


def test_report_is_deterministic(capsys):
    """Misma configuración, mismo informe salvo timestamp y wall_time"""
    payloads = []
    for _ in range(2):
        main(["regime-e", "--a", "0.01", "--y-grid", "0.001,2"])
        report = _json(capsys)
        report.pop("timestamp")
        report.pop("wall_time")
        payloads.append(report)
    assert payloads[0] == payloads[1]


@pytest.mark.slow
def test_validate_forms_command(capsys):
    status = main(["validate-forms", "--u", "20", "--max-zeros", "1"])
    report = _json(capsys)
    assert status == EXIT_OK
    assert report["checks"] == {"forms_match_oracle": True, "gamma_identities": True}
    assert {c["term"] for c in report["corrections"]} >= {"H1", "H2", "H3", "V8"}
