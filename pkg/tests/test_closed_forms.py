import pytest

from app.core.closed_forms import (
    GAP_TOLERANCE,
    KNOWN_NOTES,
    closed_form_statuses,
    engine_value,
    tabulated_h_terms,
)


def test_printed_h_terms_have_opposite_sign(zero_table, precision):
    """H₁ y H₃ impresos son exactamente −(forma derivada)"""
    rho = zero_table.rhos(1, precision)[0]
    printed = tabulated_h_terms(20, rho, precision)
    for name in ("H1", "H3"):
        engine = engine_value(name, 20, precision, rho=rho)
        assert abs(engine + printed[name]) <= 1e-25 * max(abs(engine), 1)


def test_elementary_forms_need_no_correction(precision):
    statuses = {s.term: s for s in closed_form_statuses([20], precision=precision)}
    for name in ("s1", "s3", "s8"):
        assert statuses[name].printed_gap <= 1e-25
        assert not statuses[name].corrected
    assert all(s.passed for s in statuses.values())
    assert statuses["s10"].printed_value is None


def test_known_note_recorded_without_correction(precision):
    """V₈ conserva su nota aunque la forma impresa dé el mismo valor"""
    statuses = {s.term: s for s in closed_form_statuses([20], precision=precision)}
    v8 = statuses["V8"]
    assert not v8.corrected
    assert v8.correction_note == KNOWN_NOTES["V8"]
    assert v8.recorded
    assert not statuses["s1"].recorded


def test_statuses_with_one_zero(zero_table, precision):
    """Cada forma del motor coincide con su cuadratura; H₁..H₃ quedan registrados como corregidos"""
    statuses = closed_form_statuses([20], zero_table, zero_count=1, precision=precision)
    failed = [(s.term, s.engine_gap) for s in statuses if not s.passed]
    assert failed == []
    by_term = {s.term: s for s in statuses if s.zero_index == 1}
    assert set(by_term) == {"s2", "s6", "H1", "H2", "H3"}
    for name in ("H1", "H2", "H3"):
        assert by_term[name].corrected
        assert by_term[name].correction_note
    assert not by_term["s2"].corrected
    assert not by_term["s2"].recorded
    assert all(s.engine_gap <= GAP_TOLERANCE for s in statuses)


@pytest.mark.slow
def test_statuses_full_grid(zero_table, precision):
    statuses = closed_form_statuses([10, 20, 50], zero_table, zero_count=3, precision=precision)
    assert all(s.passed for s in statuses)
