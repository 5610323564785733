import io
from unittest.mock import MagicMock, patch

import httpx
import pytest

from app.core.arithmetic import chebyshev_psi
from app.core.errors import (
    DomainError,
    EngineError,
    TruncationError,
    ZeroParseError,
    ZeroSourceError,
    ZeroValidationError,
)
from app.core.zeros import (
    FileZeroSource,
    HttpZeroSource,
    TruncationPolicy,
    ZeroTable,
    conjugate_pair_sum,
    explicit_formula_bound,
    load_zeros,
    reciprocal_square_sum,
    truncated_psi,
    zero_power_sum,
    zero_source_for,
    zeta_log_derivative_at_zero,
)

FIRST_THREE = "14.134725141734693\n21.022039638771555\n25.010857580145688\n"


def test_bundled_table(zero_table):
    """2000 ordenadas, γ₁ y γ₂ conocidos"""
    assert zero_table.count == 2000
    gammas = zero_table.as_array(2)
    assert gammas[0] == pytest.approx(14.134725141734693, abs=1e-9)
    assert gammas[1] == pytest.approx(21.022039638771555, abs=1e-9)


def test_load_zeros_text_and_comments():
    table = load_zeros(io.StringIO("# ordenadas\n" + FIRST_THREE + "\n"), name="prueba")
    assert table.count == 3
    assert table.source == "prueba"


def test_load_zeros_bytes():
    table = load_zeros(io.BytesIO(FIRST_THREE.encode("utf-8")))
    assert table.count == 3


def test_load_zeros_parse_error_reports_line():
    with pytest.raises(ZeroParseError) as exc:
        load_zeros(io.StringIO("# cabecera\n14.134725141734693\nabc\n"))
    assert exc.value.line_number == 3
    assert exc.value.content == "abc"


def test_load_zeros_rejects_non_increasing():
    with pytest.raises(ZeroValidationError) as exc:
        load_zeros(io.StringIO("14.134725141734693\n25.010857580145688\n21.022039638771555\n"))
    assert exc.value.pair == ("25.010857580145688", "21.022039638771555")


def test_load_zeros_rejects_nonpositive_and_wrong_first():
    with pytest.raises(ZeroValidationError):
        load_zeros(io.StringIO("-1\n14.134725141734693\n"))
    with pytest.raises(ZeroValidationError):
        load_zeros(io.StringIO("15.5\n21.022039638771555\n"))


def test_check_count_beyond_table(zero_table):
    with pytest.raises(TruncationError):
        zero_table.check_count(2001)
    assert zero_table.head(10).count == 10


def test_file_source_missing(tmp_path):
    with pytest.raises(ZeroSourceError):
        FileZeroSource(str(tmp_path / "no_existe.txt")).load()


def test_file_source_reads(tmp_path):
    path = tmp_path / "ceros.txt"
    path.write_text(FIRST_THREE)
    assert FileZeroSource(str(path)).load().count == 3


def test_zero_source_for_dispatch(tmp_path):
    assert isinstance(zero_source_for("https://example.org/zeros.txt"), HttpZeroSource)
    assert isinstance(zero_source_for(str(tmp_path / "z.txt")), FileZeroSource)


@patch("app.core.zeros.time.sleep")
@patch("app.core.zeros.httpx.Client")
def test_http_source_retries_on_503(mock_client, mock_sleep):
    """Un 503 y después la tabla"""
    client = mock_client.return_value.__enter__.return_value
    client.get.side_effect = [
        MagicMock(status_code=503),
        MagicMock(status_code=200, text=FIRST_THREE),
    ]
    table = HttpZeroSource("https://example.org/zeros.txt").load()
    assert table.count == 3
    assert client.get.call_count == 2
    mock_sleep.assert_called()


@patch("app.core.zeros.time.sleep")
@patch("app.core.zeros.httpx.Client")
def test_http_source_network_failure(mock_client, mock_sleep):
    client = mock_client.return_value.__enter__.return_value
    client.get.side_effect = httpx.ConnectError("sin conexión")
    source = HttpZeroSource("https://example.org/zeros.txt")
    with pytest.raises(ZeroSourceError):
        source.load()
    assert client.get.call_count == source.max_retries


@patch("app.core.zeros.time.sleep")
@patch("app.core.zeros.httpx.Client")
def test_http_source_client_error(mock_client, mock_sleep):
    client = mock_client.return_value.__enter__.return_value
    client.get.return_value = MagicMock(status_code=404)
    with pytest.raises(ZeroSourceError):
        HttpZeroSource("https://example.org/zeros.txt").load()


def test_zeta_log_derivative_at_zero(precision):
    assert float(zeta_log_derivative_at_zero(precision)) == pytest.approx(1.8378770664093453)


def test_conjugate_pair_sum_detects_non_real(zero_table, precision):
    with pytest.raises(EngineError):
        conjugate_pair_sum(lambda rho: 1j * rho, zero_table, 5, precision)


def test_zero_power_sum_domain(zero_table, precision):
    with pytest.raises(DomainError):
        zero_power_sum(1, zero_table, 10, precision)
    with pytest.raises(DomainError):
        truncated_psi(2, zero_table, 10, precision)


def test_reciprocal_square_sum(zero_table, precision):
    """Σ 1/|ρ|² sobre todos los ceros = 2 + γ_E − log 4π ≈ 0.0461914"""
    partial = float(reciprocal_square_sum(zero_table, 2000, precision))
    assert 0.045 < partial < 0.0462


def test_truncated_psi_near_chebyshev(zero_table, precision):
    assert abs(float(truncated_psi(100.5, zero_table, 2000, precision)) - chebyshev_psi(100.5)) <= 0.5


def test_truncated_psi_within_explicit_bound(zero_table, precision):
    """|ψ(t) − ψ_K(t)| ≤ 10·(t log²(tγ_K)/γ_K + log t·min(1, t/(γ_K⟨t⟩)))"""
    T = float(zero_table.as_array(2000)[-1])
    for t in (50.5, 100.5, 500.5, 1000.5):
        error = abs(float(truncated_psi(t, zero_table, 2000, precision)) - chebyshev_psi(t))
        assert error <= 10 * explicit_formula_bound(t, T)


def test_truncated_psi_improves_with_more_zeros(zero_table, precision):
    """Error medio en t ∈ {50.5, 100.5, 500.5}: con K = 2000 a lo sumo la mitad que con K = 100"""
    points = (50.5, 100.5, 500.5)

    def mean_error(K):
        errors = [abs(float(truncated_psi(t, zero_table, K, precision)) - chebyshev_psi(t)) for t in points]
        return sum(errors) / len(errors)

    assert mean_error(2000) <= 0.5 * mean_error(100)


def test_truncation_policy_copy():
    policy = TruncationPolicy(zero_count=10)
    assert policy.with_zero_count(50).zero_count == 50
    assert policy.zero_count == 10
    with pytest.raises(Exception):
        TruncationPolicy(zero_count=-1)


def test_from_ordinates_validates():
    with pytest.raises(ZeroValidationError):
        ZeroTable.from_ordinates(["14.134725141734693", "14.0"])
