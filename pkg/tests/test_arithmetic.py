import math

import pytest

from app.core.arithmetic import (
    GoldbachCounts,
    LambdaSieve,
    cesaro_lhs,
    chebyshev_psi,
    chebyshev_psi_exact,
    cumulative_goldbach,
    goldbach_r,
    nearest_prime_power_distance,
    psi_convolution_oracle,
    von_mangoldt,
)
from app.core.errors import DomainError, PreconditionError


def test_von_mangoldt_values():
    """Λ en primos, potencias de primos y compuestos"""
    assert von_mangoldt(1) == 0.0
    assert von_mangoldt(2) == pytest.approx(math.log(2))
    assert von_mangoldt(8) == pytest.approx(math.log(2))
    assert von_mangoldt(9) == pytest.approx(math.log(3))
    assert von_mangoldt(6) == 0.0
    assert von_mangoldt(97) == pytest.approx(math.log(97))


def test_von_mangoldt_rejects_zero():
    with pytest.raises(DomainError):
        von_mangoldt(0)


def test_chebyshev_psi_is_log_lcm():
    """ψ(n) = log mcm(1..n)"""
    for n in (10, 30, 100):
        assert chebyshev_psi(n) == pytest.approx(math.log(math.lcm(*range(1, n + 1))), rel=1e-12)
    assert chebyshev_psi(1.5) == 0.0
    assert chebyshev_psi(10.9) == chebyshev_psi(10)


def test_chebyshev_psi_exact_matches_float(precision):
    assert float(chebyshev_psi_exact(100.5, precision)) == pytest.approx(chebyshev_psi(100.5), rel=1e-13)


def test_chebyshev_psi_rejects_negative():
    with pytest.raises(DomainError):
        chebyshev_psi(-1)


def test_sieve_rejects_nonpositive_limit():
    with pytest.raises(DomainError):
        LambdaSieve(0)


def test_goldbach_small_values():
    """r_G(4) = log²2, r_G(5) = 2 log 2 log 3"""
    assert goldbach_r(1) == 0.0
    assert goldbach_r(4) == pytest.approx(math.log(2) ** 2)
    assert goldbach_r(5) == pytest.approx(2 * math.log(2) * math.log(3))


def test_goldbach_convolution_matches_pair_loop():
    counts = GoldbachCounts(200)
    for n in range(1, 201):
        assert counts[n] == pytest.approx(goldbach_r(n), rel=1e-12, abs=1e-12)


def test_cumulative_goldbach_both_loops():
    assert GoldbachCounts(150).cumulative() == pytest.approx(cumulative_goldbach(150), rel=1e-12)


def test_cesaro_lhs_matches_convolution_oracle():
    """Σ r_G(n)(N − n) = ∫_2^{N−2} ψ(t)ψ(N − t) dt para 5 ≤ N ≤ 500"""
    for N in range(5, 501):
        lhs = cesaro_lhs(N)
        assert abs(lhs - psi_convolution_oracle(N)) <= 1e-10 * max(abs(lhs), 1)


def test_cesaro_lhs_small_values():
    """N = 5: sólo los pares (2,2) y (2,3), (3,2) con N − n ≥ 0"""
    log2, log3 = math.log(2), math.log(3)
    assert cesaro_lhs(5) == pytest.approx(log2 ** 2)
    assert cesaro_lhs(6) == pytest.approx(2 * log2 ** 2 + 2 * log2 * log3)


def test_cesaro_lhs_precondition():
    with pytest.raises(PreconditionError):
        cesaro_lhs(3)
    with pytest.raises(PreconditionError):
        psi_convolution_oracle(4)


def test_nearest_prime_power_distance():
    assert nearest_prime_power_distance(10.5) == pytest.approx(0.5)
    assert nearest_prime_power_distance(8) == 0.0
    assert nearest_prime_power_distance(25.25) == pytest.approx(0.25)
