from unittest.mock import patch

import mpmath
import pytest

from app.core.errors import ConvergenceError, DomainError, PoleError
from app.core.special import (
    compensated_gamma_term,
    complete_beta,
    dilog,
    ei_asymptotic_residual,
    exp_integral_ei,
    gamma_complement_residual,
    gamma_recurrence_residual,
    incomplete_beta,
    incomplete_beta_b_zero,
    incomplete_beta_quadrature,
    log_gamma,
    lower_incomplete_gamma,
    upper_incomplete_gamma,
)

RHO1 = mpmath.mpc(0.5, 14.134725141734693)
GAMMA_GRID_A = [mpmath.mpf(2.5), mpmath.mpc(3, 2), RHO1, mpmath.mpc(0.5, -21.022039638771555)]
GAMMA_GRID_Z = [mpmath.mpf(0.2), mpmath.mpc(1, 1), mpmath.mpf(5), mpmath.mpc(0.05, -0.3), mpmath.mpf(30)]


def _relative(value, reference):
    return abs(value - reference) / max(abs(reference), mpmath.mpf(10) ** -300)


def test_log_gamma_real_and_poles(precision):
    assert float(log_gamma(5, precision)) == pytest.approx(mpmath.log(24))
    with pytest.raises(PoleError):
        log_gamma(0, precision)
    with pytest.raises(PoleError):
        log_gamma(-3, precision)


def test_incomplete_gamma_against_mpmath(precision):
    """Γ(a,z) y γ(a,z) frente a mpmath.gammainc a 256 bits"""
    for a in GAMMA_GRID_A:
        for z in GAMMA_GRID_Z:
            with mpmath.workprec(256):
                upper_ref = mpmath.gammainc(a, z)
                lower_ref = mpmath.gammainc(a, 0, z)
            assert _relative(upper_incomplete_gamma(a, z, precision), upper_ref) <= 1e-12
            assert _relative(lower_incomplete_gamma(a, z, precision), lower_ref) <= 1e-12


def test_gamma_identities(precision):
    """Γ(a,z) + γ(a,z) = Γ(a) y Γ(a+1,z) = aΓ(a,z) + z^a e^{−z}"""
    for a in GAMMA_GRID_A:
        for z in GAMMA_GRID_Z:
            assert gamma_complement_residual(a, z, precision) <= 1e-12
            assert gamma_recurrence_residual(a, z, precision) <= 1e-12


def test_lower_incomplete_gamma_domain(precision):
    with pytest.raises(DomainError):
        lower_incomplete_gamma(mpmath.mpc(-0.5, 3), 1, precision)
    assert lower_incomplete_gamma(2, 0, precision) == 0


def test_compensated_gamma_term_against_subtraction(precision):
    """z^{−ρ}γ(ρ,2z) − 2^ρ e^{−2z}/ρ calculado con 256 bits por resta directa"""
    for z in (mpmath.mpf(0.1), mpmath.mpc(0.05, 0.3), mpmath.mpc(0.02, -0.2)):
        for rho in (RHO1, mpmath.conj(RHO1)):
            with mpmath.workprec(256):
                reference = (
                    mpmath.power(z, -rho) * mpmath.gammainc(rho, 0, 2 * z)
                    - mpmath.power(2, rho) * mpmath.exp(-2 * z) / rho
                )
            assert _relative(compensated_gamma_term(rho, z, precision), reference) <= 1e-12


def test_compensated_gamma_term_domain(precision):
    with pytest.raises(DomainError):
        compensated_gamma_term(RHO1, mpmath.mpc(0, 1), precision)
    with pytest.raises(DomainError):
        compensated_gamma_term(mpmath.mpc(1.5, 3), 0.1, precision)


def test_exp_integral_ei_negative_real_is_real(precision):
    value = exp_integral_ei(-1, precision)
    assert mpmath.im(value) == 0
    assert float(value) == pytest.approx(-0.21938393439552029, rel=1e-14)


def test_exp_integral_ei_singular_at_zero(precision):
    with pytest.raises(DomainError):
        exp_integral_ei(0, precision)


def test_ei_asymptotic_first_order(precision):
    """Ei(w) − iπ sgn(Im w) − e^w/w = O(e^w/w²) en el semiplano izquierdo"""
    for w in (mpmath.mpc(-20, 5), mpmath.mpc(-30, -2), mpmath.mpc(-15, 40)):
        result = ei_asymptotic_residual(w, precision)
        assert result["residual"] <= result["bound"]


def test_dilog_values_and_reflection(precision):
    ctx = precision.ctx
    assert abs(dilog(1, precision) - ctx.pi ** 2 / 6) <= 1e-30
    x = ctx.mpf("0.3")
    reflection = dilog(x, precision) + dilog(1 - x, precision) + ctx.log(x) * ctx.log(1 - x)
    assert abs(reflection - ctx.pi ** 2 / 6) <= 1e-12
    with mpmath.workprec(256):
        reference = mpmath.polylog(2, -3)
    assert _relative(dilog(-3, precision), reference) <= 1e-12


def test_dilog_domain(precision):
    with pytest.raises(DomainError):
        dilog(1.5, precision)


def test_complete_beta(precision):
    assert float(complete_beta(2, 3, precision)) == pytest.approx(1 / 12)


def test_incomplete_beta_against_mpmath(precision):
    cases = [
        (0.2, mpmath.mpf(2.5), mpmath.mpf(1.5)),
        (0.9, mpmath.mpf(2.5), mpmath.mpf(1.5)),
        (0.2, RHO1 + 1, mpmath.conj(RHO1) + 1),
        (0.1, RHO1 + 1, RHO1 + 1),
    ]
    for x, a, b in cases:
        with mpmath.workprec(256):
            reference = mpmath.betainc(a, b, 0, x)
        assert _relative(incomplete_beta(x, a, b, precision), reference) <= 1e-10


def test_incomplete_beta_complement(precision):
    """B_x(a,b) + B_{1−x}(b,a) = B(a,b) con x y 1 − x por debajo del umbral"""
    a, b = RHO1 + 1, mpmath.mpc(1.5, 21.022039638771555)
    x = mpmath.mpf("0.3")
    total = incomplete_beta(x, a, b, precision) + incomplete_beta(1 - x, b, a, precision)
    assert _relative(total, complete_beta(a, b, precision)) <= 1e-10


def test_incomplete_beta_quadrature_against_mpmath(precision):
    """Sustitución exponencial, con pico cerca de v = 0 cuando x → 1"""
    cases = [
        (0.2, mpmath.mpf(2.5), mpmath.mpf(1.5)),
        (0.9, mpmath.mpf(2.5), mpmath.mpf(1.5)),
        (0.2, RHO1 + 1, mpmath.conj(RHO1) + 1),
    ]
    for x, a, b in cases:
        with mpmath.workprec(256):
            reference = mpmath.betainc(a, b, 0, x)
        assert _relative(incomplete_beta_quadrature(x, a, b, precision), reference) <= 1e-10


@patch("app.core.special._beta_series", side_effect=ConvergenceError("incompleteBeta", 1, term="incompleteBeta"))
def test_incomplete_beta_falls_back_to_quadrature(mock_series, precision):
    a, b = RHO1 + 1, mpmath.conj(RHO1) + 1
    with mpmath.workprec(256):
        reference = mpmath.betainc(a, b, 0, 0.2)
    value = incomplete_beta(0.2, a, b, precision)
    assert mock_series.called
    assert _relative(value, reference) <= 1e-10


def test_incomplete_beta_b_zero_against_mpmath(precision):
    """Serie directa (x = 0.5) y desarrollo complementario (x = 0.97, 0.995)"""
    a = RHO1 + 2
    for x in (0.1, 0.5, 0.9, 0.97, 0.995):
        with mpmath.workprec(256):
            reference = mpmath.betainc(a, 0, 0, x)
        assert _relative(incomplete_beta_b_zero(x, a, precision), reference) <= 1e-10


def test_incomplete_beta_b_zero_domain(precision):
    a = RHO1 + 2
    with pytest.raises(DomainError):
        incomplete_beta_b_zero(1, a, precision)
    with pytest.raises(DomainError):
        incomplete_beta_b_zero(0.5, mpmath.mpc(-1, 2), precision)
    assert incomplete_beta_b_zero(0, a, precision) == 0
