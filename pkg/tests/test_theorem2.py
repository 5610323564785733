from unittest.mock import patch

import mpmath
import pytest

from app.core.arithmetic import cesaro_lhs
from app.core.errors import PreconditionError
from app.core.theorem2 import (
    DoubleSums,
    H_SHIFTS,
    LOG_WEIGHTS,
    V_SHIFTS,
    beta_double_sum_pairwise,
    cesaro_k1_cross_check,
    f_of_n,
    f_of_n_sweep,
    gamma_double_sum_pairwise,
    h_shift_term,
    h_terms,
    log_product_integral,
    s1,
    s2,
    s3,
    s4,
    s5,
    s6,
    s8,
    s9,
    s10,
    shifted_log_moment,
    theorem2_refinement,
    theorem2_rhs,
)
from app.core.zero_field import ZeroSumField
from app.core.zeros import TruncationPolicy


def _quad(ctx, f, a, b):
    return ctx.quad(f, [a, b])


def test_s1_s3_s8_closed_forms(precision):
    ctx = precision.ctx
    assert abs(s1(10, precision) - 132) <= 1e-30
    u = ctx.mpf(20)
    c = ctx.log(2 * ctx.pi)
    assert abs(s3(u, precision) - c * (4 * u - u ** 2)) <= 1e-30
    assert abs(s8(u, precision) - c ** 2 * (u - 4)) <= 1e-30


def test_u_precondition(precision):
    for term in (s1, s3, s4, s8, s9, s10):
        with pytest.raises(PreconditionError):
            term(4, precision)


def test_s4_s9_against_quadrature(precision):
    ctx = precision.ctx
    c = ctx.log(2 * ctx.pi)
    for u in (ctx.mpf(10), ctx.mpf(20), ctx.mpf(50)):
        L = lambda t: ctx.log(1 - 1 / t ** 2)
        assert abs(s4(u, precision) - _quad(ctx, lambda t: -(u - t) * L(t), 2, u - 2)) <= 1e-25
        assert abs(s9(u, precision) - _quad(ctx, lambda t: c * L(t), 2, u - 2)) <= 1e-25


def test_shifted_log_moment_against_quadrature(precision):
    ctx = precision.ctx
    u = ctx.mpf(20)
    for alpha in LOG_WEIGHTS:
        reference = _quad(ctx, lambda t: (u - t) * ctx.log(t + alpha), 2, u - 2)
        assert abs(shifted_log_moment(u, alpha, precision) - reference) <= 1e-25 * max(abs(reference), 1)


def test_log_product_integral_against_quadrature(precision):
    ctx = precision.ctx
    u = ctx.mpf(20)
    for alpha, beta in V_SHIFTS.values():
        reference = _quad(ctx, lambda t: ctx.log(t + alpha) * ctx.log(u - t + beta), 2, u - 2)
        assert abs(log_product_integral(u, alpha, beta, precision) - reference) <= 1e-25 * max(abs(reference), 1)


def test_s10_against_quadrature(precision):
    ctx = precision.ctx
    u = ctx.mpf(10)
    L = lambda t: ctx.log(1 - 1 / t ** 2)
    reference = _quad(ctx, lambda t: L(t) * L(u - t) / 4, 2, u - 2)
    assert abs(s10(u, precision) - reference) <= 1e-25


def test_h_shift_term_against_quadrature(zero_table, precision):
    """(1/ρ)∫_2^{u−2}(u − t)^ρ log(t + α) dt con la forma integrada por partes"""
    ctx = precision.ctx
    u = ctx.mpf(20)
    rho = zero_table.rhos(1, precision)[0]
    points = [2 + (u - 4) * k / 16 for k in range(17)]
    for alpha in H_SHIFTS.values():
        reference = ctx.quad(lambda t: ctx.exp(rho * ctx.log(u - t)) * ctx.log(t + alpha), points) / rho
        assert abs(h_shift_term(u, rho, alpha, precision) - reference) <= 1e-20


def test_s2_s6_against_quadrature_one_zero(zero_table, precision):
    ctx = precision.ctx
    u = ctx.mpf(20)
    rho = zero_table.rhos(1, precision)[0]
    c = ctx.log(2 * ctx.pi)
    points = [2 + (u - 4) * k / 16 for k in range(17)]

    def pair(f):
        return 2 * ctx.re(ctx.quad(f, points))

    reference_s2 = pair(lambda t: -2 * (u - t) * ctx.exp(rho * ctx.log(t)) / rho)
    reference_s6 = pair(lambda t: 2 * c * ctx.exp(rho * ctx.log(t)) / rho)
    assert abs(s2(u, zero_table, 1, precision) - reference_s2) <= 1e-20
    assert abs(s6(u, zero_table, 1, precision) - reference_s6) <= 1e-20


def test_double_sum_backends_agree(zero_table, precision):
    """Par a par (mpmath) frente al campo vectorizado con K = 10"""
    u = 20.0
    gamma_pairwise = gamma_double_sum_pairwise(u, zero_table, 10, precision)
    beta_pairwise = beta_double_sum_pairwise(u, zero_table, 10, precision)
    field = ZeroSumField(zero_table, 10)
    assert abs(float(gamma_pairwise) - field.gamma_double_sum(u)) <= 1e-8 * max(1.0, abs(float(gamma_pairwise)))
    assert abs(float(beta_pairwise) - field.beta_double_sum(u)) <= 1e-8 * max(1.0, abs(float(beta_pairwise)))


def test_s5_equals_convolution_integral(zero_table, precision):
    """G − 2B = ∫_2^{u−2} Z_K(t)Z_K(u − t) dt"""
    policy = TruncationPolicy(zero_count=10, precision=precision)
    double = s5(20, zero_table, policy)
    assert double.backend == "pairwise"
    direct = ZeroSumField(zero_table, 10).integrate_product(20.0, 2.0, 18.0)
    assert abs(float(double.value) - direct) <= 1e-8 * max(1.0, abs(direct))


def test_s5_field_backend_selected(zero_table, precision):
    policy = TruncationPolicy(zero_count=10, precision=precision, pairwise_limit=5)
    assert s5(20, zero_table, policy).backend == "field"


def test_h_terms_backends_agree(zero_table, precision):
    closed = h_terms(20, zero_table, TruncationPolicy(zero_count=10, precision=precision))
    field = h_terms(20, zero_table, TruncationPolicy(zero_count=10, precision=precision, closed_form_limit=5))
    assert closed["backend"] == "closed_form"
    assert field["backend"] == "field"
    for name in H_SHIFTS:
        assert abs(float(closed[name]) - float(field[name])) <= 1e-8 * max(1.0, abs(float(closed[name])))


def test_theorem2_grouping_identity(zero_table, small_policy):
    """Σ s_m y N³/6 − single + dobles + F(N) coinciden"""
    decomposition = theorem2_rhs(20, zero_table, small_policy, lhs=cesaro_lhs(20))
    scale = max(abs(decomposition.main_term), 1)
    assert decomposition.grouping_gap <= 1e-25 * scale
    assert set(decomposition.s) == {f"s{m}" for m in range(1, 11)}
    assert decomposition.backends == {"s5": "pairwise", "s7": "closed_form"}
    assert abs(decomposition.f_of_n - f_of_n(20, zero_table, small_policy)) <= 1e-25 * scale


def test_theorem2_precondition(zero_table, small_policy):
    with pytest.raises(PreconditionError):
        theorem2_rhs(4, zero_table, small_policy)
    with pytest.raises(PreconditionError):
        theorem2_rhs(20.5, zero_table, small_policy)


def test_cesaro_k1_cross_check(zero_table, small_policy):
    report = cesaro_k1_cross_check(20, zero_table, small_policy)
    assert report.main_difference == 0
    assert report.gamma_identity_gap <= 1e-30
    assert report.double_zero_count == 10
    assert report.double_gap <= 1e-20
    assert report.double_sums_identical
    assert abs(report.double_theorem - s5(20, zero_table, small_policy).gamma) <= 1e-30


def test_cesaro_k1_double_sum_capped_at_pairwise_limit(zero_table, small_policy):
    policy = small_policy.model_copy(update={"pairwise_limit": 3})
    report = cesaro_k1_cross_check(20, zero_table, policy)
    assert report.double_zero_count == 3
    assert report.double_sums_identical


def test_cesaro_k1_flags_mismatched_double_sum(zero_table, small_policy, precision):
    """Una suma gamma de s₅ alterada no pasa la comparación"""
    ctx = precision.ctx
    honest = s5(20, zero_table, small_policy)
    skewed = DoubleSums(gamma=honest.gamma + ctx.mpf("1e-6") * max(abs(honest.gamma), 1), beta=honest.beta, backend="pairwise")
    with patch("app.core.theorem2.s5", return_value=skewed):
        report = cesaro_k1_cross_check(20, zero_table, small_policy)
    assert not report.double_sums_identical
    assert report.double_gap > 1e-8


@pytest.mark.slow
@pytest.mark.parametrize("N", [20, 50, 100])
def test_theorem2_refinement_ladder(zero_table, precision, N):
    """Residuo con K = 2000 ≤ ½ del de K = 100, sin crecer más de 1.5× por peldaño"""
    policy = TruncationPolicy(zero_count=2000, precision=precision)
    decompositions = theorem2_refinement(N, zero_table, policy, [100, 500, 2000])
    residuals = [d.residual for d in decompositions]
    assert residuals[-1] <= 0.5 * residuals[0]
    for previous, current in zip(residuals[:-1], residuals[1:]):
        assert current <= 1.5 * previous
    final = decompositions[-1]
    assert final.grouping_gap <= 1e-20 * max(abs(final.main_term), 1)
    assert final.backends == {"s5": "field", "s7": "field"}


@pytest.mark.slow
def test_f_of_n_is_quadratic(zero_table, precision):
    """F(N)/N² acotado en la malla y |F(N)|/N³ estrictamente decreciente"""
    policy = TruncationPolicy(zero_count=2000, precision=precision)
    report = f_of_n_sweep([50, 100, 500, 1000, 5000], zero_table, policy, reference_n=500)
    assert report.bounded
    assert report.cubic_decreasing
    assert [p.N for p in report.points] == [50, 100, 500, 1000, 5000]
