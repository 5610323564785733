"""
Fórmula explícita para S̃(z) = Σ Λ(m) e^{−mz}: lado directo, lado derecho
término a término y regímenes del término de error E(a, y)
"""

import logging
import math
from statistics import median
from typing import Any, Dict, List, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from app.core.arithmetic import MAX_SIEVE_LIMIT, get_sieve
from app.core.config import settings
from app.core.errors import DomainError, TruncationError
from app.core.precision import PrecisionContext, default_precision, imaginary_sign
from app.core.quadrature import quad, uniform_points
from app.core.special import compensated_gamma_term, exp_integral_ei, log_gamma
from app.core.summation import CompensatedSum, deterministic_sum
from app.core.zeros import (
    TruncationPolicy,
    ZeroTable,
    conjugate_pair_sum,
    zero_power_sum,
    zeta_log_derivative_at_zero,
)

logger = logging.getLogger(__name__)

TERM_NAMES = (
    "main_term",
    "gamma_zero_sum",
    "compensated_zero_sum",
    "zeta_const_term",
    "ei_j1",
    "ei_j2",
    "ei_j3",
    "sgn_terms",
)
REALITY_TOLERANCE = 1e-10
COMPENSATOR_NOTE = "el compensador impreso 2^ρ e^{−z}/ρ se sustituye por 2^ρ e^{−2z}/ρ"


def tail_bound(a: float, M: int) -> float:
    """Cota de Σ_{m>M} Λ(m)e^{−ma} por sumación de Abel con ψ(t) ≤ 2t"""
    return 2.0 * math.exp(-M * a) * (M + 1.0 / a)


def auto_cutoff(a: float, tolerance: Optional[float] = None) -> int:
    """Menor M con tail_bound(a, M) ≤ tolerance"""
    tolerance = tolerance or settings.DIRICHLET_TAIL_TOLERANCE
    if a <= 0:
        raise DomainError(f"se requiere Re(z) > 0, recibido {a}", term="sTildeDirect")
    M = max(2, int(math.ceil(math.log(2.0 / (a * tolerance)) / a)))
    for _ in range(64):
        candidate = max(2, int(math.ceil(math.log(2.0 * (M + 1.0 / a) / tolerance) / a)))
        if candidate == M:
            break
        M = candidate
    while tail_bound(a, M) > tolerance:
        M += 1
    if M > MAX_SIEVE_LIMIT:
        raise TruncationError(f"corte M = {M} fuera de escala para Re(z) = {a}", term="sTildeDirect")
    return M


def s_tilde_direct(
    z,
    M: Optional[int] = None,
    precision: Optional[PrecisionContext] = None,
    tolerance: Optional[float] = None,
):
    """Σ_{m ≤ M} Λ(m) e^{−mz} con cola certificada por tail_bound"""
    precision = precision or default_precision()
    ctx = precision.ctx
    tolerance = tolerance or settings.DIRICHLET_TAIL_TOLERANCE
    z = ctx.convert(z)
    a = float(ctx.re(z))
    if a <= 0:
        raise DomainError(f"se requiere Re(z) > 0, recibido {z}", term="sTildeDirect")
    if M is None:
        M = auto_cutoff(a, tolerance)
    elif tail_bound(a, M) > tolerance:
        raise TruncationError(
            f"corte M = {M} insuficiente: cota de cola {tail_bound(a, M):.3e} > {tolerance:.1e}",
            term="sTildeDirect",
        )
    logger.debug(f"S̃ directa con M = {M}")
    sieve = get_sieve(M)
    powers = sieve.prime_powers[sieve.prime_powers <= M]
    terms = [sieve.log_value(int(q), precision) * ctx.exp(-int(q) * z) for q in powers]
    return deterministic_sum(terms, precision)


def main_term(z, precision: PrecisionContext):
    ctx = precision.ctx
    decay = ctx.exp(-2 * z)
    return 2 * decay + decay / z


def gamma_zero_sum(z, table: ZeroTable, K: int, precision: PrecisionContext):
    """−Σ_ρ Γ(ρ) z^{−ρ}"""
    ctx = precision.ctx
    log_z = ctx.log(z)
    total = conjugate_pair_sum(
        lambda rho: ctx.exp(log_gamma(rho, precision) - rho * log_z),
        table, K, precision, term="gammaZeroSum", reality_tolerance=None,
    )
    return -total


def compensated_zero_sum(z, table: ZeroTable, K: int, precision: PrecisionContext):
    """Σ_ρ (z^{−ρ}γ(ρ, 2z) − 2^ρ e^{−2z}/ρ)"""
    return conjugate_pair_sum(
        lambda rho: compensated_gamma_term(rho, z, precision),
        table, K, precision, term="compensatedZeroSum", reality_tolerance=None,
    )


def ei_groups(z, precision: PrecisionContext) -> Dict[str, Any]:
    """
    Los tres grupos con Ei y los términos con sgn(Im(−z)) separados:
    J₁ = (e^{−z}/2)(Ei(−z) − iπs), J₂ = (e^{z}/2)(−log 3·e^{−3z} + Ei(−3z) − iπs),
    J₃ = log 2·e^{−2z} − Ei(−2z) + iπs
    """
    ctx = precision.ctx
    sign = imaginary_sign(-z)
    j1 = ctx.exp(-z) / 2 * exp_integral_ei(-z, precision)
    j2 = ctx.exp(z) / 2 * (-ctx.log(3) * ctx.exp(-3 * z) + exp_integral_ei(-3 * z, precision))
    j3 = ctx.log(2) * ctx.exp(-2 * z) - exp_integral_ei(-2 * z, precision)
    if sign:
        sgn_terms = ctx.mpc(0, ctx.pi * sign) * (1 - ctx.exp(-z) / 2 - ctx.exp(z) / 2)
    else:
        sgn_terms = ctx.mpc(0)
    return {"ei_j1": j1, "ei_j2": j2, "ei_j3": j3, "sgn_terms": sgn_terms}


def j_groups(z, precision: Optional[PrecisionContext] = None) -> Dict[str, Any]:
    """J₁, J₂, J₃ completos, con su parte iπ·sgn(Im(−z)) reincorporada"""
    precision = precision or default_precision()
    ctx = precision.ctx
    z = ctx.convert(z)
    groups = ei_groups(z, precision)
    jump = ctx.mpc(0, ctx.pi * imaginary_sign(-z))
    return {
        "ei_j1": groups["ei_j1"] - jump * ctx.exp(-z) / 2,
        "ei_j2": groups["ei_j2"] - jump * ctx.exp(z) / 2,
        "ei_j3": groups["ei_j3"] + jump,
    }


class Theorem1Report(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    z: Any
    lhs_direct: Any
    rhs_total: Any
    terms: Dict[str, Any]
    residual: Any
    zero_count: int
    cutoff: int
    tail_bound: float
    policy: TruncationPolicy

    def reality_gap(self) -> Any:
        """max(|Im lhs|, |Im rhs|)/|rhs|, sólo significativo con z real"""
        ctx = self.policy.precision.ctx
        scale = abs(self.rhs_total) or 1
        return max(abs(ctx.im(self.lhs_direct)), abs(ctx.im(self.rhs_total))) / scale


def _check_z(z, precision: PrecisionContext):
    ctx = precision.ctx
    z = ctx.convert(z)
    if ctx.re(z) <= 0:
        raise DomainError(f"se requiere Re(z) > 0, recibido {z}", term="theorem1Rhs")
    return z


def theorem1_terms(z, table: ZeroTable, policy: TruncationPolicy) -> Dict[str, Any]:
    precision = policy.precision
    ctx = precision.ctx
    z = _check_z(z, precision)
    K = policy.check_table(table)
    terms = {
        "main_term": main_term(z, precision),
        "gamma_zero_sum": gamma_zero_sum(z, table, K, precision),
        "compensated_zero_sum": compensated_zero_sum(z, table, K, precision),
        "zeta_const_term": -zeta_log_derivative_at_zero(precision) * ctx.exp(-2 * z),
    }
    terms.update(ei_groups(z, precision))
    return terms


def theorem1_rhs(z, table: ZeroTable, policy: Optional[TruncationPolicy] = None, lhs=None) -> Theorem1Report:
    """Ambos lados de la fórmula explícita con los K primeros pares de ceros"""
    policy = policy or TruncationPolicy()
    precision = policy.precision
    z = _check_z(z, precision)
    a = float(precision.ctx.re(z))
    M = policy.dirichlet_cutoff or auto_cutoff(a, policy.tail_tolerance)

    logger.info(f"🔄 Teorema 1: z = {precision.ctx.nstr(z, 8)}, K = {policy.zero_count}, M = {M}")
    terms = theorem1_terms(z, table, policy)
    rhs = CompensatedSum(precision).extend(terms[name] for name in TERM_NAMES).value
    if lhs is None:
        lhs = s_tilde_direct(z, M, precision, policy.tail_tolerance)
    residual = abs(lhs - rhs)
    logger.info(f"✅ Teorema 1: residuo {precision.ctx.nstr(residual, 5)} con K = {policy.zero_count}")

    return Theorem1Report(
        z=z,
        lhs_direct=lhs,
        rhs_total=rhs,
        terms=terms,
        residual=residual,
        zero_count=policy.zero_count,
        cutoff=M,
        tail_bound=tail_bound(a, M),
        policy=policy,
    )


def theorem1_refinement(z, table: ZeroTable, policy: TruncationPolicy, ladder: Sequence[int]) -> List[Theorem1Report]:
    """Un informe por peldaño de K; el lado directo se calcula una vez"""
    precision = policy.precision
    z = _check_z(z, precision)
    a = float(precision.ctx.re(z))
    M = policy.dirichlet_cutoff or auto_cutoff(a, policy.tail_tolerance)
    lhs = s_tilde_direct(z, M, precision, policy.tail_tolerance)
    reports = []
    for K in ladder:
        rung = policy.model_copy(update={"zero_count": K, "dirichlet_cutoff": M})
        reports.append(theorem1_rhs(z, table, rung, lhs=lhs))
    return reports


def printed_compensator_shift(z, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    """
    Σ_ρ 2^ρ(e^{−z} − e^{−2z})/ρ: lo que resta al lado derecho el compensador
    impreso con e^{−z}
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    z = _check_z(z, precision)
    return (ctx.exp(-z) - ctx.exp(-2 * z)) * zero_power_sum(2, table, K, precision)


def compensator_correction(report: Theorem1Report, table: ZeroTable) -> Dict[str, Any]:
    """Residuo con el compensador impreso frente al adoptado, mismo K y mismo corte M"""
    shift = printed_compensator_shift(report.z, table, report.zero_count, report.policy.precision)
    printed_residual = abs(report.lhs_direct - (report.rhs_total - shift))
    corrected = bool(printed_residual > report.residual)
    if corrected:
        logger.warning(f"⚠️ compensated_zero_sum: {COMPENSATOR_NOTE}")
    return {
        "term": "compensated_zero_sum",
        "note": COMPENSATOR_NOTE,
        "residual": report.residual,
        "printed_residual": printed_residual,
        "corrected": corrected,
    }


def j_group_oracles(z, precision: Optional[PrecisionContext] = None) -> Dict[str, Any]:
    """
    Las integrales que definen los grupos con Ei:
    J₁ = −(z/2)∫_2^∞ log(t−1)e^{−tz}dt, J₂ = −(z/2)∫_2^∞ log(t+1)e^{−tz}dt,
    J₃ = z∫_2^∞ log t·e^{−tz}dt
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    z = ctx.convert(z)
    a, y = float(ctx.re(z)), abs(float(ctx.im(z)))
    cutoff = 2 + (precision.bits * math.log(2) + 20) / a
    width = min(5.0 / a, 2 * math.pi / y) if y else 5.0 / a
    points = [2.0, 3.0] + uniform_points(3.0, cutoff, width)[1:]

    def integral(shift):
        return quad(lambda t: ctx.log(t + shift) * ctx.exp(-t * z), points, precision, term="jGroupOracle")

    return {
        "ei_j1": -z / 2 * integral(-1),
        "ei_j2": -z / 2 * integral(1),
        "ei_j3": z * integral(0),
    }


def error_term_closed(z, precision: Optional[PrecisionContext] = None):
    """E(a,y) = (2 − log 2π)e^{−2z} + J₁ + J₂ + J₃, exacto e independiente de K"""
    precision = precision or default_precision()
    z = _check_z(z, precision)
    ctx = precision.ctx
    groups = ei_groups(z, precision)
    constant = (2 - zeta_log_derivative_at_zero(precision)) * ctx.exp(-2 * z)
    return CompensatedSum(precision).extend([constant, *groups.values()]).value


def error_term_truncated(z, table: ZeroTable, policy: TruncationPolicy):
    """S̃ directa − (e^{−2z}/z − Σ Γ(ρ)z^{−ρ} + Σ compensados) con K ceros"""
    precision = policy.precision
    z = _check_z(z, precision)
    ctx = precision.ctx
    K = policy.check_table(table)
    lhs = s_tilde_direct(z, policy.dirichlet_cutoff, precision, policy.tail_tolerance)
    explicit = (
        ctx.exp(-2 * z) / z
        + gamma_zero_sum(z, table, K, precision)
        + compensated_zero_sum(z, table, K, precision)
    )
    return lhs - explicit


def regime_of(a: float, y: float) -> str:
    if abs(y) <= a:
        return "|y|<=a"
    if abs(y) <= 1:
        return "a<|y|<=1"
    return "|y|>1"


def theorem_bound(a: float, y: float) -> float:
    """Cota del término de error en cada régimen, sin constante"""
    modulus = math.hypot(a, y) ** 0.5
    regime = regime_of(a, y)
    if regime == "|y|<=a":
        return 1 + modulus
    if regime == "a<|y|<=1":
        return 1 + modulus * (1 + math.log(abs(y) / a) ** 2)
    return 1.0


def older_bound(a: float, y: float) -> float:
    """Cota previa, con crecimiento log²(|y|/a) también para |y| > 1"""
    modulus = math.hypot(a, y) ** 0.5
    if abs(y) <= a:
        return 1 + modulus
    return 1 + modulus * (1 + math.log(abs(y) / a) ** 2)


class RegimePoint(BaseModel):
    a: float
    y: float
    regime: str
    error: float
    error_truncated: Optional[float] = None
    truncation_gap: Optional[float] = None
    bound: float
    older_bound: float
    ratio: float
    flagged: bool = False


class RegimeReport(BaseModel):
    points: List[RegimePoint]
    fitted_constants: Dict[str, float]
    slack: float
    baseline: Optional[float] = None
    large_y_maximum: Optional[float] = None
    improvement_holds: Optional[bool] = None

    @property
    def flagged(self) -> List[RegimePoint]:
        return [p for p in self.points if p.flagged]


def error_term_regime_check(
    a_grid: Sequence[float],
    y_grid: Sequence[float],
    table: Optional[ZeroTable] = None,
    policy: Optional[TruncationPolicy] = None,
    include_truncated: bool = False,
) -> RegimeReport:
    """
    |E(a,y)|/cota en cada punto de la malla; la constante de cada régimen
    es la mediana de los cocientes y se marca todo cociente que la supere
    por un factor REGIME_SLACK
    """
    policy = policy or TruncationPolicy()
    precision = policy.precision
    ctx = precision.ctx
    slack = settings.REGIME_SLACK
    points: List[RegimePoint] = []

    for a in a_grid:
        if a <= 0:
            raise DomainError(f"se requiere a > 0, recibido {a}", term="errorTermRegimeCheck")
        for y in y_grid:
            z = ctx.mpc(a, y)
            closed = error_term_closed(z, precision)
            error = float(abs(closed))
            truncated = gap = None
            if include_truncated and table is not None:
                # la diferencia con la forma cerrada es la cola de ceros más allá de K
                value = error_term_truncated(z, table, policy)
                truncated, gap = float(abs(value)), float(abs(value - closed))
            bound = theorem_bound(a, y)
            points.append(RegimePoint(
                a=a, y=y, regime=regime_of(a, y), error=error, error_truncated=truncated, truncation_gap=gap,
                bound=bound, older_bound=older_bound(a, y), ratio=error / bound,
            ))
            logger.info(f"📈 E({a}, {y}) = {error:.6g} ({regime_of(a, y)})")

    fitted = {}
    for regime in ("|y|<=a", "a<|y|<=1", "|y|>1"):
        ratios = [p.ratio for p in points if p.regime == regime]
        if ratios:
            fitted[regime] = median(ratios)
    for point in points:
        point.flagged = point.ratio > slack * fitted[point.regime]
        if point.flagged:
            logger.warning(f"⚠️ E({point.a}, {point.y}): cociente {point.ratio:.3g} > {slack} × {fitted[point.regime]:.3g}")

    small = [p.error / p.older_bound for p in points if abs(p.y) <= 1]
    large = [p.error for p in points if abs(p.y) > 1]
    baseline = max(small) if small else None
    large_max = max(large) if large else None
    holds = None
    if baseline is not None and large_max is not None:
        holds = large_max <= slack * baseline

    return RegimeReport(
        points=points,
        fitted_constants=fitted,
        slack=slack,
        baseline=baseline,
        large_y_maximum=large_max,
        improvement_holds=holds,
    )
