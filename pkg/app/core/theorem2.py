"""
Promedio de Cesàro Σ_{n ≤ N} r_G(n)(N − n): descomposición en s₁..s₁₀,
sumas simples y dobles sobre ceros, F(N) y comparación con el lado izquierdo
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.core.arithmetic import cesaro_lhs
from app.core.config import settings
from app.core.errors import EngineError, PreconditionError
from app.core.precision import PrecisionContext, default_precision
from app.core.special import dilog, incomplete_beta, incomplete_beta_b_zero, log_gamma
from app.core.summation import CompensatedSum
from app.core.zero_field import ZeroSumField
from app.core.zeros import TruncationPolicy, ZeroTable, conjugate_pair_sum, zeta_log_derivative_at_zero

logger = logging.getLogger(__name__)

# Pesos de log(t+α) en log(1 − t⁻²) = log(t−1) + log(t+1) − 2 log t
LOG_WEIGHTS = {-1: 1, 1: 1, 0: -2}
H_SHIFTS = {"H1": -1, "H2": 1, "H3": 0}
V_SHIFTS = {
    "V1": (-1, -1),
    "V2": (-1, 1),
    "V3": (1, -1),
    "V4": (1, 1),
    "V5": (-1, 0),
    "V6": (1, 0),
    "V7": (0, -1),
    "V8": (0, 1),
    "V9": (0, 0),
}
REALITY_TOLERANCE = 1e-10
K1_DOUBLE_TOLERANCE = 1e-20


def _check_u(u, precision: PrecisionContext, term: str):
    ctx = precision.ctx
    u = ctx.convert(u)
    if u <= 4:
        raise PreconditionError(f"se requiere u > 4, recibido {u}", term=term)
    return u


def _real(value, precision: PrecisionContext, term: str):
    ctx = precision.ctx
    if abs(ctx.im(value)) > REALITY_TOLERANCE * max(abs(ctx.re(value)), 1):
        raise EngineError(f"parte imaginaria residual {ctx.nstr(ctx.im(value), 5)}", term=term)
    return ctx.re(value)


def _power(base, exponent, ctx):
    return ctx.exp(exponent * ctx.log(base))


def s1(u, precision: Optional[PrecisionContext] = None):
    """∫_2^{u−2} t(u − t) dt"""
    precision = precision or default_precision()
    u = _check_u(u, precision, "s1")

    def primitive(t):
        return u * t ** 2 / 2 - t ** 3 / 3

    return primitive(u - 2) - primitive(precision.ctx.mpf(2))


def s2_zero_terms(u, rho, precision: Optional[PrecisionContext] = None) -> Dict[str, Any]:
    """Piezas de −2(1/ρ)∫_2^{u−2}(u − t)t^ρ dt para un solo cero"""
    precision = precision or default_precision()
    ctx = precision.ctx
    top = ctx.convert(u) - 2
    inverse = 1 / (rho * (rho + 1))
    return {
        "leading": -4 * _power(top, rho + 1, ctx) * inverse,
        "boundary": top * _power(2, rho + 2, ctx) * inverse,
        "single": -2 * _power(top, rho + 2, ctx) * inverse / (rho + 2),
        "constant": _power(2, rho + 3, ctx) * inverse / (rho + 2),
    }


def s2_pieces(u, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None) -> Dict[str, Any]:
    """Las cuatro sumas de −2Σ_ρ (1/ρ)∫_2^{u−2}(u − t)t^ρ dt"""
    precision = precision or default_precision()
    u = _check_u(u, precision, "s2")
    return {
        piece: conjugate_pair_sum(
            lambda r, p=piece: s2_zero_terms(u, r, precision)[p], table, K, precision, term="s2"
        )
        for piece in ("leading", "boundary", "single", "constant")
    }


def s2(u, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    precision = precision or default_precision()
    return CompensatedSum(precision).extend(s2_pieces(u, table, K, precision).values()).real


def s3(u, precision: Optional[PrecisionContext] = None):
    """−2 log(2π)∫_2^{u−2} t dt"""
    precision = precision or default_precision()
    u = _check_u(u, precision, "s3")
    return -zeta_log_derivative_at_zero(precision) * ((u - 2) ** 2 - 4)


def shifted_log_moment(u, alpha: int, precision: Optional[PrecisionContext] = None):
    """A(α) = ∫_2^{u−2}(u − t)log(t + α) dt con w = t + α"""
    precision = precision or default_precision()
    ctx = precision.ctx
    u = ctx.convert(u)
    c = u + alpha

    def primitive(w):
        log_w = ctx.log(w)
        return c * (w * log_w - w) - w ** 2 * log_w / 2 + w ** 2 / 4

    return primitive(u - 2 + alpha) - primitive(ctx.mpf(2 + alpha))


def s4(u, precision: Optional[PrecisionContext] = None):
    """−∫_2^{u−2}(u − t)log(1 − t⁻²) dt"""
    precision = precision or default_precision()
    u = _check_u(u, precision, "s4")
    total = CompensatedSum(precision)
    for alpha, weight in LOG_WEIGHTS.items():
        total.add(weight * shifted_log_moment(u, alpha, precision))
    return -total.real


class DoubleSums(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    gamma: Any
    beta: Any
    backend: str

    @property
    def value(self):
        return self.gamma - 2 * self.beta


def _completed_zeros(table: ZeroTable, K: int, precision: PrecisionContext):
    ctx = precision.ctx
    upper = table.rhos(K, precision)
    rhos = upper + [ctx.conj(r) for r in upper]
    heights = [abs(ctx.im(r)) for r in rhos]
    # orden (|γ₁| + |γ₂|, i, j) sobre la truncación cuadrada
    order = sorted(
        ((heights[i] + heights[j], i, j) for i in range(len(rhos)) for j in range(len(rhos))),
        key=lambda item: (item[0], item[1], item[2]),
    )
    return rhos, order


def gamma_double_sum_pairwise(u, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    """Σ_{ρ1,ρ2} u^{ρ1+ρ2+1} Γ(ρ1)Γ(ρ2)/Γ(ρ1+ρ2+2) en espacio logarítmico"""
    precision = precision or default_precision()
    ctx = precision.ctx
    u = _check_u(u, precision, "s5")
    rhos, order = _completed_zeros(table, K, precision)
    log_gammas = [log_gamma(r, precision) for r in rhos]
    log_u = ctx.log(u)
    total = CompensatedSum(precision)
    for _, i, j in order:
        total_rho = rhos[i] + rhos[j]
        total.add(ctx.exp(
            (total_rho + 1) * log_u + log_gammas[i] + log_gammas[j] - log_gamma(total_rho + 2, precision)
        ))
    return _real(total.value, precision, "s5")


def beta_double_sum_pairwise(u, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    """Σ_{ρ1,ρ2} u^{ρ1+ρ2+1} B_{2/u}(ρ1+1, ρ2+1)/(ρ1ρ2)"""
    precision = precision or default_precision()
    ctx = precision.ctx
    u = _check_u(u, precision, "s5")
    rhos, order = _completed_zeros(table, K, precision)
    x = 2 / u
    log_u = ctx.log(u)
    total = CompensatedSum(precision)
    for _, i, j in order:
        r1, r2 = rhos[i], rhos[j]
        scale = ctx.exp((r1 + r2 + 1) * log_u) / (r1 * r2)
        total.add(scale * incomplete_beta(x, r1 + 1, r2 + 1, precision))
    return _real(total.value, precision, "s5")


def s5(u, table: ZeroTable, policy: Optional[TruncationPolicy] = None) -> DoubleSums:
    """
    ∫_2^{u−2} Z_K(t)Z_K(u − t) dt = (suma doble gamma) − 2·(suma doble beta).
    Par a par con mpmath hasta pairwise_limit, vectorizado por encima.
    """
    policy = policy or TruncationPolicy()
    precision = policy.precision
    ctx = precision.ctx
    u = _check_u(u, precision, "s5")
    K = policy.check_table(table)
    if K == 0:
        return DoubleSums(gamma=ctx.mpf(0), beta=ctx.mpf(0), backend="pairwise")
    if K <= policy.pairwise_limit:
        return DoubleSums(
            gamma=gamma_double_sum_pairwise(u, table, K, precision),
            beta=beta_double_sum_pairwise(u, table, K, precision),
            backend="pairwise",
        )
    logger.info(f"🔄 Sumas dobles vectorizadas: {4 * K * K} pares, u = {ctx.nstr(u, 8)}")
    field = ZeroSumField(table, K)
    return DoubleSums(
        gamma=ctx.mpf(field.gamma_double_sum(float(u))),
        beta=ctx.mpf(field.beta_double_sum(float(u))),
        backend="field",
    )


def s6(u, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    """2 log(2π) Σ_ρ (1/ρ)∫_2^{u−2} t^ρ dt"""
    precision = precision or default_precision()
    u = _check_u(u, precision, "s6")
    return conjugate_pair_sum(lambda r: s6_zero_term(u, r, precision), table, K, precision, term="s6")


def s6_zero_term(u, rho, precision: Optional[PrecisionContext] = None):
    """2 log(2π)(u−2)^{ρ+1}/(ρ(ρ+1)) − log(2π)2^{ρ+2}/(ρ(ρ+1))"""
    precision = precision or default_precision()
    ctx = precision.ctx
    c = zeta_log_derivative_at_zero(precision)
    inverse = 1 / (rho * (rho + 1))
    return 2 * c * _power(ctx.convert(u) - 2, rho + 1, ctx) * inverse - c * _power(2, rho + 2, ctx) * inverse


def h_shift_term(u, rho, alpha: int, precision: Optional[PrecisionContext] = None):
    """
    (1/ρ)∫_2^{u−2}(u − t)^ρ log(t + α) dt integrando por partes:
    [(u−2)^{ρ+1}log(2+α) − 2^{ρ+1}log(u−2+α)]/(ρ(ρ+1))
      + (u+α)^{ρ+1}/(ρ(ρ+1))·[B_{(u−2)/(u+α)}(ρ+2,0) − B_{2/(u+α)}(ρ+2,0)]
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    u, rho = ctx.convert(u), ctx.convert(rho)
    inverse = 1 / (rho * (rho + 1))
    boundary = _power(u - 2, rho + 1, ctx) * ctx.log(2 + alpha) - _power(2, rho + 1, ctx) * ctx.log(u - 2 + alpha)
    shifted = u + alpha
    beta_gap = (
        incomplete_beta_b_zero((u - 2) / shifted, rho + 2, precision)
        - incomplete_beta_b_zero(2 / shifted, rho + 2, precision)
    )
    return inverse * (boundary + _power(shifted, rho + 1, ctx) * beta_gap)


def h_zero_terms(u, rho, precision: Optional[PrecisionContext] = None) -> Dict[str, Any]:
    """H₁, H₂, H₃ para un solo cero"""
    precision = precision or default_precision()
    return {name: LOG_WEIGHTS[alpha] * h_shift_term(u, rho, alpha, precision) for name, alpha in H_SHIFTS.items()}


def h_terms(u, table: ZeroTable, policy: Optional[TruncationPolicy] = None) -> Dict[str, Any]:
    """
    H_m = Σ_ρ (peso)·(1/ρ)∫_2^{u−2}(u − t)^ρ log(t + α) dt. Forma cerrada por cero
    hasta closed_form_limit (con B_x(ρ̄,0) = conj B_x(ρ,0)); por encima, integral
    del campo Z_K(u − t) contra log(t + α).
    """
    policy = policy or TruncationPolicy()
    precision = policy.precision
    ctx = precision.ctx
    u = _check_u(u, precision, "s7")
    K = policy.check_table(table)
    if K <= policy.closed_form_limit:
        sums = {name: CompensatedSum(precision) for name in H_SHIFTS}
        for rho in table.rhos(K, precision):
            for name, value in h_zero_terms(u, rho, precision).items():
                sums[name].add(2 * ctx.re(value))
        result = {name: total.real for name, total in sums.items()}
        result["backend"] = "closed_form"
        return result

    field = ZeroSumField(table, K)
    kernels = {name: (lambda t, a=alpha: LOG_WEIGHTS[a] * np.log(t + a)) for name, alpha in H_SHIFTS.items()}
    values = field.integrate_reflected(float(u), 2.0, float(u) - 2.0, kernels)
    result = {name: ctx.mpf(value) for name, value in values.items()}
    result["backend"] = "field"
    return result


def s7(u, table: ZeroTable, policy: Optional[TruncationPolicy] = None):
    """H₁ + H₂ + H₃ = ∫_2^{u−2} Z_K(u − t) log(1 − t⁻²) dt"""
    policy = policy or TruncationPolicy()
    terms = h_terms(u, table, policy)
    return CompensatedSum(policy.precision).extend(terms[name] for name in H_SHIFTS).real


def s8(u, precision: Optional[PrecisionContext] = None):
    precision = precision or default_precision()
    u = _check_u(u, precision, "s8")
    return zeta_log_derivative_at_zero(precision) ** 2 * (u - 4)


def s9(u, precision: Optional[PrecisionContext] = None):
    """log(2π)∫_2^{u−2} log(1 − t⁻²) dt con la primitiva w log w − w"""
    precision = precision or default_precision()
    ctx = precision.ctx
    u = _check_u(u, precision, "s9")

    def primitive(w):
        return w * ctx.log(w) - w

    total = CompensatedSum(precision)
    for alpha, weight in LOG_WEIGHTS.items():
        total.add(weight * (primitive(u - 2 + alpha) - primitive(ctx.mpf(2 + alpha))))
    return zeta_log_derivative_at_zero(precision) * total.real


def log_product_integral(u, alpha: int, beta: int, precision: Optional[PrecisionContext] = None):
    """
    I(α,β) = ∫_2^{u−2} log(t+α) log(u−t+β) dt con t + α = D·s, D = u+α+β:
    D[log²D·Δs + log D·ΔG₁ + ΔF]
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    u = _check_u(u, precision, "s10")
    D = u + alpha + beta
    lower, upper = (2 + alpha) / D, (u - 2 + alpha) / D

    def g1(s):
        return s * ctx.log(s) - (1 - s) * ctx.log(1 - s) - 2 * s

    def f(s):
        log_s, log_c = ctx.log(s), ctx.log(1 - s)
        return s * log_s * log_c + (1 - s) * log_c - s * log_s + 2 * s + dilog(1 - s, precision)

    log_d = ctx.log(D)
    return D * (log_d ** 2 * (upper - lower) + log_d * (g1(upper) - g1(lower)) + f(upper) - f(lower))


def v_terms(u, precision: Optional[PrecisionContext] = None) -> Dict[str, Any]:
    """V₁..V₉: los productos de logaritmos de ¼∫ log(1 − t⁻²) log(1 − (u−t)⁻²)"""
    precision = precision or default_precision()
    return {
        name: LOG_WEIGHTS[alpha] * LOG_WEIGHTS[beta] * log_product_integral(u, alpha, beta, precision) / 4
        for name, (alpha, beta) in V_SHIFTS.items()
    }


def s10(u, precision: Optional[PrecisionContext] = None):
    precision = precision or default_precision()
    return CompensatedSum(precision).extend(v_terms(u, precision).values()).real


class CesaroDecomposition(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    u: Any
    zero_count: int
    s: Dict[str, Any]
    s2_pieces: Dict[str, Any]
    double_gamma_sum: Any
    double_beta_sum: Any
    H: Dict[str, Any]
    V: Dict[str, Any]
    main_term: Any
    single_zero_sum: Any
    f_of_n: Any
    rhs_total: Any
    grouped_total: Any
    backends: Dict[str, str]
    lhs: Optional[float] = None
    residual: Optional[Any] = None

    @property
    def grouping_gap(self):
        return abs(self.rhs_total - self.grouped_total)


def f_of_n_pieces(N, table: ZeroTable, policy: TruncationPolicy) -> Dict[str, Any]:
    """Todo lo que no es N³/6, la suma simple ni las sumas dobles"""
    precision = policy.precision
    ctx = precision.ctx
    u = _check_u(N, precision, "fOfN")
    K = policy.check_table(table)
    pieces_s2 = s2_pieces(u, table, K, precision)
    h = h_terms(u, table, policy)
    v = v_terms(u, precision)
    return {
        "s1_rest": (32 - 24 * u) / 6,
        "s2_rest": CompensatedSum(precision).extend(
            [pieces_s2["leading"], pieces_s2["boundary"], pieces_s2["constant"]]
        ).real,
        "s3": s3(u, precision),
        "s4": s4(u, precision),
        "s6": s6(u, table, K, precision),
        "s7": CompensatedSum(precision).extend(h[name] for name in H_SHIFTS).real,
        "s8": s8(u, precision),
        "s9": s9(u, precision),
        "s10": CompensatedSum(precision).extend(v.values()).real,
        "_s2_pieces": pieces_s2,
        "_H": h,
        "_V": v,
        "_u": ctx.convert(u),
    }


def _f_value(pieces: Dict[str, Any], precision: PrecisionContext):
    return CompensatedSum(precision).extend(
        value for name, value in pieces.items() if not name.startswith("_")
    ).real


def f_of_n(N, table: ZeroTable, policy: Optional[TruncationPolicy] = None):
    policy = policy or TruncationPolicy()
    return _f_value(f_of_n_pieces(N, table, policy), policy.precision)


def theorem2_rhs(N: int, table: ZeroTable, policy: Optional[TruncationPolicy] = None, lhs: Optional[float] = None) -> CesaroDecomposition:
    """Lado derecho completo en u = N, en la agrupación s₁..s₁₀ y en la del enunciado"""
    policy = policy or TruncationPolicy()
    precision = policy.precision
    ctx = precision.ctx
    if int(N) != N or N <= 4:
        raise PreconditionError(f"se requiere N > 4 natural, recibido {N}", term="theorem2Rhs")
    N = int(N)
    K = policy.check_table(table)
    logger.info(f"🔄 Teorema 2: N = {N}, K = {K}")

    pieces = f_of_n_pieces(N, table, policy)
    u = pieces["_u"]
    double = s5(u, table, policy)
    pieces_s2 = pieces["_s2_pieces"]
    h = pieces["_H"]

    s_values = {
        "s1": s1(u, precision),
        "s2": CompensatedSum(precision).extend(pieces_s2.values()).real,
        "s3": pieces["s3"],
        "s4": pieces["s4"],
        "s5": double.value,
        "s6": pieces["s6"],
        "s7": pieces["s7"],
        "s8": pieces["s8"],
        "s9": pieces["s9"],
        "s10": pieces["s10"],
    }

    expanded = [s_values["s1"], *pieces_s2.values(), double.gamma, -2 * double.beta]
    expanded += [s_values[name] for name in ("s3", "s4", "s6", "s7", "s8", "s9", "s10")]
    rhs_total = CompensatedSum(precision).extend(expanded).real

    main = ctx.mpf(N) ** 3 / 6
    f_value = _f_value(pieces, precision)
    grouped = CompensatedSum(precision).extend(
        [main, pieces_s2["single"], double.gamma, -2 * double.beta, f_value]
    ).real

    residual = None
    if lhs is not None:
        residual = abs(ctx.mpf(lhs) - rhs_total)
        logger.info(f"✅ Teorema 2: residuo {ctx.nstr(residual, 5)} con K = {K}")

    return CesaroDecomposition(
        u=u,
        zero_count=K,
        s=s_values,
        s2_pieces=pieces_s2,
        double_gamma_sum=double.gamma,
        double_beta_sum=double.beta,
        H={name: h[name] for name in H_SHIFTS},
        V=pieces["_V"],
        main_term=main,
        single_zero_sum=pieces_s2["single"],
        f_of_n=f_value,
        rhs_total=rhs_total,
        grouped_total=grouped,
        backends={"s5": double.backend, "s7": h["backend"]},
        lhs=lhs,
        residual=residual,
    )


def theorem2_refinement(N: int, table: ZeroTable, policy: TruncationPolicy, ladder: Sequence[int]) -> List[CesaroDecomposition]:
    """Un peldaño por K con el lado izquierdo por fuerza bruta"""
    lhs = cesaro_lhs(int(N))
    return [theorem2_rhs(N, table, policy.with_zero_count(K), lhs=lhs) for K in ladder]


class FSweepPoint(BaseModel):
    N: int
    f_of_n: float
    ratio_n2: float
    ratio_n3: float
    term_ratios: Dict[str, float]


class FSweepReport(BaseModel):
    points: List[FSweepPoint]
    reference_n: int
    max_ratio: float
    bounded: bool
    cubic_decreasing: bool
    term_bounded: Dict[str, bool]


def f_of_n_sweep(N_grid: Sequence[int], table: ZeroTable, policy: Optional[TruncationPolicy] = None, reference_n: int = 500) -> FSweepReport:
    """
    F(N)/N² sobre la malla. Acotación: max |F|/N² ≤ 2·|F(N_ref)|/N_ref²;
    decrecimiento estricto de |F|/N³; cada s_m ≪ N² por separado.
    """
    policy = policy or TruncationPolicy()
    precision = policy.precision
    grid = sorted({int(N) for N in N_grid})
    points = []
    for N in grid:
        pieces = f_of_n_pieces(N, table, policy)
        value = float(_f_value(pieces, precision))
        square = float(N) ** 2
        ratios = {name: abs(float(pieces[name])) / square for name in ("s4", "s6", "s7", "s9", "s10")}
        points.append(FSweepPoint(
            N=N, f_of_n=value, ratio_n2=value / square, ratio_n3=value / (square * N), term_ratios=ratios,
        ))
        logger.info(f"📈 F({N})/N² = {value / square:.6g}")

    if reference_n not in grid:
        reference_n = grid[len(grid) // 2]
    reference = next(abs(p.ratio_n2) for p in points if p.N == reference_n)
    max_ratio = max(abs(p.ratio_n2) for p in points)
    cubic = [abs(p.ratio_n3) for p in points]
    slack = settings.REGIME_SLACK
    term_bounded = {
        name: max(p.term_ratios[name] for p in points) <= slack * max(points[0].term_ratios[name], 1e-300)
        for name in points[0].term_ratios
    }
    return FSweepReport(
        points=points,
        reference_n=reference_n,
        max_ratio=max_ratio,
        bounded=max_ratio <= 2 * reference,
        cubic_decreasing=all(b < a for a, b in zip(cubic[:-1], cubic[1:])),
        term_bounded=term_bounded,
    )


class CesaroK1Report(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    N: int
    main_difference: Any
    single_reference: Any
    single_theorem: Any
    single_difference: Any
    difference_over_n2: Any
    gamma_identity_gap: Any
    double_zero_count: int
    double_reference: Any
    double_theorem: Any
    double_gap: Any
    beta_remainder: Any
    double_sums_identical: bool


def _k1_double_sum(u, table: ZeroTable, K: int, precision: PrecisionContext):
    """Σ_{ρ1,ρ2} Γ(ρ1)Γ(ρ2)/Γ(ρ1+ρ2+2)·u^{ρ1+ρ2+1} con Γ directa, en orden de índices"""
    ctx = precision.ctx
    upper = table.rhos(K, precision)
    rhos = upper + [ctx.conj(r) for r in upper]
    gammas = [ctx.gamma(r) for r in rhos]
    total = CompensatedSum(precision)
    for r1, g1 in zip(rhos, gammas):
        for r2, g2 in zip(rhos, gammas):
            total.add(g1 * g2 / ctx.gamma(r1 + r2 + 2) * _power(u, r1 + r2 + 1, ctx))
    return _real(total.value, precision, "cesaroK1CrossCheck")


def cesaro_k1_cross_check(N: int, table: ZeroTable, policy: Optional[TruncationPolicy] = None) -> CesaroK1Report:
    """
    Caso k = 1 de la fórmula general de Cesàro frente a la agrupación del
    enunciado: mismos términos principales y sumas dobles; las sumas simples
    difieren en Σ (N^{ρ+2} − (N−2)^{ρ+2})/(ρ(ρ+1)(ρ+2)) = O(N²).
    """
    policy = policy or TruncationPolicy()
    precision = policy.precision
    ctx = precision.ctx
    if N <= 4:
        raise PreconditionError(f"se requiere N > 4, recibido {N}", term="cesaroK1CrossCheck")
    K = policy.check_table(table)
    u = ctx.mpf(N)
    log_u = ctx.log(u)

    main_reference = u ** 3 / ctx.gamma(4)
    main_theorem = u ** 3 / 6
    reference = -2 * conjugate_pair_sum(
        lambda r: ctx.exp(log_gamma(r, precision) - log_gamma(r + 3, precision) + (r + 2) * log_u),
        table, K, precision, term="cesaroK1",
    )
    theorem = -2 * conjugate_pair_sum(
        lambda r: _power(u - 2, r + 2, ctx) / (r * (r + 1) * (r + 2)), table, K, precision, term="cesaroK1",
    )
    gap = max(
        (abs(ctx.exp(log_gamma(r, precision) - log_gamma(r + 3, precision)) - 1 / (r * (r + 1) * (r + 2)))
         for r in table.rhos(K, precision)),
        default=ctx.mpf(0),
    )
    difference = reference - theorem

    # la suma doble de k = 1 es la suma gamma de s₅; la beta sólo aparece en la agrupación
    double_K = min(K, policy.pairwise_limit)
    double_reference = _k1_double_sum(u, table, double_K, precision)
    double = s5(u, table, policy.with_zero_count(double_K))
    double_gap = abs(double_reference - double.gamma) / max(abs(double_reference), 1)
    identical = bool(double_gap <= K1_DOUBLE_TOLERANCE)
    if not identical:
        logger.warning(f"⚠️ Suma doble k = 1 y suma gamma de s₅ difieren en {ctx.nstr(double_gap, 5)} (K = {double_K})")

    return CesaroK1Report(
        N=N,
        main_difference=main_reference - main_theorem,
        single_reference=reference,
        single_theorem=theorem,
        single_difference=difference,
        difference_over_n2=difference / u ** 2,
        gamma_identity_gap=gap,
        double_zero_count=double_K,
        double_reference=double_reference,
        double_theorem=double.gamma,
        double_gap=double_gap,
        beta_remainder=-2 * double.beta,
        double_sums_identical=identical,
    )
