"""
Funciones especiales con argumento y parámetro complejos:
log-gamma, gamma incompleta superior/inferior, término gamma compensado,
integral exponencial, dilogaritmo y Beta incompleta (incluido b = 0).
"""

import logging
import math
from typing import Dict, Optional

from app.core.errors import ConvergenceError, DomainError, PoleError
from app.core.precision import PrecisionContext, check_finite, default_precision, imaginary_sign
from app.core.quadrature import geometric_points, quad, uniform_points

logger = logging.getLogger(__name__)

LN2 = math.log(2)
GUARD_BITS = 10

# Cambio entre serie directa y desarrollo complementario de B_x(a, 0)
B_ZERO_COMPLEMENT_GAP = 0.05
# Umbral para usar B(a,b) − B_{1−x}(b,a) cuando Re(b) > 0
BETA_COMPLEMENT_X = 0.75


def _is_nonpositive_integer(ctx, a) -> bool:
    return ctx.im(a) == 0 and ctx.re(a) <= 0 and ctx.re(a) == ctx.floor(ctx.re(a))


def _boost_bits(growth: float) -> int:
    """Bits extra para absorber una cancelación de tamaño e^growth"""
    return GUARD_BITS + max(0, int(math.ceil(float(growth) / LN2)))


def _finish(value, precision: PrecisionContext, term: str):
    """Redondea a la precisión del llamador y comprueba finitud"""
    value = +precision.ctx.convert(value)
    return check_finite(value, precision, term)


def log_gamma(a, precision: Optional[PrecisionContext] = None):
    """Rama principal de log Γ(a)"""
    precision = precision or default_precision()
    ctx = precision.ctx
    a = ctx.convert(a)
    if _is_nonpositive_integer(ctx, a):
        raise PoleError(f"Γ tiene un polo en {a}", term="logGamma")
    return _finish(ctx.loggamma(a), precision, "logGamma")


def _kummer_sum(a, z, precision: PrecisionContext, start: int = 0, operation: str = "kummer"):
    """Σ_{n ≥ start} z^n / (a(a+1)…(a+n))"""
    ctx = precision.ctx
    term = 1 / a
    for n in range(1, start + 1):
        term = term * z / (a + n)
    total = term
    bound = abs(z)
    n = start
    while True:
        n += 1
        if n - start > precision.max_terms:
            raise ConvergenceError(operation, precision.max_terms)
        term = term * z / (a + n)
        total += term
        if abs(a + n) > bound and abs(term) <= precision.tolerance * abs(total):
            return total


def _lower_kummer(a, z, precision: PrecisionContext):
    """γ(a,z) = z^a e^{−z} Σ z^n/(a)_{n+1}"""
    hi = precision.boosted(_boost_bits(abs(z) - precision.ctx.re(z)))
    ctx = hi.ctx
    a, z = ctx.convert(a), ctx.convert(z)
    series = _kummer_sum(a, z, hi, operation="lowerIncompleteGamma")
    return ctx.exp(a * ctx.log(z) - z) * series


def _upper_continued_fraction(a, z, precision: PrecisionContext):
    """Γ(a,z) por la fracción continua de Legendre evaluada con Lentz modificado"""
    hi = precision.boosted(GUARD_BITS)
    ctx = hi.ctx
    a, z = ctx.convert(a), ctx.convert(z)
    tiny = ctx.mpf(2) ** (-4 * hi.bits)
    b = z + 1 - a
    c = 1 / tiny
    d = 1 / b if b != 0 else 1 / tiny
    h = d
    for i in range(1, hi.max_terms + 1):
        an = -i * (i - a)
        b += 2
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1 / d
        delta = d * c
        h *= delta
        if abs(delta - 1) <= hi.tolerance:
            return ctx.exp(a * ctx.log(z) - z) * h
    raise ConvergenceError("upperIncompleteGamma (fracción continua)", hi.max_terms)


def _use_series(ctx, a, z) -> bool:
    return abs(z) <= max(1, abs(a))


def upper_incomplete_gamma(a, z, precision: Optional[PrecisionContext] = None):
    """Γ(a,z) = ∫_z^∞ t^{a−1} e^{−t} dt"""
    precision = precision or default_precision()
    ctx = precision.ctx
    a, z = ctx.convert(a), ctx.convert(z)
    if z == 0:
        if ctx.re(a) <= 0:
            raise DomainError("Γ(a, 0) diverge para Re(a) ≤ 0", term="upperIncompleteGamma")
        return _finish(ctx.gamma(a), precision, "upperIncompleteGamma")
    if _use_series(ctx, a, z):
        if _is_nonpositive_integer(ctx, a):
            raise PoleError(f"Γ tiene un polo en {a}", term="upperIncompleteGamma")
        hi = precision.boosted(GUARD_BITS)
        value = hi.ctx.gamma(hi.ctx.convert(a)) - _lower_kummer(a, z, hi)
    else:
        value = _upper_continued_fraction(a, z, precision)
    return _finish(value, precision, "upperIncompleteGamma")


def lower_incomplete_gamma(a, z, precision: Optional[PrecisionContext] = None):
    """γ(a,z) = ∫_0^z t^{a−1} e^{−t} dt por el segmento 0 → z"""
    precision = precision or default_precision()
    ctx = precision.ctx
    a, z = ctx.convert(a), ctx.convert(z)
    if ctx.re(a) <= 0:
        raise DomainError(f"γ(a,z) requiere Re(a) > 0, recibido {a}", term="lowerIncompleteGamma")
    if z == 0:
        return ctx.mpf(0)
    if _use_series(ctx, a, z):
        value = _lower_kummer(a, z, precision)
    else:
        hi = precision.boosted(GUARD_BITS)
        value = hi.ctx.gamma(hi.ctx.convert(a)) - _upper_continued_fraction(a, z, hi)
    return _finish(value, precision, "lowerIncompleteGamma")


def compensated_gamma_term(rho, z, precision: Optional[PrecisionContext] = None):
    """
    z^{−ρ}γ(ρ,2z) − 2^ρ e^{−2z}/ρ sin restar cantidades casi iguales:
    2^ρ e^{−2z} Σ_{n≥1} (2z)^n / (ρ(ρ+1)…(ρ+n))
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    rho, z = ctx.convert(rho), ctx.convert(z)
    if ctx.re(z) <= 0:
        raise DomainError(f"se requiere Re(z) > 0, recibido {z}", term="compensatedGammaTerm")
    if not 0 < ctx.re(rho) < 1:
        raise DomainError(f"se requiere 0 < Re(ρ) < 1, recibido {rho}", term="compensatedGammaTerm")
    w = 2 * z
    hi = precision.boosted(_boost_bits(abs(w) - ctx.re(w)))
    hctx = hi.ctx
    rho_h, w_h = hctx.convert(rho), hctx.convert(w)
    series = _kummer_sum(rho_h, w_h, hi, start=1, operation="compensatedGammaTerm")
    value = hctx.exp(rho_h * hctx.ln2 - w_h) * series
    return _finish(value, precision, "compensatedGammaTerm")


def exp_integral_ei(z, precision: Optional[PrecisionContext] = None):
    """Ei(z) = −∫_{−z}^∞ e^{−t}/t dt; valor principal real en el eje real negativo"""
    precision = precision or default_precision()
    ctx = precision.ctx
    z = ctx.convert(z)
    if z == 0:
        raise DomainError("Ei tiene una singularidad logarítmica en 0", term="expIntegralEi")
    if ctx.im(z) == 0:
        z = ctx.re(z)
    return _finish(ctx.ei(z), precision, "expIntegralEi")


def ei_asymptotic_residual(w, precision: Optional[PrecisionContext] = None) -> Dict[str, object]:
    """|Ei(w) − iπ sgn(Im w) − e^w/w| y la cota 2|e^w/w²|"""
    precision = precision or default_precision()
    ctx = precision.ctx
    w = ctx.convert(w)
    leading = ctx.exp(w) / w
    residual = abs(exp_integral_ei(w, precision) - ctx.mpc(0, ctx.pi * imaginary_sign(w)) - leading)
    return {"residual": residual, "bound": 2 * abs(leading / w)}


def dilog(x, precision: Optional[PrecisionContext] = None):
    """Li₂(x) para x ≤ 1 real, con inversión para x < −1"""
    precision = precision or default_precision()
    ctx = precision.ctx
    x = ctx.convert(x)
    if ctx.im(x) != 0:
        raise DomainError(f"Li₂ se evalúa en reales, recibido {x}", term="dilog")
    x = ctx.re(x)
    if x > 1:
        raise DomainError(f"Li₂ requiere x ≤ 1, recibido {x}", term="dilog")
    if x < -1:
        value = -ctx.pi ** 2 / 6 - ctx.log(-x) ** 2 / 2 - ctx.polylog(2, 1 / x)
    else:
        value = ctx.polylog(2, x)
    return _finish(ctx.re(value), precision, "dilog")


def complete_beta(a, b, precision: Optional[PrecisionContext] = None):
    """B(a,b) = Γ(a)Γ(b)/Γ(a+b) formado en espacio logarítmico"""
    precision = precision or default_precision()
    ctx = precision.ctx
    a, b = ctx.convert(a), ctx.convert(b)
    value = ctx.exp(log_gamma(a, precision) + log_gamma(b, precision) - log_gamma(a + b, precision))
    return _finish(value, precision, "completeBeta")


def _check_beta_x(ctx, x, term: str):
    x = ctx.convert(x)
    if ctx.im(x) != 0:
        raise DomainError(f"x debe ser real, recibido {x}", term=term)
    return ctx.re(x)


def _beta_series(x, a, b, precision: PrecisionContext):
    """x^a Σ_{n≥0} ((1−b)_n/n!) x^n/(a+n)"""
    ctx = precision.ctx
    growth = abs(1 - b) * -math.log1p(-float(x))
    hi = precision.boosted(_boost_bits(growth))
    hctx = hi.ctx
    x, a, b = hctx.convert(x), hctx.convert(a), hctx.convert(b)
    coefficient = hctx.mpf(1)
    power = hctx.mpf(1)
    total = 1 / a
    bound = abs(b)
    for n in range(1, hi.max_terms + 1):
        coefficient = coefficient * (n - b) / n
        power *= x
        term = coefficient * power / (a + n)
        total += term
        if n > bound and abs(term) <= hi.tolerance * abs(total):
            return hctx.exp(a * hctx.log(x)) * total
    raise ConvergenceError("incompleteBeta", hi.max_terms, term="incompleteBeta")


def incomplete_beta_quadrature(x, a, b, precision: Optional[PrecisionContext] = None):
    """
    B_x(a,b) por cuadratura con s = x·e^{−v}: el integrando
    x^a e^{−av}(1 − x e^{−v})^{b−1} decae como e^{−Re(a)v}.
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    x, a, b = ctx.convert(x), ctx.convert(a), ctx.convert(b)
    decay = float(ctx.re(a))
    cutoff = (precision.bits * LN2 + 10) / decay
    period = 2 * math.pi / max(1.0, abs(float(ctx.im(a))))
    gap = 1 - float(x)
    points = [0.0]
    if gap < 0.5:
        # zona de pico de (1 − x e^{−v})^{b−1} cerca de v = 0
        points += geometric_points(max(gap, 1e-300) / 4, min(1.0, cutoff), 2.0)[:-1]
    points += uniform_points(points[-1] if len(points) > 1 else 0.0, cutoff, period)[1:]
    points = sorted(set(points))
    xa = ctx.exp(a * ctx.log(x))

    def integrand(v):
        return xa * ctx.exp(-a * v) * (1 - x * ctx.exp(-v)) ** (b - 1)

    return quad(integrand, points, precision, term="incompleteBeta")


def incomplete_beta(x, a, b, precision: Optional[PrecisionContext] = None):
    """B_x(a,b) = ∫_0^x s^{a−1}(1−s)^{b−1} ds"""
    precision = precision or default_precision()
    ctx = precision.ctx
    x = _check_beta_x(ctx, x, "incompleteBeta")
    a, b = ctx.convert(a), ctx.convert(b)
    if not 0 < x < 1:
        raise DomainError(f"B_x requiere x ∈ (0,1), recibido {x}", term="incompleteBeta")
    if ctx.re(a) <= 0:
        raise DomainError(f"B_x requiere Re(a) > 0, recibido {a}", term="incompleteBeta")
    try:
        if ctx.re(b) > 0 and x > BETA_COMPLEMENT_X:
            value = complete_beta(a, b, precision) - _beta_series(1 - x, b, a, precision)
        else:
            value = _beta_series(x, a, b, precision)
    except ConvergenceError as exc:
        logger.warning(f"⚠️ {exc}; usando cuadratura")
        value = incomplete_beta_quadrature(x, a, b, precision)
    return _finish(value, precision, "incompleteBeta")


def _b_zero_direct(x, a, precision: PrecisionContext):
    """Σ_{n≥0} x^{a+n}/(a+n)"""
    ctx = precision.ctx
    power = ctx.mpf(1)
    total = 1 / a
    for n in range(1, precision.max_terms + 1):
        power *= x
        term = power / (a + n)
        total += term
        if abs(term) <= precision.tolerance * abs(total):
            return ctx.exp(a * ctx.log(x)) * total
    raise ConvergenceError("incompleteBetaBZero", precision.max_terms, term="incompleteBetaBZero")


def _b_zero_complement(x, a, precision: PrecisionContext):
    """
    −log(1−x) − ψ(a) − γ_E − Σ_{n≥1} (1−a)_n ε^n/(n·n!), ε = 1 − x
    """
    ctx = precision.ctx
    epsilon = 1 - ctx.convert(x)
    growth = abs(1 - a) * -math.log1p(-float(epsilon)) + math.log(abs(a) + 2)
    hi = precision.boosted(_boost_bits(growth))
    hctx = hi.ctx
    a, epsilon = hctx.convert(a), hctx.convert(epsilon)
    coefficient = hctx.mpf(1)
    total = hctx.mpf(0)
    bound = abs(1 - a)
    for n in range(1, hi.max_terms + 1):
        coefficient = coefficient * (n - a) * epsilon / n
        term = coefficient / n
        total += term
        if n > bound and abs(term) <= hi.tolerance * max(abs(total), hi.tolerance):
            return -hctx.log(epsilon) - hctx.digamma(a) - hctx.euler - total
    raise ConvergenceError("incompleteBetaBZero (complemento)", hi.max_terms, term="incompleteBetaBZero")


def incomplete_beta_b_zero_quadrature(x, a, precision: Optional[PrecisionContext] = None):
    """
    B_x(a,0) con la sustitución logarítmica s = 1 − e^{−v}:
    ∫_0^{−log(1−x)} (1 − e^{−v})^{a−1} dv
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    x, a = ctx.convert(x), ctx.convert(a)
    upper = -ctx.log(1 - x)
    frequency = max(1.0, abs(float(ctx.im(a))))
    # fase Im(a)·log(1 − e^{−v}): oscila sobre todo cerca de v = 0
    lower = min(float(upper) / 2, 1e-3)
    points = [0.0] + geometric_points(lower, float(upper), math.exp(2 * math.pi / frequency))
    return quad(lambda v: (1 - ctx.exp(-v)) ** (a - 1), points, precision, term="incompleteBetaBZero")


def incomplete_beta_b_zero(x, a, precision: Optional[PrecisionContext] = None):
    """B_x(a,0) = ∫_0^x s^{a−1}(1−s)^{−1} ds, divergente en x = 1"""
    precision = precision or default_precision()
    ctx = precision.ctx
    x = _check_beta_x(ctx, x, "incompleteBetaBZero")
    a = ctx.convert(a)
    if x >= 1:
        raise DomainError(f"B_x(a,0) diverge para x ≥ 1, recibido {x}", term="incompleteBetaBZero")
    if x < 0:
        raise DomainError(f"B_x(a,0) requiere x ≥ 0, recibido {x}", term="incompleteBetaBZero")
    if ctx.re(a) <= 0:
        raise DomainError(f"B_x(a,0) requiere Re(a) > 0, recibido {a}", term="incompleteBetaBZero")
    if x == 0:
        return ctx.mpc(0)
    try:
        if 1 - x >= B_ZERO_COMPLEMENT_GAP:
            value = _b_zero_direct(x, a, precision)
        else:
            value = _b_zero_complement(x, a, precision)
    except ConvergenceError as exc:
        logger.warning(f"⚠️ {exc}; usando cuadratura")
        value = incomplete_beta_b_zero_quadrature(x, a, precision)
    return _finish(value, precision, "incompleteBetaBZero")


def gamma_complement_residual(a, z, precision: Optional[PrecisionContext] = None):
    """|Γ(a,z) + γ(a,z) − Γ(a)| / |Γ(a)|"""
    precision = precision or default_precision()
    ctx = precision.ctx
    full = ctx.gamma(ctx.convert(a))
    total = upper_incomplete_gamma(a, z, precision) + lower_incomplete_gamma(a, z, precision)
    return abs(total - full) / abs(full)


def gamma_recurrence_residual(a, z, precision: Optional[PrecisionContext] = None):
    """|Γ(a+1,z) − aΓ(a,z) − e^{−z}z^a| relativo a |Γ(a+1,z)| + |e^{−z}z^a|"""
    precision = precision or default_precision()
    ctx = precision.ctx
    a, z = ctx.convert(a), ctx.convert(z)
    boundary = ctx.exp(a * ctx.log(z) - z)
    upper_next = upper_incomplete_gamma(a + 1, z, precision)
    gap = upper_next - a * upper_incomplete_gamma(a, z, precision) - boundary
    return abs(gap) / (abs(upper_next) + abs(boundary))
