"""
Comandos de verificación: configuración validada, ejecución de los motores
y construcción del sobre de informe
"""

import logging
import math
import time
from functools import wraps
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.api.reports import ReportEnvelope, encode_number, encode_tree
from app.core import closed_forms
from app.core.arithmetic import cesaro_lhs, psi_convolution_oracle
from app.core.config import settings
from app.core.errors import DomainError
from app.core.precision import PrecisionContext, parse_complex
from app.core.special import gamma_complement_residual, gamma_recurrence_residual
from app.core.theorem1 import (
    REALITY_TOLERANCE,
    TERM_NAMES,
    compensator_correction,
    error_term_regime_check,
    j_group_oracles,
    j_groups,
    theorem1_refinement,
    theorem1_rhs,
)
from app.core.theorem2 import f_of_n_sweep, cesaro_k1_cross_check, theorem2_refinement
from app.core.zeros import TruncationPolicy, ZeroTable, get_zero_table

logger = logging.getLogger(__name__)

COMMANDS = ("verify-t1", "verify-t2", "sweep-f", "regime-e", "validate-forms")

# Tolerancias de las comprobaciones de cada ejecución
REFINEMENT_FACTOR = 0.5
LADDER_SLACK = 1.5
ORACLE_TOLERANCE = 1e-8
LHS_TOLERANCE = 1e-10
IDENTITY_TOLERANCE = 1e-12

DEFAULT_GRIDS = {
    "n_grid": "50,100,500,1000,5000",
    "a_grid": "0.01",
    "y_grid": "0.001:100:log:11",
    "u_grid": "10,20,50",
}

# (a, z) de las identidades de Γ incompleta que acompañan a validate-forms
GAMMA_IDENTITY_POINTS = [
    ("0.5+14.134725141734693i", "0.2"),
    ("0.5-21.022039638771555i", "2+1i"),
    ("2.5", "0.75"),
    ("0.5+50i", "0.05-0.3i"),
]


def parse_grid(text: str) -> List[float]:
    """
    "a:b:log[:n]" (n puntos en escala logarítmica, 5 por defecto),
    "a:b:lin[:n]" o lista separada por comas
    """
    text = text.strip()
    if ":" not in text:
        try:
            return [float(item) for item in text.split(",") if item.strip()]
        except ValueError:
            raise DomainError(f"malla no válida: {text!r}", term="grid")

    parts = text.split(":")
    if len(parts) not in (3, 4) or parts[2] not in ("log", "lin"):
        raise DomainError(f"malla no válida: {text!r}", term="grid")
    try:
        start, stop = float(parts[0]), float(parts[1])
        count = int(parts[3]) if len(parts) == 4 else 5
    except ValueError:
        raise DomainError(f"malla no válida: {text!r}", term="grid")
    if count < 1 or stop < start:
        raise DomainError(f"malla no válida: {text!r}", term="grid")
    if count == 1:
        return [start]
    if parts[2] == "log":
        if start <= 0:
            raise DomainError(f"malla logarítmica con extremo no positivo: {text!r}", term="grid")
        ratio = math.log(stop / start) / (count - 1)
        return [start * math.exp(ratio * i) for i in range(count - 1)] + [stop]
    step = (stop - start) / (count - 1)
    return [start + step * i for i in range(count - 1)] + [stop]


class RunConfig(BaseModel):
    """Configuración de una ejecución, tal como llega de la línea de comandos"""

    model_config = ConfigDict(frozen=True)

    command: Literal["verify-t1", "verify-t2", "sweep-f", "regime-e", "validate-forms"]
    z: Optional[str] = None
    n: Optional[int] = None
    zeros: Optional[str] = None
    max_zeros: Optional[int] = Field(default=None, ge=0)
    prime_cutoff: Optional[int] = Field(default=None, gt=0)
    precision: int = Field(default_factory=lambda: settings.PRECISION_BITS, ge=53)
    quad_tol: float = Field(default_factory=lambda: settings.QUAD_TOLERANCE, gt=0)
    ladder: Optional[List[int]] = None
    n_grid: Optional[str] = None
    a_grid: Optional[str] = None
    y_grid: Optional[str] = None
    u_grid: Optional[str] = None
    reference_n: int = 500
    include_truncated: bool = False
    out: Optional[str] = None
    format: Literal["json", "csv"] = "json"

    @model_validator(mode="after")
    def _check_command_arguments(self) -> "RunConfig":
        if self.command == "verify-t1" and not self.z:
            raise ValueError("verify-t1 requiere --z")
        if self.command == "verify-t2" and self.n is None:
            raise ValueError("verify-t2 requiere --n")
        if self.ladder is not None and (not self.ladder or min(self.ladder) < 0):
            raise ValueError("la escalera de K debe ser no vacía y con K ≥ 0")
        return self

    def precision_context(self) -> PrecisionContext:
        return PrecisionContext(bits=self.precision)

    def resolved_ladder(self) -> List[int]:
        """--ladder tal cual; si no, la escalera por defecto cortada en --max-zeros"""
        if self.ladder is not None:
            return sorted(set(self.ladder))
        ladder = list(settings.DEFAULT_LADDER)
        if self.max_zeros is not None:
            ladder = [K for K in ladder if K < self.max_zeros] + [self.max_zeros]
        return sorted(set(ladder))

    def zero_count(self, default: int) -> int:
        return self.max_zeros if self.max_zeros is not None else default

    def policy(self, zero_count: int) -> TruncationPolicy:
        return TruncationPolicy(
            zero_count=zero_count,
            dirichlet_cutoff=self.prime_cutoff,
            quad_tolerance=self.quad_tol,
            precision=self.precision_context(),
        )

    def grid(self, name: str) -> List[float]:
        return parse_grid(getattr(self, name) or DEFAULT_GRIDS[name])

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


def _ladder_checks(residuals: Sequence[Any]) -> Dict[str, bool]:
    """Residuo final ≤ ½ del primero y sin crecer más de 1.5× por peldaño"""
    if len(residuals) < 2:
        return {}
    return {
        "residual_refined": bool(residuals[-1] <= REFINEMENT_FACTOR * residuals[0]),
        "ladder_monotone": all(bool(b <= LADDER_SLACK * a) for a, b in zip(residuals[:-1], residuals[1:])),
    }


def _timed(command: Callable[["RunConfig", Optional[ZeroTable]], ReportEnvelope]):
    @wraps(command)
    def run(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
        started = time.perf_counter()
        envelope = command(config, table)
        envelope.wall_time = round(time.perf_counter() - started, 3)
        status = "✅" if envelope.passed else "⚠️"
        logger.info(f"{status} {config.command} terminado en {envelope.wall_time}s")
        return envelope

    return run


@_timed
def run_verify_t1(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
    """Teorema 1 en un z: desglose por términos y escalera de K"""
    precision = config.precision_context()
    ctx = precision.ctx
    table = table or get_zero_table(config.zeros)
    z = parse_complex(config.z, precision)
    ladder = config.resolved_ladder()
    policy = config.policy(ladder[-1])

    reports = theorem1_refinement(z, table, policy, ladder)
    final = reports[-1]
    checks = _ladder_checks([r.residual for r in reports])
    extra: Dict[str, Any] = {
        "zero_source": table.source,
        "prime_cutoff": final.cutoff,
        "tail_bound": encode_number(final.tail_bound, precision),
    }

    scale = max(abs(final.rhs_total), 1)
    if ctx.im(z) == 0:
        gap = final.reality_gap()
        checks["reality"] = bool(gap <= REALITY_TOLERANCE)
        extra["reality_gap"] = encode_number(gap, precision)
    else:
        # S̃(z̄) = conj S̃(z) con el mismo K y el mismo corte M
        mirrored = theorem1_rhs(ctx.conj(z), table, final.policy.model_copy(update={"dirichlet_cutoff": final.cutoff}))
        conjugation_gap = abs(mirrored.rhs_total - ctx.conj(final.rhs_total)) / scale
        checks["conjugation"] = bool(conjugation_gap <= REALITY_TOLERANCE)
        extra["conjugation"] = {
            "rhs": encode_number(mirrored.rhs_total, precision),
            "lhs": encode_number(mirrored.lhs_direct, precision),
            "gap": encode_number(conjugation_gap, precision),
        }

    oracles = j_group_oracles(z, precision)
    closed = j_groups(z, precision)
    oracle_gaps = {
        name: abs(closed[name] - value) / max(abs(value), 1) for name, value in oracles.items()
    }
    checks["ei_groups_match_quadrature"] = all(bool(gap <= ORACLE_TOLERANCE) for gap in oracle_gaps.values())
    extra["ei_group_oracles"] = encode_tree({"values": oracles, "gaps": oracle_gaps}, precision)

    return ReportEnvelope(
        command=config.command,
        config=config.echo(),
        terms={name: encode_number(final.terms[name], precision) for name in TERM_NAMES},
        lhs=encode_number(final.lhs_direct, precision),
        rhs=encode_number(final.rhs_total, precision),
        residual=encode_number(final.residual, precision),
        refinement=[{"K": r.zero_count, "residual": encode_number(r.residual, precision)} for r in reports],
        corrections=encode_tree([compensator_correction(final, table)], precision),
        checks=checks,
        extra=extra,
    )


@_timed
def run_verify_t2(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
    """Teorema 2 en N: s₁..s₁₀, doble oráculo del lado izquierdo y escalera de K"""
    precision = config.precision_context()
    ctx = precision.ctx
    table = table or get_zero_table(config.zeros)
    ladder = config.resolved_ladder()
    policy = config.policy(ladder[-1])
    N = config.n

    decompositions = theorem2_refinement(N, table, policy, ladder)
    final = decompositions[-1]
    lhs = cesaro_lhs(N)
    oracle = psi_convolution_oracle(N)

    checks = _ladder_checks([d.residual for d in decompositions])
    checks["lhs_oracles_agree"] = bool(abs(lhs - oracle) <= LHS_TOLERANCE * max(abs(lhs), 1))
    scale = max(abs(final.main_term), abs(final.rhs_total), 1)
    checks["grouping_identity"] = bool(final.grouping_gap <= 64 * precision.tolerance * scale)

    k1_check = cesaro_k1_cross_check(N, table, policy)
    statuses = closed_forms.closed_form_statuses([N], table, 1, precision)
    terms = {name: encode_number(value, precision) for name, value in final.s.items()}
    terms.update({name: encode_number(value, precision) for name, value in final.H.items()})
    terms.update({name: encode_number(value, precision) for name, value in final.V.items()})

    return ReportEnvelope(
        command=config.command,
        config=config.echo(),
        terms=terms,
        lhs=encode_number(ctx.mpf(lhs), precision),
        rhs=encode_number(final.rhs_total, precision),
        residual=encode_number(final.residual, precision),
        refinement=[{"K": d.zero_count, "residual": encode_number(d.residual, precision)} for d in decompositions],
        corrections=encode_tree([s for s in statuses if s.recorded], precision),
        checks=checks,
        extra={
            "zero_source": table.source,
            "psi_convolution_oracle": encode_number(ctx.mpf(oracle), precision),
            "main_term": encode_number(final.main_term, precision),
            "single_zero_sum": encode_number(final.single_zero_sum, precision),
            "double_gamma_sum": encode_number(final.double_gamma_sum, precision),
            "double_beta_sum": encode_number(final.double_beta_sum, precision),
            "f_of_n": encode_number(final.f_of_n, precision),
            "grouped_total": encode_number(final.grouped_total, precision),
            "grouping_gap": encode_number(final.grouping_gap, precision),
            "s2_pieces": encode_tree(final.s2_pieces, precision),
            "backends": final.backends,
            "cesaro_k1": encode_tree(k1_check, precision),
        },
    )


@_timed
def run_sweep_f(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
    """F(N)/N² sobre la malla --n-grid"""
    precision = config.precision_context()
    table = table or get_zero_table(config.zeros)
    grid = sorted({int(round(N)) for N in config.grid("n_grid")})
    policy = config.policy(config.zero_count(settings.DEFAULT_LADDER[-1]))

    report = f_of_n_sweep(grid, table, policy, reference_n=config.reference_n)
    checks = {"bounded": report.bounded, "cubic_decreasing": report.cubic_decreasing}
    checks.update({f"{name}_bounded": ok for name, ok in report.term_bounded.items()})
    return ReportEnvelope(
        command=config.command,
        config=config.echo(),
        terms={f"F/N^2@{p.N}": encode_number(p.ratio_n2, precision) for p in report.points},
        checks=checks,
        extra={
            "zero_source": table.source,
            "zero_count": policy.zero_count,
            "reference_n": report.reference_n,
            "max_ratio": encode_number(report.max_ratio, precision),
            "points": encode_tree(report.points, precision),
        },
    )


@_timed
def run_regime_e(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
    """|E(a,y)| frente a la cota de cada régimen"""
    precision = config.precision_context()
    policy = config.policy(config.zero_count(settings.DEFAULT_LADDER[0]))
    if config.include_truncated:
        table = table or get_zero_table(config.zeros)

    report = error_term_regime_check(
        config.grid("a_grid"), config.grid("y_grid"), table, policy, include_truncated=config.include_truncated,
    )
    checks = {"no_flagged_points": not report.flagged}
    if report.improvement_holds is not None:
        checks["large_y_improvement"] = report.improvement_holds
    return ReportEnvelope(
        command=config.command,
        config=config.echo(),
        terms={f"E({p.a:g},{p.y:g})": encode_number(p.error, precision) for p in report.points},
        checks=checks,
        extra=encode_tree(report.model_dump(exclude={"points"}), precision) | {
            "points": encode_tree(report.points, precision),
        },
    )


@_timed
def run_validate_forms(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
    """Formas cerradas frente a cuadratura, más las identidades de Γ incompleta"""
    precision = config.precision_context()
    table = table or get_zero_table(config.zeros)
    statuses = closed_forms.closed_form_statuses(config.grid("u_grid"), table, config.zero_count(1), precision)

    identities = []
    for a_text, z_text in GAMMA_IDENTITY_POINTS:
        a, z = parse_complex(a_text, precision), parse_complex(z_text, precision)
        identities.append({
            "a": a_text,
            "z": z_text,
            "complement": gamma_complement_residual(a, z, precision),
            "recurrence": gamma_recurrence_residual(a, z, precision),
        })

    def label(status) -> str:
        suffix = f"#{status.zero_index}" if status.zero_index is not None else ""
        return f"{status.term}@u={status.u:g}{suffix}"

    return ReportEnvelope(
        command=config.command,
        config=config.echo(),
        terms={label(s): s.engine_value for s in statuses},
        corrections=encode_tree([s for s in statuses if s.recorded], precision),
        checks={
            "forms_match_oracle": all(s.passed for s in statuses),
            "gamma_identities": all(
                bool(item["complement"] <= IDENTITY_TOLERANCE and item["recurrence"] <= IDENTITY_TOLERANCE)
                for item in identities
            ),
        },
        extra={
            "statuses": encode_tree(statuses, precision),
            "gamma_identities": encode_tree(identities, precision),
        },
    )


HANDLERS: Dict[str, Callable[[RunConfig, Optional[ZeroTable]], ReportEnvelope]] = {
    "verify-t1": run_verify_t1,
    "verify-t2": run_verify_t2,
    "sweep-f": run_sweep_f,
    "regime-e": run_regime_e,
    "validate-forms": run_validate_forms,
}


def run_sweeps(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
    """sweep-f o regime-e según config.command"""
    if config.command not in ("sweep-f", "regime-e"):
        raise DomainError(f"{config.command} no es un barrido", term="runSweeps")
    return HANDLERS[config.command](config, table)


def run_command(config: RunConfig, table: Optional[ZeroTable] = None) -> ReportEnvelope:
    logger.info(f"🚀 {config.command}: {config.echo()}")
    return HANDLERS[config.command](config, table)
