"""
Contexto de precisión y utilidades para valores complejos de precisión arbitraria
"""

import math
import re
from functools import lru_cache
from typing import Any, Optional

import mpmath
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import settings
from app.core.errors import DomainError, NumericalOverflowError

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(rf"^(?P<re>[+-]?{_NUMBER})(?:(?P<sign>[+-])(?P<im>{_NUMBER})?[ij])?$")
_IMAGINARY_RE = re.compile(rf"^(?P<sign>[+-]?)(?P<im>{_NUMBER})?[ij]$")


@lru_cache(maxsize=None)
def _context(bits: int) -> mpmath.MPContext:
    ctx = mpmath.MPContext()
    ctx.prec = bits
    return ctx


class PrecisionContext(BaseModel):
    """Bits de mantisa, tolerancia de series y presupuesto de términos"""

    model_config = ConfigDict(frozen=True)

    bits: int = Field(default_factory=lambda: settings.PRECISION_BITS, ge=53)
    tolerance: float = Field(gt=0)
    max_terms: int = Field(default_factory=lambda: settings.SERIES_MAX_TERMS, gt=0)

    @model_validator(mode="before")
    @classmethod
    def _default_tolerance(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("tolerance") is None:
            bits = int(data.get("bits") or settings.PRECISION_BITS)
            data = {**data, "tolerance": 2.0 ** (8 - bits)}
        return data

    @model_validator(mode="after")
    def _check_tolerance(self) -> "PrecisionContext":
        if self.tolerance < 2.0 ** (1 - self.bits):
            raise ValueError(f"tolerancia {self.tolerance} < 2^(1-{self.bits})")
        return self

    @property
    def ctx(self) -> mpmath.MPContext:
        return _context(self.bits)

    @property
    def digits(self) -> int:
        return max(15, int(self.bits * math.log10(2)))

    def boosted(self, extra_bits: int) -> "PrecisionContext":
        """Mismo contexto con más bits de trabajo"""
        if extra_bits <= 0:
            return self
        return PrecisionContext(
            bits=self.bits + int(extra_bits),
            tolerance=self.tolerance,
            max_terms=self.max_terms,
        )


def default_precision() -> PrecisionContext:
    return PrecisionContext()


def parse_complex(text: str, precision: Optional[PrecisionContext] = None):
    """Convierte literales "a+bi", "a-bi", "a" o "bi" en un mpc"""
    precision = precision or default_precision()
    ctx = precision.ctx
    literal = text.strip().replace(" ", "")
    match = _COMPLEX_RE.match(literal)
    if match:
        real = ctx.mpf(match.group("re"))
        imag = ctx.mpf(0)
        if match.group("sign"):
            imag = ctx.mpf(match.group("im") or "1")
            if match.group("sign") == "-":
                imag = -imag
        return ctx.mpc(real, imag)
    match = _IMAGINARY_RE.match(literal)
    if match:
        imag = ctx.mpf(match.group("im") or "1")
        if match.group("sign") == "-":
            imag = -imag
        return ctx.mpc(0, imag)
    raise DomainError(f"literal complejo no válido: {text!r}")


def check_finite(value, precision: PrecisionContext, term: Optional[str] = None):
    """Rechaza resultados con componentes infinitas o NaN"""
    ctx = precision.ctx
    if ctx.isinf(value) or ctx.isnan(value):
        raise NumericalOverflowError(f"valor no finito en {term or 'resultado'}", term=term)
    return value


def imaginary_sign(z) -> int:
    """sgn(Im z) con sgn(0) = 0"""
    imag = mpmath.im(z)
    if imag > 0:
        return 1
    if imag < 0:
        return -1
    return 0
