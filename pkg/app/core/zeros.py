"""
Tabla de ceros no triviales: carga, validación, fuentes y sumas sobre ceros
"""

import io
import logging
import math
import time
from abc import ABC, abstractmethod
from decimal import Decimal, InvalidOperation
from functools import lru_cache
from pathlib import Path
from typing import IO, Callable, Iterable, List, Optional, Tuple, Union

import httpx
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.arithmetic import nearest_prime_power_distance
from app.core.config import settings
from app.core.errors import (
    DomainError,
    EngineError,
    TruncationError,
    ZeroParseError,
    ZeroSourceError,
    ZeroValidationError,
)
from app.core.precision import PrecisionContext, default_precision
from app.core.summation import deterministic_sum

logger = logging.getLogger(__name__)

BUNDLED_ZEROS = Path(__file__).resolve().parent.parent / "data" / "zeta_zeros.txt"
FIRST_ORDINATE = 14.134725141734693
FIRST_ORDINATE_TOLERANCE = 1e-3


class ZeroTable(BaseModel):
    """Ordenadas γ₁ < γ₂ < … de ceros ρ = 1/2 ± iγ, guardadas como texto decimal"""

    model_config = ConfigDict(frozen=True)

    ordinates: Tuple[str, ...] = ()
    source: str = "memoria"

    @property
    def count(self) -> int:
        return len(self.ordinates)

    @classmethod
    def from_ordinates(cls, values: Iterable[Union[str, float, Decimal]], source: str = "memoria") -> "ZeroTable":
        ordinates = tuple(str(v) for v in values)
        validate_ordinates([Decimal(v) for v in ordinates])
        return cls(ordinates=ordinates, source=source)

    def check_count(self, K: int) -> int:
        if K < 0:
            raise TruncationError(f"K negativo: {K}")
        if K > self.count:
            raise TruncationError(f"K = {K} supera los {self.count} ceros de la tabla ({self.source})")
        return K

    def head(self, K: int) -> "ZeroTable":
        self.check_count(K)
        return ZeroTable(ordinates=self.ordinates[:K], source=f"{self.source}[:{K}]")

    def gammas(self, K: int, precision: Optional[PrecisionContext] = None) -> List:
        precision = precision or default_precision()
        self.check_count(K)
        return [precision.ctx.mpf(g) for g in self.ordinates[:K]]

    def rhos(self, K: int, precision: Optional[PrecisionContext] = None) -> List:
        """Ceros del semiplano superior 1/2 + iγ_j, j ≤ K"""
        precision = precision or default_precision()
        ctx = precision.ctx
        return [ctx.mpc(ctx.mpf(1) / 2, g) for g in self.gammas(K, precision)]

    def as_array(self, K: int) -> np.ndarray:
        self.check_count(K)
        return np.array([float(g) for g in self.ordinates[:K]], dtype=np.float64)


def validate_ordinates(values: List[Decimal]) -> None:
    """Positivas, estrictamente crecientes y con γ₁ ≈ 14.1347"""
    for index, value in enumerate(values):
        if value <= 0:
            raise ZeroValidationError(f"ordenada no positiva en la posición {index + 1}: {value}", pair=(index + 1, str(value)))
    for index, (left, right) in enumerate(zip(values[:-1], values[1:])):
        if right <= left:
            raise ZeroValidationError(
                f"ordenadas no crecientes en las posiciones {index + 1}-{index + 2}: {left} ≥ {right}",
                pair=(str(left), str(right)),
            )
    if values:
        if values[0] <= 14:
            raise ZeroValidationError(f"la primera ordenada debe ser > 14, recibido {values[0]}", pair=(None, str(values[0])))
        if abs(float(values[0]) - FIRST_ORDINATE) > FIRST_ORDINATE_TOLERANCE:
            raise ZeroValidationError(
                f"la primera ordenada {values[0]} no coincide con γ₁ ≈ {FIRST_ORDINATE:.4f}",
                pair=(None, str(values[0])),
            )


def load_zeros(source: Union[IO, Iterable], name: str = "flujo") -> ZeroTable:
    """Una ordenada decimal por línea, comentarios con '#'"""
    values: List[Decimal] = []
    texts: List[str] = []
    for line_number, raw in enumerate(source, start=1):
        line = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            value = Decimal(line)
        except InvalidOperation:
            raise ZeroParseError(line_number, line)
        if not value.is_finite():
            raise ZeroParseError(line_number, line)
        values.append(value)
        texts.append(line)
    validate_ordinates(values)
    logger.info(f"✅ Tabla de ceros cargada: {len(values)} ordenadas ({name})")
    return ZeroTable(ordinates=tuple(texts), source=name)


class ZeroSource(ABC):
    """Interfaz abstracta para el origen de la tabla de ceros"""

    @abstractmethod
    def load(self) -> ZeroTable:
        pass

    @abstractmethod
    def describe(self) -> str:
        pass


class BundledZeroSource(ZeroSource):
    """Tabla incluida en el paquete (2000 ordenadas)"""

    def load(self) -> ZeroTable:
        with open(BUNDLED_ZEROS, "rb") as handle:
            return load_zeros(handle, name=self.describe())

    def describe(self) -> str:
        return f"incluida:{BUNDLED_ZEROS.name}"


class FileZeroSource(ZeroSource):
    """Tabla en un fichero local"""

    def __init__(self, path: str):
        self.path = Path(path)

    def load(self) -> ZeroTable:
        try:
            with open(self.path, "rb") as handle:
                return load_zeros(handle, name=self.describe())
        except OSError as exc:
            raise ZeroSourceError(f"no se puede leer la tabla de ceros {self.path}: {exc}")

    def describe(self) -> str:
        return str(self.path)


class HttpZeroSource(ZeroSource):
    """Tabla descargada por http(s) con reintentos"""

    def __init__(self, url: str):
        self.url = url
        self.timeout = settings.ZEROS_URL_TIMEOUT
        self.max_retries = max(1, settings.ZEROS_URL_RETRY_ATTEMPTS)
        self.retry_delay = 2

    def load(self) -> ZeroTable:
        last_error = None
        for attempt in range(self.max_retries):
            try:
                with httpx.Client(timeout=httpx.Timeout(self.timeout), follow_redirects=True) as client:
                    logger.info(f"🔄 Descargando tabla de ceros {self.url} (intento {attempt + 1})")
                    response = client.get(self.url)
                    logger.info(f"✅ Respuesta: {response.status_code}")

                    if response.status_code == 503:
                        logger.info(f"⏳ Servidor no disponible, esperando {self.retry_delay}s...")
                        last_error = f"HTTP {response.status_code}"
                        time.sleep(self.retry_delay)
                        continue

                    if response.status_code >= 400:
                        raise ZeroSourceError(f"HTTP {response.status_code} al descargar {self.url}")

                    return load_zeros(io.StringIO(response.text), name=self.describe())

            except httpx.TimeoutException as exc:
                logger.warning(f"⚠️ Timeout en intento {attempt + 1}: {exc}")
                last_error = str(exc)
            except httpx.RequestError as exc:
                logger.warning(f"⚠️ Error de red en intento {attempt + 1}: {exc}")
                last_error = str(exc)

            if attempt < self.max_retries - 1:
                time.sleep(self.retry_delay)

        raise ZeroSourceError(f"no se pudo descargar {self.url} tras {self.max_retries} intentos: {last_error}")

    def describe(self) -> str:
        return self.url


def zero_source_for(location: Optional[str] = None) -> ZeroSource:
    """--zeros, luego ZEROS_PATH, luego la tabla incluida"""
    location = location or settings.ZEROS_PATH
    if not location:
        return BundledZeroSource()
    if location.startswith(("http://", "https://")):
        return HttpZeroSource(location)
    return FileZeroSource(location)


@lru_cache(maxsize=8)
def _cached_table(location: Optional[str]) -> ZeroTable:
    return zero_source_for(location).load()


def get_zero_table(location: Optional[str] = None) -> ZeroTable:
    return _cached_table(location or settings.ZEROS_PATH)


class TruncationPolicy(BaseModel):
    """Cortes de una ejecución: K ceros, corte de Dirichlet M, tolerancias y precisión"""

    model_config = ConfigDict(frozen=True)

    zero_count: int = Field(default=100, ge=0)
    dirichlet_cutoff: Optional[int] = Field(default=None, gt=0)  # None = automático
    quad_tolerance: float = Field(default_factory=lambda: settings.QUAD_TOLERANCE, gt=0)
    tail_tolerance: float = Field(default_factory=lambda: settings.DIRICHLET_TAIL_TOLERANCE, gt=0)
    precision: PrecisionContext = Field(default_factory=PrecisionContext)
    pairwise_limit: int = Field(default_factory=lambda: settings.PAIRWISE_LIMIT, ge=0)
    closed_form_limit: int = Field(default_factory=lambda: settings.CLOSED_FORM_LIMIT, ge=0)

    def with_zero_count(self, K: int) -> "TruncationPolicy":
        return self.model_copy(update={"zero_count": K})

    def check_table(self, table: ZeroTable) -> int:
        return table.check_count(self.zero_count)


def zeta_log_derivative_at_zero(precision: Optional[PrecisionContext] = None):
    """ζ'/ζ(0) = log(2π)"""
    precision = precision or default_precision()
    ctx = precision.ctx
    return ctx.log(2 * ctx.pi)


def conjugate_pair_sum(
    summand: Callable,
    table: ZeroTable,
    K: int,
    precision: Optional[PrecisionContext] = None,
    term: str = "zeroSum",
    reality_tolerance: Optional[float] = 1e-20,
):
    """
    Σ_{j ≤ K} f(ρ_j) + f(ρ̄_j) evaluando ambos miembros de cada par,
    en orden creciente de γ. Con reality_tolerance la parte imaginaria
    debe cancelarse y se devuelve la parte real; con None, el complejo.
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    terms = []
    for rho in table.rhos(K, precision):
        terms.append(summand(rho))
        terms.append(summand(ctx.conj(rho)))
    total = deterministic_sum(terms, precision)
    if reality_tolerance is None:
        return total
    if abs(ctx.im(total)) > reality_tolerance * max(abs(ctx.re(total)), 1):
        raise EngineError(f"parte imaginaria residual {ctx.nstr(ctx.im(total), 5)}", term=term)
    return ctx.re(total)


def zero_power_sum(x, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    """Σ_{j ≤ K} (x^ρ/ρ + x^ρ̄/ρ̄) con ρ = 1/2 + iγ_j"""
    precision = precision or default_precision()
    ctx = precision.ctx
    x = ctx.convert(x)
    if x <= 1:
        raise DomainError(f"se requiere x > 1, recibido {x}", term="zeroPowerSum")
    log_x = ctx.log(x)
    return conjugate_pair_sum(lambda rho: ctx.exp(rho * log_x) / rho, table, K, precision, term="zeroPowerSum")


def truncated_psi(t, table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    """t − Σ_ρ t^ρ/ρ − log(2π) − ½ log(1 − t⁻²)"""
    precision = precision or default_precision()
    ctx = precision.ctx
    t = ctx.convert(t)
    if t <= 2:
        raise DomainError(f"se requiere t > 2, recibido {t}", term="truncatedPsi")
    if nearest_prime_power_distance(float(t)) == 0:
        logger.warning(f"⚠️ t = {ctx.nstr(t, 10)} es potencia de primo: la fórmula da el valor medio del salto")
    zero_sum = zero_power_sum(t, table, K, precision) if K else ctx.mpf(0)
    return t - zero_sum - zeta_log_derivative_at_zero(precision) - ctx.log(1 - 1 / t ** 2) / 2


def reciprocal_square_sum(table: ZeroTable, K: int, precision: Optional[PrecisionContext] = None):
    """Σ sobre los K primeros pares de 1/|ρ|²"""
    precision = precision or default_precision()
    ctx = precision.ctx
    quarter = ctx.mpf(1) / 4
    return ctx.fsum(2 / (quarter + g ** 2) for g in table.gammas(K, precision))


def explicit_formula_bound(t: float, T: float) -> float:
    """t·log²(tT)/T + log t · min(1, t/(T⟨t⟩))"""
    distance = nearest_prime_power_distance(t)
    local = 1.0 if distance == 0 else min(1.0, t / (T * distance))
    return t * math.log(t * T) ** 2 / T + math.log(t) * local
