"""
Sobre de informe común a todos los comandos y su serialización JSON / CSV
"""

import csv
import io
import json
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field

from app.core.config import settings
from app.core.precision import PrecisionContext

logger = logging.getLogger(__name__)

Encoded = Union[str, Dict[str, str], None]


def encode_number(value: Any, precision: PrecisionContext) -> Encoded:
    """Reales como cadena decimal; complejos como {"re", "im"}"""
    if value is None or isinstance(value, str):
        return value
    ctx = precision.ctx
    digits = precision.digits
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    value = ctx.convert(value)
    if isinstance(value, ctx.mpc):
        return {"re": ctx.nstr(ctx.re(value), digits), "im": ctx.nstr(ctx.im(value), digits)}
    return ctx.nstr(value, digits)


def encode_tree(value: Any, precision: PrecisionContext) -> Any:
    """Codifica números dentro de dicts y listas anidadas"""
    if isinstance(value, bool):
        return value
    if isinstance(value, dict):
        return {str(key): encode_tree(item, precision) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_tree(item, precision) for item in value]
    if isinstance(value, BaseModel):
        return encode_tree(value.model_dump(), precision)
    return encode_number(value, precision)


class ReportEnvelope(BaseModel):
    schema_version: int = Field(default_factory=lambda: settings.REPORT_SCHEMA, serialization_alias="schema")
    command: str
    config: Dict[str, Any]
    terms: Dict[str, Encoded] = {}
    lhs: Encoded = None
    rhs: Encoded = None
    residual: Encoded = None
    refinement: List[Dict[str, Any]] = []
    corrections: List[Dict[str, Any]] = []
    checks: Dict[str, bool] = {}
    extra: Dict[str, Any] = {}
    wall_time: float = 0.0
    timestamp: str = Field(default_factory=lambda: datetime.now().isoformat())

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    @property
    def failed_checks(self) -> List[str]:
        return [name for name, ok in self.checks.items() if not ok]


def render_json(envelope: ReportEnvelope) -> str:
    return json.dumps(envelope.model_dump(by_alias=True), indent=2, ensure_ascii=False) + "\n"


def _parts(value: Encoded):
    if isinstance(value, dict):
        return value.get("re", ""), value.get("im", "0")
    return value if value is not None else "", "0"


def render_csv(envelope: ReportEnvelope) -> str:
    """Cabecera term,re,im y una fila por término (más lhs, rhs y residuo si existen)"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["term", "re", "im"])
    for name, value in envelope.terms.items():
        writer.writerow([name, *_parts(value)])
    for name in ("lhs", "rhs", "residual"):
        value = getattr(envelope, name)
        if value is not None:
            writer.writerow([name, *_parts(value)])
    return buffer.getvalue()


def write_report(envelope: ReportEnvelope, fmt: str = "json", out: Optional[str] = None, stream=None) -> str:
    """Escribe el informe en --out o en stdout y devuelve el texto"""
    text = render_csv(envelope) if fmt == "csv" else render_json(envelope)
    if out:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
        logger.info(f"💾 Informe guardado en {out}")
    elif stream is not None:
        stream.write(text)
    return text


def error_payload(message: str, term: Optional[str] = None) -> str:
    return json.dumps({"error": message, "term": term}, ensure_ascii=False) + "\n"
