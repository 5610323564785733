"""
Jerarquía de errores del motor de verificación
"""

from typing import Optional


class EngineError(Exception):
    """Error base del motor"""

    def __init__(self, message: str, term: Optional[str] = None):
        super().__init__(message)
        self.term = term


class DomainError(EngineError, ValueError):
    """Argumento fuera del dominio de la operación"""


class PoleError(DomainError):
    """Polo de Γ en un entero no positivo"""


class PreconditionError(DomainError):
    """Precondición de la operación no satisfecha (p.ej. N > 4)"""


class ConvergenceError(EngineError):
    """Presupuesto de términos agotado en una serie o fracción continua"""

    def __init__(self, operation: str, terms: int, term: Optional[str] = None):
        super().__init__(f"{operation}: sin convergencia tras {terms} términos", term=term)
        self.operation = operation
        self.terms = terms


class NumericalOverflowError(EngineError, ArithmeticError):
    """Componente no finita en un resultado"""


class TruncationError(EngineError):
    """Corte insuficiente o K mayor que la tabla"""


class ZeroTableError(EngineError):
    """Error base de la tabla de ceros"""


class ZeroParseError(ZeroTableError):
    """Línea no numérica en la tabla de ceros"""

    def __init__(self, line_number: int, content: str):
        super().__init__(f"línea {line_number}: no es un número decimal: {content!r}")
        self.line_number = line_number
        self.content = content


class ZeroValidationError(ZeroTableError):
    """Ordenadas no crecientes, no positivas o primer cero inesperado"""

    def __init__(self, message: str, pair: Optional[tuple] = None):
        super().__init__(message)
        self.pair = pair


class ZeroSourceError(ZeroTableError):
    """Fallo de lectura o descarga de la tabla"""
