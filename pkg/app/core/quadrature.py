"""
Cuadratura adaptativa (mpmath) y paneles de Gauss–Legendre (numpy)
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.config import settings
from app.core.precision import PrecisionContext, default_precision

logger = logging.getLogger(__name__)

MAX_PANELS = 200000


def quad(
    f: Callable,
    points: Sequence,
    precision: Optional[PrecisionContext] = None,
    tolerance: Optional[float] = None,
    term: str = "quad",
):
    """
    Tanh-sinh de mpmath sobre los subintervalos dados por `points`.
    El estimado de error se registra si supera la tolerancia.
    """
    precision = precision or default_precision()
    ctx = precision.ctx
    tolerance = tolerance if tolerance is not None else settings.QUAD_TOLERANCE
    nodes = [ctx.convert(p) for p in points]
    value, error = ctx.quad(f, nodes, error=True, maxdegree=10)
    if error > tolerance * max(1, abs(value)):
        logger.warning(f"⚠️ {term}: error estimado {ctx.nstr(error, 3)} > {tolerance}")
    return value


def geometric_points(a: float, b: float, ratio: float, max_panels: int = MAX_PANELS) -> List[float]:
    """Puntos a = p_0 < … < p_n = b con p_{k+1}/p_k ≈ ratio (a > 0)"""
    if b <= a:
        return [a, b]
    panels = int(math.ceil(math.log(b / a) / math.log(ratio))) if ratio > 1 else 1
    panels = min(max(panels, 1), max_panels)
    return [a * (b / a) ** (k / panels) for k in range(panels)] + [b]


def uniform_points(a: float, b: float, width: float, max_panels: int = MAX_PANELS) -> List[float]:
    """Puntos equiespaciados con paso ≤ width"""
    if b <= a:
        return [a, b]
    panels = min(max(int(math.ceil((b - a) / width)), 1), max_panels)
    return [a + (b - a) * k / panels for k in range(panels)] + [b]


def log_phase_points(a: float, b: float, frequency: float, per_period: float = 1.0) -> List[float]:
    """
    Puntos para integrandos con fase frequency·log(t) en [a, b]:
    un panel por periodo (o fracción `per_period` de periodo).
    """
    frequency = abs(frequency)
    if frequency == 0:
        return [a, b]
    ratio = math.exp(2 * math.pi * per_period / frequency)
    return geometric_points(a, b, ratio)


def reflected_log_phase_points(u: float, a: float, b: float, frequency: float, per_period: float = 1.0) -> List[float]:
    """Puntos para fase frequency·log(u − t) en [a, b] (u > b)"""
    inner = log_phase_points(u - b, u - a, frequency, per_period)
    return sorted(u - p for p in inner)


_LEGENDRE_CACHE = {}


def legendre_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    if nodes not in _LEGENDRE_CACHE:
        _LEGENDRE_CACHE[nodes] = np.polynomial.legendre.leggauss(nodes)
    return _LEGENDRE_CACHE[nodes]


def gauss_legendre_panels(points: Sequence[float], nodes: int = 16) -> Tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos de Gauss–Legendre compuesta sobre los paneles dados"""
    x, w = legendre_rule(nodes)
    edges = np.asarray(points, dtype=np.float64)
    left, right = edges[:-1, None], edges[1:, None]
    half = 0.5 * (right - left)
    abscissae = (left + half * (x[None, :] + 1.0)).ravel()
    weights = (half * w[None, :]).ravel()
    return abscissae, weights
