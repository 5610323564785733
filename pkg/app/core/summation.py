"""
Sumación compensada y reducción determinista por bloques
"""

import math
from typing import Iterable, List, Optional

import numpy as np

from app.core.config import settings
from app.core.precision import PrecisionContext, default_precision


def _neumaier_step(total, compensation, term):
    t = total + term
    if abs(total) >= abs(term):
        compensation += (total - t) + term
    else:
        compensation += (term - t) + total
    return t, compensation


class CompensatedSum:
    """Acumulador de Neumaier para valores mpmath reales o complejos"""

    def __init__(self, precision: Optional[PrecisionContext] = None):
        self.precision = precision or default_precision()
        ctx = self.precision.ctx
        self._re = ctx.mpf(0)
        self._re_comp = ctx.mpf(0)
        self._im = ctx.mpf(0)
        self._im_comp = ctx.mpf(0)
        self.count = 0

    def add(self, term) -> "CompensatedSum":
        ctx = self.precision.ctx
        term = ctx.convert(term)
        self._re, self._re_comp = _neumaier_step(self._re, self._re_comp, ctx.re(term))
        self._im, self._im_comp = _neumaier_step(self._im, self._im_comp, ctx.im(term))
        self.count += 1
        return self

    def extend(self, terms: Iterable) -> "CompensatedSum":
        for term in terms:
            self.add(term)
        return self

    @property
    def value(self):
        ctx = self.precision.ctx
        return ctx.mpc(self._re + self._re_comp, self._im + self._im_comp)

    @property
    def real(self):
        return self._re + self._re_comp


def compensated_sum(terms: Iterable, precision: Optional[PrecisionContext] = None):
    return CompensatedSum(precision).extend(terms).value


def deterministic_sum(
    terms: List,
    precision: Optional[PrecisionContext] = None,
    chunk: Optional[int] = None,
):
    """
    Reducción en dos niveles con fronteras de bloque fijas.
    Cada bloque puede evaluarse por separado; el resultado no depende
    del orden de evaluación de los bloques.
    """
    precision = precision or default_precision()
    chunk = chunk or settings.SUMMATION_CHUNK
    partials = [
        compensated_sum(terms[start:start + chunk], precision)
        for start in range(0, len(terms), chunk)
    ]
    return compensated_sum(partials, precision)


def fsum_array(values: np.ndarray) -> complex:
    """Suma exactamente redondeada de un array real o complejo"""
    flat = np.ravel(values)
    if np.iscomplexobj(flat):
        return complex(math.fsum(flat.real.tolist()), math.fsum(flat.imag.tolist()))
    return math.fsum(flat.tolist())
