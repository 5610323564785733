"""
Funciones aritméticas: Λ, ψ, r_G y los lados izquierdos por fuerza bruta
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from app.core.errors import DomainError, PreconditionError
from app.core.precision import PrecisionContext

logger = logging.getLogger(__name__)

MAX_SIEVE_LIMIT = 10 ** 8


class LambdaSieve:
    """Criba de potencias de primos con Λ(n) para 1 ≤ n ≤ limit"""

    def __init__(self, limit: int):
        if limit < 1:
            raise DomainError(f"límite de criba no positivo: {limit}")
        if limit > MAX_SIEVE_LIMIT:
            raise DomainError(f"límite de criba {limit} fuera de escala (máx {MAX_SIEVE_LIMIT})")
        self.limit = int(limit)
        self.base = self._prime_power_bases(self.limit)
        self.values = np.zeros(self.limit + 1, dtype=np.float64)
        mask = self.base > 0
        self.values[mask] = np.log(self.base[mask].astype(np.float64))
        self._psi = np.cumsum(self.values)
        self._prime_powers = np.nonzero(mask)[0]

    @staticmethod
    def _prime_power_bases(limit: int) -> np.ndarray:
        """base[n] = p si n = p^k, 0 en otro caso"""
        is_prime = np.ones(limit + 1, dtype=bool)
        is_prime[:2] = False
        for i in range(2, math.isqrt(limit) + 1):
            if is_prime[i]:
                is_prime[i * i::i] = False
        primes = np.nonzero(is_prime)[0]

        base = np.zeros(limit + 1, dtype=np.int64)
        base[primes] = primes
        for p in primes[primes <= math.isqrt(limit)]:
            power = int(p) * int(p)
            while power <= limit:
                base[power] = p
                power *= int(p)
        return base

    @property
    def prime_powers(self) -> np.ndarray:
        return self._prime_powers

    def psi_table(self) -> np.ndarray:
        """ψ(n) acumulado para n = 0..limit"""
        return self._psi

    def log_value(self, n: int, precision: PrecisionContext):
        """Λ(n) a la precisión de trabajo"""
        ctx = precision.ctx
        p = int(self.base[n])
        return ctx.log(p) if p else ctx.mpf(0)


_sieve: Optional[LambdaSieve] = None


def get_sieve(limit: int) -> LambdaSieve:
    """Criba compartida; crece por potencias de dos"""
    global _sieve
    if _sieve is None or _sieve.limit < limit:
        size = 1 << max(10, int(limit - 1).bit_length())
        size = min(max(size, limit), MAX_SIEVE_LIMIT)
        logger.info(f"🔄 Construyendo criba de Λ hasta {size}")
        _sieve = LambdaSieve(size)
    return _sieve


def von_mangoldt(n: int) -> float:
    """Λ(n): log p si n = p^k, 0 en otro caso"""
    if n < 1:
        raise DomainError(f"Λ definida para n ≥ 1, recibido {n}")
    return float(get_sieve(n).values[n])


def chebyshev_psi(t: float) -> float:
    """ψ(t) = Σ_{n ≤ t} Λ(n), continua por la derecha"""
    if t < 0:
        raise DomainError(f"ψ definida para t ≥ 0, recibido {t}")
    if t < 2:
        return 0.0
    n = int(math.floor(t))
    return float(get_sieve(n).psi_table()[n])


def chebyshev_psi_exact(t: float, precision: PrecisionContext):
    """ψ(t) sumando log p a la precisión de trabajo"""
    ctx = precision.ctx
    if t < 2:
        return ctx.mpf(0)
    n = int(math.floor(t))
    sieve = get_sieve(n)
    powers = sieve.prime_powers[sieve.prime_powers <= n]
    return ctx.fsum(ctx.log(int(sieve.base[q])) for q in powers)


def nearest_prime_power_distance(t: float) -> float:
    """min_q |t − q| sobre potencias de primos q"""
    if t <= 2:
        raise DomainError(f"se requiere t > 2, recibido {t}")
    # Bertrand: hay un primo en (n, 2n]
    sieve = get_sieve(2 * int(math.ceil(t)) + 2)
    powers = sieve.prime_powers
    index = int(np.searchsorted(powers, t))
    candidates = [powers[i] for i in (index - 1, index) if 0 <= i < len(powers)]
    return float(min(abs(t - float(q)) for q in candidates))


class GoldbachCounts:
    """r_G(n) para n ≤ N por convolución de Λ consigo misma"""

    def __init__(self, limit: int):
        if limit < 1:
            raise DomainError(f"límite no positivo: {limit}")
        self.limit = int(limit)
        values = get_sieve(self.limit).values[: self.limit + 1]
        self.r = np.convolve(values, values)[: self.limit + 1]

    def __getitem__(self, n: int) -> float:
        return float(self.r[n])

    def cumulative(self) -> float:
        """Σ_{n ≤ N} r_G(n)"""
        return math.fsum(self.r[1:].tolist())


def goldbach_r(n: int) -> float:
    """r_G(n) iterando pares ordenados de potencias de primos"""
    if n < 1:
        raise DomainError(f"r_G definida para n ≥ 1, recibido {n}")
    sieve = get_sieve(n)
    powers = sieve.prime_powers[sieve.prime_powers < n]
    terms = [
        sieve.values[m1] * sieve.values[n - m1]
        for m1 in powers
        if sieve.base[n - m1] > 0
    ]
    return math.fsum(terms)


def _prime_power_pairs(limit: int) -> List[Tuple[int, int]]:
    sieve = get_sieve(limit)
    powers = [int(q) for q in sieve.prime_powers if q <= limit]
    return [(m1, m2) for m1 in powers for m2 in powers if m1 + m2 <= limit]


def cumulative_goldbach(N: int) -> float:
    """Σ_{m1+m2 ≤ N} Λ(m1)Λ(m2) por doble bucle"""
    sieve = get_sieve(N)
    return math.fsum(sieve.values[m1] * sieve.values[m2] for m1, m2 in _prime_power_pairs(N))


def cesaro_lhs(N: int) -> float:
    """Σ_{n ≤ N} r_G(n)(N − n) por doble bucle sobre potencias de primos"""
    if N <= 4:
        if N == 4:
            return 0.0
        raise PreconditionError(f"se requiere N > 4, recibido {N}")
    sieve = get_sieve(N)
    return math.fsum(
        sieve.values[m1] * sieve.values[m2] * (N - m1 - m2)
        for m1, m2 in _prime_power_pairs(N)
    )


def psi_convolution_oracle(u: float) -> float:
    """
    ∫_2^{u−2} ψ(t)ψ(u−t) dt integrando exactamente el producto de dos
    funciones escalonadas entre sus puntos de salto
    """
    if u <= 4:
        raise PreconditionError(f"se requiere u > 4, recibido {u}")
    top = int(math.floor(u))
    sieve = get_sieve(top)
    psi = sieve.psi_table()
    powers = [float(q) for q in sieve.prime_powers if 2 < q < u - 2]
    breakpoints = sorted({2.0, float(u) - 2.0, *powers, *(u - q for q in powers)})
    pieces = []
    for left, right in zip(breakpoints[:-1], breakpoints[1:]):
        if right <= left:
            continue
        middle = 0.5 * (left + right)
        pieces.append((right - left) * psi[int(math.floor(middle))] * psi[int(math.floor(u - middle))])
    return math.fsum(pieces)
