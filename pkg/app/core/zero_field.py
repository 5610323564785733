"""
Campo vectorizado Z_K(t) = Σ_{j ≤ K} 2Re(t^ρ/ρ) y las integrales
de convolución que se apoyan en él (numpy/scipy, doble precisión)
"""

import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np
from scipy.special import loggamma

from app.core.config import settings
from app.core.quadrature import gauss_legendre_panels, log_phase_points, reflected_log_phase_points, uniform_points
from app.core.summation import fsum_array
from app.core.zeros import ZeroTable

logger = logging.getLogger(__name__)

# Medio periodo de la fase más rápida por panel de 16 nodos
PANEL_FRACTION = 0.5
PANEL_NODES = 16
# Extremo t = 0 con t = b·e^{−s}, s ∈ [0, S]
EXPONENTIAL_SPAN = 22.0


class ZeroSumField:
    """Z_K evaluado sobre arrays de nodos en bloques de FIELD_CHUNK"""

    def __init__(self, table: ZeroTable, K: int, chunk: Optional[int] = None):
        self.K = table.check_count(K)
        self.chunk = chunk or settings.FIELD_CHUNK
        self.gammas = table.as_array(K)
        inverse = 1.0 / (0.5 + 1j * self.gammas)
        self._inv_re = inverse.real
        self._inv_im = inverse.imag
        self.frequency = float(self.gammas[-1]) if K else 0.0

    def values(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        flat = t.ravel()
        out = np.zeros_like(flat)
        if self.K == 0:
            return out.reshape(t.shape)
        for start in range(0, flat.size, self.chunk):
            block = flat[start:start + self.chunk]
            phase = np.outer(np.log(block), self.gammas)
            # Re(e^{iθ}/ρ) = cos θ·Re(1/ρ) − sin θ·Im(1/ρ)
            series = np.cos(phase) @ self._inv_re - np.sin(phase) @ self._inv_im
            out[start:start + self.chunk] = 2.0 * np.sqrt(block) * series
        return out.reshape(t.shape)

    def _panel_points(self, a: float, b: float, u: Optional[float] = None, direct: bool = True) -> List[float]:
        points = set()
        if direct:
            points.update(log_phase_points(a, b, self.frequency, PANEL_FRACTION))
        if u is not None:
            points.update(reflected_log_phase_points(u, a, b, self.frequency, PANEL_FRACTION))
        return sorted(points)

    def integrate_product(self, u: float, a: float, b: float) -> float:
        """∫_a^b Z_K(t)·Z_K(u − t) dt"""
        if self.K == 0 or b <= a:
            return 0.0
        if a == 0:
            return self._integrate_from_zero(u, b)
        nodes, weights = gauss_legendre_panels(self._panel_points(a, b, u), PANEL_NODES)
        return fsum_array(weights * self.values(nodes) * self.values(u - nodes))

    def _integrate_from_zero(self, u: float, b: float) -> float:
        # t = b·e^{−s}: la fase γ·log t es lineal en s
        width = 2 * math.pi * PANEL_FRACTION / self.frequency
        s_nodes, s_weights = gauss_legendre_panels(uniform_points(0.0, EXPONENTIAL_SPAN, width), PANEL_NODES)
        t = b * np.exp(-s_nodes)
        return fsum_array(s_weights * t * self.values(t) * self.values(u - t))

    def integrate_reflected(self, u: float, a: float, b: float, kernels: Dict[str, Callable]) -> Dict[str, float]:
        """∫_a^b Z_K(u − t)·k(t) dt para cada núcleo k, con los mismos nodos"""
        if self.K == 0 or b <= a:
            return {name: 0.0 for name in kernels}
        nodes, weights = gauss_legendre_panels(self._panel_points(a, b, u, direct=False), PANEL_NODES)
        reflected = weights * self.values(u - nodes)
        return {name: fsum_array(reflected * kernel(nodes)) for name, kernel in kernels.items()}

    def gamma_double_sum(self, u: float) -> float:
        """
        Σ_{ρ1,ρ2} Γ(ρ1)Γ(ρ2)/Γ(ρ1+ρ2+2)·u^{ρ1+ρ2+1} sobre los 4K² pares
        completados por conjugación: filas en el semiplano superior, 2Re
        """
        if self.K == 0:
            return 0.0
        upper = 0.5 + 1j * self.gammas
        rhos = np.concatenate([upper, np.conj(upper)])
        log_gamma = loggamma(rhos)
        log_u = math.log(u)
        partials = []
        for start in range(0, self.K, self.chunk):
            rows = upper[start:start + self.chunk, None]
            total = rows + rhos[None, :]
            exponent = (
                (total + 1) * log_u
                + log_gamma[start:min(start + self.chunk, self.K), None]
                + log_gamma[None, :]
                - loggamma(total + 2)
            )
            partials.append(fsum_array(np.exp(exponent).real))
        return 2.0 * math.fsum(partials)

    def beta_double_sum(self, u: float) -> float:
        """Σ_{ρ1,ρ2} u^{ρ1+ρ2+1} B_{2/u}(ρ1+1, ρ2+1)/(ρ1ρ2) = ∫_0^2 Z_K(t)Z_K(u−t) dt"""
        return self.integrate_product(u, 0.0, 2.0)
