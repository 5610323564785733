from pydantic_settings import BaseSettings
from typing import List, Optional
from functools import lru_cache

class Settings(BaseSettings):
    # Tabla de ceros
    ZEROS_PATH: Optional[str] = None  # ruta local o URL http(s); None = tabla incluida
    ZEROS_URL_TIMEOUT: int = 30
    ZEROS_URL_RETRY_ATTEMPTS: int = 3

    # Precisión
    PRECISION_BITS: int = 128
    SERIES_MAX_TERMS: int = 20000
    QUAD_TOLERANCE: float = 1e-12
    DIRICHLET_TAIL_TOLERANCE: float = 1e-30

    # Backends de sumas sobre ceros
    PAIRWISE_LIMIT: int = 40  # K máximo para la suma doble par a par con mpmath
    CLOSED_FORM_LIMIT: int = 200  # K máximo para H_m por cero con Beta incompleta
    FIELD_CHUNK: int = 256
    SUMMATION_CHUNK: int = 512

    # Verificación
    DEFAULT_LADDER: List[int] = [100, 500, 2000]
    REGIME_SLACK: float = 10.0

    # Sistema
    LOG_LEVEL: str = "INFO"
    REPORT_SCHEMA: int = 1

    class Config:
        env_file = ".env"
        case_sensitive = True

@lru_cache()
def get_settings() -> Settings:
    return Settings()

settings = get_settings()
