import pytest

from app.core.precision import PrecisionContext
from app.core.zeros import BundledZeroSource, TruncationPolicy


@pytest.fixture(scope="session")
def zero_table():
    """Tabla incluida, independiente de ZEROS_PATH"""
    return BundledZeroSource().load()


@pytest.fixture
def precision():
    return PrecisionContext(bits=128)


@pytest.fixture
def small_policy(precision):
    return TruncationPolicy(zero_count=10, precision=precision)
