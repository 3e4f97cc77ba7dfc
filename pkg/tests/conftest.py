import numpy as np
import pytest

from hybridsr.domain import Request
from hybridsr.errors import YamlSymbols
from hybridsr.perf_models import default_profile


@pytest.fixture(autouse=True)
def cleanup_yaml_symbols():
    YamlSymbols._stores.clear()


@pytest.fixture
def profile():
    return default_profile()


@pytest.fixture
def request_1024():
    return Request("r1", 1024, 0.02)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
