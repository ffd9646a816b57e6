import numpy as np
import pytest

from fracdyn import _pycore

try:
    from fracdyn import _core
except ImportError:  # pragma: no cover - extension not built
    _core = None

CORES = [_pycore] + ([_core] if _core is not None else [])


@pytest.fixture(params=CORES, ids=lambda m: m.NAME)
def core_module(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)
