"""The compiled core and the numpy fallback implement the same kernels."""

import numpy as np
import pytest

from fracdyn import _backend, _pycore
from fracdyn.errors import DomainError, SingularityError

try:
    from fracdyn import _core
except ImportError:  # pragma: no cover
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled core not built")

KINDS = [
    (0, (0.6, 0.0, 0.0, 1.0)),
    (1, (0.6, 0.05, 0.0, 1.0)),
    (2, (0.3, 0.95, -0.2, 0.5)),
]


def test_backend_selected():
    assert _backend.NAME in ("cython", "python")


def test_gamma_integers_exact(core_module):
    np.testing.assert_array_equal(core_module.gamma_array([1.0, 2.0, 5.0]), [1.0, 1.0, 24.0])


def test_domain(core_module):
    with pytest.raises(DomainError):
        core_module.gamma_array([0.5, -1.0])
    with pytest.raises(DomainError):
        core_module.kernel_weights(1, (0.6, 1.0, 0.0, 1.0), 0.0, 0.0, np.array([0.5]), 1e-8, False)


def test_singularity_index(core_module):
    with pytest.raises(SingularityError) as info:
        core_module.kernel_weights(0, KINDS[0][1], 0.0, 0.5, np.array([0.0, 0.25, 0.5]), 1e-8, False)
    assert info.value.index == 2


@needs_core
@pytest.mark.parametrize("kind, params", KINDS)
def test_kernels_agree(kind, params, rng):
    s = np.sort(rng.uniform(-1.0, 2.0, 500))
    s = s[np.abs(s - 0.8) > 1e-3]
    for fn in ("kernel_weights", "log_kernel"):
        a = getattr(_core, fn)(kind, params, 0.2, 0.8, s, 1e-8, False)
        b = getattr(_pycore, fn)(kind, params, 0.2, 0.8, s, 1e-8, False)
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)
    for logd in (False, True):
        a = _core.h_values(kind, params, 0.2, 0.8, s, 1e-8, False, logd)
        b = _pycore.h_values(kind, params, 0.2, 0.8, s, 1e-8, False, logd)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-13)


@needs_core
def test_special_agree(rng):
    x = rng.uniform(0.05, 40.0, 1000)
    np.testing.assert_allclose(_core.gamma_array(x), _pycore.gamma_array(x), rtol=1e-14)
    np.testing.assert_allclose(_core.digamma_array(x), _pycore.digamma_array(x), rtol=1e-14, atol=1e-15)


@needs_core
@pytest.mark.parametrize("kind, params", KINDS)
def test_fractional_sums_agree(kind, params, rng):
    s = np.linspace(0.0, 1.0, 121)
    incr = rng.normal(size=120) * 0.1
    a = _core.fractional_sums(kind, params, 0.1, s, incr, 1e-8, False)
    b = _pycore.fractional_sums(kind, params, 0.1, s, incr, 1e-8, False)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_core
@pytest.mark.parametrize("verbatim", [False, True])
def test_pendulum_agree(verbatim, rng):
    n = 2000
    h = rng.normal(size=n)
    dW = rng.normal(size=n) * 0.03
    dL = np.full(n, 0.02)
    a = _core.pendulum_euler(1.0, 0.0, 0.001, h, 0.1, 0.3, dW, dL, verbatim)
    b = _pycore.pendulum_euler(1.0, 0.0, 0.001, h, 0.1, 0.3, dW, dL, verbatim)
    assert a[2] == b[2] == -1
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-12)


def test_pendulum_reports_blowup(core_module):
    h = np.zeros(5)
    dW = np.array([0.0, np.inf, 0.0, 0.0, 0.0])
    q, p, bad = core_module.pendulum_euler(1.0, 0.0, 0.1, h, 0.1, 0.0, dW, np.zeros(5), False)
    assert bad == 2
