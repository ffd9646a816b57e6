"""Pure numpy implementation of the hot kernels.

Mirrors the compiled ``_core`` extension function for function. Selected by
``fracdyn._backend`` when the extension is unavailable or when
``FRACDYN_PURE_PYTHON=1`` is set.

Order-function kinds are encoded as integers: 0 constant ``(a,)``,
1 affine ``(a0, a1)``, 2 logistic ``(lo, hi, center, width)``. Parameters
always travel as a 4-tuple, unused slots ignored.
"""

import math

import numpy as np

from . import special
from .errors import DomainError, SingularityError

NAME = "python"

CONSTANT, AFFINE, LOGISTIC = 0, 1, 2

_LANCZOS = np.array(special.LANCZOS_COEFFS)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_MAX_FACTORIAL_ARG = 171
_DIGAMMA_ASYMPTOTIC = special._DIGAMMA_ASYMPTOTIC


def _check_positive(x, what):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0.0):
        raise DomainError(f"{what} requires finite positive arguments")
    return x


def _lanczos_sum(xm1):
    acc = np.full_like(xm1, _LANCZOS[0])
    for i in range(1, _LANCZOS.size):
        acc += _LANCZOS[i] / (xm1 + i)
    return acc


def _lift(x):
    """Shift arguments below 1/2 up by one; return ``(x, small_mask)``.

    Positive arguments need at most one shift to reach ``x >= 1/2``.
    """
    small = x < 0.5
    return np.where(small, x + 1.0, x), small


def gamma_array(x):
    x = _check_positive(x, "gamma")
    y, small = _lift(x)
    xm1 = y - 1.0
    t = xm1 + special.LANCZOS_G + 0.5
    half = t ** ((xm1 + 0.5) / 2.0)
    with np.errstate(over="ignore"):
        out = _SQRT_2PI * half * (half * np.exp(-t)) * _lanczos_sum(xm1)
    out = np.where(small, out / x, out)
    exact = (x == np.floor(x)) & (x <= _MAX_FACTORIAL_ARG)
    if np.any(exact):
        out[exact] = [float(math.factorial(int(k) - 1)) for k in x[exact]]
    return out


def lgamma_array(x):
    x = _check_positive(x, "lgamma")
    y, small = _lift(x)
    xm1 = y - 1.0
    t = xm1 + special.LANCZOS_G + 0.5
    out = 0.5 * math.log(2.0 * math.pi) + (xm1 + 0.5) * np.log(t) - t + np.log(_lanczos_sum(xm1))
    out = np.where(small, out - np.log(x), out)
    return np.where((x == 1.0) | (x == 2.0), 0.0, out)


def digamma_array(x):
    x = _check_positive(x, "digamma").copy()
    acc = np.zeros_like(x)
    low = x < 6.0
    while np.any(low):
        acc[low] -= 1.0 / x[low]
        x[low] += 1.0
        low = x < 6.0
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    power = inv2.copy()
    for c in _DIGAMMA_ASYMPTOTIC:
        series += c * power
        power *= inv2
    return acc + np.log(x) - 0.5 / x - series


def alpha_eval(kind, params, z):
    """Return ``(value, derivative)`` of the order function at ``z``."""
    z = np.asarray(z, dtype=float)
    p0, p1, p2, p3 = params
    if kind == CONSTANT:
        return np.full_like(z, p0), np.zeros_like(z)
    if kind == AFFINE:
        return p0 + p1 * z, np.full_like(z, p1)
    if kind == LOGISTIC:
        e = np.exp(-(z - p2) / p3)
        sig = 1.0 / (1.0 + e)
        return p0 + (p1 - p0) * sig, (p1 - p0) * sig * (1.0 - sig) / p3
    raise ValueError(f"unknown order-function kind {kind}")


def _offsets(t, s, eps, clamp):
    d = np.asarray(s, dtype=float) - t
    bad = np.abs(d) < eps
    if np.any(bad):
        if not clamp:
            idx = int(np.flatnonzero(bad)[0])
            raise SingularityError(
                f"|s - t| < {eps:g} at s={float(np.ravel(s)[idx])!r}, t={t!r}",
                s=float(np.ravel(s)[idx]),
                index=idx,
            )
        d = np.where(bad, np.where(d > 0.0, eps, -eps), d)
    return d


def _alpha_checked(kind, params, d):
    a, da = alpha_eval(kind, params, d)
    bad = (a <= 0.0) | (a > 1.0) | ~np.isfinite(a)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise DomainError(f"order value {float(a.ravel()[idx])!r} outside (0, 1]")
    return a, da


def _gamma_of(kind, a):
    if kind == CONSTANT and a.size:
        return np.full_like(a, special.gamma(float(a.flat[0])))
    return gamma_array(a)


def kernel_weights(kind, params, rho, t, s, eps, clamp):
    d = _offsets(t, s, eps, clamp)
    a, _ = _alpha_checked(kind, params, d)
    return np.exp((a - 1.0) * np.log(np.abs(d)) - rho * d) / _gamma_of(kind, a)


def log_kernel(kind, params, rho, t, s, eps, clamp):
    d = _offsets(t, s, eps, clamp)
    a, _ = _alpha_checked(kind, params, d)
    lg = lgamma_array(a)
    return (a - 1.0) * np.log(np.abs(d)) - rho * d - lg


def h_values(kind, params, rho, t, s, eps, clamp, log_derivative):
    d = _offsets(t, s, eps, clamp)
    a, da = _alpha_checked(kind, params, d)
    if kind == CONSTANT:
        psi_term = np.zeros_like(a)
    else:
        psi_term = digamma_array(a) * da
    r = -rho if log_derivative else rho
    return ((da * np.log(np.abs(d)) + (a - 1.0) / d) + r) - psi_term


def fractional_sums(kind, params, rho, s, incr, eps, clamp):
    s = np.asarray(s, dtype=float)
    incr = np.asarray(incr, dtype=float)
    n_steps = incr.shape[0]
    out = np.zeros(n_steps + 1)
    for n in range(1, n_steps + 1):
        w = kernel_weights(kind, params, rho, s[n], s[:n], eps, clamp)
        out[n] = float(np.dot(w, incr[:n]))
    return out


def pendulum_euler(q0, p0, step, h, alpha1, alpha2, dW, dL, verbatim):
    """Euler scheme for the pendulum with cos potential.

    Returns ``(q, p, bad)``; ``bad`` is the first index holding a
    non-finite state, or -1.
    """
    n_steps = len(dW)
    q = np.empty(n_steps + 1)
    p = np.empty(n_steps + 1)
    q[0] = q0
    p[0] = p0
    qn, pn = float(q0), float(p0)
    sin, cos, isfinite = math.sin, math.cos, math.isfinite
    for n in range(n_steps):
        hn = float(h[n])
        corr = hn if verbatim else hn * pn
        q_next = qn + step * pn
        p_next = (
            pn
            + step * (sin(qn) - corr)
            + alpha1 * cos(qn) * float(dW[n])
            + alpha2 * qn * float(dL[n])
        )
        q[n + 1] = q_next
        p[n + 1] = p_next
        if not (isfinite(q_next) and isfinite(p_next)):
            return q, p, n + 1
        qn, pn = q_next, p_next
    return q, p, -1
