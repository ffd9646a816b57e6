# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pycore`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, fabs, sqrt, pow, sin, cos, floor, isfinite

from .errors import DomainError, SingularityError

cnp.import_array()

NAME = "cython"

DEF CONSTANT = 0
DEF AFFINE = 1
DEF LOGISTIC = 2

cdef double[9] LANCZOS = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
]
cdef double[7] DIGAMMA_ASYM = [
    1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
    1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
]
cdef double SQRT_2PI = 2.5066282746310002


cdef double c_gamma(double x) nogil:
    cdef double scale = 1.0, xm1, t, half, acc, fact
    cdef int i, k
    if x == floor(x) and x <= 171.0:
        fact = 1.0
        k = <int>x
        for i in range(2, k):
            fact *= i
        return fact
    while x < 0.5:
        scale /= x
        x += 1.0
    xm1 = x - 1.0
    t = xm1 + 7.5
    acc = LANCZOS[0]
    for i in range(1, 9):
        acc += LANCZOS[i] / (xm1 + i)
    half = pow(t, (xm1 + 0.5) / 2.0)
    return scale * SQRT_2PI * half * (half * exp(-t)) * acc


cdef double c_lgamma(double x) nogil:
    cdef double shift = 0.0, xm1, t, acc
    cdef int i
    if x == 1.0 or x == 2.0:
        return 0.0
    while x < 0.5:
        shift -= log(x)
        x += 1.0
    xm1 = x - 1.0
    t = xm1 + 7.5
    acc = LANCZOS[0]
    for i in range(1, 9):
        acc += LANCZOS[i] / (xm1 + i)
    return shift + 0.5 * log(2.0 * 3.141592653589793) + (xm1 + 0.5) * log(t) - t + log(acc)


cdef double c_digamma(double x) nogil:
    cdef double acc = 0.0, inv2, series = 0.0, power
    cdef int i
    while x < 6.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    power = inv2
    for i in range(7):
        series += DIGAMMA_ASYM[i] * power
        power *= inv2
    return acc + log(x) - 0.5 / x - series


cdef inline void c_alpha(int kind, double p0, double p1, double p2, double p3,
                         double z, double* a, double* da) noexcept nogil:
    cdef double e, sig
    if kind == CONSTANT:
        a[0] = p0
        da[0] = 0.0
    elif kind == AFFINE:
        a[0] = p0 + p1 * z
        da[0] = p1
    else:
        e = exp(-(z - p2) / p3)
        sig = 1.0 / (1.0 + e)
        a[0] = p0 + (p1 - p0) * sig
        da[0] = (p1 - p0) * sig * (1.0 - sig) / p3


def _check_positive(x):
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise DomainError("requires finite positive arguments")


def gamma_array(x):
    cdef cnp.ndarray[double, ndim=1] flat = np.ascontiguousarray(x, dtype=float).ravel()
    _check_positive(flat)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i
    for i in range(flat.shape[0]):
        out[i] = c_gamma(flat[i])
    return out.reshape(np.shape(x))


def digamma_array(x):
    cdef cnp.ndarray[double, ndim=1] flat = np.ascontiguousarray(x, dtype=float).ravel()
    _check_positive(flat)
    cdef cnp.ndarray[double, ndim=1] out = np.empty_like(flat)
    cdef Py_ssize_t i
    for i in range(flat.shape[0]):
        out[i] = c_digamma(flat[i])
    return out.reshape(np.shape(x))


def alpha_eval(int kind, params, z):
    if kind not in (CONSTANT, AFFINE, LOGISTIC):
        raise ValueError(f"unknown order-function kind {kind}")
    cdef cnp.ndarray[double, ndim=1] zz = np.ascontiguousarray(z, dtype=float).ravel()
    cdef cnp.ndarray[double, ndim=1] a = np.empty_like(zz)
    cdef cnp.ndarray[double, ndim=1] da = np.empty_like(zz)
    cdef double p0 = params[0], p1 = params[1], p2 = params[2], p3 = params[3]
    cdef Py_ssize_t i
    for i in range(zz.shape[0]):
        c_alpha(kind, p0, p1, p2, p3, zz[i], &a[i], &da[i])
    return a.reshape(np.shape(z)), da.reshape(np.shape(z))


cdef int _prepare(int kind, tuple params, double t, const double[::1] s, double eps,
                  bint clamp, double[::1] d, double[::1] a, double[::1] da) except -1:
    cdef double p0 = params[0], p1 = params[1], p2 = params[2], p3 = params[3]
    cdef Py_ssize_t i
    cdef double di
    for i in range(s.shape[0]):
        di = s[i] - t
        if fabs(di) < eps:
            if not clamp:
                raise SingularityError(
                    f"|s - t| < {eps:g} at s={s[i]!r}, t={t!r}", s=s[i], index=i)
            di = eps if di > 0.0 else -eps
        d[i] = di
        c_alpha(kind, p0, p1, p2, p3, di, &a[i], &da[i])
        if not (a[i] > 0.0 and a[i] <= 1.0):
            raise DomainError(f"order value {a[i]!r} outside (0, 1]")
    return 0


def _flat(s):
    return np.ascontiguousarray(s, dtype=float).ravel()


def kernel_weights(int kind, params, double rho, double t, s, double eps, bint clamp):
    cdef const double[::1] ss = _flat(s)
    cdef Py_ssize_t n = ss.shape[0], i
    d_arr = np.empty(n); a_arr = np.empty(n); da_arr = np.empty(n)
    cdef double[::1] d = d_arr, a = a_arr, da = da_arr
    _prepare(kind, tuple(params), t, ss, eps, clamp, d, a, da)
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double g0 = c_gamma(params[0]) if kind == CONSTANT else 0.0
    for i in range(n):
        o[i] = exp((a[i] - 1.0) * log(fabs(d[i])) - rho * d[i]) / (
            g0 if kind == CONSTANT else c_gamma(a[i]))
    return out.reshape(np.shape(s))


def log_kernel(int kind, params, double rho, double t, s, double eps, bint clamp):
    cdef const double[::1] ss = _flat(s)
    cdef Py_ssize_t n = ss.shape[0], i
    d_arr = np.empty(n); a_arr = np.empty(n); da_arr = np.empty(n)
    cdef double[::1] d = d_arr, a = a_arr, da = da_arr
    _prepare(kind, tuple(params), t, ss, eps, clamp, d, a, da)
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = (a[i] - 1.0) * log(fabs(d[i])) - rho * d[i] - c_lgamma(a[i])
    return out.reshape(np.shape(s))


def h_values(int kind, params, double rho, double t, s, double eps, bint clamp,
             bint log_derivative):
    cdef const double[::1] ss = _flat(s)
    cdef Py_ssize_t n = ss.shape[0], i
    d_arr = np.empty(n); a_arr = np.empty(n); da_arr = np.empty(n)
    cdef double[::1] d = d_arr, a = a_arr, da = da_arr
    _prepare(kind, tuple(params), t, ss, eps, clamp, d, a, da)
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double r = -rho if log_derivative else rho
    cdef double psi_term
    for i in range(n):
        psi_term = 0.0 if kind == CONSTANT else c_digamma(a[i]) * da[i]
        o[i] = ((da[i] * log(fabs(d[i])) + (a[i] - 1.0) / d[i]) + r) - psi_term
    return out.reshape(np.shape(s))


def fractional_sums(int kind, params, double rho, s, incr, double eps, bint clamp):
    cdef const double[::1] ss = _flat(s)
    cdef const double[::1] dx = _flat(incr)
    cdef Py_ssize_t n_steps = dx.shape[0], n, k
    cdef double p0 = params[0], p1 = params[1], p2 = params[2], p3 = params[3]
    cdef double g0 = c_gamma(p0) if kind == CONSTANT else 0.0
    cdef double acc, d, a, da, w
    out = np.zeros(n_steps + 1)
    cdef double[::1] o = out
    for n in range(1, n_steps + 1):
        acc = 0.0
        for k in range(n):
            d = ss[k] - ss[n]
            if fabs(d) < eps:
                if not clamp:
                    raise SingularityError(
                        f"|s - t| < {eps:g} at s={ss[k]!r}, t={ss[n]!r}", s=ss[k], index=k)
                d = eps if d > 0.0 else -eps
            c_alpha(kind, p0, p1, p2, p3, d, &a, &da)
            if not (a > 0.0 and a <= 1.0):
                raise DomainError(f"order value {a!r} outside (0, 1]")
            w = exp((a - 1.0) * log(fabs(d)) - rho * d) / (
                g0 if kind == CONSTANT else c_gamma(a))
            acc += w * dx[k]
        o[n] = acc
    return out


def pendulum_euler(double q0, double p0, double step, h, double alpha1,
                   double alpha2, dW, dL, bint verbatim):
    cdef const double[::1] hh = _flat(h)
    cdef const double[::1] w = _flat(dW)
    cdef const double[::1] l = _flat(dL)
    cdef Py_ssize_t n_steps = w.shape[0], n
    q_arr = np.empty(n_steps + 1)
    p_arr = np.empty(n_steps + 1)
    cdef double[::1] q = q_arr, p = p_arr
    cdef double qn = q0, pn = p0, q_next, p_next, corr
    q[0] = q0
    p[0] = p0
    for n in range(n_steps):
        corr = hh[n] if verbatim else hh[n] * pn
        q_next = qn + step * pn
        p_next = pn + step * (sin(qn) - corr) + alpha1 * cos(qn) * w[n] + alpha2 * qn * l[n]
        q[n + 1] = q_next
        p[n + 1] = p_next
        if not (isfinite(q_next) and isfinite(p_next)):
            return q_arr, p_arr, n + 1
        qn = q_next
        pn = p_next
    return q_arr, p_arr, -1
