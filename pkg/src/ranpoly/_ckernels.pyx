# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for sums of ``n_k log|e^{i psi} - e^{i theta_k}|^2``.

Both functions release the GIL so replicate-level threads run concurrently.
"""
import numpy as np

from libc.math cimport cos, sin, log, fabs, fmod

NAME = "cython"

cdef double _PI = 3.141592653589793
cdef double _FLUSH_LO = 1e-200
cdef double _FLUSH_HI = 1e200


def grid_log_modulus(double[::1] psi, double[::1] theta, double[::1] mults):
    """Log squared modulus at many points using chord lengths.

    Chord lengths come from cos/sin differences (cheap, absolute accuracy
    ~1e-16). Unit multiplicities accumulate a running product that is
    flushed through ``log`` before it can under- or overflow.
    """
    cdef Py_ssize_t n_psi = psi.shape[0]
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t j, k
    cdef double cp, sp, dx, dy, d2, acc, prod
    cdef bint unit = bool(np.all(np.asarray(mults) == 1.0))
    ct_arr = np.cos(np.asarray(theta))
    st_arr = np.sin(np.asarray(theta))
    cdef double[::1] ct = ct_arr
    cdef double[::1] st = st_arr
    out_arr = np.empty(n_psi, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for j in range(n_psi):
            cp = cos(psi[j])
            sp = sin(psi[j])
            acc = 0.0
            if unit:
                prod = 1.0
                for k in range(n):
                    dx = cp - ct[k]
                    dy = sp - st[k]
                    prod = prod * (dx * dx + dy * dy)
                    if prod < _FLUSH_LO or prod > _FLUSH_HI:
                        acc = acc + log(prod)
                        prod = 1.0
                acc = acc + log(prod)
            else:
                for k in range(n):
                    dx = cp - ct[k]
                    dy = sp - st[k]
                    acc = acc + mults[k] * log(dx * dx + dy * dy)
            out[j] = acc
    return out_arr


def point_log_modulus(double[::1] psi, double[::1] theta, double[::1] mults):
    """Log squared modulus at a few points via ``2 log|2 sin(d/2)|`` (accurate near roots).

    ``d`` is reduced exactly against the float period, matching the numpy
    kernel; unit multiplicities use the flushed running product.
    """
    cdef Py_ssize_t n_psi = psi.shape[0]
    cdef Py_ssize_t n = theta.shape[0]
    cdef Py_ssize_t j, k
    cdef double acc, p, d, r, prod
    cdef double two_pi = 2.0 * _PI
    cdef bint unit = bool(np.all(np.asarray(mults) == 1.0))
    out_arr = np.empty(n_psi, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for j in range(n_psi):
            p = psi[j]
            acc = 0.0
            prod = 1.0
            for k in range(n):
                d = p - theta[k]
                if d > 3.0 * _PI or d < -3.0 * _PI:
                    d = fmod(d, two_pi)
                if d > _PI:
                    d = d - two_pi
                elif d < -_PI:
                    d = d + two_pi
                r = fabs(2.0 * sin(0.5 * d))
                if unit:
                    prod = prod * r
                    if prod < _FLUSH_LO or prod > _FLUSH_HI:
                        acc = acc + log(prod)
                        prod = 1.0
                else:
                    acc = acc + mults[k] * log(r)
            out[j] = 2.0 * (acc + log(prod))
    return out_arr
