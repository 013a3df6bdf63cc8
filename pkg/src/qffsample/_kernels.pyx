# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Jacobi eigensolver and the Szegedy walk sweeps.

Contracts mirror ``qffsample._fallback``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, copysign

cnp.import_array()

NAME = "cython"


def jacobi_eigh(a, double tol=1e-13, int max_sweeps=100):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.eye(n)
    cdef double[:, ::1] m = A
    cdef double[:, ::1] v = V
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double apq, theta, t, c, s, x, y, off, scale
    if n < 2:
        return np.diag(A).copy(), V
    scale = 0.0
    for p in range(n):
        for q in range(n):
            scale += m[p, q] * m[p, q]
    scale = sqrt(scale)
    if scale < 1.0:
        scale = 1.0
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += m[p, q] * m[p, q]
        off = sqrt(2.0 * off)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    x = m[k, p]
                    y = m[k, q]
                    m[k, p] = c * x - s * y
                    m[k, q] = s * x + c * y
                for k in range(n):
                    x = m[p, k]
                    y = m[q, k]
                    m[p, k] = c * x - s * y
                    m[q, k] = s * x + c * y
                m[p, q] = 0.0
                m[q, p] = 0.0
                for k in range(n):
                    x = v[k, p]
                    y = v[k, q]
                    v[k, p] = c * x - s * y
                    v[k, q] = s * x + c * y
    return np.diag(A).copy(), V


cdef void _coin(double complex[:, :, ::1] z, const double[:, ::1] u,
                double complex[::1] dots) noexcept nogil:
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t nb = z.shape[2]
    cdef Py_ssize_t x, y, b
    cdef double w
    for x in range(n):
        for b in range(nb):
            dots[b] = 0.0
        for y in range(n):
            w = u[x, y]
            if w != 0.0:
                for b in range(nb):
                    dots[b] = dots[b] + w * z[x, y, b]
        for y in range(n):
            w = 2.0 * u[x, y]
            if w != 0.0:
                for b in range(nb):
                    z[x, y, b] = z[x, y, b] - w * dots[b]


cdef void _swap(double complex[:, :, ::1] z, double complex[:, :, ::1] tmp) noexcept nogil:
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t nb = z.shape[2]
    cdef Py_ssize_t x, y, b
    for x in range(n):
        for y in range(n):
            for b in range(nb):
                tmp[y, x, b] = z[x, y, b]
    for x in range(n):
        for y in range(n):
            for b in range(nb):
                z[x, y, b] = tmp[x, y, b]


cdef void _ref0(double complex[:, :, ::1] z) noexcept nogil:
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t nb = z.shape[2]
    cdef Py_ssize_t x, y, b
    for x in range(n):
        for y in range(1, n):
            for b in range(nb):
                z[x, y, b] = -z[x, y, b]


cdef void _walk(double complex[:, :, ::1] z, const double[:, ::1] u, Py_ssize_t count, bint adjoint,
                double complex[:, :, ::1] tmp, double complex[::1] dots) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(count):
        if not adjoint:
            _ref0(z)
            _coin(z, u, dots)
            _swap(z, tmp)
            _coin(z, u, dots)
        else:
            _coin(z, u, dots)
            _swap(z, tmp)
            _coin(z, u, dots)
            _ref0(z)


def walk_apply(a, u, Py_ssize_t count, bint adjoint=False):
    cdef double complex[:, :, ::1] z = a
    cdef const double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    tmp = np.empty_like(a)
    dots = np.empty(a.shape[2], dtype=np.complex128)
    cdef double complex[:, :, ::1] t = tmp
    cdef double complex[::1] d = dots
    with nogil:
        _walk(z, uu, count, adjoint, t, d)


def wctrl_apply(a, u, Py_ssize_t period, bint adjoint=False):
    cdef double complex[:, :, :, ::1] full = a
    cdef const double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = full.shape[0]
    cdef Py_ssize_t nt = full.shape[2]
    cdef Py_ssize_t nb = full.shape[3]
    buf_arr = np.empty((n, n, nb), dtype=np.complex128)
    tmp_arr = np.empty((n, n, nb), dtype=np.complex128)
    dots_arr = np.empty(nb, dtype=np.complex128)
    cdef double complex[:, :, ::1] buf = buf_arr
    cdef double complex[:, :, ::1] tmp = tmp_arr
    cdef double complex[::1] dots = dots_arr
    cdef Py_ssize_t l, power, x, y, b
    cdef bint nonzero
    with nogil:
        for l in range(nt):
            power = l % period
            if power == 0:
                continue
            nonzero = False
            for x in range(n):
                for y in range(n):
                    for b in range(nb):
                        buf[x, y, b] = full[x, y, l, b]
                        if buf[x, y, b] != 0:
                            nonzero = True
            if not nonzero:
                continue
            _walk(buf, uu, power, adjoint, tmp, dots)
            for x in range(n):
                for y in range(n):
                    for b in range(nb):
                        full[x, y, l, b] = buf[x, y, b]


def walk_horner(x, u, w, bint adjoint=False):
    cdef double complex[:, :, :, ::1] xs = np.ascontiguousarray(x, dtype=np.complex128)
    cdef const double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t p = xs.shape[0]
    cdef Py_ssize_t n = xs.shape[1]
    cdef Py_ssize_t nb = xs.shape[3]
    acc_arr = np.empty((n, n, nb), dtype=np.complex128)
    tmp_arr = np.empty((n, n, nb), dtype=np.complex128)
    dots_arr = np.empty(nb, dtype=np.complex128)
    cdef double complex[:, :, ::1] acc = acc_arr
    cdef double complex[:, :, ::1] tmp = tmp_arr
    cdef double complex[::1] dots = dots_arr
    cdef Py_ssize_t l, a, b, c
    cdef double wl
    with nogil:
        wl = ww[p - 1]
        for a in range(n):
            for b in range(n):
                for c in range(nb):
                    acc[a, b, c] = wl * xs[p - 1, a, b, c]
        for l in range(p - 2, -1, -1):
            _walk(acc, uu, 1, adjoint, tmp, dots)
            wl = ww[l]
            if wl != 0.0:
                for a in range(n):
                    for b in range(n):
                        for c in range(nb):
                            acc[a, b, c] = acc[a, b, c] + wl * xs[l, a, b, c]
    return acc_arr


def walk_powers(y, u, w, bint adjoint=False):
    cdef const double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cur_arr = np.array(y, dtype=np.complex128, order="C", copy=True)
    cdef double complex[:, :, ::1] cur = cur_arr
    cdef Py_ssize_t p = ww.shape[0]
    cdef Py_ssize_t n = cur.shape[0]
    cdef Py_ssize_t nb = cur.shape[2]
    out_arr = np.empty((p, n, n, nb), dtype=np.complex128)
    tmp_arr = np.empty((n, n, nb), dtype=np.complex128)
    dots_arr = np.empty(nb, dtype=np.complex128)
    cdef double complex[:, :, :, ::1] out = out_arr
    cdef double complex[:, :, ::1] tmp = tmp_arr
    cdef double complex[::1] dots = dots_arr
    cdef Py_ssize_t l, a, b, c
    cdef double wl
    with nogil:
        for l in range(p):
            if l > 0:
                _walk(cur, uu, 1, adjoint, tmp, dots)
            wl = ww[l]
            for a in range(n):
                for b in range(n):
                    for c in range(nb):
                        out[l, a, b, c] = wl * cur[a, b, c]
    return out_arr
