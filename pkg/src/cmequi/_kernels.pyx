# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: reduced-form counting and ternary theta enumeration.

Mirrors ``_pykernels`` exactly. Callers guarantee that intermediate values
fit in 64 bits (see ``kernels.ternary_fits_int64``).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

BACKEND = "cython"

cdef inline long long isqrt_ll(long long v) nogil:
    cdef long long r
    if v <= 0:
        return 0
    r = <long long> sqrt(<double> v)
    while r * r > v:
        r -= 1
    while (r + 1) * (r + 1) <= v:
        r += 1
    return r

cdef inline long long gcd_ll(long long a, long long b) nogil:
    cdef long long t
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        t = a % b
        a = b
        b = t
    return a

cdef inline long long fdiv(long long a, long long b) nogil:
    # floor division, b > 0
    cdef long long q = a / b
    if (a % b != 0) and (a < 0):
        q -= 1
    return q

cdef inline long long cdiv(long long a, long long b) nogil:
    # ceiling division, b > 0
    return -fdiv(-a, b)


cdef long long _count_forms(long long d, const int[::1] spf) nogil:
    cdef long long amax = isqrt_ll((-d) / 3)
    cdef long long h = 0, b, n, m, p, a, c, lo, pk
    cdef long long divs[2048]
    cdef int nd, e, k, i, base
    b = d & 1
    while b <= amax:
        n = (b * b - d) / 4
        nd = 1
        divs[0] = 1
        m = n
        while m > 1:
            p = spf[m]
            e = 0
            while m % p == 0:
                m /= p
                e += 1
            base = nd
            pk = 1
            for k in range(e):
                pk *= p
                for i in range(base):
                    divs[nd] = divs[i] * pk
                    nd += 1
        lo = b if b > 1 else 1
        for i in range(nd):
            a = divs[i]
            if a < lo or a * a > n:
                continue
            c = n / a
            if gcd_ll(gcd_ll(a, b), c) != 1:
                continue
            if b == 0 or b == a or a == c:
                h += 1
            else:
                h += 2
        b += 2
    return h


def count_reduced_forms(long long d, const int[::1] spf):
    """Number of reduced primitive forms of discriminant d < 0."""
    return _count_forms(d, spf)


def class_numbers(ds, const int[::1] spf):
    cdef long long[::1] dv = np.ascontiguousarray(ds, dtype=np.int64)
    cdef Py_ssize_t i, n = dv.shape[0]
    out = np.zeros(n, dtype=np.int64)
    cdef long long[::1] ov = out
    with nogil:
        for i in range(n):
            ov[i] = _count_forms(dv[i], spf)
    return [int(x) for x in out]


def ternary_theta(B, long long bound):
    """Representation counts (all, primitive) of x^T B x / 2 up to ``bound``."""
    cdef long long b00 = B[0][0], b01 = B[0][1], b02 = B[0][2]
    cdef long long b11 = B[1][1], b12 = B[1][2], b22 = B[2][2]
    cdef long long T = 2 * bound
    cdef long long t11 = b00 * b11 - b01 * b01
    cdef long long t12 = b00 * b12 - b01 * b02
    cdef long long t22 = b00 * b22 - b02 * b02
    cdef long long detB = (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
                           + b02 * (b01 * b12 - b11 * b02))
    r_arr = np.zeros(bound + 1, dtype=np.int64)
    rs_arr = np.zeros(bound + 1, dtype=np.int64)
    cdef long long[::1] r = r_arr
    cdef long long[::1] rs = rs_arr
    cdef long long x0, x1, x2, x2max, w, y, lo1, hi1, lo0, hi0, s, g2, v, z, u, m, g12
    r[0] = 1
    with nogil:
        x2max = isqrt_ll(t11 * T / detB)
        for x2 in range(0, x2max + 1):
            w = t11 * b00 * T - b00 * detB * x2 * x2
            if w < 0:
                continue
            y = isqrt_ll(w)
            lo1 = cdiv(-t12 * x2 - y, t11)
            hi1 = fdiv(-t12 * x2 + y, t11)
            if x2 == 0 and lo1 < 0:
                lo1 = 0
            for x1 in range(lo1, hi1 + 1):
                s = b01 * x1 + b02 * x2
                g2 = t11 * x1 * x1 + 2 * t12 * x1 * x2 + t22 * x2 * x2
                v = b00 * T - g2
                if v < 0:
                    continue
                z = isqrt_ll(v)
                lo0 = cdiv(-s - z, b00)
                hi0 = fdiv(-s + z, b00)
                if x2 == 0 and x1 == 0 and lo0 < 1:
                    lo0 = 1
                g12 = gcd_ll(x1, x2)
                for x0 in range(lo0, hi0 + 1):
                    u = b00 * x0 + s
                    m = (u * u + g2) / (2 * b00)
                    r[m] += 2
                    if gcd_ll(g12, x0) == 1:
                        rs[m] += 2
    return [int(x) for x in r_arr], [int(x) for x in rs_arr]
