"""Pure-Python kernels; same API and results as the compiled ``_kernels``."""

from __future__ import annotations

from math import gcd, isqrt

BACKEND = "python"


def _divisors_between(n: int, lo: int, spf) -> list[int]:
    """Divisors a of n with lo <= a and a*a <= n, using a smallest-prime-factor table."""
    divs = [1]
    m = n
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return [a for a in divs if a >= lo and a * a <= n]


def count_reduced_forms(d: int, spf) -> int:
    """Number of reduced primitive forms (a, b, c) of discriminant d < 0."""
    amax = isqrt(-d // 3)
    h = 0
    for b in range(d & 1, amax + 1, 2):
        n = (b * b - d) // 4
        for a in _divisors_between(n, max(b, 1), spf):
            c = n // a
            if gcd(gcd(a, b), c) != 1:
                continue
            h += 1 if (b == 0 or b == a or a == c) else 2
    return h


def class_numbers(ds, spf) -> list[int]:
    return [count_reduced_forms(int(d), spf) for d in ds]


def _fdiv(a: int, b: int) -> int:
    return a // b


def _cdiv(a: int, b: int) -> int:
    return -((-a) // b)


def ternary_theta(B, bound: int):
    """Representation counts of x^T B x / 2 for an integral ternary form.

    ``B`` is the bilinear Gram matrix (even diagonal, positive definite).
    Returns ``(r, r_star)``: lists of length ``bound + 1`` with the number of
    lattice vectors (resp. primitive vectors) of each value.
    """
    b00, b01, b02 = int(B[0][0]), int(B[0][1]), int(B[0][2])
    b11, b12, b22 = int(B[1][1]), int(B[1][2]), int(B[2][2])
    T = 2 * bound
    t11 = b00 * b11 - b01 * b01
    t12 = b00 * b12 - b01 * b02
    t22 = b00 * b22 - b02 * b02
    detB = (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02)
            + b02 * (b01 * b12 - b11 * b02))
    r = [0] * (bound + 1)
    rs = [0] * (bound + 1)
    r[0] = 1
    x2max = isqrt(t11 * T // detB)
    for x2 in range(0, x2max + 1):
        w = t11 * b00 * T - b00 * detB * x2 * x2
        if w < 0:
            continue
        y = isqrt(w)
        lo1 = _cdiv(-t12 * x2 - y, t11)
        hi1 = _fdiv(-t12 * x2 + y, t11)
        if x2 == 0:
            lo1 = max(lo1, 0)
        for x1 in range(lo1, hi1 + 1):
            s = b01 * x1 + b02 * x2
            g2 = t11 * x1 * x1 + 2 * t12 * x1 * x2 + t22 * x2 * x2
            v = b00 * T - g2
            if v < 0:
                continue
            z = isqrt(v)
            lo0 = _cdiv(-s - z, b00)
            hi0 = _fdiv(-s + z, b00)
            if x2 == 0 and x1 == 0:
                lo0 = max(lo0, 1)
            g12 = gcd(x1, x2)
            for x0 in range(lo0, hi0 + 1):
                u = b00 * x0 + s
                m = (u * u + g2) // (2 * b00)
                r[m] += 2
                if gcd(g12, x0) == 1:
                    rs[m] += 2
    return r, rs
