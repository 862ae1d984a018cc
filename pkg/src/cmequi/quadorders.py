"""Imaginary-quadratic discriminants, orders, unit counts and class numbers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from sympy import factorint, isprime

from . import kernels
from .errors import ConsistencyError, InputError


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(abs(n)).values())


def is_fundamental(D: int) -> bool:
    """Negative fundamental discriminant test."""
    if D >= 0:
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def is_discriminant(d: int) -> bool:
    return d < 0 and d % 4 in (0, 1)


@dataclass(frozen=True)
class QuadOrder:
    """The order of conductor ``c`` in the imaginary quadratic field of discriminant ``D``."""

    D: int
    c: int = 1

    def __post_init__(self):
        if not is_fundamental(self.D):
            raise InputError(f"{self.D} is not a negative fundamental discriminant")
        if self.c < 1:
            raise InputError(f"conductor must be positive, got {self.c}")

    @property
    def disc(self) -> int:
        return self.D * self.c * self.c

    @property
    def units(self) -> int:
        return unit_count(self.D, self.c)

    @property
    def class_number(self) -> int:
        return class_number_formula(self.D, self.c)


def kronecker(D: int, p: int) -> int:
    """Kronecker symbol (D/p) for a prime p."""
    if not isprime(p):
        raise InputError(f"{p} is not prime")
    if D % p == 0:
        return 0
    if p == 2:
        return 1 if D % 8 in (1, 7) else -1
    return 1 if pow(D % p, (p - 1) // 2, p) == 1 else -1


def factor_discriminant(d: int) -> tuple[int, int]:
    """Split a discriminant d < 0 as D * c^2 with D fundamental."""
    if not is_discriminant(d):
        raise InputError(f"{d} is not a negative discriminant (need d < 0, d = 0 or 1 mod 4)")
    f = 1
    for p, e in factorint(-d).items():
        f *= p ** (e // 2)
    best = 1
    for c in range(f, 0, -1):
        if f % c == 0 and d % (c * c) == 0 and (d // (c * c)) % 4 in (0, 1):
            best = c
            break
    D = d // (best * best)
    if not is_fundamental(D):
        raise ConsistencyError(f"factor_discriminant({d}) produced non-fundamental {D}")
    return D, best


@lru_cache(maxsize=None)
def class_number_bruteforce(d: int) -> int:
    """h(d) by counting reduced primitive forms with |b| <= a <= c."""
    if not is_discriminant(d):
        raise InputError(f"{d} is not a negative discriminant")
    return kernels.count_reduced_forms(d)


def class_numbers_bruteforce(ds) -> list[int]:
    """Batched :func:`class_number_bruteforce`; one kernel call for the whole list."""
    for d in ds:
        if not is_discriminant(d):
            raise InputError(f"{d} is not a negative discriminant")
    return kernels.class_numbers(ds)


def unit_count(D: int, c: int = 1) -> int:
    if c < 1:
        raise InputError(f"conductor must be positive, got {c}")
    if c == 1 and D == -3:
        return 6
    if c == 1 and D == -4:
        return 4
    return 2


def class_number_formula(D: int, c: int, h_K: int | None = None) -> int:
    """h(O_c) = h(O_K) c / [O_K^x : O_c^x] * prod_{p | c} (1 - (D/p)/p)."""
    if not is_fundamental(D):
        raise InputError(f"{D} is not a negative fundamental discriminant")
    if c < 1:
        raise InputError(f"conductor must be positive, got {c}")
    if h_K is None:
        h_K = class_number_bruteforce(D)
    value = Fraction(h_K * c, unit_count(D, 1) // unit_count(D, c))
    for p in factorint(c):
        value *= 1 - Fraction(kronecker(D, p), p)
    if value.denominator != 1:
        raise ConsistencyError(f"class number formula not integral for D={D}, c={c}: {value}")
    return int(value)


def fundamental_discriminants(min_abs: int, max_abs: int) -> list[int]:
    """Negative fundamental discriminants D with min_abs <= |D| <= max_abs, by decreasing D."""
    return [-n for n in range(max(min_abs, 3), max_abs + 1) if is_fundamental(-n)]


def class_number(d: int) -> int:
    """h(d) for any discriminant, via the conductor formula."""
    D, c = factor_discriminant(d)
    return class_number_formula(D, c)
